use clap::Parser;

use antisym_fraclap::cli::{configure_threads, error_summary, run, Cli, Command, RunConfig};

fn main() {
    let cli = Cli::parse();
    let fallback = RunConfig::new(cli.command.map(|c| c.command()).unwrap_or(Command::Constants));
    let outcome = configure_threads().and_then(|()| cli.into_config());
    let (text, code) = match outcome {
        Ok(cfg) => run(&cfg),
        Err(e) => (error_summary(&fallback, &e), e.exit_code()),
    };
    println!("{text}");
    std::process::exit(code);
}
