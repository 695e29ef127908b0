//! Experiment runner: a serializable run configuration, flag parsing, and
//! the dispatch that turns a configuration into a JSON summary plus rows.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fields::{anorm, lsnorm, random_nonneg_antisym, FieldSpec, ScalarField};
use crate::fraclap::{
    antisym_fraclap, classical_fraclap, classical_fraclap_excision, halfspace_integral, FracLapValue, X_MIN,
};
use crate::harnack::{
    ball_grid, boundary_quotient_profile, comparability_battery, counterexample_run_with, default_grid_n,
    half_ball_grid, interior_harnack_check_grid, BatterySummary, Cutoffs, HarnackReport, BATTERY_BUMPS,
};
use crate::poisson::{
    barrier_phi3, mean_value_antisym_gradient, mean_value_classic, poisson_eval, poisson_eval_antisym, psi_radial,
    BallProblem, CacheSpec, PoissonSolution,
};
use crate::special::{c_ns, gamma_ns, halfspace_integral_closed, tilde_c_ns, tilde_c_ns_closed};
use crate::validate::{psi_sandwich_ratio, validate_all};
use crate::{Params, Point, QuadSpec};

/// Range of s accepted by the runner.
pub const CLI_S_RANGE: (f64, f64) = (0.05, 0.95);

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "ANTISYM_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Constants,
    Norms,
    Fraclap,
    Poisson,
    Meanvalue,
    Psi,
    Barrier,
    HarnackBoundary,
    HarnackInterior,
    HarnackBattery,
    Counterexample,
    ValidateAll,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Which definition `fraclap` evaluates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RouteChoice {
    /// Half-space definition for antisymmetric fields, classical otherwise.
    #[default]
    Auto,
    Classical,
    Excision,
    Antisymmetric,
}

/// Subcommand-specific inputs; each has a default when absent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<RouteChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Cutoffs>,
}

/// A complete, reproducible description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_params")]
    pub params: Params,
    #[serde(default)]
    pub quad: QuadSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    /// Rows go here when set; otherwise they are embedded in the summary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub options: Options,
}

fn default_params() -> Params {
    Params::new(1, 0.5).expect("valid default parameters")
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            params: default_params(),
            quad: QuadSpec::default(),
            field: None,
            seeds: None,
            output_path: None,
            format: Format::Csv,
            options: Options::default(),
        }
    }

    /// Parses a JSON configuration; any defect is a usage error.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.params.s();
        if !(CLI_S_RANGE.0..=CLI_S_RANGE.1).contains(&s) {
            return Err(Error::Usage(format!("s = {s} outside [{}, {}]", CLI_S_RANGE.0, CLI_S_RANGE.1)));
        }
        self.quad.validate().map_err(as_usage)?;
        if let Some(f) = &self.field {
            if let Some(d) = f.dim() {
                if d != self.params.n() {
                    return Err(Error::Usage(format!("field is {d}-dimensional but n = {}", self.params.n())));
                }
            }
        }
        let n = self.params.n();
        let o = &self.options;
        for v in o.point.iter().chain(o.center.iter()).chain(o.points.iter().flatten()) {
            if v.len() != n {
                return Err(Error::Usage(format!("point {v:?} does not have {n} coordinates")));
            }
        }
        if let Some(ks) = &o.ks {
            if ks.is_empty() || ks[0] == 0 || ks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Usage("ks must be positive and strictly increasing".into()));
            }
        }
        Ok(())
    }
}

fn as_usage(e: Error) -> Error {
    Error::Usage(e.to_string())
}

/// One cell of an output row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:?}"),
            Cell::Int(k) => k.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(format!("{x:?}")),
            Cell::Int(k) => json!(k),
            Cell::Empty => Value::Null,
        }
    }
}

/// Data rows with named columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    fn with_coords(n: usize, rest: &[&str]) -> Self {
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.extend(rest.iter().map(|h| h.to_string()));
        Table { header, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(",")).expect("string write");
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, Value> =
                    self.header.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => serde_json::to_string_pretty(&self.to_json()).expect("rows serialize") + "\n",
        }
    }
}

/// The result of a run before it is written anywhere.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub summary: Value,
    pub table: Option<Table>,
    /// False when an internal check failed.
    pub passed: bool,
}

/// Runs a validated configuration and returns its outcome.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let p = &cfg.params;
    let q = &cfg.quad;
    match cfg.command {
        Command::Constants => constants(p, q),
        Command::Norms => norms(&need_field(cfg)?, p, q),
        Command::Fraclap => fraclap(cfg),
        Command::Poisson => poisson(cfg),
        Command::Meanvalue => meanvalue(cfg),
        Command::Psi => psi(p, q),
        Command::Barrier => barrier(cfg),
        Command::HarnackBoundary | Command::HarnackInterior | Command::HarnackBattery => harnack(cfg),
        Command::Counterexample => counterexample(cfg),
        Command::ValidateAll => validate(p, q),
    }
}

/// Executes a run, writes the rows, and returns the summary text and exit code.
pub fn run(cfg: &RunConfig) -> (String, i32) {
    match execute(cfg) {
        Ok(outcome) => {
            let mut summary = json!({
                "command": cfg.command,
                "n": cfg.params.n(),
                "s": cfg.params.s(),
                "passed": outcome.passed,
                "summary": outcome.summary,
            });
            if let Some(table) = &outcome.table {
                match &cfg.output_path {
                    Some(path) => {
                        if let Err(e) = std::fs::write(path, table.render(cfg.format)) {
                            let err = Error::Usage(format!("cannot write {}: {e}", path.display()));
                            return (error_summary(cfg, &err), err.exit_code());
                        }
                        summary["output_path"] = json!(path);
                        summary["rows"] = json!(table.rows.len());
                    }
                    None => summary["rows"] = table.to_json(),
                }
            }
            let code = if outcome.passed { 0 } else { 1 };
            (serde_json::to_string_pretty(&summary).expect("summary serializes"), code)
        }
        Err(e) => (error_summary(cfg, &e), e.exit_code()),
    }
}

/// Summary emitted when a run is rejected.
pub fn error_summary(cfg: &RunConfig, e: &Error) -> String {
    let v = json!({
        "command": cfg.command,
        "passed": false,
        "error": e.to_string(),
        "exit_code": e.exit_code(),
    });
    serde_json::to_string_pretty(&v).expect("summary serializes")
}

fn need_field(cfg: &RunConfig) -> Result<FieldSpec> {
    cfg.field.clone().ok_or_else(|| Error::Usage(format!("{:?} needs a field", cfg.command)))
}

fn need_point(v: &Option<Vec<f64>>, what: &str) -> Result<Point> {
    match v {
        Some(c) => Point::new(c).map_err(as_usage),
        None => Err(Error::Usage(format!("{what} is required"))),
    }
}

fn estimate_json(r: &Result<crate::Estimate>) -> Value {
    match r {
        Ok(e) => json!({ "value": e.value, "error_bound": e.error }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn constants(p: &Params, q: &QuadSpec) -> Result<Outcome> {
    let tilde = tilde_c_ns(p);
    let tilde_closed = tilde_c_ns_closed(p);
    let closed = halfspace_integral_closed(p);
    let quad = halfspace_integral(p, q)?;
    let passed = (tilde - tilde_closed).abs() <= 1e-10 * tilde_closed.abs()
        && (quad.value - closed).abs() <= 1e-6 * closed.abs();
    let summary = json!({
        "c_ns": c_ns(p),
        "gamma_ns": gamma_ns(p),
        "tilde_c": tilde,
        "tilde_c_closed": tilde_closed,
        "halfspace_integral": closed,
        "halfspace_integral_quadrature": { "value": quad.value, "error_bound": quad.error },
    });
    Ok(Outcome { summary, table: None, passed })
}

fn norms(f: &FieldSpec, p: &Params, q: &QuadSpec) -> Result<Outcome> {
    let a = anorm(f, p, q);
    let l = lsnorm(f, p, q);
    // A divergent norm is an answer; any other failure is a rejection.
    let fine = |r: &Result<crate::Estimate>| matches!(r, Ok(_) | Err(Error::Divergent { .. }));
    let passed = fine(&a) && fine(&l);
    let summary = json!({ "anorm": estimate_json(&a), "lsnorm": estimate_json(&l) });
    Ok(Outcome { summary, table: None, passed })
}

fn fraclap(cfg: &RunConfig) -> Result<Outcome> {
    let (p, q) = (&cfg.params, &cfg.quad);
    let f = need_field(cfg)?;
    let x = need_point(&cfg.options.point, "point")?;
    let route = match cfg.options.route.unwrap_or_default() {
        RouteChoice::Auto if f.meta().antisymmetric && x.x1() >= X_MIN => RouteChoice::Antisymmetric,
        RouteChoice::Auto => RouteChoice::Classical,
        r => r,
    };
    let v: FracLapValue = match route {
        RouteChoice::Antisymmetric => antisym_fraclap(&f, &x, p, q)?,
        RouteChoice::Excision => classical_fraclap_excision(&f, &x, p, q)?,
        _ => classical_fraclap(&f, &x, p, q)?,
    };
    let summary = serde_json::to_value(v).expect("value serializes");
    Ok(Outcome { summary, table: None, passed: true })
}

fn ball_problem(cfg: &RunConfig, f: FieldSpec) -> Result<BallProblem> {
    let n = cfg.params.n();
    let radius = cfg.options.radius.unwrap_or(1.0);
    let center = match &cfg.options.center {
        Some(c) => Point::new(c).map_err(as_usage)?,
        None => Point::origin(n),
    };
    BallProblem::centered(f, center, radius, cfg.params)
}

fn uses_antisym_route(bp: &BallProblem) -> bool {
    bp.data.meta().antisymmetric && bp.center.x1() == 0.0
}

fn poisson(cfg: &RunConfig) -> Result<Outcome> {
    let q = &cfg.quad;
    let n = cfg.params.n();
    let bp = ball_problem(cfg, need_field(cfg)?)?;
    let antisym = uses_antisym_route(&bp);
    let points = match &cfg.options.points {
        Some(v) => v.iter().map(|c| Point::new(c).map_err(as_usage)).collect::<Result<Vec<_>>>()?,
        None => {
            let grid_n = cfg.options.grid_n.unwrap_or(8);
            let step = 0.5 * bp.radius / grid_n as f64;
            ball_grid(&bp.center, 0.5 * bp.radius, step, None)
        }
    };
    let mut table = Table::with_coords(n, &["value", "error_bound"]);
    for x in &points {
        let e = if antisym && x.x1() < 0.0 {
            let r = poisson_eval_antisym(&bp, &x.reflect(), q)?;
            crate::Estimate { value: -r.value, error: r.error }
        } else if antisym {
            poisson_eval_antisym(&bp, x, q)?
        } else {
            poisson_eval(&bp, x, q)?
        };
        table.rows.push(coords_then(x, &[e.value, e.error]));
    }
    let summary = json!({
        "route": if antisym { "antisymmetric" } else { "classical" },
        "radius": bp.radius,
        "center": bp.center.as_slice(),
        "points": points.len(),
        "max_error_bound": column_max(&table, n + 1),
    });
    Ok(Outcome { summary, table: Some(table), passed: true })
}

fn meanvalue(cfg: &RunConfig) -> Result<Outcome> {
    let (p, q) = (&cfg.params, &cfg.quad);
    let f = need_field(cfg)?;
    let radii = cfg.options.radii.clone().unwrap_or_else(|| vec![0.25, 0.5, 1.0]);
    if radii.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(Error::Usage("radii must lie in (0, 1]".into()));
    }
    let antisym = f.meta().antisymmetric;
    let mut table = Table::new(&["r", "value", "error_bound"]);
    let formula;
    if antisym {
        // The gradient formula needs an s-harmonic u in B_r: solve in B₁.
        formula = "antisym_gradient";
        let bp = BallProblem::new(f, 1.0, *p)?;
        let u = PoissonSolution::cached(bp, q, CacheSpec::default_for(p.n()))?;
        for &r in &radii {
            let e = mean_value_antisym_gradient(&u, r, p, q)?;
            table.rows.push(vec![Cell::Num(r), Cell::Num(e.value), Cell::Num(e.error)]);
        }
    } else {
        formula = "classic";
        for &r in &radii {
            let e = mean_value_classic(&f, r, p, q)?;
            table.rows.push(vec![Cell::Num(r), Cell::Num(e.value), Cell::Num(e.error)]);
        }
    }
    let values: Vec<f64> = table.rows.iter().map(|r| cell_f64(r[1])).collect();
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let summary = json!({ "formula": formula, "spread": hi - lo });
    Ok(Outcome { summary, table: Some(table), passed: true })
}

fn psi(p: &Params, q: &QuadSpec) -> Result<Outcome> {
    let mut table = Table::new(&["radius", "psi", "psi_times_weight"]);
    let n = p.nf();
    let mut radii = vec![0.0];
    radii.extend((0..=50).map(|k| 10f64.powf(-3.0 + 5.0 * k as f64 / 50.0)));
    for r in radii {
        let v = psi_radial(r, p, q)?;
        let w = (1.0 + r * r).powf(0.5 * (n + 2.0 * p.s()));
        table.rows.push(vec![Cell::Num(r), Cell::Num(v), Cell::Num(v * w)]);
    }
    let summary = json!({ "sandwich_ratio": psi_sandwich_ratio(p, q)? });
    Ok(Outcome { summary, table: Some(table), passed: true })
}

fn barrier(cfg: &RunConfig) -> Result<Outcome> {
    let (p, q) = (&cfg.params, &cfg.quad);
    let n = p.n();
    let points = match &cfg.options.points {
        Some(v) => v.iter().map(|c| Point::new(c).map_err(as_usage)).collect::<Result<Vec<_>>>()?,
        None => half_ball_grid(n, cfg.options.grid_n.unwrap_or(if n == 1 { 64 } else { 8 })),
    };
    let mut table = Table::with_coords(n, &["value", "error_bound", "quotient"]);
    for x in &points {
        let e = barrier_phi3(x, p, q)?;
        table.rows.push(coords_then(x, &[e.value, e.error, e.value / x.x1()]));
    }
    let quotients: Vec<f64> = table.rows.iter().map(|r| cell_f64(r[n + 2])).filter(|v| v.is_finite()).collect();
    let hi = quotients.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = quotients.iter().cloned().fold(f64::INFINITY, f64::min);
    let summary = json!({ "quotient_max": hi, "quotient_min": lo, "quotient_ratio": hi / lo });
    Ok(Outcome { summary, table: Some(table), passed: lo > 0.0 })
}

fn harnack_row(r: &HarnackReport) -> Vec<Cell> {
    vec![
        r.seed.map_or(Cell::Empty, Cell::Int),
        Cell::Num(r.sup_quotient),
        Cell::Num(r.inf_quotient),
        Cell::Num(r.ratio),
        Cell::Num(r.anorm_value),
        Cell::Num(r.c_lower),
        Cell::Num(r.c_upper),
    ]
}

fn harnack(cfg: &RunConfig) -> Result<Outcome> {
    let (p, q) = (&cfg.params, &cfg.quad);
    let grid_n = cfg.options.grid_n.unwrap_or_else(|| default_grid_n(p.n()));
    let rho = cfg.options.rho.unwrap_or(0.5);
    let mut table = Table::new(&["seed", "sup_q", "inf_q", "ratio", "anorm", "c_lower", "c_upper"]);
    let check = |g: &FieldSpec| match cfg.command {
        Command::HarnackInterior => interior_harnack_check_grid(g, rho, p, q, grid_n),
        _ => boundary_quotient_profile(g, p, q, grid_n),
    };
    let summary;
    let passed;
    if cfg.command == Command::HarnackBattery {
        let seeds = cfg.seeds.clone().unwrap_or_else(|| (0..50).collect());
        let b: BatterySummary = comparability_battery(&seeds, p, q, grid_n)?;
        for r in &b.reports {
            table.rows.push(harnack_row(r));
        }
        passed = b.all_finite_positive();
        summary = json!({ "band": b.band, "max_ratio": b.max_ratio, "grid_n": grid_n, "seeds": seeds.len() });
    } else {
        let mut reports = Vec::new();
        match (&cfg.field, &cfg.seeds) {
            (Some(g), _) => reports.push(check(g)?),
            (None, seeds) => {
                for &seed in seeds.as_deref().unwrap_or(&[0]) {
                    let g = random_nonneg_antisym(seed, BATTERY_BUMPS, p)?;
                    let mut r = check(&g)?;
                    r.seed = Some(seed);
                    reports.push(r);
                }
            }
        }
        for r in &reports {
            table.rows.push(harnack_row(r));
        }
        passed = reports.iter().all(|r| !r.degenerate && r.ratio.is_finite());
        let grid_spec = reports.first().map(|r| r.grid_spec.clone()).unwrap_or_default();
        summary = json!({ "grid": grid_spec, "reports": reports.len() });
    }
    Ok(Outcome { summary, table: Some(table), passed })
}

fn counterexample(cfg: &RunConfig) -> Result<Outcome> {
    let (p, q) = (&cfg.params, &cfg.quad);
    let ks = cfg.options.ks.clone().unwrap_or_else(|| vec![1, 2, 4, 8, 16, 32]);
    let grid_n = cfg.options.grid_n.unwrap_or(32);
    let cutoffs = cfg.options.cutoffs.unwrap_or_default();
    let run = counterexample_run_with(&cutoffs, &ks, p, q, grid_n)?;
    let mut table = Table::new(&["k", "m_bar", "sup", "inf", "ratio"]);
    for i in 0..run.ks.len() {
        table.rows.push(vec![
            Cell::Int(run.ks[i] as u64),
            Cell::Num(run.m_bar),
            Cell::Num(run.sups[i]),
            Cell::Num(run.infs[i]),
            Cell::Num(run.ratios[i]),
        ]);
    }
    let increasing = run.ratios.windows(2).all(|w| w[1] > w[0]);
    let bisection_ok = (run.m_bar - run.m_bar_bisection).abs() <= run.grid_quantum.max(1e-12);
    let summary = json!({
        "m_bar": run.m_bar,
        "m_bar_bisection": run.m_bar_bisection,
        "grid_quantum": run.grid_quantum,
        "argmin": run.argmin.as_slice(),
        "ratios_increasing": increasing,
        "growth": run.ratios.last().unwrap_or(&f64::NAN) / run.ratios.first().unwrap_or(&f64::NAN),
        "sample_min": run.sample_min,
        "sample_max": run.sample_max,
        "grid": run.grid_spec,
    });
    Ok(Outcome { summary, table: Some(table), passed: increasing && bisection_ok && run.sample_min >= 0.0 })
}

fn validate(p: &Params, q: &QuadSpec) -> Result<Outcome> {
    let results = validate_all(p, q);
    let mut table = Table::new(&["criterion", "passed", "measured", "seconds"]);
    for r in &results {
        table.rows.push(vec![
            Cell::Int(r.id as u64),
            Cell::Int(r.passed as u64),
            Cell::Num(r.measured),
            Cell::Num(r.seconds),
        ]);
    }
    let passed = results.iter().all(|r| r.passed);
    let lines: Vec<String> = results.iter().map(|r| r.line()).collect();
    let summary = json!({ "criteria": lines, "all_passed": passed });
    Ok(Outcome { summary, table: Some(table), passed })
}

fn coords_then(x: &Point, rest: &[f64]) -> Vec<Cell> {
    x.as_slice().iter().chain(rest).map(|&v| Cell::Num(v)).collect()
}

fn cell_f64(c: Cell) -> f64 {
    match c {
        Cell::Num(x) => x,
        Cell::Int(k) => k as f64,
        Cell::Empty => f64::NAN,
    }
}

fn column_max(t: &Table, col: usize) -> f64 {
    t.rows.iter().map(|r| cell_f64(r[col])).fold(0.0, f64::max)
}

/// Command-line interface; flags override values from `--config`.
#[derive(Debug, Parser)]
#[command(name = "antisym", version, about = "Antisymmetric fractional Laplacian experiments")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Option<CliCommand>,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub s: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_subdivision_depth: Option<u32>,
    #[arg(long, global = true)]
    pub truncation_radius: Option<f64>,
    #[arg(long, global = true)]
    pub pv_excision: Option<f64>,
    #[arg(long, global = true)]
    pub angular_points: Option<usize>,
    /// Field as JSON, or `@path` to read it from a file.
    #[arg(long, global = true)]
    pub field: Option<String>,
    /// Comma-separated seeds.
    #[arg(long, global = true, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Comma-separated coordinates.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub point: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub center: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub ks: Option<Vec<u32>>,
    #[arg(long, global = true, value_enum)]
    pub route: Option<RouteChoice>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CliCommand {
    /// Normalizing constants and the half-space integral.
    Constants,
    /// 𝒜ₛ and ℒₛ norms of a field.
    Norms,
    /// Fractional Laplacian of a field at a point.
    Fraclap,
    /// Poisson-kernel solution in a ball at grid or given points.
    Poisson,
    /// Mean-value formulas over several radii.
    Meanvalue,
    /// Radial profile of the gradient kernel ψ.
    Psi,
    /// The barrier φ₃ near the flat boundary.
    Barrier,
    /// Harnack quotients.
    Harnack {
        #[command(subcommand)]
        kind: HarnackKind,
    },
    /// Sequence violating the Harnack inequality without antisymmetry.
    Counterexample,
    /// Runs every acceptance criterion.
    ValidateAll,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum HarnackKind {
    Boundary,
    Interior,
    Battery,
}

impl CliCommand {
    pub fn command(self) -> Command {
        match self {
            CliCommand::Constants => Command::Constants,
            CliCommand::Norms => Command::Norms,
            CliCommand::Fraclap => Command::Fraclap,
            CliCommand::Poisson => Command::Poisson,
            CliCommand::Meanvalue => Command::Meanvalue,
            CliCommand::Psi => Command::Psi,
            CliCommand::Barrier => Command::Barrier,
            CliCommand::Harnack { kind: HarnackKind::Boundary } => Command::HarnackBoundary,
            CliCommand::Harnack { kind: HarnackKind::Interior } => Command::HarnackInterior,
            CliCommand::Harnack { kind: HarnackKind::Battery } => Command::HarnackBattery,
            CliCommand::Counterexample => Command::Counterexample,
            CliCommand::ValidateAll => Command::ValidateAll,
        }
    }
}

impl Cli {
    /// Builds the configuration: file first, then flags, then the subcommand.
    pub fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
                let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Usage(format!("config: {e}")))?;
                if let Some(c) = self.command {
                    RunConfig { command: c.command(), ..cfg }
                } else {
                    cfg
                }
            }
            None => match self.command {
                Some(c) => RunConfig::new(c.command()),
                None => return Err(Error::Usage("no subcommand and no --config".into())),
            },
        };
        self.flags.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Flags {
    fn apply(self, cfg: &mut RunConfig) -> Result<()> {
        if self.n.is_some() || self.s.is_some() {
            let n = self.n.unwrap_or(cfg.params.n());
            let s = self.s.unwrap_or(cfg.params.s());
            cfg.params = Params::new(n, s).map_err(as_usage)?;
        }
        let q = &mut cfg.quad;
        set(&mut q.rel_tol, self.rel_tol);
        set(&mut q.abs_tol, self.abs_tol);
        set(&mut q.max_subdivision_depth, self.max_subdivision_depth);
        set(&mut q.truncation_radius, self.truncation_radius);
        set(&mut q.pv_excision, self.pv_excision);
        set(&mut q.angular_points, self.angular_points);
        if let Some(text) = self.field {
            let json = match text.strip_prefix('@') {
                Some(path) => {
                    std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {path}: {e}")))?
                }
                None => text,
            };
            cfg.field = Some(serde_json::from_str(&json).map_err(|e| Error::Usage(format!("field: {e}")))?);
        }
        if self.seeds.is_some() {
            cfg.seeds = self.seeds;
        }
        if self.output.is_some() {
            cfg.output_path = self.output;
        }
        set(&mut cfg.format, self.format);
        let o = &mut cfg.options;
        replace(&mut o.point, self.point);
        replace(&mut o.center, self.center);
        replace(&mut o.radius, self.radius);
        replace(&mut o.radii, self.radii);
        replace(&mut o.rho, self.rho);
        replace(&mut o.grid_n, self.grid_n);
        replace(&mut o.ks, self.ks);
        replace(&mut o.route, self.route);
        Ok(())
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn replace<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

/// Sizes the global worker pool from [`THREADS_ENV`] when set.
pub fn configure_threads() -> Result<()> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let k: usize = v.trim().parse().map_err(|_| Error::Usage(format!("{THREADS_ENV}={v} is not a count")))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
                .map_err(|e| Error::Usage(format!("thread pool: {e}")))
        }
        Err(_) => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let mut cfg = RunConfig::new(Command::HarnackInterior);
        cfg.seeds = Some(vec![3, 4]);
        cfg.options.rho = Some(0.25);
        cfg.field = Some(FieldSpec::monomial_x1());
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_s_outside_cli_range() {
        let text = r#"{"command": "constants", "params": {"n": 1, "s": 0.99}}"#;
        assert!(matches!(RunConfig::from_json(text), Err(Error::Usage(_))));
        let bad = r#"{"command": "constants", "bogus": 1}"#;
        assert!(matches!(RunConfig::from_json(bad), Err(Error::Usage(_))));
    }

    #[test]
    fn csv_cells_round_trip() {
        let t = Table { header: vec!["a".into(), "b".into()], rows: vec![vec![Cell::Num(0.1), Cell::Int(7)]] };
        assert_eq!(t.to_csv(), "a,b\n0.1,7\n");
        let x = 1.0 / 3.0;
        assert_eq!(Cell::Num(x).csv().parse::<f64>().unwrap(), x);
    }

    #[test]
    fn constants_match_closed_forms() {
        let out = execute(&RunConfig::new(Command::Constants)).unwrap();
        assert!(out.passed);
        let pi = std::f64::consts::PI;
        for key in ["c_ns", "gamma_ns", "tilde_c"] {
            assert!((out.summary[key].as_f64().unwrap() - 1.0 / pi).abs() < 1e-12, "{key}");
        }
        assert!((out.summary["halfspace_integral"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}
