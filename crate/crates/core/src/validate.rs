//! The acceptance checks, each returning a report entry rather than an error.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{antisymmetrize, random_nonneg_antisym, FieldSpec};
use crate::fraclap::{antisym_fraclap, definition_gap, derivative_limit_pair, halfspace_integral, sandwich_violations};
use crate::harnack::{
    boundary_quotient_profile, comparability_battery, counterexample_run_with, interior_battery,
    interior_harnack_check_grid, BatterySummary, Cutoffs, BATTERY_BUMPS,
};
use crate::poisson::{
    barrier_phi3, gradient_via_psi, mean_value_antisym_gradient, poisson_eval_antisym, psi_radial, BallProblem,
    CacheSpec, PoissonSolution,
};
use crate::special::{c_ns, halfspace_integral_closed, tilde_c_ns};
use crate::{Params, Point, QuadSpec};

/// Outcome of one acceptance check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    /// The quantity compared against the threshold.
    pub measured: f64,
    pub threshold: String,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    /// One-line human summary.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: measured {:e} (threshold {}) in {:.1}s; {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.measured,
            self.threshold,
            self.seconds,
            self.detail
        )
    }
}

struct Outcome {
    passed: bool,
    measured: f64,
    detail: String,
}

fn run(id: u8, title: &str, threshold: &str, body: impl FnOnce() -> Result<Outcome>) -> CriterionResult {
    let t = Instant::now();
    let (passed, measured, detail) = match body() {
        Ok(o) => (o.passed, o.measured, o.detail),
        Err(e) => (false, f64::NAN, format!("error: {e}")),
    };
    CriterionResult {
        id,
        title: title.into(),
        passed,
        measured,
        threshold: threshold.into(),
        detail,
        seconds: t.elapsed().as_secs_f64(),
    }
}

const S_GRID: [f64; 3] = [0.25, 0.5, 0.75];

fn pt(c: &[f64]) -> Point {
    Point::new(c).expect("literal point")
}

fn rel_spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mid = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
    (hi - lo) / mid
}

/// Half-space integral against its closed form, and the constant identity.
pub fn criterion_1(q: &QuadSpec) -> CriterionResult {
    run(1, "constant identity", "1e-6 relative", || {
        let mut worst: f64 = 0.0;
        for n in 1..=3 {
            for s in S_GRID {
                let p = Params::new(n, s)?;
                let quad = halfspace_integral(&p, q)?.value;
                let closed = halfspace_integral_closed(&p);
                let identity = (c_ns(&p) * quad - tilde_c_ns(&p)).abs() / tilde_c_ns(&p);
                worst = worst.max((quad - closed).abs() / closed).max(identity);
            }
        }
        Ok(Outcome { passed: worst <= 1e-6, measured: worst, detail: "9 (n, s) pairs".into() })
    })
}

/// Smooth compactly supported antisymmetric test fields in dimension `n`.
pub fn smooth_battery(n: usize) -> Result<Vec<FieldSpec>> {
    let at = |a: f64, b: f64| if n == 1 { pt(&[a]) } else { pt(&[a, b]) };
    let p = Params::new(n, 0.5)?;
    Ok(vec![
        FieldSpec::antisym_gaussian_bump(at(1.5, 0.3), 0.5, 1.0)?,
        FieldSpec::antisym_gaussian_bump(at(0.8, -0.5), 0.3, 2.0)?,
        FieldSpec::cubic_odd_bump(0.7, 1.0)?,
        random_nonneg_antisym(11, BATTERY_BUMPS, &p)?,
        antisymmetrize(&FieldSpec::gaussian_bump(at(0.6, 1.0), 0.4, 1.5)?),
    ])
}

/// Ten points of ℝⁿ₊.
pub fn probe_points(n: usize) -> Vec<Point> {
    (0..10)
        .map(|k| {
            let x1 = 0.15 + 0.25 * k as f64;
            if n == 1 {
                pt(&[x1])
            } else {
                pt(&[x1, 0.6 * (1.3 * k as f64).sin()])
            }
        })
        .collect()
}

/// Classical and half-space definitions agree.
pub fn criterion_2(q: &QuadSpec) -> CriterionResult {
    run(2, "definition equivalence", "gap <= 1e-5", || {
        let mut worst: f64 = 0.0;
        for n in 1..=2 {
            let p = Params::new(n, 0.5)?;
            for f in smooth_battery(n)? {
                worst = worst.max(definition_gap(&f, &probe_points(n), &p, q)?.gap);
            }
        }
        Ok(Outcome { passed: worst <= 1e-5, measured: worst, detail: "5 fields x 10 points, n = 1, 2".into() })
    })
}

/// Kernel sandwich inequalities at random pairs.
pub fn criterion_3() -> CriterionResult {
    run(3, "kernel sandwich", "0 violations", || {
        let mut total = 0;
        for n in 1..=3 {
            for (i, s) in S_GRID.iter().enumerate() {
                let p = Params::new(n, *s)?;
                total += sandwich_violations(&p, 10_000, 1000 + 10 * n as u64 + i as u64);
            }
        }
        Ok(Outcome { passed: total == 0, measured: total as f64, detail: "10^4 pairs per (n, s)".into() })
    })
}

/// x₁ is s-harmonic in ℝⁿ₊.
pub fn criterion_4(q: &QuadSpec) -> CriterionResult {
    run(4, "s-harmonicity of x1", "2e-5", || {
        let u = FieldSpec::monomial_x1();
        let mut worst: f64 = 0.0;
        for n in 1..=2 {
            for s in S_GRID {
                let p = Params::new(n, s)?;
                let pts: Vec<Point> = (0..20)
                    .map(|k| {
                        let x1 = 0.2 + 1.8 * k as f64 / 19.0;
                        if n == 1 {
                            pt(&[x1])
                        } else {
                            pt(&[x1, (0.7 * k as f64).cos()])
                        }
                    })
                    .collect();
                let vals = pts.par_iter().map(|x| antisym_fraclap(&u, x, &p, q)).collect::<Result<Vec<_>>>()?;
                worst = vals.iter().fold(worst, |w, v| w.max(v.value.abs()));
            }
        }
        Ok(Outcome {
            passed: worst <= 2e-5,
            measured: worst,
            detail: "20 points, n = 1, 2, s in {0.25, 0.5, 0.75}".into(),
        })
    })
}

fn mean_value_data(p: &Params) -> Result<Vec<FieldSpec>> {
    let mut data = vec![FieldSpec::monomial_x1()];
    for seed in 1..=5 {
        data.push(random_nonneg_antisym(seed, BATTERY_BUMPS, p)?);
    }
    Ok(data)
}

/// The antisymmetric mean-value formula is independent of r.
pub fn criterion_5(p: &Params, q: &QuadSpec) -> CriterionResult {
    run(5, "mean-value formula", "spread <= 1e-2, |g=y1 - 1| <= 1e-3", || {
        let mut spread: f64 = 0.0;
        let mut monomial_err = f64::NAN;
        for (i, g) in mean_value_data(p)?.into_iter().enumerate() {
            let sol = PoissonSolution::cached(BallProblem::new(g, 1.0, *p)?, q, CacheSpec::default_for(p.n()))?;
            let vals = [0.25, 0.5, 1.0]
                .iter()
                .map(|&r| mean_value_antisym_gradient(&sol, r, p, q).map(|e| e.value))
                .collect::<Result<Vec<_>>>()?;
            spread = spread.max(rel_spread(&vals));
            if i == 0 {
                monomial_err = vals.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
            }
        }
        Ok(Outcome {
            passed: spread <= 1e-2 && monomial_err <= 1e-3,
            measured: spread,
            detail: format!("g = y1 deviation {monomial_err:e}; {} with r in {{0.25, 0.5, 1}}", p_label(p)),
        })
    })
}

fn p_label(p: &Params) -> String {
    format!("n = {}, s = {}", p.n(), p.s())
}

/// ψₛ(y)(1 + |y|^{n+2s+2}) over a log grid of |y| ∈ [0, 100].
pub fn psi_sandwich_ratio(p: &Params, q: &QuadSpec) -> Result<f64> {
    let k = p.kernel_exponent() + 2.0;
    let mut radii = vec![0.0];
    radii.extend((0..=100).map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / 100.0)));
    let vals = radii.iter().map(|&r| psi_radial(r, p, q).map(|v| v * (1.0 + r.powf(k)))).collect::<Result<Vec<_>>>()?;
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(hi / lo)
}

/// ∂₁u(0) via ψₛ against a central difference, and the ψₛ sandwich.
pub fn criterion_6(p: &Params, q: &QuadSpec) -> CriterionResult {
    run(6, "gradient via psi", "1e-2 relative, sandwich <= 50", || {
        let h = 1e-3;
        let mut worst: f64 = 0.0;
        for seed in 1..=5 {
            let g = random_nonneg_antisym(seed, BATTERY_BUMPS, p)?;
            let sol = PoissonSolution::cached(BallProblem::new(g, 1.0, *p)?, q, CacheSpec::default_for(p.n()))?;
            let plus = sol.direct(&Point::on_axis(p.n(), h), q)?.value;
            let minus = sol.direct(&Point::on_axis(p.n(), -h), q)?.value;
            let fd = (plus - minus) / (2.0 * h);
            let psi = gradient_via_psi(&sol, p, q)?.value;
            worst = worst.max((psi - fd).abs() / fd.abs());
        }
        let sandwich = psi_sandwich_ratio(p, q)?;
        Ok(Outcome {
            passed: worst <= 1e-2 && sandwich <= 50.0,
            measured: worst,
            detail: format!("sandwich ratio {sandwich:.4}; 5 seeds, {}", p_label(p)),
        })
    })
}

/// 64 points of B⁺_{1/2} in one dimension.
fn half_interval_grid() -> Vec<Point> {
    (1..=64).map(|k| pt(&[k as f64 / 128.0])).collect()
}

/// Exterior datum y₁ reproduces x₁.
pub fn criterion_7(q: &QuadSpec) -> CriterionResult {
    run(7, "Poisson reproduction of x1", "1e-3 absolute", || {
        let mut worst: f64 = 0.0;
        for s in [0.5, 0.75] {
            let p = Params::new(1, s)?;
            let bp = BallProblem::new(FieldSpec::monomial_x1(), 1.0, p)?;
            let grid = half_interval_grid();
            let vals = grid.par_iter().map(|x| poisson_eval_antisym(&bp, x, q)).collect::<Result<Vec<_>>>()?;
            for (x, v) in grid.iter().zip(vals) {
                worst = worst.max((v.value - x.x1()).abs());
            }
        }
        Ok(Outcome { passed: worst <= 1e-3, measured: worst, detail: "64 points, n = 1, s in {0.5, 0.75}".into() })
    })
}

const BATTERY_SEEDS: u64 = 50;

fn band_change(a: &BatterySummary, b: &BatterySummary) -> f64 {
    match (a.band, b.band) {
        (Some((l0, h0)), Some((l1, h1))) => ((l1 - l0) / l0).abs().max(((h1 - h0) / h0).abs()),
        _ => f64::INFINITY,
    }
}

fn scaled_ratio_change(g: &FieldSpec, report: impl Fn(&FieldSpec) -> Result<f64>) -> Result<f64> {
    let base = report(g)?;
    let scaled = report(&g.scaled(3.5)?)?;
    Ok(((scaled - base) / base).abs())
}

/// Boundary Harnack battery.
pub fn criterion_8(q: &QuadSpec) -> CriterionResult {
    run(8, "boundary Harnack", "finite positive; band change <= 20%; scaling 1e-10", || {
        let p = Params::new(1, 0.5)?;
        let seeds: Vec<u64> = (0..BATTERY_SEEDS).collect();
        let coarse = comparability_battery(&seeds, &p, q, 64)?;
        let fine = comparability_battery(&seeds, &p, q, 128)?;
        let change = band_change(&coarse, &fine);
        let mut scaling: f64 = 0.0;
        for seed in 0..3 {
            let g = random_nonneg_antisym(seed, BATTERY_BUMPS, &p)?;
            scaling = scaling.max(scaled_ratio_change(&g, |g| Ok(boundary_quotient_profile(g, &p, q, 64)?.ratio))?);
        }
        let ok = coarse.all_finite_positive() && fine.all_finite_positive();
        Ok(Outcome {
            passed: ok && change <= 0.2 && scaling <= 1e-10,
            measured: change,
            detail: format!(
                "band {:?} -> {:?}, max ratio {:?}, scaling change {scaling:e}",
                coarse.band, fine.band, fine.max_ratio
            ),
        })
    })
}

/// Interior Harnack battery on B_{ρ/2}(e₁).
pub fn criterion_9(q: &QuadSpec) -> CriterionResult {
    run(9, "interior Harnack", "g = y1 ratio 5/3 within 2e-3; finite positive band", || {
        let p = Params::new(1, 0.5)?;
        let rho = 0.5;
        let seeds: Vec<u64> = (0..BATTERY_SEEDS).collect();
        let coarse = interior_battery(&seeds, rho, &p, q, 64)?;
        let fine = interior_battery(&seeds, rho, &p, q, 128)?;
        let change = band_change(&coarse, &fine);
        let mono = interior_harnack_check_grid(&FieldSpec::monomial_x1(), rho, &p, q, 64)?;
        let target = (1.0 + rho / 2.0) / (1.0 - rho / 2.0);
        let err = (mono.ratio - target).abs();
        let mut scaling: f64 = 0.0;
        for seed in 0..3 {
            let g = random_nonneg_antisym(seed, BATTERY_BUMPS, &p)?;
            scaling =
                scaling.max(scaled_ratio_change(&g, |g| Ok(interior_harnack_check_grid(g, rho, &p, q, 64)?.ratio))?);
        }
        let ok = coarse.all_finite_positive() && fine.all_finite_positive();
        Ok(Outcome {
            passed: ok && err <= 2e-3 && change <= 0.2 && scaling <= 1e-10,
            measured: err,
            detail: format!(
                "g = y1 ratio {}; band {:?} -> {:?}, max ratio {:?}, scaling change {scaling:e}",
                mono.ratio, coarse.band, fine.band, fine.max_ratio
            ),
        })
    })
}

/// Dimension and order at which the counterexample is demonstrated.
pub const COUNTEREXAMPLE_N: usize = 2;
pub const COUNTEREXAMPLE_S: f64 = 0.9;
pub const COUNTEREXAMPLE_GRID: usize = 32;
pub const COUNTEREXAMPLE_KS: [u32; 6] = [1, 2, 4, 8, 16, 32];

/// Harnack fails without antisymmetry.
pub fn criterion_10(q: &QuadSpec) -> CriterionResult {
    run(10, "counterexample", "increasing; ratio(32) >= 10 ratio(1); u_k >= 0; bisection within one quantum", || {
        let p = Params::new(COUNTEREXAMPLE_N, COUNTEREXAMPLE_S)?;
        let c = counterexample_run_with(&Cutoffs::default(), &COUNTEREXAMPLE_KS, &p, q, COUNTEREXAMPLE_GRID)?;
        let increasing = c.ratios.windows(2).all(|w| w[1] > w[0]);
        let growth = c.ratios[c.ratios.len() - 1] / c.ratios[0];
        let agree = (c.m_bar - c.m_bar_bisection).abs() <= c.grid_quantum;
        let nonneg = c.sample_min >= 0.0 && c.sample_max <= 1.0;
        Ok(Outcome {
            passed: increasing && growth >= 10.0 && agree && nonneg,
            measured: growth,
            detail: format!(
                "M = {} (bisection {}, quantum {:e}), ratios {:?}, u_k in [{}, {}], {}",
                c.m_bar,
                c.m_bar_bisection,
                c.grid_quantum,
                c.ratios,
                c.sample_min,
                c.sample_max,
                p_label(&p)
            ),
        })
    })
}

/// |lhs - rhs| at h = 2e-3 and h = 1e-3 for the cubic odd bump.
pub fn derivative_limit_errors(p: &Params, q: &QuadSpec) -> Result<(f64, f64)> {
    let v = FieldSpec::cubic_odd_bump(0.7, 1.0)?;
    let err = |h: f64| derivative_limit_pair(&v, p, q, h).map(|(l, r)| (l - r).abs());
    Ok((err(2e-3)?, err(1e-3)?))
}

/// Quadrature settings fine enough to resolve the h-dependence of the limit.
pub fn derivative_limit_quad(q: &QuadSpec) -> QuadSpec {
    QuadSpec { rel_tol: q.rel_tol.min(1e-12), abs_tol: q.abs_tol.min(1e-15), ..*q }
}

/// Convergence order of the derivative limit.
pub fn criterion_11(p: &Params, q: &QuadSpec) -> CriterionResult {
    run(11, "derivative limit", "error ratio in [1.5, 3]", || {
        let (e2, e1) = derivative_limit_errors(p, &derivative_limit_quad(q))?;
        let ratio = e2 / e1;
        Ok(Outcome {
            passed: (1.5..=3.0).contains(&ratio),
            measured: ratio,
            detail: format!("|lhs - rhs| = {e2:e} at h = 2e-3, {e1:e} at h = 1e-3, {}", p_label(p)),
        })
    })
}

/// Two-sided linear bounds for the barrier.
pub fn criterion_12(q: &QuadSpec) -> CriterionResult {
    run(12, "barrier", "max/min of phi3/x1 <= 20", || {
        let p = Params::new(1, 0.5)?;
        let grid = half_interval_grid();
        let vals =
            grid.par_iter().map(|x| barrier_phi3(x, &p, q).map(|e| e.value / x.x1())).collect::<Result<Vec<_>>>()?;
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        Ok(Outcome { passed: ratio <= 20.0, measured: ratio, detail: format!("phi3/x1 in [{lo}, {hi}]") })
    })
}

/// Every check, in order. `p` sets the order and dimension of the checks
/// that do not fix their own.
pub fn validate_all(p: &Params, q: &QuadSpec) -> Vec<CriterionResult> {
    vec![
        criterion_1(q),
        criterion_2(q),
        criterion_3(),
        criterion_4(q),
        criterion_5(p, q),
        criterion_6(p, q),
        criterion_7(q),
        criterion_8(q),
        criterion_9(q),
        criterion_10(q),
        criterion_11(p, q),
        criterion_12(q),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_and_spread() {
        assert_eq!(half_interval_grid().len(), 64);
        assert_eq!(crate::harnack::half_ball_grid(1, 128).len(), 64);
        assert!((rel_spread(&[1.0, 1.01, 0.99]) - 0.02).abs() < 1e-12);
        assert_eq!(probe_points(2).len(), 10);
    }

    #[test]
    fn failures_become_entries() {
        let r = run(99, "boom", "n/a", || Err(crate::Error::Domain("bad".into())));
        assert!(!r.passed && r.measured.is_nan() && r.detail.contains("bad"));
        assert!(r.line().contains("FAIL"));
    }
}
