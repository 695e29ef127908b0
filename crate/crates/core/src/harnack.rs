//! Empirical Harnack quotients for antisymmetric s-harmonic functions, and
//! the sequence showing that the inequality fails without antisymmetry.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{anorm, random_nonneg_antisym, FieldSpec, ScalarField, ZETA1_TRANSITION, ZETA2_OUTER_RADIUS};
use crate::poisson::{poisson_eval, poisson_eval_antisym, BallProblem, CacheSpec, PoissonSolution, BOUNDARY_MARGIN};
use crate::{Params, Point, QuadSpec};

/// Number of mirrored bumps in seeded battery data.
pub const BATTERY_BUMPS: usize = 3;

/// Largest ρ accepted by [`interior_harnack_check`].
pub const MAX_INTERIOR_RHO: f64 = 0.5;

/// Grid resolution used when none is given.
pub fn default_grid_n(n: usize) -> usize {
    if n >= 3 {
        32
    } else {
        64
    }
}

/// Extremes of u(x)/x₁ (boundary profile) or of u (interior check) over a
/// grid, compared with ‖u‖_𝒜ₛ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub sup_quotient: f64,
    pub inf_quotient: f64,
    /// `sup / inf`; infinite when the infimum is not positive.
    pub ratio: f64,
    pub anorm_value: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    /// Largest quadrature error bound among the gridded quotients.
    pub error_bound: f64,
    pub grid_spec: String,
    pub seed: Option<u64>,
    /// Set when u vanishes identically on the grid or fails to be positive.
    pub degenerate: bool,
}

impl HarnackReport {
    fn from_values(values: &[(f64, f64)], anorm_value: f64, grid_spec: String) -> Self {
        let sup = values.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
        let inf = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
        let error_bound = values.iter().map(|v| v.1).fold(0.0, f64::max);
        if sup == 0.0 && inf == 0.0 {
            return HarnackReport {
                sup_quotient: 0.0,
                inf_quotient: 0.0,
                ratio: 0.0,
                anorm_value,
                c_lower: 0.0,
                c_upper: 0.0,
                error_bound,
                grid_spec,
                seed: None,
                degenerate: true,
            };
        }
        let positive = inf > 0.0;
        HarnackReport {
            sup_quotient: sup,
            inf_quotient: inf,
            ratio: if positive { sup / inf } else { f64::INFINITY },
            anorm_value,
            c_lower: inf / anorm_value,
            c_upper: sup / anorm_value,
            error_bound,
            grid_spec,
            seed: None,
            degenerate: !positive,
        }
    }

    fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Grid of {x : |x - center| ≤ radius, x₁ ≥ center₁ + floor} with spacing
/// `step`, anchored so that `center + k·step·e_i` are nodes.
pub fn ball_grid(center: &Point, radius: f64, step: f64, x1_floor: Option<f64>) -> Vec<Point> {
    let n = center.dim();
    let m = (radius / step + 1e-9).floor() as i64;
    let slack = 1e-12 * radius;
    let mut out = Vec::new();
    let mut idx = vec![-m; n];
    loop {
        let offs: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
        let r2: f64 = offs.iter().map(|o| o * o).sum();
        let ok_floor = x1_floor.map_or(true, |f| offs[0] >= f - slack);
        if r2.sqrt() <= radius + slack && ok_floor {
            let coords: Vec<f64> = offs.iter().zip(center.as_slice()).map(|(o, c)| c + o).collect();
            out.push(Point::new(&coords).expect("grid dimension"));
        }
        let mut d = n;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            if idx[d] < m {
                idx[d] += 1;
                break;
            }
            idx[d] = -m;
        }
    }
}

/// Grid of B⁺_{1/2} with spacing 1/grid_n and x₁ ≥ 1/grid_n.
pub fn half_ball_grid(n: usize, grid_n: usize) -> Vec<Point> {
    let step = 1.0 / grid_n as f64;
    ball_grid(&Point::origin(n), 0.5, step, Some(step))
}

fn check_battery_datum(g: &FieldSpec, p: &Params) -> Result<()> {
    if !g.meta().antisymmetric {
        return Err(Error::Hypothesis("Harnack checks need antisymmetric data".into()));
    }
    if let Some(d) = g.dim() {
        if d != p.n() {
            return Err(Error::DimensionMismatch { expected: p.n(), got: d });
        }
    }
    Ok(())
}

fn full_field_anorm(bp: &BallProblem, p: &Params, q: &QuadSpec) -> Result<f64> {
    let sol = PoissonSolution::cached(bp.clone(), q, CacheSpec::default_for(p.n()))?;
    Ok(anorm(&sol, p, q)?.value)
}

/// sup and inf of u(x)/x₁ over [`half_ball_grid`] for u s-harmonic in B₁
/// with exterior datum `g`, and ‖u‖_𝒜ₛ of the full field.
pub fn boundary_quotient_profile(g: &FieldSpec, p: &Params, q: &QuadSpec, grid_n: usize) -> Result<HarnackReport> {
    q.validate()?;
    check_battery_datum(g, p)?;
    if grid_n < 4 {
        return Err(Error::Usage(format!("grid_n must be at least 4, got {grid_n}")));
    }
    let bp = BallProblem::new(g.clone(), 1.0, *p)?;
    let grid = half_ball_grid(p.n(), grid_n);
    let values = grid
        .par_iter()
        .map(|x| poisson_eval_antisym(&bp, x, q).map(|e| (e.value / x.x1(), e.error / x.x1())))
        .collect::<Result<Vec<_>>>()?;
    let a = full_field_anorm(&bp, p, q)?;
    let spec = format!("B+_(1/2), step 1/{grid_n}, x1 >= 1/{grid_n}, {} points", grid.len());
    Ok(HarnackReport::from_values(&values, a, spec))
}

/// sup and inf of u over a grid of B_{ρ/2}(e₁), for u s-harmonic in B₂ with
/// exterior datum `g`, and ‖u‖_𝒜ₛ of the full field.
pub fn interior_harnack_check(g: &FieldSpec, rho: f64, p: &Params, q: &QuadSpec) -> Result<HarnackReport> {
    interior_harnack_check_grid(g, rho, p, q, default_grid_n(p.n()))
}

/// [`interior_harnack_check`] with `grid_n` nodes across the diameter.
pub fn interior_harnack_check_grid(
    g: &FieldSpec,
    rho: f64,
    p: &Params,
    q: &QuadSpec,
    grid_n: usize,
) -> Result<HarnackReport> {
    q.validate()?;
    check_battery_datum(g, p)?;
    if !(rho > 0.0 && rho <= MAX_INTERIOR_RHO) {
        return Err(Error::Domain(format!("ρ must lie in (0, {MAX_INTERIOR_RHO}], got {rho}")));
    }
    if grid_n < 2 {
        return Err(Error::Usage(format!("grid_n must be at least 2, got {grid_n}")));
    }
    let bp = BallProblem::new(g.clone(), 2.0, *p)?;
    let center = Point::on_axis(p.n(), 1.0);
    let grid = ball_grid(&center, 0.5 * rho, rho / grid_n as f64, None);
    let values = grid
        .par_iter()
        .map(|x| poisson_eval_antisym(&bp, x, q).map(|e| (e.value, e.error)))
        .collect::<Result<Vec<_>>>()?;
    let a = full_field_anorm(&bp, p, q)?;
    let spec = format!("B_({rho}/2)(e1), step {rho}/{grid_n}, {} points", grid.len());
    Ok(HarnackReport::from_values(&values, a, spec))
}

/// The sequence u_k = v - (M̄ - 1/k) w on B₁(2e₁).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRun {
    /// min over the grid of v/w.
    pub m_bar: f64,
    /// Smallest M with min over the doubled grid of v - M w ≤ 0.
    pub m_bar_bisection: f64,
    /// Largest jump of v/w between neighbouring nodes at the minimiser.
    pub grid_quantum: f64,
    /// Grid minimiser of v/w.
    pub argmin: Point,
    pub ks: Vec<u32>,
    pub sups: Vec<f64>,
    pub infs: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Extremes of every u_k over samples of ℝⁿ₊.
    pub sample_min: f64,
    pub sample_max: f64,
    pub grid_spec: String,
}

/// Exterior data of the counterexample: ζ₁ (1 for x₁ ≤ -τ, 0 for x₁ ≥ 0)
/// and ζ₂ (1 on B_{1/2}(-2e₁), 0 outside B_{ρ₂}(-2e₁)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoffs {
    /// τ: ζ₁ rises from 0 at x₁ = 0 to 1 at x₁ = -τ.
    pub zeta1_transition: f64,
    /// ρ₂: ζ₂ falls from 1 at |x + 2e₁| = 1/2 to 0 at |x + 2e₁| = ρ₂.
    pub zeta2_outer_radius: f64,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Cutoffs { zeta1_transition: ZETA1_TRANSITION, zeta2_outer_radius: ZETA2_OUTER_RADIUS }
    }
}

impl Cutoffs {
    pub fn fields(&self, n: usize) -> Result<(FieldSpec, FieldSpec)> {
        Ok((FieldSpec::zeta1(self.zeta1_transition)?, FieldSpec::zeta2(self.zeta2_outer_radius, n)?))
    }
}

/// Builds v and w in B₁(2e₁), locates M̄, and reports the Harnack ratios of
/// u_k over B_{1/2}(2e₁).
pub fn counterexample_run(ks: &[u32], p: &Params, q: &QuadSpec, grid_n: usize) -> Result<CounterexampleRun> {
    counterexample_run_with(&Cutoffs::default(), ks, p, q, grid_n)
}

/// [`counterexample_run`] with explicit cutoff parameters.
pub fn counterexample_run_with(
    cutoffs: &Cutoffs,
    ks: &[u32],
    p: &Params,
    q: &QuadSpec,
    grid_n: usize,
) -> Result<CounterexampleRun> {
    q.validate()?;
    if ks.is_empty() || ks.contains(&0) || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("ks must be a non-empty, strictly increasing list of positive integers".into()));
    }
    if grid_n < 4 || grid_n % 2 != 0 {
        return Err(Error::Usage(format!("grid_n must be even and at least 4, got {grid_n}")));
    }
    let n = p.n();
    let (z1, z2) = cutoffs.fields(n)?;
    let center = Point::on_axis(n, 2.0);
    // Nodes reach the 0.95 margin up to rounding.
    let vb = BallProblem::centered(z1, center, 1.0, *p)?.allowing_near_boundary();
    let wb = BallProblem::centered(z2, center, 1.0, *p)?.allowing_near_boundary();
    // The fine grid contains the coarse one.
    let coarse_step = 2.0 * BOUNDARY_MARGIN / grid_n as f64;
    let fine = ball_grid(&center, BOUNDARY_MARGIN, 0.5 * coarse_step, None);
    let vw = fine
        .par_iter()
        .map(|x| Ok((poisson_eval(&vb, x, q)?.value, poisson_eval(&wb, x, q)?.value)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    if let Some(bad) = vw.iter().position(|&(_, w)| !(w > 0.0)) {
        return Err(Error::Hypothesis(format!(
            "w = {} ≤ 0 at {:?} contradicts the maximum principle; quadrature failure",
            vw[bad].1,
            fine[bad].as_slice()
        )));
    }
    let on_coarse = |x: &Point| {
        (*x - center).as_slice().iter().all(|o| {
            let k = o / coarse_step;
            (k - k.round()).abs() < 1e-6
        })
    };
    let quotient: Vec<f64> = vw.iter().map(|&(v, w)| v / w).collect();
    let mut best = None;
    for (i, x) in fine.iter().enumerate() {
        if on_coarse(x) && best.map_or(true, |b: usize| quotient[i] < quotient[b]) {
            best = Some(i);
        }
    }
    let best = best.expect("grid contains the center");
    let m_bar = quotient[best];
    let grid_quantum = fine
        .iter()
        .enumerate()
        .filter(|(i, x)| {
            *i != best && on_coarse(x) && x.dist(&fine[best]) <= coarse_step * (n as f64).sqrt() * (1.0 + 1e-9)
        })
        .map(|(i, _)| (quotient[i] - m_bar).abs())
        .fold(0.0, f64::max);
    let m_bar_bisection = bisect_m(&vw, m_bar);

    let inner: Vec<usize> =
        (0..fine.len()).filter(|&i| on_coarse(&fine[i]) && fine[i].dist(&center) <= 0.5 + 1e-12).collect();
    let mut sups = Vec::with_capacity(ks.len());
    let mut infs = Vec::with_capacity(ks.len());
    let mut ratios = Vec::with_capacity(ks.len());
    let mut sample_min = f64::INFINITY;
    let mut sample_max = f64::NEG_INFINITY;
    for &k in ks {
        let m = m_bar - 1.0 / k as f64;
        let uk = |i: usize| vw[i].0 - m * vw[i].1;
        let sup = inner.iter().map(|&i| uk(i)).fold(f64::NEG_INFINITY, f64::max);
        let inf = inner.iter().map(|&i| uk(i)).fold(f64::INFINITY, f64::min);
        sups.push(sup);
        infs.push(inf);
        ratios.push(if inf > 0.0 { sup / inf } else { f64::INFINITY });
        for i in 0..fine.len() {
            sample_min = sample_min.min(uk(i));
            sample_max = sample_max.max(uk(i));
        }
        for x in exterior_samples(n) {
            let u = vb.data.value(&x) - m * wb.data.value(&x);
            sample_min = sample_min.min(u);
            sample_max = sample_max.max(u);
        }
    }
    Ok(CounterexampleRun {
        m_bar,
        m_bar_bisection,
        grid_quantum,
        argmin: fine[best],
        ks: ks.to_vec(),
        sups,
        infs,
        ratios,
        sample_min,
        sample_max,
        grid_spec: format!(
            "B_{BOUNDARY_MARGIN}(2e1), step {coarse_step} ({} coarse points); bisection on step {}",
            fine.iter().filter(|x| on_coarse(x)).count(),
            0.5 * coarse_step
        ),
    })
}

/// Smallest M, to rounding, with min_i (v_i - M w_i) ≤ 0.
fn bisect_m(vw: &[(f64, f64)], upper: f64) -> f64 {
    let min_at = |m: f64| vw.iter().map(|&(v, w)| v - m * w).fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (0.0, upper.max(0.0));
    while min_at(hi) > 0.0 {
        hi = 2.0 * hi + 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if min_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Points of ℝⁿ₊ outside B₁(2e₁) where u_k equals its exterior datum.
fn exterior_samples(n: usize) -> Vec<Point> {
    let mut out = Vec::new();
    for k in 0..=40 {
        let t = 0.125 * k as f64;
        let x = Point::on_axis(n, t);
        if x.dist(&Point::on_axis(n, 2.0)) >= 1.0 {
            out.push(x);
        }
    }
    if n >= 2 {
        for k in 0..=20 {
            let mut c = vec![0.0; n];
            c[0] = 2.0;
            c[1] = 1.0 + 0.25 * k as f64;
            out.push(Point::new(&c).expect("sample dimension"));
        }
    }
    out
}

/// One seed's boundary and interior reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatterySummary {
    pub reports: Vec<HarnackReport>,
    /// [min c_lower, max c_upper] over the seeds; `None` for no seeds.
    pub band: Option<(f64, f64)>,
    pub max_ratio: Option<f64>,
}

impl BatterySummary {
    fn from_reports(reports: Vec<HarnackReport>) -> Self {
        if reports.is_empty() {
            return BatterySummary { reports, band: None, max_ratio: None };
        }
        let lo = reports.iter().map(|r| r.c_lower).fold(f64::INFINITY, f64::min);
        let hi = reports.iter().map(|r| r.c_upper).fold(f64::NEG_INFINITY, f64::max);
        let max_ratio = reports.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        BatterySummary { reports, band: Some((lo, hi)), max_ratio: Some(max_ratio) }
    }

    /// Every report is positive with a finite ratio, and the band is
    /// positive and finite.
    pub fn all_finite_positive(&self) -> bool {
        self.reports.iter().all(|r| !r.degenerate && r.ratio.is_finite())
            && self.band.map_or(true, |(lo, hi)| lo > 0.0 && hi.is_finite())
    }
}

/// [`boundary_quotient_profile`] over seeded non-negative antisymmetric data.
pub fn comparability_battery(seeds: &[u64], p: &Params, q: &QuadSpec, grid_n: usize) -> Result<BatterySummary> {
    let reports = seeds
        .par_iter()
        .map(|&seed| {
            let g = random_nonneg_antisym(seed, BATTERY_BUMPS, p)?;
            boundary_quotient_profile(&g, p, q, grid_n).map(|r| r.with_seed(seed))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BatterySummary::from_reports(reports))
}

/// [`interior_harnack_check_grid`] over seeded non-negative antisymmetric data.
pub fn interior_battery(seeds: &[u64], rho: f64, p: &Params, q: &QuadSpec, grid_n: usize) -> Result<BatterySummary> {
    let reports = seeds
        .par_iter()
        .map(|&seed| {
            let g = random_nonneg_antisym(seed, BATTERY_BUMPS, p)?;
            interior_harnack_check_grid(&g, rho, p, q, grid_n).map(|r| r.with_seed(seed))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BatterySummary::from_reports(reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = half_ball_grid(1, 64);
        assert_eq!(g.len(), 32);
        assert_eq!(g[0].x1(), 1.0 / 64.0);
        assert_eq!(g[31].x1(), 0.5);
        let g2 = half_ball_grid(2, 8);
        assert!(g2.iter().all(|x| x.x1() >= 0.125 && x.norm() <= 0.5 + 1e-12));
        let b = ball_grid(&Point::on_axis(1, 1.0), 0.25, 0.5 / 64.0, None);
        assert_eq!(b.len(), 65);
    }

    #[test]
    fn monomial_profiles() {
        let p = Params::new(1, 0.5).unwrap();
        let q = QuadSpec::default();
        let r = boundary_quotient_profile(&FieldSpec::monomial_x1(), &p, &q, 16).unwrap();
        assert!((r.sup_quotient - 1.0).abs() < 2e-3 && (r.inf_quotient - 1.0).abs() < 2e-3, "{r:?}");
        let i = interior_harnack_check_grid(&FieldSpec::monomial_x1(), 0.5, &p, &q, 16).unwrap();
        assert!((i.ratio - 5.0 / 3.0).abs() < 2e-3, "{i:?}");
    }

    #[test]
    fn zero_field_is_degenerate() {
        let p = Params::new(1, 0.5).unwrap();
        let r = interior_harnack_check_grid(&FieldSpec::zero(), 0.5, &p, &QuadSpec::default(), 8).unwrap();
        assert!(r.degenerate);
        assert_eq!((r.sup_quotient, r.inf_quotient, r.anorm_value), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rejections() {
        let p = Params::new(1, 0.5).unwrap();
        let q = QuadSpec::default();
        let even = FieldSpec::constant(1.0).unwrap();
        assert!(matches!(boundary_quotient_profile(&even, &p, &q, 16), Err(Error::Hypothesis(_))));
        assert!(matches!(interior_harnack_check(&FieldSpec::monomial_x1(), 0.8, &p, &q), Err(Error::Domain(_))));
        assert!(matches!(counterexample_run(&[2, 1], &p, &q, 16), Err(Error::Usage(_))));
        let empty = comparability_battery(&[], &p, &q, 16).unwrap();
        assert!(empty.reports.is_empty() && empty.band.is_none());
    }
}
