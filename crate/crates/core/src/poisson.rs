//! s-harmonic functions in balls from exterior data, the mean-value formulas,
//! the radial kernel ψₛ, and the odd-cutoff barrier.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{FieldMeta, FieldSpec, ScalarField, Smoothness};
use crate::kernel;
use crate::quad::{self, maps, Feature, Hemisphere, Polar, RayWeight, TailModel};
use crate::special::gamma_ns;
use crate::{Estimate, Params, Point, QuadSpec};

/// Fraction of the radius beyond which evaluation is refused by default.
pub const BOUNDARY_MARGIN: f64 = 0.95;

/// Exterior data on ℝⁿ ∖ B_r(center) defining an s-harmonic function in the ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallProblem {
    pub center: Point,
    pub radius: f64,
    pub data: FieldSpec,
    pub params: Params,
    /// Permit evaluation in the outer shell |x - center| > 0.95 r.
    #[serde(default)]
    pub allow_near_boundary: bool,
}

impl BallProblem {
    /// Ball of radius `radius` about the origin.
    pub fn new(data: FieldSpec, radius: f64, params: Params) -> Result<Self> {
        BallProblem::centered(data, Point::origin(params.n()), radius, params)
    }

    pub fn centered(data: FieldSpec, center: Point, radius: f64, params: Params) -> Result<Self> {
        let bp = BallProblem { center, radius, data, params, allow_near_boundary: false };
        bp.validate()?;
        Ok(bp)
    }

    pub fn allowing_near_boundary(mut self) -> Self {
        self.allow_near_boundary = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.params.n();
        self.center.check_dim(n)?;
        if let Some(d) = self.data.dim() {
            if d != n {
                return Err(Error::DimensionMismatch { expected: n, got: d });
            }
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Domain(format!("ball radius must be positive, got {}", self.radius)));
        }
        Ok(())
    }

    fn check_inside(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.params.n())?;
        let d = x.dist(&self.center);
        if !(d < self.radius) {
            return Err(Error::Domain(format!("|x - c| = {d} is not inside the ball of radius {}", self.radius)));
        }
        if !self.allow_near_boundary && d > BOUNDARY_MARGIN * self.radius {
            return Err(Error::Domain(format!(
                "|x - c| = {d} exceeds {BOUNDARY_MARGIN} r; enable near-boundary evaluation to proceed"
            )));
        }
        Ok(d)
    }

    /// Panel hints: the data's features, the ball boundary, and the boundary
    /// region nearest to x at the scale of its distance to the sphere.
    fn features_for(&self, x: &Point, dist: f64) -> Vec<Feature<f64>> {
        let n = self.params.n();
        let mut f = self.data.features(n);
        f.push(Feature::sphere(self.center, vec![self.radius]));
        let gap = self.radius - dist;
        if dist > 0.0 {
            let foot = self.center + (*x - self.center) * (self.radius / dist);
            f.push(Feature::sphere(foot, vec![gap, 3.0 * gap, 10.0 * gap]));
            if self.center.x1() == 0.0 {
                let foot = foot.reflect();
                f.push(Feature::sphere(foot, vec![gap, 3.0 * gap, 10.0 * gap]));
            }
        }
        f
    }
}

fn require_ls(meta: &FieldMeta, p: &Params) -> Result<()> {
    let limit = 2.0 * p.s();
    if meta.support_radius.is_none() && !(meta.decay_exponent < limit) {
        return Err(Error::Divergent {
            what: "ℒₛ-norm of the exterior data".into(),
            exponent: meta.decay_exponent,
            limit,
        });
    }
    Ok(())
}

fn require_as(meta: &FieldMeta, p: &Params) -> Result<()> {
    let limit = 1.0 + 2.0 * p.s();
    if meta.support_radius.is_none() && !(meta.decay_exponent < limit) {
        return Err(Error::Divergent {
            what: "𝒜ₛ-norm of the exterior data".into(),
            exponent: meta.decay_exponent,
            limit,
        });
    }
    Ok(())
}

fn require_antisym_ball(bp: &BallProblem) -> Result<()> {
    if !bp.data.meta().antisymmetric {
        return Err(Error::Hypothesis("the antisymmetric representation needs antisymmetric data".into()));
    }
    if bp.center.x1() != 0.0 {
        return Err(Error::Hypothesis("the antisymmetric representation needs a ball centred on {x₁ = 0}".into()));
    }
    Ok(())
}

/// u(x) = γ_{n,s} ∫_{|y-c|>r} ((r² - |x-c|²)/(|y-c|² - r²))^s g(y) |x-y|^{-n} dy.
pub fn poisson_eval(bp: &BallProblem, x: &Point, q: &QuadSpec) -> Result<Estimate> {
    q.validate()?;
    let dist = bp.check_inside(x)?;
    let meta = bp.data.meta();
    require_ls(&meta, &bp.params)?;
    poisson_classic_unchecked(bp, x, dist, q)
}

fn poisson_classic_unchecked(bp: &BallProblem, x: &Point, dist: f64, q: &QuadSpec) -> Result<Estimate> {
    let p = &bp.params;
    let n = p.n();
    let s = p.s();
    let r = bp.radius;
    let meta = bp.data.meta();
    let scale = gamma_ns(p) * (r * r - dist * dist).powf(s);
    let features = bp.features_for(x, dist);
    let job = Polar {
        origin: bp.center,
        region: Hemisphere::Full,
        inner_radius: r,
        weight: RayWeight::Poisson { r, s },
        tail: meta.tail(n as f64),
        features: &features,
        near_power: None,
    };
    let e = quad::integrate_polar(&job, p, q, |y| bp.data.value(y) * x.dist(y).powi(-(n as i32)))?;
    Ok(e * scale)
}

/// The half-space form of the representation for antisymmetric data:
/// u(x) = γ_{n,s} ∫_{ℝⁿ₊∖B_r⁺} ((r² - |x|²)/(|y|² - r²))^s (|x-y|^{-n} - |x_*-y|^{-n}) g(y) dy.
pub fn poisson_eval_antisym(bp: &BallProblem, x: &Point, q: &QuadSpec) -> Result<Estimate> {
    q.validate()?;
    require_antisym_ball(bp)?;
    let dist = bp.check_inside(x)?;
    if x.x1() < 0.0 {
        return Err(Error::Domain(format!("x₁ = {} must be non-negative", x.x1())));
    }
    require_as(&bp.data.meta(), &bp.params)?;
    poisson_antisym_unchecked(bp, x, dist, q)
}

fn poisson_antisym_unchecked(bp: &BallProblem, x: &Point, dist: f64, q: &QuadSpec) -> Result<Estimate> {
    if x.x1() == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let p = &bp.params;
    let n = p.n();
    let s = p.s();
    let r = bp.radius;
    let meta = bp.data.meta();
    let scale = gamma_ns(p) * (r * r - dist * dist).powf(s);
    let features = bp.features_for(x, dist);
    let job = Polar {
        origin: bp.center,
        region: Hemisphere::Upper,
        inner_radius: r,
        weight: RayWeight::Poisson { r, s },
        tail: meta.tail(n as f64 + 1.0),
        features: &features,
        near_power: None,
    };
    let nf = n as f64;
    let e = quad::integrate_polar(&job, p, q, |y| {
        if y.x1() <= 0.0 {
            0.0
        } else {
            bp.data.value(y) * kernel::kernel_difference(x, y, nf)
        }
    })?;
    Ok(e * scale)
}

/// γ_{n,s} ∫_{|y|>r} r^{2s} g(y) / ((|y|² - r²)^s |y|^n) dy.
pub fn mean_value_classic(g: &impl ScalarField, r: f64, p: &Params, q: &QuadSpec) -> Result<Estimate> {
    q.validate()?;
    let meta = g.meta();
    require_ls(&meta, p)?;
    let n = p.n();
    let s = p.s();
    let o = Point::origin(n);
    let e = quad::integrate_exterior_ball(
        |y| g.value(y) * y.norm().powi(-(n as i32)),
        &o,
        r,
        s,
        p,
        q,
        &meta.tail(n as f64),
        &g.features(n),
    )?;
    Ok(e * (gamma_ns(p) * r.powf(2.0 * s)))
}

/// ∂₁u(0) = 2n γ_{n,s} ∫_{ℝⁿ₊∖B_r⁺} r^{2s} y₁ u(y) / ((|y|² - r²)^s |y|^{n+2}) dy
/// for u antisymmetric and s-harmonic in a ball containing B_r.
pub fn mean_value_antisym_gradient(u: &impl ScalarField, r: f64, p: &Params, q: &QuadSpec) -> Result<Estimate> {
    q.validate()?;
    let meta = u.meta();
    if !meta.antisymmetric {
        return Err(Error::Hypothesis("the gradient formula needs an antisymmetric function".into()));
    }
    require_as(&meta, p)?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let n = p.n();
    let s = p.s();
    let features = u.features(n);
    let job = Polar {
        origin: Point::origin(n),
        region: Hemisphere::Upper,
        inner_radius: r,
        weight: RayWeight::Poisson { r, s },
        tail: meta.tail(n as f64 + 1.0),
        features: &features,
        near_power: None,
    };
    let e = quad::integrate_polar(&job, p, q, |y| y.x1() * u.value(y) * y.norm().powi(-(n as i32 + 2)))?;
    Ok(e * (2.0 * n as f64 * gamma_ns(p) * r.powf(2.0 * s)))
}

/// ψₛ(y) = n(n+2) γ_{n,s} ∫_0^{min(1/|y|, 1)} ρ^{2s+n+1} (1 - ρ²)^{-s} dρ.
pub fn psi_eval(y: &Point, p: &Params, q: &QuadSpec) -> Result<f64> {
    y.check_dim(p.n())?;
    psi_radial(y.norm(), p, q)
}

/// ψₛ as a function of |y|.
pub fn psi_radial(radius: f64, p: &Params, q: &QuadSpec) -> Result<f64> {
    q.validate()?;
    let n = p.n() as f64;
    let s = p.s();
    let tol = q.tolerance().inner();
    let limits = q.limits();
    let power = 2.0 * s + n + 1.0;
    let out = if radius <= 1.0 {
        // ρ = 1 - t: (1-ρ²)^{-s} = t^{-s} (2 - t)^{-s}.
        maps::left_algebraic(
            |t: f64| Estimate::exact((1.0 - t).powf(power) * (2.0 - t).powf(-s)),
            0.0,
            1.0,
            s,
            &[],
            tol,
            limits,
        )
    } else {
        let b = 1.0 / radius;
        maps::finite(
            |rho: f64| Estimate::exact(rho.powf(power) * (1.0 - rho * rho).powf(-s)),
            0.0,
            b,
            &[],
            1,
            tol,
            limits,
        )
    };
    let e = quad::finish(out)?;
    Ok(n * (n + 2.0) * gamma_ns(p) * e.value)
}

/// ∂₁u(0) = ∫_{ℝⁿ} y₁ ψₛ(y) u(y) dy for an antisymmetric u that is s-harmonic in B₁.
///
/// Inside B₁, ψₛ is constant; outside, it is evaluated by one-dimensional
/// quadrature. Antisymmetry halves the domain to ℝⁿ₊.
pub fn gradient_via_psi(u: &impl ScalarField, p: &Params, q: &QuadSpec) -> Result<Estimate> {
    q.validate()?;
    let meta = u.meta();
    if !meta.antisymmetric {
        return Err(Error::Hypothesis("the ψₛ formula needs an antisymmetric function".into()));
    }
    require_as(&meta, p)?;
    let n = p.n();
    let psi0 = psi_radial(0.0, p, q)?;
    let mut features = u.features(n);
    features.push(Feature::sphere(Point::origin(n), vec![1.0]));
    let failed = std::sync::atomic::AtomicBool::new(false);
    let psi = |rho: f64| {
        if rho <= 1.0 {
            psi0
        } else {
            psi_radial(rho, p, q).unwrap_or_else(|_| {
                failed.store(true, std::sync::atomic::Ordering::Relaxed);
                f64::NAN
            })
        }
    };
    let k = p.kernel_exponent() + 2.0;
    let e = quad::integrate_halfspace_weighted(
        |y| 2.0 * y.x1() * psi(y.norm()) * u.value(y),
        p,
        q,
        &meta.tail(k - 1.0),
        &features,
        None,
    )?;
    if failed.load(std::sync::atomic::Ordering::Relaxed) {
        return Err(Error::NotConverged { estimate: e.value, error: e.error });
    }
    Ok(e)
}

/// The barrier φ⁽³⁾: s-harmonic in B₁ with exterior datum φ(y₁), the odd
/// smoothstep cutoff equal to 1 for y₁ > 2.
pub fn barrier_phi3(x: &Point, p: &Params, q: &QuadSpec) -> Result<Estimate> {
    let bp = barrier_problem(p)?;
    if x.x1() < 0.0 {
        let e = poisson_eval_antisym(&bp, &x.reflect(), q)?;
        return Ok(e * -1.0);
    }
    poisson_eval_antisym(&bp, x, q)
}

/// Ball problem defining [`barrier_phi3`].
pub fn barrier_problem(p: &Params) -> Result<BallProblem> {
    BallProblem::new(FieldSpec::odd_cutoff(crate::fields::ODD_CUTOFF_TRANSITION)?, 1.0, *p)
}

/// Grid nodes this close to {x₁ = 0} lie on the plane up to rounding.
const PLANE_SLACK: f64 = 1e-12;

/// Resolution of the interior interpolation grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheSpec {
    /// Nodes are uniform in σ = √(1 - |y - c|/r) with this many steps.
    pub radial_steps: usize,
    /// Angular nodes per 2π (n = 2, 3) and polar nodes in μ = ω₁ (n = 3).
    pub angular_steps: usize,
}

impl CacheSpec {
    pub fn default_for(n: usize) -> Self {
        match n {
            3 => CacheSpec { radial_steps: 32, angular_steps: 16 },
            _ => CacheSpec { radial_steps: 64, angular_steps: 64 },
        }
    }
}

/// How interior values of a [`PoissonSolution`] are produced.
#[derive(Clone, Debug)]
pub enum Interior {
    /// Multilinear interpolation on a precomputed grid.
    Cached(Box<InteriorGrid>),
    /// A full quadrature at every evaluation (NaN on failure).
    Direct(QuadSpec),
}

/// Interior node values on a (σ, angle) grid.
#[derive(Clone, Debug)]
pub struct InteriorGrid {
    n: usize,
    spec: CacheSpec,
    /// values[((i_mu * n_theta) + i_theta) * (radial_steps + 1) + j]
    values: Vec<f64>,
    n_mu: usize,
    n_theta: usize,
}

/// The s-harmonic function of a ball problem on all of ℝⁿ: the datum
/// outside the ball, the Poisson representation inside.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub problem: BallProblem,
    pub interior: Interior,
    antisym_route: bool,
}

impl PoissonSolution {
    /// Builds the interior grid in parallel.
    pub fn cached(problem: BallProblem, q: &QuadSpec, spec: CacheSpec) -> Result<Self> {
        q.validate()?;
        problem.validate()?;
        if spec.radial_steps < 2 || spec.angular_steps < 4 || spec.angular_steps % 2 != 0 {
            return Err(Error::Usage("cache needs ≥ 2 radial steps and an even number ≥ 4 of angular steps".into()));
        }
        let antisym_route = Self::choose_route(&problem)?;
        let n = problem.params.n();
        let (n_mu, n_theta) = match n {
            1 => (1, 2),
            2 => (1, spec.angular_steps),
            _ => (spec.angular_steps + 1, spec.angular_steps),
        };
        let nr = spec.radial_steps + 1;
        let mut solution = PoissonSolution { problem, interior: Interior::Direct(*q), antisym_route };
        let grid = InteriorGrid { n, spec, values: vec![0.0; n_mu * n_theta * nr], n_mu, n_theta };
        let nodes: Vec<(usize, Point)> =
            (0..grid.values.len()).map(|idx| (idx, grid.node(&solution.problem, idx))).collect();
        let antisym = solution.problem.data.meta().antisymmetric && solution.problem.center.x1() == 0.0;
        let sol = &solution;
        let computed: Vec<Result<f64>> = nodes
            .par_iter()
            .map(|(idx, y)| {
                let j = idx % nr;
                if j == 0 {
                    return Ok(sol.problem.data.value(y));
                }
                let rel = *y - sol.problem.center;
                if antisym && rel.x1().abs() <= PLANE_SLACK * sol.problem.radius {
                    return Ok(0.0);
                }
                if antisym && rel.x1() < 0.0 {
                    return Ok(f64::NAN);
                }
                sol.direct(y, q).map(|e| e.value)
            })
            .collect();
        let mut values = Vec::with_capacity(computed.len());
        for v in computed {
            values.push(v?);
        }
        let mut grid = InteriorGrid { values, ..grid };
        if antisym {
            for idx in 0..grid.values.len() {
                if grid.values[idx].is_nan() {
                    let twin = grid.mirror_index(idx);
                    grid.values[idx] = -grid.values[twin];
                }
            }
        }
        solution.interior = Interior::Cached(Box::new(grid));
        Ok(solution)
    }

    /// Evaluates every interior point by quadrature.
    pub fn direct_mode(problem: BallProblem, q: &QuadSpec) -> Result<Self> {
        q.validate()?;
        problem.validate()?;
        let antisym_route = Self::choose_route(&problem)?;
        Ok(PoissonSolution { problem, interior: Interior::Direct(*q), antisym_route })
    }

    fn choose_route(problem: &BallProblem) -> Result<bool> {
        let meta = problem.data.meta();
        let p = &problem.params;
        if meta.antisymmetric && problem.center.x1() == 0.0 {
            require_as(&meta, p)?;
            Ok(true)
        } else {
            require_ls(&meta, p)?;
            Ok(false)
        }
    }

    /// Quadrature value at an interior point, bypassing the boundary margin.
    pub fn direct(&self, x: &Point, q: &QuadSpec) -> Result<Estimate> {
        let bp = &self.problem;
        x.check_dim(bp.params.n())?;
        let dist = x.dist(&bp.center);
        if !(dist < bp.radius) {
            return Ok(Estimate::exact(bp.data.value(x)));
        }
        if self.antisym_route {
            if x.x1() < 0.0 {
                return poisson_antisym_unchecked(bp, &x.reflect(), dist, q).map(|e| e * -1.0);
            }
            poisson_antisym_unchecked(bp, x, dist, q)
        } else {
            poisson_classic_unchecked(bp, x, dist, q)
        }
    }
}

impl InteriorGrid {
    fn nr(&self) -> usize {
        self.spec.radial_steps + 1
    }

    fn split(&self, idx: usize) -> (usize, usize, usize) {
        let nr = self.nr();
        let j = idx % nr;
        let rest = idx / nr;
        (rest / self.n_theta, rest % self.n_theta, j)
    }

    fn index(&self, i_mu: usize, i_theta: usize, j: usize) -> usize {
        (i_mu * self.n_theta + i_theta) * self.nr() + j
    }

    fn direction(&self, i_mu: usize, i_theta: usize) -> Point {
        match self.n {
            1 => Point::on_axis(1, if i_theta == 0 { 1.0 } else { -1.0 }),
            2 => {
                let t = std::f64::consts::TAU * i_theta as f64 / self.n_theta as f64;
                Point::new(&[t.cos(), t.sin()]).expect("2d")
            }
            _ => {
                let mu = -1.0 + 2.0 * i_mu as f64 / (self.n_mu - 1) as f64;
                let t = std::f64::consts::TAU * i_theta as f64 / self.n_theta as f64;
                let sp = (1.0 - mu * mu).max(0.0).sqrt();
                Point::new(&[mu, sp * t.cos(), sp * t.sin()]).expect("3d")
            }
        }
    }

    fn node(&self, bp: &BallProblem, idx: usize) -> Point {
        let (i_mu, i_theta, j) = self.split(idx);
        let sigma = j as f64 / self.spec.radial_steps as f64;
        let rho = bp.radius * (1.0 - sigma * sigma);
        bp.center.along(&self.direction(i_mu, i_theta), rho)
    }

    /// Node obtained by reflecting the direction across {ω₁ = 0}.
    fn mirror_index(&self, idx: usize) -> usize {
        let (i_mu, i_theta, j) = self.split(idx);
        match self.n {
            1 => self.index(0, 1 - i_theta, j),
            2 => self.index(0, (self.n_theta / 2 + self.n_theta - i_theta) % self.n_theta, j),
            _ => self.index(self.n_mu - 1 - i_mu, i_theta, j),
        }
    }

    fn interpolate(&self, bp: &BallProblem, y: &Point) -> f64 {
        let rel = *y - bp.center;
        let rho = rel.norm() / bp.radius;
        let sigma = (1.0 - rho).max(0.0).sqrt() * self.spec.radial_steps as f64;
        let j0 = (sigma.floor() as usize).min(self.spec.radial_steps - 1);
        let tj = sigma - j0 as f64;
        let radial = |i_mu: usize, i_theta: usize| {
            let a = self.values[self.index(i_mu, i_theta, j0)];
            let b = self.values[self.index(i_mu, i_theta, j0 + 1)];
            a + tj * (b - a)
        };
        let periodic = |t: f64| {
            let m = self.n_theta as f64;
            let u = (t / std::f64::consts::TAU).rem_euclid(1.0) * m;
            let k0 = (u.floor() as usize) % self.n_theta;
            (k0, (k0 + 1) % self.n_theta, u - u.floor())
        };
        match self.n {
            1 => radial(0, if rel.x1() >= 0.0 { 0 } else { 1 }),
            2 => {
                let (k0, k1, t) = periodic(rel[1].atan2(rel[0]));
                (1.0 - t) * radial(0, k0) + t * radial(0, k1)
            }
            _ => {
                let r = rel.norm();
                let mu = if r > 0.0 { (rel[0] / r).clamp(-1.0, 1.0) } else { 0.0 };
                let um = (mu + 1.0) * 0.5 * (self.n_mu - 1) as f64;
                let m0 = (um.floor() as usize).min(self.n_mu - 2);
                let tm = um - m0 as f64;
                let (k0, k1, t) = periodic(rel[2].atan2(rel[1]));
                let ring = |m: usize| (1.0 - t) * radial(m, k0) + t * radial(m, k1);
                (1.0 - tm) * ring(m0) + tm * ring(m0 + 1)
            }
        }
    }
}

impl ScalarField for PoissonSolution {
    fn value(&self, y: &Point) -> f64 {
        let bp = &self.problem;
        if y.dist(&bp.center) >= bp.radius {
            return bp.data.value(y);
        }
        match &self.interior {
            Interior::Cached(grid) => grid.interpolate(bp, y),
            Interior::Direct(q) => self.direct(y, q).map(|e| e.value).unwrap_or(f64::NAN),
        }
    }

    fn meta(&self) -> FieldMeta {
        let m = self.problem.data.meta();
        FieldMeta {
            antisymmetric: m.antisymmetric && self.problem.center.x1() == 0.0,
            decay_exponent: m.decay_exponent,
            support_radius: m.support_radius.map(|r| r.max(self.problem.center.norm() + self.problem.radius)),
            smoothness: Smoothness::Measurable,
        }
    }

    fn features(&self, n: usize) -> Vec<Feature<f64>> {
        let mut f = self.problem.data.features(n);
        f.push(Feature::sphere(self.problem.center, vec![self.problem.radius]));
        f
    }
}

/// Tail model used when integrating a Poisson solution over large sets.
pub fn solution_tail(u: &PoissonSolution, extra_decay: f64) -> TailModel<f64> {
    u.meta().tail(extra_decay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    #[test]
    fn constants_are_reproduced() {
        for n in 1..=2 {
            let p = Params::new(n, 0.5).unwrap();
            let bp = BallProblem::new(FieldSpec::constant(1.0).unwrap(), 1.0, p).unwrap();
            let x = Point::on_axis(n, 0.3);
            let u = poisson_eval(&bp, &x, &QuadSpec::default()).unwrap();
            assert_relative_eq!(u.value, 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn psi_at_origin() {
        let p = Params::new(1, 0.5).unwrap();
        let v = psi_radial(0.0, &p, &QuadSpec::default()).unwrap();
        assert_relative_eq!(v, 2.0 / std::f64::consts::PI, max_relative = 1e-10);
        let a = psi_eval(&pt(&[0.3, 0.4]), &Params::new(2, 0.3).unwrap(), &QuadSpec::default()).unwrap();
        let b = psi_eval(&pt(&[0.5, 0.0]), &Params::new(2, 0.3).unwrap(), &QuadSpec::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monomial_is_reproduced() {
        let p = Params::new(1, 0.75).unwrap();
        let bp = BallProblem::new(FieldSpec::monomial_x1(), 1.0, p).unwrap();
        let u = poisson_eval_antisym(&bp, &pt(&[0.3]), &QuadSpec::default()).unwrap();
        assert!((u.value - 0.3).abs() < 1e-8, "{u:?}");
        let err = poisson_eval(
            &BallProblem::new(FieldSpec::monomial_x1(), 1.0, Params::new(1, 0.5).unwrap()).unwrap(),
            &pt(&[0.3]),
            &QuadSpec::default(),
        );
        assert!(matches!(err, Err(Error::Divergent { .. })));
    }

    #[test]
    fn near_boundary_is_refused_by_default() {
        let p = Params::new(1, 0.5).unwrap();
        let bp = BallProblem::new(FieldSpec::constant(1.0).unwrap(), 1.0, p).unwrap();
        assert!(matches!(poisson_eval(&bp, &pt(&[0.97]), &QuadSpec::default()), Err(Error::Domain(_))));
        let u = poisson_eval(&bp.allowing_near_boundary(), &pt(&[0.97]), &QuadSpec::default()).unwrap();
        assert_relative_eq!(u.value, 1.0, max_relative = 1e-7);
    }

    #[test]
    fn mean_value_examples() {
        let p = Params::new(2, 0.5).unwrap();
        let q = QuadSpec::default();
        let one = mean_value_classic(&FieldSpec::constant(1.0).unwrap(), 0.5, &p, &q).unwrap();
        assert_relative_eq!(one.value, 1.0, max_relative = 1e-8);
        let odd = FieldSpec::antisym_gaussian_bump(pt(&[1.5, 0.2]), 0.4, 1.0).unwrap();
        let zero = mean_value_classic(&odd, 0.5, &p, &q).unwrap();
        assert!(zero.value.abs() < 1e-9);
        let g = mean_value_antisym_gradient(&FieldSpec::monomial_x1(), 1.0, &p, &q).unwrap();
        assert_relative_eq!(g.value, 1.0, max_relative = 1e-7);
    }
}
