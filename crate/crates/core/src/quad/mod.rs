//! Quadrature engine for the singular integrals of the fractional Laplacian.
//!
//! Everything is built from one globally adaptive Gauss–Kronrod rule
//! ([`gk`]) composed with variable substitutions ([`maps`]) and direction
//! integration ([`sphere`]). Multi-dimensional integrals are written in polar
//! coordinates around the point where the integrand is singular, so that the
//! radial direction carries all of the singular behaviour.

pub mod gk;
pub mod maps;
pub mod sphere;

use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::scalar::{lit, Real};
use crate::special::Params;

pub use gk::{Limits, Outcome};
pub use sphere::{Cap, Hemisphere};

/// A quadrature value with its error bound.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

impl<T: Real> Estimate<T> {
    pub fn zero() -> Self {
        Estimate { value: T::zero(), error: T::zero() }
    }

    pub fn exact(value: T) -> Self {
        Estimate { value, error: T::zero() }
    }
}

impl<T: Real> Add for Estimate<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Estimate { value: self.value + o.value, error: self.error + o.error }
    }
}

impl<T: Real> Mul<T> for Estimate<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Estimate { value: self.value * k, error: self.error * k.abs() }
    }
}

/// Absolute and relative targets. The relative target is measured against
/// the L¹ norm of the integrand, so integrals that cancel to zero still
/// terminate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Tolerance { abs, rel }
    }

    pub fn target(&self, _value: T, l1: T) -> T {
        self.abs.max(self.rel * l1)
    }

    /// Tolerance handed to integrals nested inside this one.
    pub fn inner(&self) -> Self {
        Tolerance { abs: self.abs * lit(0.05), rel: self.rel * lit(0.1) }
    }
}

/// Quadrature configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSpec<T> {
    /// Target relative error (≥ 1e-12).
    pub rel_tol: T,
    pub abs_tol: T,
    /// Maximum bisection depth of any panel.
    pub max_subdivision_depth: u32,
    /// Radius beyond which radial integrals switch to the algebraic tail map.
    pub truncation_radius: T,
    /// Radius of the Taylor core in principal-value integrals (≤ 1e-2).
    pub pv_excision: T,
    /// Angular resolution: n = 2 starts from `angular_points / 8` panels,
    /// n = 3 from `angular_points / 16` panels per angle.
    pub angular_points: usize,
}

impl<T: Real> Default for QuadSpec<T> {
    fn default() -> Self {
        QuadSpec {
            rel_tol: lit(1e-8),
            abs_tol: lit(1e-11),
            max_subdivision_depth: 40,
            truncation_radius: lit(50.0),
            pv_excision: lit(1e-4),
            angular_points: 64,
        }
    }
}

impl<T: Real> QuadSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Usage(m));
        if !(self.rel_tol >= lit(1e-12)) {
            return bad(format!("rel_tol = {} must be ≥ 1e-12", self.rel_tol));
        }
        if !(self.abs_tol > T::zero()) {
            return bad(format!("abs_tol = {} must be positive", self.abs_tol));
        }
        if !(self.truncation_radius >= lit(10.0)) {
            return bad(format!("truncation_radius = {} must be ≥ 10", self.truncation_radius));
        }
        if !(self.pv_excision > T::zero() && self.pv_excision <= lit(1e-2)) {
            return bad(format!("pv_excision = {} must lie in (0, 1e-2]", self.pv_excision));
        }
        if self.max_subdivision_depth == 0 || self.max_subdivision_depth > 60 {
            return bad("max_subdivision_depth must lie in 1..=60".into());
        }
        if self.angular_points < 8 {
            return bad("angular_points must be ≥ 8".into());
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance<T> {
        Tolerance::new(self.abs_tol, self.rel_tol)
    }

    pub fn limits(&self) -> Limits {
        Limits { max_depth: self.max_subdivision_depth, max_panels: 4000 }
    }

    /// Initial number of angular panels in dimension `n`.
    pub fn angular_panels(&self, n: usize) -> usize {
        match n {
            2 => (self.angular_points / 8).max(2),
            _ => (self.angular_points / 16).max(2),
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Decay model of an integrand: `|f(y)| ≤ C |y|^{-decay_exponent}` for large
/// `|y|`, or `f(y) = 0` for `|y| > support_radius` when that is known.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailModel<T> {
    pub decay_exponent: T,
    pub constant_bound: T,
    #[serde(default)]
    pub support_radius: Option<T>,
}

impl<T: Real> TailModel<T> {
    pub fn decaying(decay_exponent: T, constant_bound: T) -> Self {
        TailModel { decay_exponent, constant_bound, support_radius: None }
    }

    pub fn compact(support_radius: T) -> Self {
        TailModel { decay_exponent: T::infinity(), constant_bound: T::zero(), support_radius: Some(support_radius) }
    }

    /// Decay exponent of a radial ray integrand `ρ^{n-1} ρ^{-extra} f`.
    pub fn ray_decay(&self, n: usize, extra: T) -> T {
        self.decay_exponent + extra - lit((n - 1) as f64)
    }

    /// Bound on `∫_{|y|>R} |f| dy` implied by the model in dimension `n`.
    pub fn tail_bound(&self, n: usize, radius: T) -> T {
        if let Some(rs) = self.support_radius {
            if radius >= rs {
                return T::zero();
            }
        }
        let p = self.ray_decay(n, T::zero());
        if p <= T::one() {
            return T::infinity();
        }
        self.constant_bound * crate::special::sphere_area::<T>(n) * radius.powf(T::one() - p) / (p - T::one())
    }
}

/// Where an integrand changes character: a family of concentric spheres
/// (bump widths, ball boundaries) or a plane {y₁ = x1} (one-dimensional
/// transitions). Used only to place panel boundaries.
#[derive(Clone, Debug, PartialEq)]
pub enum Feature<T> {
    Sphere { center: Point<T>, radii: Vec<T> },
    Plane { x1: T },
}

impl<T: Real> Feature<T> {
    pub fn sphere(center: Point<T>, radii: Vec<T>) -> Self {
        Feature::Sphere { center, radii }
    }

    /// Image under y ↦ y_*.
    pub fn reflected(&self) -> Self {
        match self {
            Feature::Sphere { center, radii } => Feature::Sphere { center: center.reflect(), radii: radii.clone() },
            Feature::Plane { x1 } => Feature::Plane { x1: -*x1 },
        }
    }

    /// Image under the point reflection y ↦ 2x - y.
    pub fn mirrored_through(&self, x: &Point<T>) -> Self {
        match self {
            Feature::Sphere { center, radii } => Feature::Sphere { center: *x + (*x - *center), radii: radii.clone() },
            Feature::Plane { x1 } => Feature::Plane { x1: x.x1() + x.x1() - *x1 },
        }
    }
}

/// Direction caps around every sphere feature seen from `origin`.
pub fn feature_caps<T: Real>(origin: &Point<T>, features: &[Feature<T>]) -> Vec<Cap<T>> {
    let mut caps = Vec::new();
    for f in features {
        if let Feature::Sphere { center, radii } = f {
            let d = center.dist(origin);
            if d <= T::zero() {
                continue;
            }
            let axis = (*center - *origin) * (T::one() / d);
            for &r in radii {
                if r < d {
                    caps.push(Cap { axis, half_angle: (r / d).asin() });
                }
            }
        }
    }
    caps
}

/// Distances along the ray `origin + ρ·dir` at which a feature is crossed.
pub fn ray_breaks<T: Real>(origin: &Point<T>, dir: &Point<T>, features: &[Feature<T>], out: &mut Vec<T>) {
    for f in features {
        match f {
            Feature::Sphere { center, radii } => {
                let oc = *center - *origin;
                let b = oc.dot(dir);
                if b > T::zero() {
                    out.push(b);
                }
                let c = oc.norm_sq();
                for &r in radii {
                    let disc = b * b - c + r * r;
                    if disc > T::zero() {
                        let root = disc.sqrt();
                        out.push(b - root);
                        out.push(b + root);
                    }
                }
            }
            Feature::Plane { x1 } => {
                if dir[0] != T::zero() {
                    out.push((*x1 - origin.x1()) / dir[0]);
                }
            }
        }
    }
}

/// Radial weight carried by a ray integral.
#[derive(Clone, Copy, Debug)]
pub enum RayWeight<T> {
    None,
    /// `(ρ² - r²)^{-s}` on ρ > r.
    Poisson {
        r: T,
        s: T,
    },
}

/// Shape of a one-dimensional radial integral.
#[derive(Clone, Copy, Debug)]
pub struct Ray<T> {
    pub lo: T,
    /// `None` means ∞.
    pub hi: Option<T>,
    pub weight: RayWeight<T>,
    /// Decay exponent of the full ray integrand; must exceed one when the
    /// ray is unbounded or longer than the truncation radius.
    pub tail_decay: T,
    /// The integrand behaves like ρ^β at ρ = 0 (requires `lo = 0`).
    pub near_power: Option<T>,
}

impl<T: Real> Ray<T> {
    pub fn new(lo: T, hi: Option<T>, tail_decay: T) -> Self {
        Ray { lo, hi, weight: RayWeight::None, tail_decay, near_power: None }
    }
}

/// ∫_lo^hi φ(ρ) w(ρ) dρ along one ray.
///
/// Bounded rays longer than the truncation radius are cut there and the
/// remainder is integrated through the algebraic tail map.
pub fn ray_integral<T: Real>(
    mut phi: impl FnMut(T) -> T,
    ray: &Ray<T>,
    breaks: &[T],
    q: &QuadSpec<T>,
    tol: Tolerance<T>,
) -> Outcome<T> {
    let limits = q.limits();
    let mut out = Outcome::empty();
    let Ray { lo, hi, weight, tail_decay, near_power } = *ray;
    let mut start = lo;
    if let Some(h) = hi {
        if !(h > lo) {
            return out;
        }
    }
    let end = hi.unwrap_or(T::infinity());
    let w = |rho: T| match weight {
        RayWeight::None => T::one(),
        RayWeight::Poisson { r, s } => (rho * rho - r * r).powf(-s),
    };
    if let RayWeight::Poisson { r, s } = weight {
        let near_end = end.min(r + r);
        out = out.plus(maps::left_algebraic(
            |rho| Estimate::exact(phi(rho) * (rho + r).powf(-s)),
            r,
            near_end,
            s,
            breaks,
            tol,
            limits,
        ));
        start = near_end;
    } else if let Some(beta) = near_power {
        if lo == T::zero() && beta < T::zero() {
            let near_end = end.min(T::one());
            out = out.plus(maps::power_weight(
                |rho| Estimate::exact(phi(rho) * rho.powf(-beta)),
                T::zero(),
                near_end,
                beta,
                breaks,
                tol,
                limits,
            ));
            start = near_end;
        }
    }
    if !(end > start) {
        return out;
    }
    let r_tr = q.truncation_radius.max(start);
    if end <= r_tr + r_tr {
        out = out.plus(maps::finite(|rho| Estimate::exact(phi(rho) * w(rho)), start, end, breaks, 1, tol, limits));
        return out;
    }
    out = out.plus(maps::finite(|rho| Estimate::exact(phi(rho) * w(rho)), start, r_tr, breaks, 1, tol, limits));
    if !(tail_decay > T::one()) {
        out.converged = false;
        out.estimate.value = T::nan();
        return out;
    }
    let mut tail_breaks = breaks.to_vec();
    tail_breaks.push(end);
    out.plus(maps::tail(
        |rho| Estimate::exact(if rho < end { phi(rho) * w(rho) } else { T::zero() }),
        r_tr,
        tail_decay,
        &tail_breaks,
        tol,
        limits,
    ))
}

/// Converts an outcome into a checked estimate.
pub fn finish<T: Real>(out: Outcome<T>) -> Result<Estimate<T>> {
    let e = out.estimate;
    if out.converged && e.value.is_finite() && e.error.is_finite() {
        Ok(e)
    } else {
        Err(Error::NotConverged {
            estimate: e.value.to_f64().unwrap_or(f64::NAN),
            error: e.error.to_f64().unwrap_or(f64::NAN),
        })
    }
}

fn note<T>(flag: &Cell<bool>, out: &Outcome<T>) {
    if !out.converged {
        flag.set(false);
    }
}

fn finish_nested<T: Real>(mut out: Outcome<T>, inner_ok: &Cell<bool>) -> Result<Estimate<T>> {
    out.converged &= inner_ok.get();
    finish(out)
}

fn divergent<T: Real>(what: &str, exponent: T, limit: T) -> Error {
    Error::Divergent {
        what: what.to_string(),
        exponent: exponent.to_f64().unwrap_or(f64::NAN),
        limit: limit.to_f64().unwrap_or(f64::NAN),
    }
}

/// Geometry of a polar-coordinate integral.
#[derive(Clone, Debug)]
pub struct Polar<'a, T> {
    pub origin: Point<T>,
    pub region: Hemisphere,
    /// Integration starts at |y - origin| = inner_radius.
    pub inner_radius: T,
    pub weight: RayWeight<T>,
    pub tail: TailModel<T>,
    pub features: &'a [Feature<T>],
    /// Behaviour ρ^β of the ray integrand (Jacobian included) at the origin.
    pub near_power: Option<T>,
}

/// ∫ f(y) w(|y-o|) dy over {|y - o| > inner_radius} (restricted to
/// {y₁ > o₁} for [`Hemisphere::Upper`]).
pub fn integrate_polar<T, F>(job: &Polar<'_, T>, p: &Params<T>, q: &QuadSpec<T>, f: F) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(&Point<T>) -> T,
{
    let n = p.n();
    job.origin.check_dim(n)?;
    let extra = match job.weight {
        RayWeight::None => T::zero(),
        RayWeight::Poisson { s, .. } => s + s,
    };
    let tail_decay = job.tail.ray_decay(n, extra);
    let hi = job.tail.support_radius.map(|r| r + job.origin.norm());
    if hi.is_none() && !(tail_decay > T::one()) {
        return Err(divergent("radial tail", -tail_decay, -T::one()));
    }
    let caps = feature_caps(&job.origin, job.features);
    let tol = q.tolerance();
    let inner_ok = Cell::new(true);
    let out = sphere::integrate_directions(n, job.region, &caps, q.angular_panels(n), tol, q.limits(), |w| {
        let mut radial = vec![job.inner_radius + job.inner_radius];
        ray_breaks(&job.origin, w, job.features, &mut radial);
        let spec = Ray { lo: job.inner_radius, hi, weight: job.weight, tail_decay, near_power: job.near_power };
        let ray = ray_integral(
            |rho| {
                let y = job.origin.along(w, rho);
                f(&y) * rho.powi(n as i32 - 1)
            },
            &spec,
            &radial,
            q,
            tol.inner(),
        );
        note(&inner_ok, &ray);
        ray.estimate
    });
    finish_nested(out, &inner_ok)
}

/// ∫_{ℝⁿ∖B_r(c)} f(y) (|y-c|² - r²)^{-s} dy.
///
/// The radial endpoint singularity is removed exactly by the substitution
/// ρ = r(1 + t^{1/(1-s)}) on (r, 2r).
#[allow(clippy::too_many_arguments)]
pub fn integrate_exterior_ball<T, F>(
    f: F,
    center: &Point<T>,
    r: T,
    s: T,
    p: &Params<T>,
    q: &QuadSpec<T>,
    tail: &TailModel<T>,
    features: &[Feature<T>],
) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(&Point<T>) -> T,
{
    if !(r > T::zero()) {
        return Err(Error::Domain(format!("ball radius must be positive, got {r}")));
    }
    let job = Polar {
        origin: *center,
        region: Hemisphere::Full,
        inner_radius: r,
        weight: RayWeight::Poisson { r, s },
        tail: *tail,
        features,
        near_power: None,
    };
    integrate_polar(&job, p, q, f)
}

/// ∫_0^ε D(ρ) ρ^{-1-2s} dρ for a smooth second difference D(ρ) = O(ρ²),
/// from a two-point fit of D/ρ² at ε and ε/2.
pub fn taylor_core<T: Real>(second_diff: impl Fn(T) -> T, eps: T, s: T) -> Estimate<T> {
    // q(ρ) = D(ρ)/ρ² = a + bρ² + O(ρ⁴); ∫_0^ε q(ρ) ρ^{1-2s} dρ.
    let half = eps * lit(0.5);
    let q1 = second_diff(eps) / (eps * eps);
    let q2 = second_diff(half) / (half * half);
    let a = (lit::<T>(4.0) * q2 - q1) / lit(3.0);
    let b = (q1 - q2) / (lit::<T>(0.75) * eps * eps);
    let two = lit::<T>(2.0);
    let lead = a * eps.powf(two - two * s) / (two - two * s);
    let corr = b * eps.powf(lit::<T>(4.0) - two * s) / (lit::<T>(4.0) - two * s);
    Estimate { value: lead + corr, error: corr.abs() + T::epsilon() * lead.abs() * lit(100.0) }
}

/// (2u(x) - u(x+ρω) - u(x-ρω)) / ρ² along direction ω, with the rounding
/// error of the difference as the committed error: an absolute loss of
/// order ε(|u| + |x||∇u|), amplified by ρ⁻².
pub fn second_difference_quotient<'a, T: Real, U: Fn(&Point<T>) -> T>(
    u: &'a U,
    x: &'a Point<T>,
    w: &'a Point<T>,
    ux: T,
) -> impl Fn(T) -> Estimate<T> + 'a {
    let two = lit::<T>(2.0);
    let xnorm = x.norm();
    move |rho: T| {
        let (a, b) = (u(&x.along(w, rho)), u(&x.along(w, -rho)));
        let r2 = rho * rho;
        let slope = (a - b).abs() / (rho + rho);
        let noise =
            T::epsilon() * (lit::<T>(8.0) * (two * ux.abs() + a.abs() + b.abs()) + lit::<T>(4.0) * xnorm * slope);
        Estimate { value: (two * ux - a - b) / r2, error: noise / r2 }
    }
}

/// Growth model of the field inside a principal-value integral:
/// `|u(y)| ≤ C (1 + |y|)^{growth}` or compact support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Growth<T> {
    pub exponent: T,
    pub support_radius: Option<T>,
}

/// ½ ∫_{ℝⁿ} (2u(x) - u(x+z) - u(x-z)) |z|^{-(n+2s)} dz.
///
/// Written in polar coordinates over half the sphere. The core |z| < ε₀ is
/// integrated from a two-point Taylor fit of the second difference, the
/// rest of |z| < 1 with the weight ρ^{1-2s} absorbed by substitution, and the
/// tail of the 2u(x) term is integrated exactly.
pub fn integrate_pv_second_difference<T, U>(
    u: U,
    x: &Point<T>,
    p: &Params<T>,
    q: &QuadSpec<T>,
    growth: &Growth<T>,
    features: &[Feature<T>],
) -> Result<Estimate<T>>
where
    T: Real,
    U: Fn(&Point<T>) -> T,
{
    let n = p.n();
    x.check_dim(n)?;
    let s = p.s();
    let two = lit::<T>(2.0);
    let ux = u(x);
    // Reach of the support seen from x.
    let reach = growth.support_radius.map(|rs| rs + x.norm());
    if reach.is_none() && !(growth.exponent < two * s) {
        return Err(divergent("second-difference tail (field not in L_s)", growth.exponent, two * s));
    }
    let eps = q.pv_excision;
    let split = T::one().max(eps * two);
    let mut mirrored: Vec<Feature<T>> = features.to_vec();
    mirrored.extend(features.iter().map(|f| f.mirrored_through(x)));
    let caps = feature_caps(x, &mirrored);
    let tol = q.tolerance();
    let inner = tol.inner();
    let limits = q.limits();
    let inner_ok = Cell::new(true);
    let out = sphere::integrate_directions(n, Hemisphere::Upper, &caps, q.angular_panels(n), tol, limits, |w| {
        let mut radial = Vec::new();
        ray_breaks(x, w, &mirrored, &mut radial);
        let d2 = |rho: T| two * ux - u(&x.along(w, rho)) - u(&x.along(w, -rho));
        let core = taylor_core(d2, eps, s);
        let quotient = second_difference_quotient(&u, x, w, ux);
        let mid = maps::power_weight(quotient, eps, split, T::one() - two * s, &radial, inner, limits);
        note(&inner_ok, &mid);
        let mut total = mid.estimate + core;
        let far_weight = |rho: T| rho.powf(-T::one() - two * s);
        match reach {
            Some(r_end) if r_end <= split => {
                total = total + Estimate::exact(two * ux * split.powf(-two * s) / (two * s));
            }
            Some(r_end) => {
                let far = maps::finite(
                    |rho| Estimate::exact(d2(rho) * far_weight(rho)),
                    split,
                    r_end,
                    &radial,
                    1,
                    inner,
                    limits,
                );
                note(&inner_ok, &far);
                total = total + far.estimate + Estimate::exact(two * ux * r_end.powf(-two * s) / (two * s));
            }
            None => {
                let r_tr = q.truncation_radius.max(split);
                let far = maps::finite(
                    |rho| Estimate::exact(d2(rho) * far_weight(rho)),
                    split,
                    r_tr,
                    &radial,
                    1,
                    inner,
                    limits,
                );
                note(&inner_ok, &far);
                let tail_decay = T::one() + two * s - growth.exponent;
                let tail = maps::tail(
                    |rho| Estimate::exact(-(u(&x.along(w, rho)) + u(&x.along(w, -rho))) * far_weight(rho)),
                    r_tr,
                    tail_decay,
                    &radial,
                    inner,
                    limits,
                );
                note(&inner_ok, &tail);
                total =
                    total + far.estimate + tail.estimate + Estimate::exact(two * ux * r_tr.powf(-two * s) / (two * s));
            }
        }
        total
    });
    finish_nested(out, &inner_ok)
}

/// Excision-limit route: ∫_{|z|>ε} (u(x) - u(x+z)) |z|^{-(n+2s)} dz for
/// ε = ε₁, ε₁/2, ε₁/4 on the full sphere without pairing ±z, extrapolated to
/// ε → 0 in powers ε^{2-2s}, ε^{4-2s}.
pub fn integrate_pv_excision<T, U>(
    u: U,
    x: &Point<T>,
    p: &Params<T>,
    q: &QuadSpec<T>,
    growth: &Growth<T>,
    features: &[Feature<T>],
) -> Result<Estimate<T>>
where
    T: Real,
    U: Fn(&Point<T>) -> T,
{
    let n = p.n();
    x.check_dim(n)?;
    let s = p.s();
    let two = lit::<T>(2.0);
    let ux = u(x);
    let reach = growth.support_radius.map(|rs| rs + x.norm());
    if reach.is_none() && !(growth.exponent < two * s) {
        return Err(divergent("excision tail (field not in L_s)", growth.exponent, two * s));
    }
    let caps = feature_caps(x, features);
    let tol = q.tolerance();
    let limits = q.limits();
    let eps1 = (q.pv_excision * lit(100.0)).min(lit(0.02));
    let mut values = [T::zero(); 3];
    let mut error = T::zero();
    for (k, slot) in values.iter_mut().enumerate() {
        let inner_ok = Cell::new(true);
        let eps = eps1 / lit((1u32 << k) as f64);
        let out = sphere::integrate_directions(n, Hemisphere::Full, &caps, q.angular_panels(n), tol, limits, |w| {
            let g = |rho: T| (ux - u(&x.along(w, rho))) * rho.powf(-T::one() - two * s);
            let mut br = Vec::new();
            ray_breaks(x, w, features, &mut br);
            br.extend([eps * two, eps * lit(8.0), lit(0.5)]);
            match reach {
                Some(r_end) => {
                    let r_end = r_end.max(eps);
                    let a = maps::finite(|r| Estimate::exact(g(r)), eps, r_end, &br, 1, tol.inner(), limits);
                    note(&inner_ok, &a);
                    a.estimate + Estimate::exact(ux * r_end.powf(-two * s) / (two * s))
                }
                None => {
                    let r_tr = q.truncation_radius;
                    let a = maps::finite(|r| Estimate::exact(g(r)), eps, r_tr, &br, 1, tol.inner(), limits);
                    let b = maps::tail(
                        |r| Estimate::exact(g(r)),
                        r_tr,
                        T::one() + two * s - growth.exponent,
                        &br,
                        tol.inner(),
                        limits,
                    );
                    note(&inner_ok, &a);
                    note(&inner_ok, &b);
                    a.estimate + b.estimate
                }
            }
        });
        let e = finish_nested(out, &inner_ok)?;
        *slot = e.value;
        error = error + e.error;
    }
    // I(ε) = I₀ + A ε^α + B ε^β with α = 2-2s, β = 4-2s; solve on ε, ε/2, ε/4.
    let alpha = two - two * s;
    let beta = lit::<T>(4.0) - two * s;
    let ra = two.powf(-alpha);
    let rb = two.powf(-beta);
    let w0 = values[1] - rb * values[0];
    let w1 = values[2] - rb * values[1];
    let i0 = (w1 - ra * w0) / ((T::one() - rb) * (T::one() - ra));
    let i0_lower = (values[2] - ra * values[1]) / (T::one() - ra);
    Ok(Estimate { value: i0, error: error * lit(4.0) + (i0 - i0_lower).abs() })
}

/// ∫_{ℝⁿ₊} f(z) dz in polar coordinates about the origin over the upper
/// half of the sphere, so that the tail is a single algebraic ray tail.
///
/// `near_power` declares `|f(z)| ~ |z|^γ` at the origin, handled by a
/// power-weight substitution.
pub fn integrate_halfspace_weighted<T, F>(
    f: F,
    p: &Params<T>,
    q: &QuadSpec<T>,
    tail: &TailModel<T>,
    features: &[Feature<T>],
    near_power: Option<T>,
) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(&Point<T>) -> T,
{
    let n = p.n();
    let job = Polar {
        origin: Point::origin(n),
        region: Hemisphere::Upper,
        inner_radius: T::zero(),
        weight: RayWeight::None,
        tail: *tail,
        features,
        near_power: near_power.map(|g| g + lit((n - 1) as f64)),
    };
    integrate_polar(&job, p, q, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{gamma_ns, halfspace_integral_closed};
    use std::time::Instant;

    fn params(n: usize, s: f64) -> Params<f64> {
        Params::new(n, s).unwrap()
    }

    #[test]
    fn halfspace_integral_matches_closed_form() {
        for n in 1..=3 {
            for s in [0.25, 0.5, 0.75] {
                let p = params(n, s);
                let q = QuadSpec::default();
                let e1 = Point::on_axis(n, 1.0);
                let t = Instant::now();
                let v = integrate_halfspace_weighted(
                    |z: &Point<f64>| (e1 + *z).norm().powf(-p.kernel_exponent()),
                    &p,
                    &q,
                    &TailModel::decaying(p.kernel_exponent(), 1.0),
                    &[Feature::sphere(e1 * -1.0, vec![1.0, 2.0])],
                    None,
                )
                .unwrap();
                let exact = halfspace_integral_closed(&p);
                eprintln!("n={n} s={s} {v:?} exact={exact} {:?}", t.elapsed());
                assert!((v.value - exact).abs() <= 1e-7 * exact);
            }
        }
    }

    #[test]
    fn poisson_kernel_is_normalised() {
        for n in 1..=3 {
            for s in [0.25, 0.5, 0.75] {
                let p = params(n, s);
                let q = QuadSpec::default();
                let o = Point::origin(n);
                let v = integrate_exterior_ball(
                    |y: &Point<f64>| y.norm().powi(-(n as i32)),
                    &o,
                    1.0,
                    s,
                    &p,
                    &q,
                    &TailModel::decaying(n as f64, 1.0),
                    &[],
                )
                .unwrap();
                let total = gamma_ns(&p) * v.value;
                eprintln!("n={n} s={s} {total} err={}", v.error);
                assert!((total - 1.0).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn second_difference_annihilates_affine_functions() {
        for n in 1..=3 {
            let p = params(n, 0.75);
            let q = QuadSpec::default();
            let x = Point::on_axis(n, 0.4);
            let c = integrate_pv_second_difference(
                |_| 2.0,
                &x,
                &p,
                &q,
                &Growth { exponent: 0.0, support_radius: None },
                &[],
            )
            .unwrap();
            let a = integrate_pv_second_difference(
                |y| 3.0 * y.x1() - 1.0,
                &x,
                &p,
                &q,
                &Growth { exponent: 1.0, support_radius: None },
                &[],
            )
            .unwrap();
            assert!(c.value.abs() <= c.error && a.value.abs() <= a.error.max(1e-9), "{c:?} {a:?}");
            assert!(a.error < 1e-7);
        }
    }

    #[test]
    fn growth_beyond_two_s_is_rejected() {
        let p = params(1, 0.5);
        let r = integrate_pv_second_difference(
            |y| y.x1(),
            &Point::on_axis(1, 0.5),
            &p,
            &QuadSpec::default(),
            &Growth { exponent: 1.0, support_radius: None },
            &[],
        );
        assert!(matches!(r, Err(Error::Divergent { .. })));
    }

    #[test]
    fn second_difference_and_excision_routes_agree() {
        for n in 1..=2 {
            for s in [0.25, 0.5, 0.75] {
                let p = params(n, s);
                let q = QuadSpec::default();
                let c = Point::on_axis(n, 1.0);
                let u = |y: &Point<f64>| (-y.dist_sq(&c) / 0.25).exp();
                let growth = Growth { exponent: 0.0, support_radius: Some(1.0 + 0.5 * 6.5) };
                let feats = [Feature::sphere(c, vec![0.5, 1.5, 3.0])];
                let x = Point::on_axis(n, 0.7);
                let t = Instant::now();
                let a = integrate_pv_second_difference(u, &x, &p, &q, &growth, &feats).unwrap();
                let t1 = t.elapsed();
                let b = integrate_pv_excision(u, &x, &p, &q, &growth, &feats).unwrap();
                eprintln!("n={n} s={s} {a:?} {b:?} {t1:?} {:?}", t.elapsed());
                assert!((a.value - b.value).abs() <= 1e-6 * a.value.abs().max(1.0));
            }
        }
    }
}
