//! Pointwise fractional Laplacians: the classical principal-value definition
//! and the half-space definition for antisymmetric functions, with the kernel
//! bounds and limit identities that connect them.

use std::cell::Cell;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{anorm, FieldMeta, ScalarField, Smoothness};
use crate::kernel;
use crate::quad::{self, sphere, Hemisphere, Ray};
use crate::special::{c_ns, gamma};
use crate::{Estimate, Params, Point, QuadSpec};

/// Evaluation points closer than this to {x₁ = 0} are refused by
/// [`antisym_fraclap`].
pub const X_MIN: f64 = 1e-3;

/// A fractional Laplacian value and how it was computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FracLapValue {
    pub value: f64,
    pub error_bound: f64,
    pub route: Route,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Classical definition, second-difference form.
    SecondDifference,
    /// Classical definition, extrapolated excision limits.
    Excision,
    /// Half-space definition with the kernel difference.
    Antisymmetric,
}

/// `|x - y|^{-(n+2s)} - |x_* - y|^{-(n+2s)}` for x, y in the closed half-space.
pub fn kernel_difference(x: &Point, y: &Point, p: &Params) -> Result<f64> {
    x.check_dim(p.n())?;
    y.check_dim(p.n())?;
    if !(x.x1() >= 0.0 && y.x1() >= 0.0) {
        return Err(Error::Domain("kernel difference needs x₁ ≥ 0 and y₁ ≥ 0".into()));
    }
    if x == y {
        return Err(Error::Singular("kernel difference at x = y".into()));
    }
    Ok(kernel::kernel_difference(x, y, p.kernel_exponent()))
}

/// Number of sampled pairs violating the two-sided kernel bound.
///
/// Pairs are drawn in (0, 5]ⁿ ∩ ℝⁿ₊ with one in four placed within 1e-3 of
/// the plane. A relative rounding allowance of 8ε is granted.
pub fn sandwich_violations(p: &Params, pairs: usize, seed: u64) -> usize {
    let n = p.n();
    let q = p.kernel_exponent();
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut unit = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let slack = 8.0 * f64::EPSILON;
    let mut violations = 0;
    for k in 0..pairs {
        let mut draw = |near_plane: bool| {
            let mut c = [0.0; 3];
            c[0] = if near_plane { 1e-3 * (1.0 - unit()) } else { 5.0 * (1.0 - unit()) };
            for ck in c.iter_mut().take(n).skip(1) {
                *ck = 10.0 * unit() - 5.0;
            }
            Point::new(&c[..n]).expect("dimension")
        };
        let x = draw(k % 4 == 0);
        let y = draw(false);
        if x == y {
            continue;
        }
        let kd = kernel::kernel_difference(&x, &y, q);
        let (lo, hi) = kernel::kernel_bounds(&x, &y, q);
        if !(kd >= lo * (1.0 - slack) && kd <= hi * (1.0 + slack) && kd > 0.0) {
            violations += 1;
        }
    }
    violations
}

fn require_smooth(meta: &FieldMeta) -> Result<()> {
    if meta.smoothness < Smoothness::Smooth {
        return Err(Error::Hypothesis("the field must be smooth near the evaluation point".into()));
    }
    Ok(())
}

/// Classical fractional Laplacian `c_{n,s} PV∫ (u(x) - u(y)) |x-y|^{-(n+2s)} dy`,
/// computed in the second-difference form.
pub fn classical_fraclap(u: &impl ScalarField, x: &Point, p: &Params, q: &QuadSpec) -> Result<FracLapValue> {
    classical_with(u, x, p, q, Route::SecondDifference)
}

/// The classical value through extrapolated excision limits (cross-check).
pub fn classical_fraclap_excision(u: &impl ScalarField, x: &Point, p: &Params, q: &QuadSpec) -> Result<FracLapValue> {
    classical_with(u, x, p, q, Route::Excision)
}

fn classical_with(u: &impl ScalarField, x: &Point, p: &Params, q: &QuadSpec, route: Route) -> Result<FracLapValue> {
    q.validate()?;
    x.check_dim(p.n())?;
    let meta = u.meta();
    require_smooth(&meta)?;
    let limit = 2.0 * p.s();
    if meta.support_radius.is_none() && !(meta.decay_exponent < limit) {
        return Err(Error::Divergent { what: "ℒₛ-norm".into(), exponent: meta.decay_exponent, limit });
    }
    let features = u.features(p.n());
    let f = |y: &Point| u.value(y);
    let e = match route {
        Route::Excision => quad::integrate_pv_excision(f, x, p, q, &meta.growth(), &features)?,
        _ => quad::integrate_pv_second_difference(f, x, p, q, &meta.growth(), &features)?,
    };
    let c = c_ns(p);
    Ok(FracLapValue { value: c * e.value, error_bound: c * e.error, route })
}

/// Fractional Laplacian of an antisymmetric function by the half-space
/// definition
/// `c_{n,s} lim ∫_{ℝⁿ₊∖B_ε(x)} K(x,y)(u(x) - u(y)) dy + (c_{1,s}/s) u(x) x₁^{-2s}`.
///
/// Polar coordinates about x: inside B_δ(x), δ = min(x₁/2, 1), the singular
/// part is the classical second difference and the reflected part of K is
/// regular; outside, each ray runs until it leaves the half-space.
pub fn antisym_fraclap(u: &impl ScalarField, x: &Point, p: &Params, q: &QuadSpec) -> Result<FracLapValue> {
    q.validate()?;
    let n = p.n();
    x.check_dim(n)?;
    let meta = u.meta();
    if !meta.antisymmetric {
        return Err(Error::Hypothesis("the half-space definition needs an antisymmetric field".into()));
    }
    require_smooth(&meta)?;
    let limit = 1.0 + 2.0 * p.s();
    if meta.support_radius.is_none() && !(meta.decay_exponent < limit) {
        return Err(Error::Divergent { what: "𝒜ₛ-norm".into(), exponent: meta.decay_exponent, limit });
    }
    if !(x.x1() >= X_MIN) {
        return Err(Error::Domain(format!(
            "x₁ = {} is below the floor {X_MIN}; the pointwise bound degenerates as x₁ → 0",
            x.x1()
        )));
    }
    let s = p.s();
    let kexp = p.kernel_exponent();
    let two_s = 2.0 * s;
    let ux = u.value(x);
    let xs = x.reflect();
    let delta = (0.5 * x.x1()).min(1.0);
    let eps = q.pv_excision.min(0.25 * delta);
    let tol = q.tolerance();
    let inner = tol.inner();
    let limits = q.limits();
    let features = u.features(n);
    let mut mirrored = features.clone();
    mirrored.extend(features.iter().map(|f| f.mirrored_through(x)));
    let caps = quad::feature_caps(x, &features);
    let tail_decay = 2.0 + two_s - meta.decay_exponent.max(0.0);
    let ok = Cell::new(true);
    let note = |o: &quad::Outcome<f64>| {
        if !o.converged {
            ok.set(false);
        }
    };

    // Near part, paired directions ±ω over the upper hemisphere.
    let near = sphere::integrate_directions(n, Hemisphere::Upper, &caps, q.angular_panels(n), tol, limits, |w| {
        let mut br = Vec::new();
        quad::ray_breaks(x, w, &mirrored, &mut br);
        let d2 = |rho: f64| 2.0 * ux - u.value(&x.along(w, rho)) - u.value(&x.along(w, -rho));
        let core = quad::taylor_core(d2, eps, s);
        let uf = |y: &Point| u.value(y);
        let quotient = quad::second_difference_quotient(&uf, x, w, ux);
        let mid = quad::maps::power_weight(quotient, eps, delta, 1.0 - two_s, &br, inner, limits);
        note(&mid);
        let reflected = quad::maps::finite(
            |rho: f64| {
                let (yp, ym) = (x.along(w, rho), x.along(w, -rho));
                let v = (ux - u.value(&yp)) * xs.dist(&yp).powf(-kexp) + (ux - u.value(&ym)) * xs.dist(&ym).powf(-kexp);
                Estimate::exact(-v * rho.powi(n as i32 - 1))
            },
            0.0,
            delta,
            &br,
            1,
            inner,
            limits,
        );
        note(&reflected);
        core + mid.estimate + reflected.estimate
    });
    note(&near);

    // Far part over all directions; rays pointing into {y₁ < 0} stop at the plane.
    let far = sphere::integrate_directions(n, Hemisphere::Full, &caps, q.angular_panels(n), tol, limits, |w| {
        let hi = if w[0] < 0.0 { Some(x.x1() / -w[0]) } else { None };
        let mut br = Vec::new();
        quad::ray_breaks(x, w, &features, &mut br);
        let ray = Ray::new(delta, hi, tail_decay);
        let o = quad::ray_integral(
            |rho| {
                let y = x.along(w, rho);
                if y.x1() <= 0.0 {
                    return 0.0;
                }
                kernel::kernel_difference(x, &y, kexp) * (ux - u.value(&y)) * rho.powi(n as i32 - 1)
            },
            &ray,
            &br,
            q,
            inner,
        );
        note(&o);
        o.estimate
    });
    note(&far);
    let total = near.estimate + far.estimate;
    if !ok.get() || !total.value.is_finite() {
        return Err(Error::NotConverged { estimate: total.value, error: total.error });
    }
    let c = c_ns(p);
    let c1 = c_ns(&p.in_dimension(1)?);
    let boundary = c1 / s * ux * x.x1().powf(-two_s);
    Ok(FracLapValue { value: c * total.value + boundary, error_bound: c * total.error, route: Route::Antisymmetric })
}

/// ∫_{ℝⁿ₊} |e₁ + z|^{-(n+2s)} dz by quadrature.
pub fn halfspace_integral(p: &Params, q: &QuadSpec) -> Result<Estimate> {
    q.validate()?;
    let n = p.n();
    let k = p.kernel_exponent();
    let e1 = Point::on_axis(n, 1.0);
    quad::integrate_halfspace_weighted(
        |z| (e1 + *z).norm().powf(-k),
        p,
        q,
        &quad::TailModel::decaying(k, 1.0),
        &[quad::Feature::sphere(e1 * -1.0, vec![1.0, 2.0])],
        None,
    )
}

/// Largest discrepancy between the two definitions over `pts`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gap: f64,
    /// Sum of the two routes' error bounds at the worst point.
    pub error_bound: f64,
    pub worst_point: Option<Point>,
}

/// max over `pts` of |classical - antisymmetric|.
pub fn definition_gap(u: &impl ScalarField, pts: &[Point], p: &Params, q: &QuadSpec) -> Result<GapReport> {
    let meta = u.meta();
    if meta.support_radius.is_none() {
        return Err(Error::Hypothesis("definition gap needs a compactly supported field".into()));
    }
    let rows: Vec<Result<(f64, f64)>> = pts
        .par_iter()
        .map(|x| {
            let a = classical_fraclap(u, x, p, q)?;
            let b = antisym_fraclap(u, x, p, q)?;
            Ok(((a.value - b.value).abs(), a.error_bound + b.error_bound))
        })
        .collect();
    let mut report = GapReport { gap: 0.0, error_bound: 0.0, worst_point: None };
    for (x, row) in pts.iter().zip(rows) {
        let (gap, err) = row?;
        if report.worst_point.is_none() || gap > report.gap {
            report = GapReport { gap, error_bound: err, worst_point: Some(*x) };
        }
    }
    Ok(report)
}

/// `(lhs, rhs)` with `lhs = (-Δ)^s v(h e₁) / h` and
/// `rhs = -2 c_{n,s} (n+2s) ∫_{ℝⁿ₊} y₁ v(y) |y|^{-(n+2s+2)} dy`.
pub fn derivative_limit_pair(v: &impl ScalarField, p: &Params, q: &QuadSpec, h: f64) -> Result<(f64, f64)> {
    q.validate()?;
    let n = p.n();
    let meta = v.meta();
    if !meta.antisymmetric || meta.support_radius.is_none() {
        return Err(Error::Hypothesis("derivative limit needs compactly supported antisymmetric data".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Domain(format!("h must be positive, got {h}")));
    }
    let fd = 1e-6;
    let slope = (v.value(&Point::on_axis(n, fd)) - v.value(&Point::on_axis(n, -fd))) / (2.0 * fd);
    if slope.abs() > 1e-10 {
        return Err(Error::Hypothesis(format!("∂₁v(0) ≈ {slope:e} must vanish")));
    }
    let lhs = classical_fraclap(v, &Point::on_axis(n, h), p, q)?.value / h;
    let k = p.kernel_exponent();
    let meta_tail = meta.tail(0.0);
    // y₁ v(y) |y|^{-(k+2)} ~ |y|^{2-k} near 0 for v with vanishing slope.
    let integral = quad::integrate_halfspace_weighted(
        |y| {
            let r2 = y.norm_sq();
            if r2 == 0.0 {
                0.0
            } else {
                y.x1() * v.value(y) * r2.powf(-0.5 * (k + 2.0))
            }
        },
        p,
        q,
        &meta_tail,
        &v.features(n),
        Some(2.0 - k),
    )?;
    let rhs = -2.0 * c_ns(p) * k * integral.value;
    Ok((lhs, rhs))
}

/// Ingredients of the pointwise bound |(-Δ)^s u(x)| ≤ C (‖u‖_{C²(B)} + ‖u‖_𝒜ₛ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseBound {
    pub value: f64,
    /// max of |u|, |∇u|, |D²u| on B_{x₁/4}(x) by central differences.
    pub c2_norm: f64,
    pub anorm: f64,
    /// |value| / (c2_norm + anorm), or 0 for the zero field.
    pub ratio: f64,
}

/// Evaluates both sides of the pointwise bound at `x`.
pub fn pointwise_bound_check(u: &impl ScalarField, x: &Point, p: &Params, q: &QuadSpec) -> Result<PointwiseBound> {
    let value = antisym_fraclap(u, x, p, q)?.value;
    let n = p.n();
    let radius = 0.25 * x.x1();
    let h = 1e-3 * radius;
    let steps = 4;
    let mut c2: f64 = 0.0;
    let axis = |k: usize, t: f64| {
        let mut c = [0.0; 3];
        c[k] = t;
        Point::new(&c[..n]).expect("dimension")
    };
    let mut grid = vec![*x];
    for k in 0..n {
        for j in 1..=steps {
            let t = radius * j as f64 / steps as f64;
            grid.push(*x + axis(k, t));
            grid.push(*x + axis(k, -t));
        }
    }
    for z in &grid {
        let u0 = u.value(z);
        c2 = c2.max(u0.abs());
        for i in 0..n {
            let ei = axis(i, h);
            c2 = c2.max(((u.value(&(*z + ei)) - u.value(&(*z - ei))) / (2.0 * h)).abs());
            for j in 0..n {
                let ej = axis(j, h);
                let d = u.value(&(*z + ei + ej)) - u.value(&(*z + ei - ej)) - u.value(&(*z - ei + ej))
                    + u.value(&(*z - ei - ej));
                c2 = c2.max((d / (4.0 * h * h)).abs());
            }
        }
    }
    let a = anorm(u, p, q)?.value;
    let denom = c2 + a;
    let ratio = if denom == 0.0 { 0.0 } else { value.abs() / denom };
    Ok(PointwiseBound { value, c2_norm: c2, anorm: a, ratio })
}

/// Empirical constant in K(x,y) ≤ C R^{-(n+2s+2)} x₁y₁ / (1 + |y|^{n+2s+2})
/// for x ∈ B⁺_{R/2}(a), y ∈ ℝⁿ₊ ∖ B_R(a).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundReport {
    pub max_ratio: f64,
    pub samples: usize,
}

/// Samples admissible pairs with `R ≤ |y - a| ≤ R + y_box`.
pub fn rescaled_kernel_bound_check(
    radius: f64,
    a: &Point,
    p: &Params,
    samples: usize,
    y_box: f64,
    seed: u64,
) -> Result<KernelBoundReport> {
    let n = p.n();
    a.check_dim(n)?;
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::Domain(format!("R must lie in (0, 1), got {radius}")));
    }
    if !(a.norm() <= 2.0 && a.x1() >= 0.0) {
        return Err(Error::Domain("a must lie in the closed upper half of B₂".into()));
    }
    let k = p.kernel_exponent();
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut unit = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let direction = |unit: &mut dyn FnMut() -> f64| loop {
        let mut c = [0.0; 3];
        for ck in c.iter_mut().take(n) {
            *ck = 2.0 * unit() - 1.0;
        }
        let d = Point::new(&c[..n]).expect("dimension");
        let r = d.norm();
        if r > 1e-3 && r <= 1.0 {
            return d * (1.0 / r);
        }
    };
    let mut max_ratio: f64 = 0.0;
    let mut taken = 0;
    while taken < samples {
        let x = a.along(&direction(&mut unit), 0.5 * radius * unit());
        let y = a.along(&direction(&mut unit), radius + y_box * unit());
        if x.x1() < 0.0 || y.x1() <= 0.0 {
            continue;
        }
        taken += 1;
        if x.x1() == 0.0 {
            continue;
        }
        let kd = kernel::kernel_difference(&x, &y, k);
        let ratio = kd * (1.0 + y.norm().powf(k + 2.0)) / (radius.powf(-(k + 2.0)) * x.x1() * y.x1());
        max_ratio = max_ratio.max(ratio);
    }
    Ok(KernelBoundReport { max_ratio, samples: taken })
}

/// Closed form of (-Δ)^s exp(-|x|²) at the origin, `4^s Γ(n/2 + s) / Γ(n/2)`.
pub fn gaussian_at_origin(p: &Params) -> f64 {
    let n2 = 0.5 * p.nf();
    4f64.powf(p.s()) * gamma(n2 + p.s()).expect("positive") / gamma(n2).expect("positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldSpec;

    #[test]
    fn kernel_examples() {
        let p = Params::new(1, 0.5).unwrap();
        let v = kernel_difference(&Point::new(&[1.0]).unwrap(), &Point::new(&[2.0]).unwrap(), &p).unwrap();
        assert!((v - 8.0 / 9.0).abs() < 1e-15);
        let on_plane = kernel_difference(&Point::new(&[0.0]).unwrap(), &Point::new(&[2.0]).unwrap(), &p).unwrap();
        assert_eq!(on_plane, 0.0);
        let same = kernel_difference(&Point::new(&[1.0]).unwrap(), &Point::new(&[1.0]).unwrap(), &p);
        assert!(matches!(same, Err(Error::Singular(_))));
    }

    #[test]
    fn gaussian_closed_form() {
        // (-Δ)^s e^{-|x|²} at 0 = 4^s Γ(n/2+s)/Γ(n/2).
        for n in 1..=2 {
            for s in [0.25, 0.5, 0.75] {
                let p = Params::new(n, s).unwrap();
                let g = FieldSpec::gaussian_bump(Point::origin(n), 1.0, 1.0).unwrap();
                let v = classical_fraclap(&g, &Point::origin(n), &p, &QuadSpec::default()).unwrap();
                let exact = gaussian_at_origin(&p);
                assert!((v.value - exact).abs() < 1e-7 * exact, "n={n} s={s} {v:?} {exact}");
            }
        }
    }

    #[test]
    fn zero_field_has_zero_laplacian() {
        let p = Params::new(2, 0.5).unwrap();
        let x = Point::new(&[0.5, 0.1]).unwrap();
        let z = FieldSpec::zero();
        assert_eq!(classical_fraclap(&z, &x, &p, &QuadSpec::default()).unwrap().value, 0.0);
        assert_eq!(antisym_fraclap(&z, &x, &p, &QuadSpec::default()).unwrap().value, 0.0);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let p = Params::new(1, 0.5).unwrap();
        let q = QuadSpec::default();
        let x = Point::new(&[0.5]).unwrap();
        assert!(matches!(classical_fraclap(&FieldSpec::monomial_x1(), &x, &p, &q), Err(Error::Divergent { .. })));
        let even = FieldSpec::gaussian_bump(Point::new(&[0.0]).unwrap(), 1.0, 1.0).unwrap();
        assert!(matches!(antisym_fraclap(&even, &x, &p, &q), Err(Error::Hypothesis(_))));
        let low = Point::new(&[1e-4]).unwrap();
        assert!(matches!(antisym_fraclap(&FieldSpec::monomial_x1(), &low, &p, &q), Err(Error::Domain(_))));
    }

    #[test]
    fn sandwich_has_no_violations() {
        for n in 1..=3 {
            let p = Params::new(n, 0.3).unwrap();
            assert_eq!(sandwich_violations(&p, 2000, 11), 0);
        }
    }

    #[test]
    fn first_definition_examples() {
        let p = Params::new(1, 0.5).unwrap();
        let q = QuadSpec::default();
        let x = Point::new(&[2.0]).unwrap();
        let bump = FieldSpec::antisym_gaussian_bump(Point::new(&[2.0]).unwrap(), 1.0, 1.0).unwrap();
        let a = classical_fraclap(&bump, &x, &p, &q).unwrap();
        let b = antisym_fraclap(&bump, &x, &p, &q).unwrap();
        assert!((a.value - b.value).abs() < 1e-7, "{a:?} {b:?}");
        let m = antisym_fraclap(&FieldSpec::monomial_x1(), &Point::new(&[0.7]).unwrap(), &p, &q).unwrap();
        assert!(m.value.abs() < 2e-6, "{m:?}");
    }
}
