//! Integration over directions ω ∈ S^{n-1}, n ≤ 3.
//!
//! n = 2 uses ω = (cos θ, sin θ); n = 3 uses ω = (μ, √(1-μ²) cos θ,
//! √(1-μ²) sin θ) with μ = ω₁, so dω = dμ dθ. The plane {ω₁ = 0} is always a
//! panel boundary because ray domains change there.

use std::f64::consts::PI;

use super::gk::{integrate, Limits, Outcome};
use super::maps::breakpoints;
use super::{Estimate, Tolerance};
use crate::point::Point;
use crate::scalar::{lit, Real};

/// Which directions to integrate over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hemisphere {
    Full,
    /// ω₁ ≥ 0.
    Upper,
}

/// A cone of directions around `axis` (unit) with the given half-angle,
/// used only to place panel boundaries.
#[derive(Clone, Copy, Debug)]
pub struct Cap<T> {
    pub axis: Point<T>,
    pub half_angle: T,
}

fn wrap_angle<T: Real>(t: T) -> T {
    let two_pi = T::TAU();
    let mut x = t;
    while x > T::PI() {
        x = x - two_pi;
    }
    while x < -T::PI() {
        x = x + two_pi;
    }
    x
}

fn theta_breaks<T: Real>(caps: &[Cap<T>], to_theta: impl Fn(&Point<T>) -> Option<(T, T)>) -> Vec<T> {
    let mut out = Vec::new();
    for cap in caps {
        if let Some((theta, spread)) = to_theta(&cap.axis) {
            let h = (cap.half_angle * spread).min(T::PI());
            for k in [-1.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0] {
                out.push(wrap_angle(theta + h * lit(k)));
            }
        }
    }
    out
}

/// ∫ g(ω) dω over the chosen part of the unit sphere.
pub fn integrate_directions<T, G>(
    n: usize,
    region: Hemisphere,
    caps: &[Cap<T>],
    panels: usize,
    tol: Tolerance<T>,
    limits: Limits,
    mut g: G,
) -> Outcome<T>
where
    T: Real,
    G: FnMut(&Point<T>) -> Estimate<T>,
{
    let pi = T::PI();
    let half_pi = lit::<T>(PI / 2.0);
    let uniform =
        |lo: T, hi: T, k: usize| -> Vec<T> { (1..k).map(|i| lo + (hi - lo) * lit::<T>(i as f64 / k as f64)).collect() };
    match n {
        1 => {
            let plus = g(&Point::on_axis(1, T::one()));
            let est = match region {
                Hemisphere::Upper => plus,
                Hemisphere::Full => plus + g(&Point::on_axis(1, -T::one())),
            };
            Outcome { estimate: est, converged: true, evaluations: 2 }
        }
        2 => {
            let (lo, hi) = match region {
                Hemisphere::Full => (-pi, pi),
                Hemisphere::Upper => (-half_pi, half_pi),
            };
            let mut extra = uniform(lo, hi, panels.max(2));
            extra.extend([-half_pi, half_pi]);
            extra.extend(theta_breaks(caps, |a| Some((a[1].atan2(a[0]), T::one()))));
            let breaks = breakpoints(lo, hi, &extra);
            integrate(|t: T| g(&Point::new(&[t.cos(), t.sin()]).expect("2d")), &breaks, tol, limits)
        }
        3 => {
            let (mlo, mhi) = match region {
                Hemisphere::Full => (-T::one(), T::one()),
                Hemisphere::Upper => (T::zero(), T::one()),
            };
            let mut mu_extra = uniform(mlo, mhi, panels.max(2));
            mu_extra.push(T::zero());
            for cap in caps {
                let phi = cap.axis[0].max(-T::one()).min(T::one()).acos();
                for k in [-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0] {
                    let p = phi + cap.half_angle * lit(k);
                    if p > T::zero() && p < pi {
                        mu_extra.push(p.cos());
                    }
                }
                mu_extra.push(cap.axis[0]);
            }
            let mu_breaks = breakpoints(mlo, mhi, &mu_extra);
            let mut theta_extra = uniform(-pi, pi, panels.max(2));
            theta_extra.extend(theta_breaks(caps, |a| {
                let sin_phi = (a[1] * a[1] + a[2] * a[2]).sqrt();
                if sin_phi < lit(1e-3) {
                    None
                } else {
                    Some((a[2].atan2(a[1]), T::one() / sin_phi))
                }
            }));
            let theta_breaks = breakpoints(-pi, pi, &theta_extra);
            let inner_tol = tol.inner();
            integrate(
                |mu: T| {
                    let sin_phi = (T::one() - mu * mu).max(T::zero()).sqrt();
                    integrate(
                        |t: T| g(&Point::new(&[mu, sin_phi * t.cos(), sin_phi * t.sin()]).expect("3d")),
                        &theta_breaks,
                        inner_tol,
                        limits,
                    )
                    .estimate
                },
                &mu_breaks,
                tol,
                limits,
            )
        }
        _ => panic!("unsupported dimension {n}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tol() -> Tolerance<f64> {
        Tolerance::new(1e-13, 1e-12)
    }

    #[test]
    fn sphere_areas() {
        for (n, area) in [(1, 2.0), (2, 2.0 * PI), (3, 4.0 * PI)] {
            let full =
                integrate_directions(n, Hemisphere::Full, &[], 8, tol(), Limits::default(), |_| Estimate::exact(1.0));
            assert_relative_eq!(full.estimate.value, area, max_relative = 1e-12);
            let half =
                integrate_directions(n, Hemisphere::Upper, &[], 8, tol(), Limits::default(), |_| Estimate::exact(1.0));
            assert_relative_eq!(half.estimate.value, area / 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn second_moments() {
        // ∫ ω₁² dω = |S^{n-1}| / n
        let out = integrate_directions(3, Hemisphere::Full, &[], 4, tol(), Limits::default(), |w| {
            Estimate::exact(w[0] * w[0])
        });
        assert_relative_eq!(out.estimate.value, 4.0 * PI / 3.0, max_relative = 1e-12);
        let out = integrate_directions(3, Hemisphere::Full, &[], 4, tol(), Limits::default(), |w| {
            Estimate::exact(w[2] * w[2])
        });
        assert_relative_eq!(out.estimate.value, 4.0 * PI / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn narrow_peak_found_with_cap() {
        // A sharply peaked function of angle; the cap places panels on it.
        let axis = Point::new(&[0.6, 0.8]).unwrap();
        let width = 1e-3;
        let f = |w: &Point<f64>| Estimate::exact((-(1.0 - w.dot(&axis)) / (width * width)).exp());
        let cap = Cap { axis, half_angle: 10.0 * width };
        let out = integrate_directions(2, Hemisphere::Full, &[cap], 8, tol(), Limits::default(), f);
        // ∫ exp(-(1-cos t)/w²) dt ≈ w√(2π)
        assert_relative_eq!(out.estimate.value, width * (2.0 * PI).sqrt(), max_relative = 1e-6);
    }
}
