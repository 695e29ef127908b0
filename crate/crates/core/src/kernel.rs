//! Antisymmetric kernels on the half-space.
//!
//! For x, y in ℝⁿ₊ and an exponent q > 0 the kernel difference
//! `K_q(x, y) = |x - y|^{-q} - |x* - y|^{-q}` is positive and, by the mean
//! value theorem applied to t ↦ t^{-q/2} on [|x-y|², |x*-y|²],
//! `2q x₁y₁ |x*-y|^{-(q+2)} ≤ K_q(x, y) ≤ 2q x₁y₁ |x-y|^{-(q+2)}`.

use crate::point::Point;
use crate::scalar::{lit, Real};

/// `|x - y|^{-q} - |x* - y|^{-q}` without cancellation.
///
/// With a = |x-y|² and δ = 4x₁y₁/a one has |x*-y|² = a(1 + δ), so
/// `K = a^{-q/2} (1 - (1+δ)^{-q/2})`, and the bracket is evaluated as
/// `-expm1(-(q/2) ln(1+δ))`.
pub fn kernel_difference<T: Real>(x: &Point<T>, y: &Point<T>, q: T) -> T {
    let a = x.dist_sq(y);
    let delta = lit::<T>(4.0) * x.x1() * y.x1() / a;
    let half = q * lit(0.5);
    a.powf(-half) * -(-half * delta.ln_1p()).exp_m1()
}

/// Lower and upper bounds of [`kernel_difference`].
pub fn kernel_bounds<T: Real>(x: &Point<T>, y: &Point<T>, q: T) -> (T, T) {
    let num = lit::<T>(2.0) * q * x.x1() * y.x1();
    let e = -(q + lit(2.0)) * lit(0.5);
    let lower = num * x.reflect().dist_sq(y).powf(e);
    let upper = num * x.dist_sq(y).powf(e);
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(x: &Point<f64>, y: &Point<f64>, q: f64) -> f64 {
        x.dist(y).powf(-q) - x.reflect().dist(y).powf(-q)
    }

    #[test]
    fn matches_naive_formula_away_from_cancellation() {
        let x = Point::new(&[0.7, -0.2]).unwrap();
        let y = Point::new(&[1.3, 0.4]).unwrap();
        let q = 2.5;
        let k = kernel_difference(&x, &y, q);
        assert!((k - naive(&x, &y, q)).abs() <= 1e-14 * k);
    }

    #[test]
    fn accurate_when_points_are_near_the_boundary() {
        // x₁y₁ ≪ |x-y|²: K ≈ 2q x₁y₁ |x-y|^{-(q+2)}.
        let x = Point::new(&[1e-9, 0.0]).unwrap();
        let y = Point::new(&[1e-9, 1.0]).unwrap();
        let q = 2.5;
        let k = kernel_difference(&x, &y, q);
        let leading: f64 = 2.0 * q * 1e-18;
        assert!((k - leading).abs() <= 1e-12 * leading);
    }

    #[test]
    fn single_precision() {
        let x = Point::new(&[0.5f32]).unwrap();
        let y = Point::new(&[1.5f32]).unwrap();
        let k = kernel_difference(&x, &y, 1.5f32);
        let exact = 1.0f64 - 2.0f64.powf(-1.5);
        assert!(((k as f64) - exact).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn sandwich_holds(
            x1 in 1e-4f64..10.0, x2 in -10.0f64..10.0,
            y1 in 1e-4f64..10.0, y2 in -10.0f64..10.0,
            q in 0.5f64..5.0,
        ) {
            let x = Point::new(&[x1, x2]).unwrap();
            let y = Point::new(&[y1, y2]).unwrap();
            prop_assume!(x.dist(&y) > 1e-6);
            let k = kernel_difference(&x, &y, q);
            let (lo, hi) = kernel_bounds(&x, &y, q);
            let slack = 1e-12;
            prop_assert!(k > 0.0);
            prop_assert!(lo <= k * (1.0 + slack) && k <= hi * (1.0 + slack));
        }
    }
}
