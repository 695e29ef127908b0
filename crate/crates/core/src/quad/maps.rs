//! One-dimensional building blocks: finite panels, algebraic tails, and
//! substitutions that remove algebraic endpoint behaviour.

use super::gk::{integrate, Limits, Outcome};
use super::{Estimate, Tolerance};
use crate::scalar::{lit, Real};

impl<T: Real> Outcome<T> {
    pub fn empty() -> Self {
        Outcome { estimate: Estimate::zero(), converged: true, evaluations: 0 }
    }

    pub fn plus(self, other: Outcome<T>) -> Self {
        Outcome {
            estimate: self.estimate + other.estimate,
            converged: self.converged && other.converged,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    pub fn plus_exact(mut self, v: T) -> Self {
        self.estimate.value = self.estimate.value + v;
        self
    }
}

/// Sorted, de-duplicated breakpoints of `[a, b]` containing `extra` points
/// that fall strictly inside.
pub fn breakpoints<T: Real>(a: T, b: T, extra: &[T]) -> Vec<T> {
    let mut v = vec![a];
    let mut inner: Vec<T> = extra.iter().copied().filter(|&x| x > a && x < b && x.is_finite()).collect();
    inner.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let min_gap = (b - a).abs() * lit(1e-9);
    for x in inner {
        if x - *v.last().unwrap() > min_gap && b - x > min_gap {
            v.push(x);
        }
    }
    v.push(b);
    v
}

/// ∫_a^b f on panels split at `extra` and into `panels` equal pieces.
pub fn finite<T: Real>(
    f: impl FnMut(T) -> Estimate<T>,
    a: T,
    b: T,
    extra: &[T],
    panels: usize,
    tol: Tolerance<T>,
    limits: Limits,
) -> Outcome<T> {
    if !(b > a) {
        return Outcome::empty();
    }
    let mut pts: Vec<T> = extra.to_vec();
    let panels = panels.max(1);
    for k in 1..panels {
        pts.push(a + (b - a) * lit::<T>(k as f64 / panels as f64));
    }
    integrate(f, &breakpoints(a, b, &pts), tol, limits)
}

/// ∫_start^∞ f for `|f(x)| ≲ x^{-decay}`, `decay > 1`, `start > 0`.
///
/// Substitutes x = start·v^{-1/(decay-1)}, which maps the tail onto (0, 1]
/// with a bounded integrand.
pub fn tail<T: Real>(
    mut f: impl FnMut(T) -> Estimate<T>,
    start: T,
    decay: T,
    extra: &[T],
    tol: Tolerance<T>,
    limits: Limits,
) -> Outcome<T> {
    assert!(decay > T::one() && start > T::zero());
    let k = T::one() / (decay - T::one());
    let to_v = |x: T| (start / x).powf(decay - T::one());
    let vb: Vec<T> = extra.iter().filter(|&&x| x > start).map(|&x| to_v(x)).collect();
    let mut vb = vb;
    vb.extend([lit::<T>(1e-6), lit::<T>(1e-3)]);
    let g = |v: T| {
        if v <= T::zero() {
            return Estimate::zero();
        }
        let x = start * v.powf(-k);
        if !x.is_finite() {
            return Estimate::zero();
        }
        let jac = start * k * v.powf(-k - T::one());
        let e = f(x);
        Estimate { value: e.value * jac, error: e.error * jac }
    };
    integrate(g, &breakpoints(T::zero(), T::one(), &vb), tol, limits)
}

/// ∫_lo^hi g(ρ) ρ^β dρ, `β > -1`, `0 ≤ lo < hi`, with ρ = hi·t^{1/(β+1)} so
/// that the power weight is absorbed into the measure.
pub fn power_weight<T: Real>(
    mut g: impl FnMut(T) -> Estimate<T>,
    lo: T,
    hi: T,
    beta: T,
    extra: &[T],
    tol: Tolerance<T>,
    limits: Limits,
) -> Outcome<T> {
    let b1 = beta + T::one();
    assert!(b1 > T::zero());
    if !(hi > lo) {
        return Outcome::empty();
    }
    let scale = hi.powf(b1) / b1;
    let t_of = |rho: T| (rho / hi).powf(b1);
    let tb: Vec<T> = extra.iter().filter(|&&x| x > lo && x < hi).map(|&x| t_of(x)).collect();
    let h = |t: T| {
        let rho = hi * t.powf(T::one() / b1);
        let e = g(rho);
        Estimate { value: e.value * scale, error: e.error * scale }
    };
    integrate(h, &breakpoints(t_of(lo), T::one(), &tb), tol, limits)
}

/// ∫_a^b g(x) (x - a)^{-s} dx with x = a + (b-a)·t^{1/(1-s)}.
pub fn left_algebraic<T: Real>(
    mut g: impl FnMut(T) -> Estimate<T>,
    a: T,
    b: T,
    s: T,
    extra: &[T],
    tol: Tolerance<T>,
    limits: Limits,
) -> Outcome<T> {
    let one_s = T::one() - s;
    let len = b - a;
    let scale = len.powf(one_s) / one_s;
    let tb: Vec<T> = extra.iter().filter(|&&x| x > a && x < b).map(|&x| ((x - a) / len).powf(one_s)).collect();
    let h = |t: T| {
        let x = a + len * t.powf(T::one() / one_s);
        let e = g(x);
        Estimate { value: e.value * scale, error: e.error * scale }
    };
    integrate(h, &breakpoints(T::zero(), T::one(), &tb), tol, limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tol() -> Tolerance<f64> {
        Tolerance::new(1e-14, 1e-12)
    }

    #[test]
    fn algebraic_tail() {
        // ∫_1^∞ x^{-1.5} dx = 2
        let out = tail(|x: f64| Estimate::exact(x.powf(-1.5)), 1.0, 1.5, &[], tol(), Limits::default());
        assert_relative_eq!(out.estimate.value, 2.0, max_relative = 1e-11);
        // ∫_2^∞ (1+x)^{-3} dx = 1/18, decaying faster than declared
        let out = tail(|x: f64| Estimate::exact((1.0 + x).powi(-3)), 2.0, 1.5, &[], tol(), Limits::default());
        assert_relative_eq!(out.estimate.value, 1.0 / 18.0, max_relative = 1e-10);
    }

    #[test]
    fn power_and_algebraic_weights() {
        // ∫_0^1 ρ^{-0.5} cos ρ dρ
        let out = power_weight(|r: f64| Estimate::exact(r.cos()), 0.0, 1.0, -0.5, &[], tol(), Limits::default());
        assert_eq!(out.evaluations, 15 * out.evaluations / 15);
        assert_relative_eq!(out.estimate.value, 1.809_048_475_800_544, max_relative = 1e-12);
        // ∫_1^2 (x-1)^{-0.75} dx = 4
        let out = left_algebraic(|_x: f64| Estimate::exact(1.0), 1.0, 2.0, 0.75, &[], tol(), Limits::default());
        assert_relative_eq!(out.estimate.value, 4.0, max_relative = 1e-13);
    }

    #[test]
    fn breakpoints_are_clean() {
        let b = breakpoints(0.0, 1.0, &[0.5, -1.0, 2.0, 0.5, f64::NAN, 0.25]);
        assert_eq!(b, vec![0.0, 0.25, 0.5, 1.0]);
    }
}
