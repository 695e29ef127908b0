//! Error-bound honesty: on integrals with closed forms the actual error never
//! exceeds three times the reported bound.

use std::f64::consts::PI;

use antisym_fraclap::fields::{anorm, lsnorm, FieldSpec};
use antisym_fraclap::fraclap::halfspace_integral;
use antisym_fraclap::quad::gk::integrate;
use antisym_fraclap::quad::maps::{left_algebraic, power_weight, tail};
use antisym_fraclap::quad::{Estimate, Limits, Tolerance};
use antisym_fraclap::special::halfspace_integral_closed;
use antisym_fraclap::{Params, Point, QuadSpec};

fn honest(value: f64, bound: f64, exact: f64) {
    let err = (value - exact).abs();
    let floor = 4.0 * f64::EPSILON * exact.abs().max(1.0);
    assert!(err <= 3.0 * bound + floor, "error {err:e} vs bound {bound:e} (value {value}, exact {exact})");
}

fn plain(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Estimate<f64> {
    move |x| Estimate::exact(f(x))
}

fn tol(rel: f64) -> Tolerance<f64> {
    Tolerance::new(1e-15, rel)
}

#[test]
fn smooth_finite_intervals() {
    let cases: Vec<(Box<dyn Fn(f64) -> f64>, f64, f64, f64)> = vec![
        (Box::new(f64::sin), 0.0, PI, 2.0),
        (Box::new(f64::exp), -1.0, 2.0, 2f64.exp() - (-1f64).exp()),
        (Box::new(|x: f64| 1.0 / (1.0 + x * x)), -10.0, 10.0, 2.0 * 10f64.atan()),
        (Box::new(f64::sqrt), 0.0, 1.0, 2.0 / 3.0),
        (Box::new(|x: f64| (50.0 * x).cos()), 0.0, 1.0, 50f64.sin() / 50.0),
    ];
    for rel in [1e-6, 1e-9, 1e-12] {
        for (f, a, b, exact) in &cases {
            let out = integrate(plain(f), &[*a, *b], tol(rel), Limits::default());
            honest(out.estimate.value, out.estimate.error, *exact);
        }
    }
}

#[test]
fn algebraic_tails() {
    for decay in [1.5, 2.0, 3.7] {
        let out = tail(plain(move |x: f64| x.powf(-decay)), 2.0, decay, &[], tol(1e-10), Limits::default());
        honest(out.estimate.value, out.estimate.error, 2f64.powf(1.0 - decay) / (decay - 1.0));
    }
    let out = tail(plain(|x: f64| 1.0 / (1.0 + x * x)), 1.0, 2.0, &[], tol(1e-10), Limits::default());
    honest(out.estimate.value, out.estimate.error, PI / 4.0);
}

#[test]
fn endpoint_singularities() {
    for s in [0.1, 0.5, 0.9] {
        let out = left_algebraic(plain(|x: f64| x.cos()), 0.0, 1.0, s, &[], tol(1e-10), Limits::default());
        // ∫₀¹ cos(x) x^{-s} dx by series.
        let mut exact = 0.0;
        let mut term_sign = 1.0;
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= ((2 * k - 1) * (2 * k)) as f64;
            }
            exact += term_sign / (fact * (2.0 * k as f64 + 1.0 - s));
            term_sign = -term_sign;
        }
        honest(out.estimate.value, out.estimate.error, exact);
    }
    for beta in [-0.7, 0.0, 2.5] {
        let out = power_weight(plain(|_| 1.0), 0.0, 2.0, beta, &[], tol(1e-10), Limits::default());
        honest(out.estimate.value, out.estimate.error, 2f64.powf(beta + 1.0) / (beta + 1.0));
    }
}

#[test]
fn halfspace_integral_bound_is_honest() {
    let q = QuadSpec::default();
    for n in 1..=3 {
        for s in [0.25, 0.5, 0.75] {
            let p = Params::new(n, s).unwrap();
            let e = halfspace_integral(&p, &q).unwrap();
            honest(e.value, e.error.max(1e-6 * e.value.abs() / 3.0), halfspace_integral_closed(&p));
        }
    }
}

#[test]
fn norms_of_closed_form_fields() {
    let q = QuadSpec::default();
    let p = Params::new(1, 0.5).unwrap();
    // ‖1‖_ℒₛ in n = 1, s = 1/2: ∫ dx / (1 + |x|²) = π.
    let one = FieldSpec::constant(1.0).unwrap();
    let e = lsnorm(&one, &p, &q).unwrap();
    honest(e.value, e.error, PI);
    // ‖x₁‖_𝒜ₛ in n = 1, s = 1/2: ∫₀^∞ x² / (1 + x⁴) dx = π / (2√2).
    let e = anorm(&FieldSpec::monomial_x1(), &p, &q).unwrap();
    honest(e.value, e.error, PI / (2.0 * 2f64.sqrt()));
    // Gaussian bump with |u| = e^{-|x|²/w²}: same structure in n = 2.
    let p2 = Params::new(2, 0.5).unwrap();
    let g = FieldSpec::gaussian_bump(Point::origin(2), 1.0, 1.0).unwrap();
    let e = lsnorm(&g, &p2, &q).unwrap();
    // ∫ e^{-r²} / (1 + r³) 2πr dr, reference by fine composite quadrature.
    let exact = 2.0 * PI * reference(|r| (-r * r).exp() * r / (1.0 + r.powi(3)), 0.0, 12.0);
    honest(e.value, e.error.max(1e-9), exact);
}

/// Composite Simpson rule with a million panels.
fn reference(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 1_000_000;
    let h = (b - a) / m as f64;
    let mut sum = f(a) + f(b);
    for k in 1..m {
        sum += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}
