//! Gamma function and the normalisation constants of the fractional
//! Laplacian, its Poisson kernel and the boundary term of the antisymmetric
//! operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Lanczos coefficients for g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Dimension and fractional order of a problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams<T>", into = "RawParams<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct Params<T> {
    n: usize,
    s: T,
}

#[derive(Serialize, Deserialize)]
struct RawParams<T> {
    n: usize,
    s: T,
}

impl<T: Real> TryFrom<RawParams<T>> for Params<T> {
    type Error = Error;
    fn try_from(raw: RawParams<T>) -> Result<Self> {
        Params::new(raw.n, raw.s)
    }
}

impl<T> From<Params<T>> for RawParams<T> {
    fn from(p: Params<T>) -> Self {
        RawParams { n: p.n, s: p.s }
    }
}

impl<T: Real> Params<T> {
    /// Validates `n ∈ {1, 2, 3}` and `0 < s < 1`.
    pub fn new(n: usize, s: T) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Domain(format!("dimension n = {n} must be 1, 2 or 3")));
        }
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::Domain(format!("fractional order s = {s} must lie in (0, 1)")));
        }
        Ok(Params { n, s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> T {
        self.s
    }

    /// `n` as a scalar.
    pub fn nf(&self) -> T {
        lit(self.n as f64)
    }

    /// Kernel exponent `n + 2s`.
    pub fn kernel_exponent(&self) -> T {
        self.nf() + self.s + self.s
    }

    /// The same order in dimension one.
    pub fn in_dimension(&self, n: usize) -> Result<Self> {
        Params::new(n, self.s)
    }
}

fn lanczos_sum<T: Real>(x: T) -> T {
    // x is the shifted argument (Γ(x + 1)).
    let mut acc = lit::<T>(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(c) / (x + lit(i as f64));
    }
    acc
}

/// Γ(x) for `x > 0`.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires a positive finite argument, got {x}")));
    }
    let half = lit::<T>(0.5);
    if x < half {
        // Reflection keeps the Lanczos sum in its accurate range.
        let pi = T::PI();
        return Ok(pi / ((pi * x).sin() * gamma(T::one() - x)?));
    }
    let xm = x - T::one();
    let t = xm + lit::<T>(LANCZOS_G) + half;
    let sqrt_two_pi = (T::TAU()).sqrt();
    Ok(sqrt_two_pi * t.powf(xm + half) * (-t).exp() * lanczos_sum(xm))
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires a positive finite argument, got {x}")));
    }
    let half = lit::<T>(0.5);
    if x < half {
        let pi = T::PI();
        return Ok((pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x)?);
    }
    let xm = x - T::one();
    let t = xm + lit::<T>(LANCZOS_G) + half;
    Ok(half * T::TAU().ln() + (xm + half) * t.ln() - t + lanczos_sum(xm).ln())
}

fn gamma_ok<T: Real>(x: T) -> T {
    // Arguments built from validated Params are always positive.
    gamma(x).expect("positive gamma argument")
}

/// c_{n,s} = s π^{-n/2} 4^s Γ((n+2s)/2) / Γ(1-s).
pub fn c_ns<T: Real>(p: &Params<T>) -> T {
    let s = p.s();
    let two = lit::<T>(2.0);
    s * T::PI().powf(-p.nf() / two) * lit::<T>(4.0).powf(s) * gamma_ok(p.kernel_exponent() / two)
        / gamma_ok(T::one() - s)
}

/// γ_{n,s} = sin(πs) Γ(n/2) / π^{n/2+1}, the Poisson kernel constant.
pub fn gamma_ns<T: Real>(p: &Params<T>) -> T {
    let two = lit::<T>(2.0);
    (T::PI() * p.s()).sin() * gamma_ok(p.nf() / two) / T::PI().powf(p.nf() / two + T::one())
}

/// c̃_{n,s} = c_{1,s} / (2s); independent of `n`.
pub fn tilde_c_ns<T: Real>(p: &Params<T>) -> T {
    let one_d = Params { n: 1, s: p.s() };
    c_ns(&one_d) / (p.s() + p.s())
}

/// Closed form 2^{2s-1} Γ((1+2s)/2) / (π^{1/2} Γ(1-s)) of c̃_{n,s}.
pub fn tilde_c_ns_closed<T: Real>(p: &Params<T>) -> T {
    let s = p.s();
    let two = lit::<T>(2.0);
    two.powf(two * s - T::one()) * gamma_ok((T::one() + two * s) / two) / (T::PI().sqrt() * gamma_ok(T::one() - s))
}

/// ∫_{ℝⁿ₊} |e₁ + z|^{-(n+2s)} dz = π^{(n-1)/2} Γ((1+2s)/2) / (2s Γ((n+2s)/2)).
pub fn halfspace_integral_closed<T: Real>(p: &Params<T>) -> T {
    let s = p.s();
    let two = lit::<T>(2.0);
    T::PI().powf((p.nf() - T::one()) / two) * gamma_ok((T::one() + two * s) / two)
        / (two * s * gamma_ok(p.kernel_exponent() / two))
}

/// Surface area of the unit sphere in ℝⁿ.
pub fn sphere_area<T: Real>(n: usize) -> T {
    let half_n = lit::<T>(n as f64 / 2.0);
    lit::<T>(2.0) * T::PI().powf(half_n) / gamma_ok(half_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values from a 30-digit evaluation.
    const REFERENCE: [(f64, f64); 7] = [
        (0.05, 19.470_085_311_255_512_864),
        (0.1, 9.513_507_698_668_731_836_3),
        (0.25, 3.625_609_908_221_908_311_9),
        (0.75, 1.225_416_702_465_177_645_1),
        (1.25, 0.906_402_477_055_477_077_98),
        (3.7, 4.170_651_783_796_603_165_4),
        (10.5, 1_133_278.388_948_785_567_3),
    ];

    #[test]
    fn gamma_matches_reference_values() {
        assert_relative_eq!(gamma(1.0_f64).unwrap(), 1.0, max_relative = 1e-15);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert_relative_eq!(gamma(0.5).unwrap(), sqrt_pi, max_relative = 1e-14);
        assert_relative_eq!(gamma(1.5).unwrap(), sqrt_pi / 2.0, max_relative = 1e-14);
        for (x, want) in REFERENCE {
            assert_relative_eq!(gamma(x).unwrap(), want, max_relative = 1e-13);
            assert_relative_eq!(ln_gamma(x).unwrap(), want.ln(), max_relative = 1e-12, epsilon = 1e-13);
        }
        let mut fact = 1.0;
        for k in 1..15 {
            assert_relative_eq!(gamma((k + 1) as f64).unwrap(), fact * k as f64, max_relative = 1e-13);
            fact *= k as f64;
        }
    }

    #[test]
    fn gamma_in_single_precision() {
        assert!((gamma(0.5_f32).unwrap() - 1.772_453_9).abs() < 1e-5);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(gamma(0.0_f64).is_err());
        assert!(gamma(-1.5_f64).is_err());
        assert!(gamma(f64::NAN).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(1, 0.0).is_err());
        assert!(Params::new(1, 1.0).is_err());
        assert!(Params::new(0, 0.5).is_err());
        assert!(Params::new(4, 0.5).is_err());
        assert!(Params::new(3, 0.999).is_ok());
        let bad: std::result::Result<Params<f64>, _> = serde_json::from_str(r#"{"n":2,"s":1.5}"#);
        assert!(bad.is_err());
        let p: Params<f64> = serde_json::from_str(r#"{"n":2,"s":0.25}"#).unwrap();
        assert_eq!((p.n(), p.s()), (2, 0.25));
    }

    #[test]
    fn constants_at_examples() {
        let pi = std::f64::consts::PI;
        let p = |n, s| Params::new(n, s).unwrap();
        assert_relative_eq!(c_ns(&p(1, 0.5)), 1.0 / pi, max_relative = 1e-13);
        assert_relative_eq!(c_ns(&p(2, 0.5)), 1.0 / (2.0 * pi), max_relative = 1e-13);
        assert_relative_eq!(c_ns(&p(1, 0.25)), 0.25 * 2f64.sqrt() / pi.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma_ns(&p(1, 0.5)), 1.0 / pi, max_relative = 1e-13);
        assert_relative_eq!(gamma_ns(&p(2, 0.5)), 1.0 / (pi * pi), max_relative = 1e-13);
        assert!(gamma_ns(&p(1, 1e-9)) < 1e-8);
        assert_relative_eq!(tilde_c_ns(&p(1, 0.5)), 1.0 / pi, max_relative = 1e-13);
        assert_relative_eq!(tilde_c_ns(&p(3, 0.5)), 1.0 / pi, max_relative = 1e-13);
        assert_relative_eq!(halfspace_integral_closed(&p(1, 0.5)), 1.0, max_relative = 1e-13);
        assert_relative_eq!(halfspace_integral_closed(&p(2, 0.5)), 2.0, max_relative = 1e-13);
        assert_relative_eq!(halfspace_integral_closed(&p(1, 0.75)), 2.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(sphere_area::<f64>(3), 4.0 * pi, max_relative = 1e-13);
    }

    #[test]
    fn constant_identity_on_grid() {
        for n in 1..=3 {
            for s in [0.1, 0.25, 0.5, 0.75, 0.9] {
                let p = Params::<f64>::new(n, s).unwrap();
                for v in [c_ns(&p), gamma_ns(&p), tilde_c_ns(&p), halfspace_integral_closed(&p)] {
                    assert!(v > 0.0 && v.is_finite());
                }
                let lhs = c_ns(&p) * halfspace_integral_closed(&p);
                assert_relative_eq!(lhs, tilde_c_ns(&p), max_relative = 1e-12);
                assert_relative_eq!(tilde_c_ns_closed(&p), tilde_c_ns(&p), max_relative = 1e-12);
                let one = Params::new(1, s).unwrap();
                assert_eq!(tilde_c_ns(&p), tilde_c_ns(&one));
            }
        }
    }
}
