//! Invariants checked over randomized inputs.

use antisym_fraclap::cli::{Command, RunConfig};
use antisym_fraclap::fields::{random_nonneg_antisym, FieldSpec, ScalarField};
use antisym_fraclap::fraclap::{antisym_fraclap, kernel_difference};
use antisym_fraclap::kernel::kernel_bounds;
use antisym_fraclap::{Params, Point, QuadSpec};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = Params> {
    (1usize..=3, 0.05f64..0.95).prop_map(|(n, s)| Params::new(n, s).unwrap())
}

fn half_point(n: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-3.0f64..3.0, n).prop_map(|mut v| {
        v[0] = v[0].abs() + 1e-3;
        Point::new(&v).unwrap()
    })
}

proptest! {
    #[test]
    fn kernel_difference_is_positive_and_sandwiched(
        (p, x, y) in params().prop_flat_map(|p| (Just(p), half_point(p.n()), half_point(p.n())))
    ) {
        prop_assume!(x.dist(&y) > 1e-6);
        let k = kernel_difference(&x, &y, &p).unwrap();
        let (lo, hi) = kernel_bounds(&x, &y, p.kernel_exponent());
        prop_assert!(k > 0.0);
        let slack = 8.0 * f64::EPSILON * k;
        prop_assert!(lo <= k + slack && k <= hi + slack, "{lo} <= {k} <= {hi}");
    }

    #[test]
    fn params_serde_round_trip(p in params()) {
        let text = serde_json::to_string(&p).unwrap();
        let back: Params = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn random_data_is_nonnegative_and_odd(seed in 0u64..1000, n in 1usize..=3, x in prop::collection::vec(-4.0f64..4.0, 3)) {
        let p = Params::new(n, 0.5).unwrap();
        let g = random_nonneg_antisym(seed, 3, &p).unwrap();
        let pt = Point::new(&x[..n]).unwrap();
        let v = g.value(&pt);
        prop_assert!((v + g.value(&pt.reflect())).abs() <= 1e-14 * v.abs().max(1.0));
        if pt.x1() >= 0.0 {
            prop_assert!(v >= 0.0);
        }
    }

    #[test]
    fn run_config_round_trip(seeds in prop::collection::vec(any::<u64>(), 0..5), s in 0.05f64..0.95, rho in 0.01f64..0.5) {
        let mut cfg = RunConfig::new(Command::HarnackInterior);
        cfg.params = Params::new(2, s).unwrap();
        cfg.seeds = Some(seeds);
        cfg.options.rho = Some(rho);
        cfg.field = Some(FieldSpec::cubic_odd_bump(0.7, 1.0).unwrap());
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The operator is linear: scaling the field scales the value to within
    /// the reported error bounds.
    #[test]
    fn fraclap_is_homogeneous(lambda in -5.0f64..5.0, x1 in 0.1f64..2.0, s in 0.1f64..0.9) {
        let p = Params::new(1, s).unwrap();
        let q = QuadSpec::default();
        let u = FieldSpec::cubic_odd_bump(0.7, 1.0).unwrap();
        let x = Point::new(&[x1]).unwrap();
        let a = antisym_fraclap(&u, &x, &p, &q).unwrap();
        let b = antisym_fraclap(&u.scaled(lambda).unwrap(), &x, &p, &q).unwrap();
        let allowed = b.error_bound + lambda.abs() * a.error_bound + 1e-14 * (lambda * a.value).abs();
        prop_assert!((b.value - lambda * a.value).abs() <= allowed);
    }
}
