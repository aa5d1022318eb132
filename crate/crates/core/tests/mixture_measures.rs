use approx::assert_abs_diff_eq;
use parisi_sphere::measures::frsb_density;
use parisi_sphere::mixture::CurvatureClass;
use parisi_sphere::parisi_solver::frsb_q;
use parisi_sphere::{Error, MixtureSpec, ParisiMeasure, StepCDF};
use proptest::prelude::*;

fn example_mixture() -> MixtureSpec {
    MixtureSpec::two_term(0.07, 4).unwrap()
}

#[test]
fn xi_examples() {
    assert_abs_diff_eq!(
        MixtureSpec::pure(2).unwrap().xi(0.5).unwrap(),
        0.25,
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(
        MixtureSpec::pure(4).unwrap().xi(1.0).unwrap(),
        1.0,
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(
        example_mixture().xi(0.5).unwrap(),
        0.236875,
        epsilon = 1e-15
    );
    assert!(matches!(
        MixtureSpec::pure(2).unwrap().xi(1.5),
        Err(Error::Domain(_))
    ));
}

#[test]
fn derivative_examples() {
    let x2 = MixtureSpec::pure(2).unwrap();
    for x in [0.0, 0.3, 1.0] {
        assert_abs_diff_eq!(x2.derivative(x, 2).unwrap(), 2.0, epsilon = 1e-15);
    }
    assert_abs_diff_eq!(
        example_mixture().derivative(1.0, 3).unwrap(),
        1.68,
        epsilon = 1e-14
    );
    assert_abs_diff_eq!(
        MixtureSpec::pure(4).unwrap().derivative(0.5, 1).unwrap(),
        0.5,
        epsilon = 1e-15
    );
    assert!(matches!(x2.derivative(0.5, 4), Err(Error::Domain(_))));
}

#[test]
fn curvature_examples() {
    for p in [2, 3, 4, 6, 10] {
        let c = MixtureSpec::pure(p).unwrap().curvature_class(100).unwrap();
        assert_eq!(c.class, CurvatureClass::Convex, "p = {p}");
        assert_eq!(c.constant, p == 2);
    }
    let c = example_mixture().curvature_class(1000).unwrap();
    assert_eq!(c.class, CurvatureClass::Concave);
    assert!(matches!(
        MixtureSpec::pure(1),
        Err(Error::InvalidMixture(_))
    ));
}

#[test]
fn mixture_json_roundtrip() {
    let spec = MixtureSpec::new([(2, 0.5), (4, 1.0)]).unwrap();
    let text = serde_json::to_string(&spec).unwrap();
    let back: MixtureSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(spec, back);
}

#[test]
fn cdf_and_tail_examples() {
    let d0 = ParisiMeasure::Atomic(StepCDF::delta_zero());
    assert_eq!(d0.cdf_at(0.3), 1.0);
    assert_abs_diff_eq!(d0.tail_integral(0.25), 0.75, epsilon = 1e-15);
    assert_eq!(d0.support_min(), 0.0);
    assert_eq!(d0.mass_of_zero(), 1.0);

    let two = ParisiMeasure::Atomic(StepCDF::new(vec![(0.0, 0.4), (0.7, 1.0)]).unwrap());
    assert_eq!(two.cdf_at(0.5), 0.4);
    assert_abs_diff_eq!(two.tail_integral(0.0), 0.58, epsilon = 1e-15);
    assert_eq!(two.support_min(), 0.0);
    assert_abs_diff_eq!(two.mass_of_zero(), 0.4, epsilon = 1e-15);

    let single = ParisiMeasure::Atomic(StepCDF::delta(0.3).unwrap());
    assert_eq!(single.mass_of_zero(), 0.0);
    assert_eq!(single.support_min(), 0.3);

    let x2 = ParisiMeasure::frsb(MixtureSpec::pure(2).unwrap(), 1.0, 1.0 - 0.5f64.sqrt()).unwrap();
    assert_eq!(x2.cdf_at(0.1), 0.0);
}

#[test]
fn frsb_tail_matches_phi() {
    let spec = example_mixture();
    let beta = 1.0;
    let q = frsb_q(&spec, beta).unwrap();
    let m = ParisiMeasure::frsb(spec.clone(), beta, q).unwrap();
    for i in 0..20 {
        let s = q * i as f64 / 20.0;
        let phi = 1.0 / (beta * spec.xi2(s).sqrt());
        assert_abs_diff_eq!(m.tail_integral(s), phi, epsilon = 1e-9);
    }
    assert_eq!(m.support_min(), 0.0);
    assert_eq!(m.mass_of_zero(), 0.0);
    assert_eq!(m.support_size(), None);
}

#[test]
fn frsb_density_non_decreasing() {
    let spec = example_mixture();
    for beta in [1.0, 1.5] {
        let q = frsb_q(&spec, beta).unwrap();
        let mut prev = 0.0;
        for i in 0..=1000 {
            let t = q * i as f64 / 1000.0;
            let a = frsb_density(&spec, beta, t);
            assert!(a >= prev - 1e-15, "beta = {beta}, t = {t}");
            prev = a;
        }
        assert!(prev <= 1.0);
    }
}

#[test]
fn invalid_step_cdfs_rejected() {
    let bad = [
        vec![],
        vec![(0.2, 0.5)],
        vec![(0.5, 0.4), (0.2, 1.0)],
        vec![(0.1, 0.6), (0.3, 0.4), (0.5, 1.0)],
        vec![(-0.1, 1.0)],
        vec![(1.0, 1.0)],
        vec![(0.2, f64::NAN), (0.4, 1.0)],
    ];
    for jumps in bad {
        assert!(StepCDF::new(jumps.clone()).is_err(), "{jumps:?}");
    }
}

fn step_strategy() -> impl Strategy<Value = StepCDF> {
    prop::collection::vec((0.0..0.95f64, 0.01..1.0f64), 1..6).prop_map(|mut v| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        StepCDF::from_atoms(&v, 1e-6, 1e-6).unwrap()
    })
}

proptest! {
    #[test]
    fn derivatives_match_finite_differences(
        coeffs in prop::collection::btree_map(2u32..9, 0.1..1.5f64, 1..4),
        x in 0.05..0.95f64,
    ) {
        let spec = MixtureSpec::new(coeffs).unwrap();
        let h = 1e-5;
        for order in 1..=3u32 {
            let f = |t: f64| spec.derivative(t, order - 1).unwrap_or_else(|_| spec.xi(t).unwrap());
            let fd = (f(x + h) - f(x - h)) / (2.0 * h);
            let exact = spec.derivative(x, order).unwrap();
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "order {}: {} vs {}", order, fd, exact);
        }
        prop_assert!(spec.xi1(x) >= 0.0 && spec.xi2(x) >= 0.0);
    }

    #[test]
    fn even_only_flag(coeffs in prop::collection::btree_map(1u32..9, -1.0..1.0f64, 1..5)) {
        prop_assume!(coeffs.iter().any(|(p, g)| *p >= 2 && *g != 0.0));
        let spec = MixtureSpec::new(coeffs.clone()).unwrap();
        let expected = coeffs.iter().all(|(p, g)| p % 2 == 0 || *g == 0.0);
        prop_assert_eq!(spec.even_only(), expected);
    }

    #[test]
    fn tail_integral_properties(step in step_strategy()) {
        let m = ParisiMeasure::Atomic(step.clone());
        prop_assert_eq!(m.tail_integral(1.0), 0.0);
        prop_assert!(m.tail_integral(0.0) <= 1.0 + 1e-12);
        prop_assert_eq!(m.cdf_at(step.top()), 1.0);
        let mut prev = m.cdf_at(0.0);
        for i in 1..=200 {
            let s = i as f64 / 200.0;
            let c = m.cdf_at(s);
            prop_assert!(c >= prev);
            prev = c;
        }
    }
}
