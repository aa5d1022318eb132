use parisi_sphere::chaos::{
    cross_overlap_prediction, frsb_coupling_demo, q_zero, theorem2_check, SCALED_CDF_TOL,
};
use parisi_sphere::parisi_solver::{onersb_solve, parisi_solve, SolveOptions};
use parisi_sphere::{MixtureSpec, ParisiMeasure};

fn quartic_with_tail() -> MixtureSpec {
    MixtureSpec::new([(4, 1.0), (8, 0.05), (12, 0.02)]).unwrap()
}

#[test]
fn theorem2_pure_even_pair() {
    let r = theorem2_check(
        &quartic_with_tail(),
        2.0,
        3.0,
        true,
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(r.thm2_applicable, "{}", r.thm2_reason);
    assert!(r.uncoupled && r.q0 == 0.0);
    assert_eq!((r.c1, r.c2), (0.0, 0.0));
    assert!(r.genericity_asserted);
    assert_eq!(r.reformulation_agrees, Some(true));
    let (w1, w2) = (&r.witnesses[0], &r.witnesses[1]);
    assert!((2.0 * w1.mass_at_zero - 3.0 * w2.mass_at_zero).abs() > 1e-6);
    assert_eq!(r.predicted_cross_support.as_ref().unwrap().len(), 2);

    let r = theorem2_check(
        &quartic_with_tail(),
        2.0,
        3.0,
        false,
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(!r.thm2_applicable && !r.genericity_asserted);
}

#[test]
fn theorem2_frsb_pair_not_applicable() {
    let spec = MixtureSpec::two_term(0.07, 4).unwrap();
    let r = theorem2_check(&spec, 1.0, 1.5, true, &SolveOptions::default()).unwrap();
    assert!(!r.thm2_applicable && !r.uncoupled);
    assert!(r.open_conjecture_no_chaos);
    assert_eq!(r.reformulation_agrees, Some(true));
}

#[test]
fn equivalence_audit() {
    let opts = SolveOptions::default();
    let cases = [
        (MixtureSpec::pure(4).unwrap(), 0.5, 2.0),
        (MixtureSpec::pure(4).unwrap(), 0.5, 1.0),
        (MixtureSpec::pure(4).unwrap(), 1.6, 2.4),
        (MixtureSpec::pure(6).unwrap(), 2.0, 3.0),
        (MixtureSpec::pure(2).unwrap(), 1.5, 2.0),
        (MixtureSpec::pure(2).unwrap(), 0.5, 2.0),
        (MixtureSpec::two_term(0.07, 4).unwrap(), 1.0, 1.5),
        (MixtureSpec::two_term(0.07, 4).unwrap(), 0.5, 1.5),
        (quartic_with_tail(), 2.0, 3.0),
    ];
    for (spec, b1, b2) in cases {
        let r = theorem2_check(&spec, b1, b2, true, &opts).unwrap();
        assert_eq!(
            r.reformulation_agrees,
            Some(true),
            "{spec} at ({b1}, {b2}): {:?}",
            r.notes
        );
        assert_eq!(r.uncoupled, r.q0 <= r.c1.max(r.c2));
        if r.thm2_applicable {
            assert!(r.uncoupled && r.c1.min(r.c2) <= 1e-9 && b1 != b2);
        }
    }
}

#[test]
fn q_zero_is_symmetric() {
    let opts = SolveOptions::default();
    let pairs = [
        (MixtureSpec::pure(4).unwrap(), 2.0, 3.0),
        (MixtureSpec::pure(4).unwrap(), 0.5, 2.0),
        (MixtureSpec::two_term(0.07, 4).unwrap(), 1.0, 1.5),
        (MixtureSpec::pure(2).unwrap(), 1.5, 2.5),
    ];
    for (spec, b1, b2) in pairs {
        let s1 = parisi_solve(&spec, b1, &opts).unwrap();
        let s2 = parisi_solve(&spec, b2, &opts).unwrap();
        let a = q_zero(&s1.measure, b1, &s2.measure, b2, SCALED_CDF_TOL);
        let b = q_zero(&s2.measure, b2, &s1.measure, b1, SCALED_CDF_TOL);
        assert_eq!(a, b, "{spec} at ({b1}, {b2})");
        assert_eq!(
            q_zero(&s1.measure, b1, &s1.measure, b1, SCALED_CDF_TOL),
            1.0
        );
    }
}

#[test]
fn q_zero_of_frsb_pair_is_smaller_root() {
    let r = frsb_coupling_demo(0.07, 4, 1.0, 1.5).unwrap();
    let d = r.coupling_demo.unwrap();
    assert!((r.q0 - d.q1).abs() <= 1e-9, "{} vs {}", r.q0, d.q1);
    assert!(d.ordered);
}

#[test]
fn cross_prediction_for_quartic() {
    let spec = MixtureSpec::pure(4).unwrap();
    let a = onersb_solve(&spec, 2.0).unwrap();
    let b = onersb_solve(&spec, 3.0).unwrap();
    let s = cross_overlap_prediction(
        &ParisiMeasure::Atomic(a.measure().unwrap()),
        &ParisiMeasure::Atomic(b.measure().unwrap()),
    )
    .unwrap();
    assert_eq!(s[0], 0.0);
    assert!((s[1] - (a.q * b.q).sqrt()).abs() <= 1e-15);
    assert!(a.q != b.q);
    let frsb = parisi_solve(
        &MixtureSpec::two_term(0.07, 4).unwrap(),
        1.0,
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(cross_overlap_prediction(&frsb.measure, &frsb.measure).is_err());
}
