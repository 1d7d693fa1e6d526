use super::*;
use crate::algebra::{diag_projector, AlgebraElement};
use crate::linalg::{CMatrix, ONE};
use proptest::prelude::*;

fn classical(d: &[&[f64]]) -> BiElement {
    let n = d.len();
    let shape = AlgebraShape::classical(n).unwrap();
    let diag: Vec<f64> = (0..n * n).map(|k| d[k / n][k % n]).collect();
    BiElement::from_real_diagonal(&shape, &diag).unwrap()
}

fn two_point() -> BiElement {
    classical(&[&[0.0, 1.0], &[1.0, 0.0]])
}

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// `1 − S/n` with `S` the swap on `Cⁿ⊗Cⁿ`.
fn swap_element(n: usize) -> BiElement {
    let shape = AlgebraShape::matrix(n).unwrap();
    let d = n * n;
    let mut m = CMatrix::identity(d, d);
    for a in 0..n {
        for b in 0..n {
            m[(a * n + b, b * n + a)] -= crate::linalg::real(1.0 / n as f64);
        }
    }
    BiElement::from_matrix(&shape, m).unwrap()
}

#[test]
fn swap_element_verdicts() {
    // positive definite, m(ρ) = 0, triangle defect 1 − (S₁₂ + S₂₃ − S₁₃)/n
    for n in 2..=4 {
        let rho = swap_element(n);
        let alg = verify(&rho, rho.shape(), &cfg(), Mode::Algebraic).unwrap();
        assert!(alg.passed, "n = {n}: {:?}", alg.failing());
        let tri = alg.record(Axiom::Triangle).unwrap().margin;
        assert!((tri - (1.0 - 2.0 / n as f64)).abs() < 1e-12);
        let rep = verify(&rho, rho.shape(), &cfg(), Mode::Representation).unwrap();
        assert_eq!(rep.failing(), vec![Axiom::DiagVanish, Axiom::Nondegenerate]);
    }
}

#[test]
fn positivity_examples() {
    let p = diag_projector(&AlgebraShape::matrix(2).unwrap());
    let rec = check_positive(&p, &cfg());
    assert!(rec.passed);
    assert!(rec.margin.abs() < 1e-14);
    assert!(check_positive(&m2_admissible(1.0).unwrap(), &cfg()).passed);
    let neg = BiElement::identity(&AlgebraShape::classical(2).unwrap()).scale(-1.0);
    let rec = check_positive(&neg, &cfg());
    assert!(!rec.passed);
    assert!((rec.margin + 1.0).abs() < 1e-14);
    assert!(rec.witness.is_some());
}

#[test]
fn flip_examples() {
    assert!(check_flip_symmetric(&two_point(), &cfg()).passed);
    assert!(check_flip_symmetric(&m2_admissible(3.0).unwrap(), &cfg()).passed);
    let shape = AlgebraShape::matrix(2).unwrap();
    let mut e11 = CMatrix::zeros(2, 2);
    e11[(0, 0)] = ONE;
    let mut e12 = CMatrix::zeros(2, 2);
    e12[(0, 1)] = ONE;
    let r = algebra::tensor2(
        &AlgebraElement::from_matrix(&shape, e11).unwrap(),
        &AlgebraElement::from_matrix(&shape, e12).unwrap(),
    )
    .unwrap();
    assert!(!check_flip_symmetric(&r, &cfg()).passed);
}

#[test]
fn diag_vanish_examples() {
    assert!(check_diag_vanish(&m2_admissible(1.0).unwrap(), &cfg()).passed);
    let p = diag_projector(&AlgebraShape::matrix(2).unwrap());
    assert!(!check_diag_vanish(&p, &cfg()).passed);
    assert!(check_diag_vanish(&two_point(), &cfg()).passed);
}

#[test]
fn nondegenerate_examples() {
    let rho = m2_admissible(1.0).unwrap();
    // ρ + P_δ has spectrum {1, 1, 1, 2}
    let shifted = rho.matrix() + diag_projector(rho.shape()).matrix();
    let mut ev = linalg::eigvalsh(&shifted);
    ev.iter_mut().for_each(|x| *x = (*x * 1e12).round() / 1e12);
    assert_eq!(ev, vec![1.0, 1.0, 1.0, 2.0]);
    assert!(check_nondegenerate(&rho, &cfg()).passed);

    let zero = BiElement::zeros(&AlgebraShape::classical(2).unwrap());
    let rec = check_nondegenerate(&zero, &cfg());
    assert!(!rec.passed);
    assert!(!rec.indeterminate);

    let mut c = cfg();
    c.strict_floor = StrictFloor::Absolute(1.0);
    assert!(check_nondegenerate(&two_point(), &c).passed);
    c.strict_floor = StrictFloor::Absolute(1.5);
    assert!(!check_nondegenerate(&two_point(), &c).passed);

    let p = diag_projector(&AlgebraShape::matrix(2).unwrap());
    assert!(check_nondegenerate(&p, &cfg()).indeterminate);
}

#[test]
fn one_point_space_zero_metric_is_valid() {
    let zero = BiElement::zeros(&AlgebraShape::classical(1).unwrap());
    for mode in [Mode::Representation, Mode::Algebraic] {
        let report = verify(&zero, zero.shape(), &cfg(), mode).unwrap();
        assert!(report.passed, "{mode}: {:?}", report.failing());
    }
}

#[test]
fn zero_metric_fails_only_nondegeneracy() {
    let zero = BiElement::zeros(&AlgebraShape::classical(2).unwrap());
    let report = verify(&zero, zero.shape(), &cfg(), Mode::Representation).unwrap();
    assert_eq!(report.failing(), vec![Axiom::Nondegenerate]);
    let report = verify(&zero, zero.shape(), &cfg(), Mode::Algebraic).unwrap();
    assert_eq!(report.failing(), vec![Axiom::AlgNondegenerate]);
}

#[test]
fn triangle_defect_of_two_point_space() {
    let m = triangle_defect(&two_point());
    // diagonal entries d(x,y) + d(y,z) − d(x,z); zero at (x, y, x) paths' ends
    let lo = m.min_eigenvalue();
    assert!(lo.abs() < 1e-15);
    assert!(check_triangle(&two_point(), &cfg()).passed);
    let zero = BiElement::zeros(&AlgebraShape::matrix(2).unwrap());
    assert_eq!(triangle_defect(&zero), TriElement::zeros(zero.shape()));
    let rec = check_triangle(&zero, &cfg());
    assert!(rec.passed && rec.margin == 0.0);
}

#[test]
fn triangle_fails_for_m2_family_with_certified_witness() {
    let rho = m2_admissible(1.0).unwrap();
    let rec = check_triangle(&rho, &cfg());
    assert!(!rec.passed);
    let w = CVector::from_vec(rec.witness.clone().unwrap());
    let m = triangle_defect(&rho);
    let q = (w.adjoint() * m.matrix() * &w)[(0, 0)];
    assert!(q.re < -0.5);
    assert!((q.re - rec.margin).abs() < 1e-12);
    // the explicit witness (0,2,1,0,0,0,0,0) gives −2
    let x = CVector::from_iterator(8, [0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0].map(linalg::real));
    let q = (x.adjoint() * m.matrix() * &x)[(0, 0)];
    assert!((q.re + 2.0).abs() < 1e-14);
}

#[test]
fn algebraic_diag_examples() {
    assert!(check_alg_diag(&two_point(), &cfg()).passed);
    let one = BiElement::identity(&AlgebraShape::matrix(2).unwrap());
    let rec = check_alg_diag(&one, &cfg());
    assert!(!rec.passed);
    assert!((rec.margin + 1.0).abs() < 1e-14);
    // m(ρ_λ) = −λ·1 by a direct sum over the defining formula
    let rho = m2_admissible(0.5).unwrap();
    let r = rho.matrix();
    for (a, e) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
        let direct: C64 = (0..2).map(|b| r[(2 * a + b, 2 * b + e)]).sum();
        let expect = if a == e { -0.5 } else { 0.0 };
        assert!((direct.re - expect).abs() < 1e-15);
    }
    let rec = check_alg_diag(&rho, &cfg());
    assert!(!rec.passed);
    assert!((rec.margin + 0.5).abs() < 1e-14);
}

#[test]
fn sampled_nondegeneracy_examples() {
    let rho = two_point();
    // ν = diag(1, ½, ½, 1): det(ρ + ν) = 1·1.5·1.5·1
    let nu = classical(&[&[1.0, 0.5], &[0.5, 1.0]]);
    let det: f64 = (0..4).map(|i| (rho.matrix() + nu.matrix())[(i, i)].re).product();
    assert!((det - 2.25).abs() < 1e-15);
    assert!(check_alg_nondegenerate_sampled(&rho, &cfg()).unwrap().passed);

    let zero = BiElement::zeros(rho.shape());
    let rec = check_alg_nondegenerate_sampled(&zero, &cfg()).unwrap();
    assert!(!rec.passed);
    assert!(rec.margin < 0.0);
}

#[test]
fn verify_rejects_shape_mismatch() {
    let rho = two_point();
    let other = AlgebraShape::classical(3).unwrap();
    assert!(verify(&rho, &other, &cfg(), Mode::Representation).is_err());
}

#[test]
fn verify_examples() {
    let d = classical(&[&[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]);
    for mode in [Mode::Representation, Mode::Algebraic] {
        assert!(verify(&d, d.shape(), &cfg(), mode).unwrap().passed);
    }
    for lambda in [0.1, 1.0, 10.0] {
        let rho = m2_admissible(lambda).unwrap();
        let report = verify(&rho, rho.shape(), &cfg(), Mode::Representation).unwrap();
        assert_eq!(report.failing(), vec![Axiom::Triangle]);
    }
    let one = BiElement::identity(&AlgebraShape::matrix(2).unwrap());
    let rep = verify(&one, one.shape(), &cfg(), Mode::Representation).unwrap();
    assert!(rep.failing().contains(&Axiom::DiagVanish));
    let alg = verify(&one, one.shape(), &cfg(), Mode::Algebraic).unwrap();
    assert!(alg.failing().contains(&Axiom::AlgDiag));
}

#[test]
fn m2_family_basics() {
    assert!(m2_admissible(0.0).is_err());
    assert!(m2_admissible(-1.0).is_err());
    assert_eq!(m2_admissible(2.0).unwrap(), m2_admissible(1.0).unwrap().scale(2.0));
    for lambda in [0.3, 1.0, 7.0] {
        let rho = m2_admissible(lambda).unwrap();
        assert!((diameter(&rho) - 2.0 * lambda).abs() < 1e-13);
        for rec in [
            check_positive(&rho, &cfg()),
            check_diag_vanish(&rho, &cfg()),
            check_nondegenerate(&rho, &cfg()),
            check_flip_symmetric(&rho, &cfg()),
        ] {
            assert!(rec.passed, "{:?}", rec.axiom);
        }
    }
    assert_eq!(diameter(&BiElement::zeros(&AlgebraShape::matrix(2).unwrap())), 0.0);
}

#[test]
fn report_serializes_with_tags() {
    let rho = m2_admissible(1.0).unwrap();
    let report = verify(&rho, rho.shape(), &cfg(), Mode::Representation).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["mode"], "representation");
    assert_eq!(json["shape"], serde_json::json!([2]));
    assert_eq!(json["axioms"][4]["axiom"], "v");
    assert_eq!(json["axioms"][4]["passed"], false);
    assert!(json["axioms"][4]["witness"].is_array());
    let back: AxiomReport = serde_json::from_value(json).unwrap();
    assert_eq!(back, report);
}

#[test]
fn tolerance_validation() {
    let mut c = cfg();
    c.sample_count = 0;
    assert!(c.validate().is_err());
    let mut c = cfg();
    c.strict_floor = StrictFloor::Absolute(0.0);
    assert!(c.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_covariance(c in 0.05f64..20.0, a in 0.5f64..2.0, b in 0.5f64..2.0, e in 0.5f64..2.0) {
        let rho = classical(&[&[0.0, a, b], &[a, 0.0, e], &[b, e, 0.0]]);
        let scaled = rho.scale(c);
        let mut base = cfg();
        base.strict_floor = StrictFloor::Absolute(0.3);
        let mut big = base.clone();
        big.strict_floor = StrictFloor::Absolute(0.3 * c);
        let r1 = verify(&rho, rho.shape(), &base, Mode::Representation).unwrap();
        let r2 = verify(&scaled, scaled.shape(), &big, Mode::Representation).unwrap();
        prop_assert_eq!(r1.failing(), r2.failing());
        for ax in [Axiom::Positive, Axiom::DiagVanish, Axiom::Triangle, Axiom::Nondegenerate] {
            let m1 = r1.record(ax).unwrap().margin;
            let m2 = r2.record(ax).unwrap().margin;
            prop_assert!((m2 - c * m1).abs() <= 1e-12 * c.max(1.0) * (1.0 + m1.abs()));
        }
    }

    #[test]
    fn mode_agreement_on_diagonal(diag in proptest::collection::vec(-0.5f64..2.0, 9), zero_diag in any::<bool>()) {
        let mut diag = diag;
        if zero_diag {
            for x in 0..3 { diag[x * 3 + x] = 0.0; }
        }
        let shape = AlgebraShape::classical(3).unwrap();
        let rho = BiElement::from_real_diagonal(&shape, &diag).unwrap();
        prop_assert_eq!(check_diag_vanish(&rho, &cfg()).passed, check_alg_diag(&rho, &cfg()).passed);
    }

    #[test]
    fn m2_quadratic_identity(lambda in 0.01f64..100.0, x in proptest::collection::vec(-3.0f64..3.0, 8)) {
        let rho = m2_admissible(lambda).unwrap();
        let m = triangle_defect(&rho);
        let v = CVector::from_iterator(8, x.iter().map(|&t| linalg::real(t)));
        let q = (v.adjoint() * m.matrix() * &v)[(0, 0)].re;
        let (x2, x3, x4, x5, x6, x7) = (x[1], x[2], x[3], x[4], x[5], x[6]);
        let expect = lambda
            * ((x3 - x2 - x5).powi(2) + (x3 * x3 - x2 * x2 - x5 * x5) + (x6 - x4 - x7).powi(2) + (x6 * x6 - x4 * x4 - x7 * x7));
        let norm2: f64 = x.iter().map(|t| t * t).sum();
        prop_assert!((q - expect).abs() <= 1e-10 * lambda * norm2.max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cellwise_triangle_eigenpair_matches_dense(seed in any::<u64>(), blocks in prop::collection::vec(1usize..=2, 1..=3)) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let shape = AlgebraShape::new(blocks).unwrap();
        let n = shape.tensor_dim(2);
        let x = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let rho = BiElement::from_matrix_masked(&shape, &x + x.adjoint()).unwrap();
        let dense = triangle_defect(&rho);
        let (value, vector) = triangle_defect_lowest(&rho);
        prop_assert!((value - dense.min_eigenvalue()).abs() < 1e-10);
        let residual = dense.matrix() * &vector - &vector * crate::linalg::real(value);
        prop_assert!(residual.norm() < 1e-9);
    }
}
