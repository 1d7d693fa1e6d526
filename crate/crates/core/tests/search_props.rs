use proptest::prelude::*;
use qmetric::axioms::{m2_admissible, Axiom};
use qmetric::search::{certify, feasibility_search, SearchConfig, SearchOutcome, SearchStatus};
use qmetric::{AlgebraShape, BiElement, Mode};

fn config(blocks: Vec<usize>, seed: u64) -> SearchConfig {
    let mut cfg = SearchConfig::new(AlgebraShape::new(blocks).unwrap());
    cfg.seed = seed;
    cfg.restarts = 2;
    cfg
}

fn candidate(out: &SearchOutcome) -> BiElement {
    out.candidate.as_ref().unwrap().rho.to_element::<2>().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn homogeneity_guard(seed in any::<u64>(), c in 0.1f64..10.0) {
        let base = config(vec![1, 1, 1], seed);
        let mut scaled = base.clone();
        scaled.trace_target *= c;
        scaled.eps *= c;
        let a = feasibility_search(&base, Mode::Representation).unwrap();
        let b = feasibility_search(&scaled, Mode::Representation).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.status, SearchStatus::CandidateFound);
        let (ra, rb) = (candidate(&a), candidate(&b));
        prop_assert!((&rb - &ra.scale(c)).op_norm() <= 1e-9 * rb.op_norm());
        let pattern = |o: &SearchOutcome| o.candidate.as_ref().unwrap().report.failing();
        prop_assert_eq!(pattern(&a), pattern(&b));
    }

    #[test]
    fn classical_shapes_are_found_in_both_modes(seed in any::<u64>(), n in 2usize..=4) {
        for mode in [Mode::Representation, Mode::Algebraic] {
            let out = feasibility_search(&config(vec![1; n], seed), mode).unwrap();
            prop_assert_eq!(out.status, SearchStatus::CandidateFound);
            let rho = candidate(&out);
            prop_assert!((rho.trace().re - (n * n) as f64).abs() < 1e-9);
            // diagonal, hence classical
            prop_assert!(rho.matrix().iter().enumerate().all(|(k, z)| k % (n * n + 1) == 0 || z.norm() == 0.0));
        }
    }
}

#[test]
fn serialized_candidates_recertify_bit_for_bit() {
    for mode in [Mode::Representation, Mode::Algebraic] {
        let cfg = config(vec![2, 1], 17);
        let out = feasibility_search(&cfg, mode).unwrap();
        let text = out.to_json();
        let back = SearchOutcome::from_json(&text).unwrap();
        assert_eq!(back, out);
        if let Some(rec) = &back.candidate {
            let rho = rec.rho.to_element::<2>().unwrap();
            let report = certify(&rho, &cfg.shape, &cfg, mode).unwrap();
            assert_eq!(report, rec.report);
            assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&rec.report).unwrap());
        }
        assert!(back.residual_history.len() <= 1000);
    }
}

#[test]
fn identical_configs_give_identical_outcomes() {
    let mut cfg = config(vec![2], 5);
    cfg.restarts = 4;
    cfg.max_iter = 300;
    let a = feasibility_search(&cfg, Mode::Representation).unwrap();
    let b = feasibility_search(&cfg, Mode::Representation).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn two_by_two_matrices_stall_and_the_relaxation_finds_the_family() {
    let mut cfg = config(vec![2], 1);
    cfg.max_iter = 2000;
    let out = feasibility_search(&cfg, Mode::Representation).unwrap();
    assert_eq!(out.status, SearchStatus::NoConvergence);
    assert!(out.candidate.is_none());
    assert!(out.best_residual > 1e-2);

    cfg.drop_triangle = true;
    let out = feasibility_search(&cfg, Mode::Representation).unwrap();
    assert_eq!(out.status, SearchStatus::CandidateFound);
    let rec = out.candidate.as_ref().unwrap();
    assert_eq!(rec.report.failing(), vec![Axiom::Triangle]);
    let rho = candidate(&out);
    let family = m2_admissible(1.0).unwrap();
    let unit = |r: &BiElement| r.scale(1.0 / r.trace().re);
    assert!((&unit(&rho) - &unit(&family)).op_norm() < 1e-6);
}
