use super::*;
use crate::entropy::hyp_relative_entropy_matrix;
use crate::gates::{enumerate_effects, Connectivity};
use crate::quantum::{random_density, random_pure_state};
use crate::rng::task_rng;
use std::f64::consts::LN_2;

fn default_set() -> GateSet {
    GateSet::default_finite(Connectivity::AllToAll)
}

/// Brute force over the materialised effect set.
fn oracle(rho: &CMatrix, gamma: &CMatrix, n: usize, g: &GateSet, r: usize, eta: f64, variant: Variant) -> f64 {
    let effects = enumerate_effects(g, r, n, true, 10_000_000).unwrap();
    let mut best = f64::INFINITY;
    for q in effects {
        let a = q.expectation(rho);
        let b = q.expectation(gamma);
        if a >= eta - 1e-12 {
            let s = match variant {
                Variant::Normalized => b / a,
                Variant::Reduced => b,
            };
            best = best.min(s);
        }
    }
    -best.ln()
}

fn entropy_bits(rho: &DensityOperator, r: usize, eta: f64) -> f64 {
    let e = cx_entropy(rho, &default_set(), r, eta, Variant::Normalized, Solver::Enumeration).unwrap();
    assert_eq!(e.certainty, Certainty::Exact);
    e.value / LN_2
}

#[test]
fn zero_state_has_zero_entropy() {
    for n in 1..=3 {
        let rho = DensityOperator::zeros_state(n).unwrap();
        for r in 0..3 {
            for eta in [0.5, 0.9, 1.0] {
                assert!(entropy_bits(&rho, r, eta).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn ones_state_loses_two_bits_per_gate() {
    let rho = DensityOperator::ones_state(4).unwrap();
    assert!((entropy_bits(&rho, 0, 0.9) - 4.0).abs() < 1e-9);
    assert!((entropy_bits(&rho, 1, 0.9) - 2.0).abs() < 1e-9);
    assert!(entropy_bits(&rho, 2, 0.9).abs() < 1e-9);
}

#[test]
fn ghz_needs_one_gate_per_qubit() {
    let rho = DensityOperator::ghz(3).unwrap();
    for r in 0..3 {
        assert!((entropy_bits(&rho, r, 0.999) - (3 - r) as f64).abs() < 1e-9, "r = {r}");
    }
    assert!(entropy_bits(&rho, 3, 0.999).abs() < 1e-9);
}

#[test]
fn maximally_mixed_is_incompressible() {
    let rho = DensityOperator::maximally_mixed(3).unwrap();
    for r in 0..3 {
        assert!((entropy_bits(&rho, r, 0.9) - 3.0).abs() < 1e-9);
    }
}

#[test]
fn mixture_bounded_by_weight() {
    let mut rng = task_rng(3, 0);
    let n = 3;
    let psi = random_pure_state(8, &mut rng).unwrap();
    let eps = 0.05;
    let zero = DensityOperator::zeros_state(n).unwrap();
    let pure = DensityOperator::pure(QubitRegister::new(n).unwrap(), &psi).unwrap();
    let m = zero.matrix() * c(1.0 - eps, 0.0) + pure.matrix() * c(eps, 0.0);
    let rho = DensityOperator::new(QubitRegister::new(n).unwrap(), m).unwrap();
    let h = cx_entropy(&rho, &default_set(), 1, 0.9, Variant::Normalized, Solver::Enumeration).unwrap();
    assert!(h.value <= -(1.0 - eps).ln() + 1e-12);
}

#[test]
fn self_relative_entropy_vanishes() {
    let mut rng = task_rng(5, 0);
    for _ in 0..5 {
        let m = random_density(4, 4, &mut rng).unwrap();
        for r in 0..3 {
            let e = cx_relative_entropy_matrix(&m, &m, 2, &default_set(), r, 0.7, Variant::Normalized, Solver::Auto, 1 << 30)
                .unwrap();
            assert!(e.value.abs() < 1e-10);
        }
    }
}

#[test]
fn matches_materialised_oracle() {
    let mut rng = task_rng(7, 0);
    let g = default_set();
    for trial in 0..12 {
        let rho = random_density(4, 1 + trial % 4, &mut rng).unwrap();
        let gamma = if trial % 2 == 0 {
            CMatrix::identity(4, 4)
        } else {
            random_density(4, 4, &mut rng).unwrap() * c(1.5, 0.0)
        };
        for r in 0..3 {
            for eta in [0.3, 0.8] {
                for variant in [Variant::Normalized, Variant::Reduced] {
                    let want = oracle(&rho, &gamma, 2, &g, r, eta, variant);
                    let got = cx_relative_entropy_matrix(&rho, &gamma, 2, &g, r, eta, variant, Solver::Enumeration, 1 << 30)
                        .unwrap();
                    assert!((got.value - want).abs() < 1e-9, "trial {trial} r {r}: {} vs {want}", got.value);
                }
            }
        }
    }
}

#[test]
fn witness_is_feasible_and_attains_value() {
    let rho = DensityOperator::ghz(3).unwrap();
    let e = cx_entropy(&rho, &default_set(), 2, 0.95, Variant::Normalized, Solver::Enumeration).unwrap();
    let q = e.witness.unwrap();
    let a = q.expectation(rho.matrix());
    let b = q.matrix().trace().re;
    assert!(a >= 0.95 - 1e-10);
    assert!(((b / a).ln() - e.value).abs() < 1e-9);
    assert_eq!(q.provenance.unwrap().circuit.len(), 2);
}

#[test]
fn bounded_by_unrestricted_and_gap_to_reduced() {
    let mut rng = task_rng(11, 0);
    for _ in 0..6 {
        let rho = random_density(8, 3, &mut rng).unwrap();
        let gamma = random_density(8, 8, &mut rng).unwrap();
        let eta = 0.6;
        let (dh, ..) = hyp_relative_entropy_matrix(&rho, &gamma, eta).unwrap();
        let g = default_set();
        let norm = cx_relative_entropy_matrix(&rho, &gamma, 3, &g, 1, eta, Variant::Normalized, Solver::Auto, 1 << 30).unwrap();
        let red = cx_relative_entropy_matrix(&rho, &gamma, 3, &g, 1, eta, Variant::Reduced, Solver::Auto, 1 << 30).unwrap();
        assert!(norm.value <= dh + 1e-9);
        let gap = red.value - norm.value;
        assert!(gap >= -1e-10 && gap <= (1.0 / eta).ln() + 1e-10);
    }
}

#[test]
fn conditional_entropy_of_maximally_mixed_a_is_log_two() {
    let mut rng = task_rng(13, 0);
    let rb = random_density(2, 2, &mut rng).unwrap();
    let half = CMatrix::identity(2, 2) * c(0.5, 0.0);
    let m = crate::quantum::kron(&half, &rb);
    let rho = DensityOperator::new(QubitRegister::new(2).unwrap(), m.clone()).unwrap();
    let spec = ConditionalSpec { a: vec!["q0".into()], b: vec!["q1".into()], r: 2, eta: 0.9 };
    let h = conditional_cx_entropy(&rho, &spec, &default_set(), Solver::Enumeration).unwrap();
    let gamma = identity_extend(&rb, 2, &[1]);
    let want = -oracle(&m, &gamma, 2, &default_set(), 2, 0.9, Variant::Normalized);
    assert!((h.value - want).abs() < 1e-9);
    assert!((h.value - LN_2).abs() < 1e-9);
}

#[test]
fn identity_extend_matches_kron() {
    let mut rng = task_rng(17, 0);
    let mb = random_density(2, 2, &mut rng).unwrap();
    let got = identity_extend(&mb, 2, &[1]);
    let want = crate::quantum::kron(&CMatrix::identity(2, 2), &mb);
    assert!((got - want).norm() < 1e-14);
    let got = identity_extend(&mb, 2, &[0]);
    let want = crate::quantum::kron(&mb, &CMatrix::identity(2, 2));
    assert!((got - want).norm() < 1e-14);
}

#[test]
fn success_probability_examples() {
    let g = default_set();
    let bell = {
        let mut psi = crate::quantum::CVector::zeros(4);
        psi[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[3] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        DensityOperator::pure(QubitRegister::new(2).unwrap(), &psi).unwrap()
    };
    let p = success_probability(&bell, &g, 2, 0.0).unwrap();
    assert!((p.probability - 1.0).abs() < 1e-12);
    let p0 = success_probability(&bell, &g, 0, 0.0).unwrap();
    assert!((p0.probability - 0.5).abs() < 1e-12);
    let p1 = success_probability(&bell, &g, 0, LN_2).unwrap();
    assert!(p1.probability >= p0.probability);
    assert!(success_probability(&bell, &g, 0, 3.0 * LN_2).is_err());
}

#[test]
fn beta_examples() {
    let g = default_set();
    let a = DensityOperator::zeros_state(2).unwrap();
    let b = DensityOperator::ones_state(2).unwrap();
    assert!(distinguishability_beta(&a, &a, &g, 2).unwrap().abs() < 1e-14);
    let b0 = distinguishability_beta(&a, &b, &g, 0).unwrap();
    let b1 = distinguishability_beta(&a, &b, &g, 1).unwrap();
    assert!((b0 - 1.0).abs() < 1e-12);
    assert!(b1 >= b0 - 1e-14);
}

#[test]
fn witness_for_identical_states() {
    let mut rng = task_rng(19, 0);
    let m = random_density(4, 2, &mut rng).unwrap();
    let rho = DensityOperator::new(QubitRegister::new(2).unwrap(), m).unwrap();
    let w = hypothesis_test_witness(&rho, &rho, &default_set(), 1, 0.8, 0.8).unwrap().unwrap();
    assert!((w.accept_rho - 0.8).abs() < 1e-10);
    assert!(w.accept_sigma <= 0.8 + 1e-10);
    assert!(w.coin >= 0.8 - 1e-12 && w.coin <= 1.0);
    // δ < η is impossible for identical states.
    assert!(hypothesis_test_witness(&rho, &rho, &default_set(), 1, 0.8, 0.5).unwrap().is_none());
}

#[test]
fn heuristic_finds_bell_structure() {
    let mut psi = crate::quantum::CVector::zeros(4);
    psi[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[3] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rho = DensityOperator::pure(QubitRegister::new(2).unwrap(), &psi).unwrap();
    let g = GateSet::continuous(Connectivity::AllToAll);
    let cfg = HeuristicConfig { restarts: 8, iterations: 80, seed: 1 };
    let h = cx_entropy(&rho, &g, 1, 0.9, Variant::Normalized, Solver::Heuristic(cfg)).unwrap();
    let floor = -crate::entropy::hyp_entropy(&rho, 0.9).unwrap().value;
    assert!(h.value >= -floor - 1e-9);
    assert!(h.value < 0.5, "heuristic value {}", h.value);
    let q = h.witness.unwrap();
    assert!(q.expectation(rho.matrix()) >= 0.9 - 1e-10);
}
