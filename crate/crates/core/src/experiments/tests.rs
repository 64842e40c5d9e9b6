use super::*;
use crate::gates::{named_gate, Gate};
use crate::quantum::{c, kron, random_pure_state, CVector, QubitRegister};
use crate::rng::task_rng;
use approx::assert_abs_diff_eq;

fn chain_set() -> GateSet {
    GateSet::default_finite(Connectivity::Chain)
}

fn bell() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
    &psi * psi.adjoint()
}

#[test]
fn brickwork_layout() {
    let src = GateSource::HaarSU4;
    assert!(brickwork_circuit(4, 0, &src, 1).unwrap().ops.is_empty());
    let circ = brickwork_circuit(4, 2, &src, 1).unwrap();
    let edges: Vec<_> = circ.ops.iter().map(|p| p.edge).collect();
    assert_eq!(edges, vec![(0, 1), (2, 3), (1, 2)]);
    assert_eq!(circ, brickwork_circuit(4, 2, &src, 1).unwrap());
    assert_ne!(circ, brickwork_circuit(4, 2, &src, 2).unwrap());
}

#[test]
fn entanglement_examples() {
    let zero = DensityOperator::zeros_state(4).unwrap();
    assert_abs_diff_eq!(entanglement_e_state(&zero).unwrap(), 0.0, epsilon = 1e-12);
    let ghz = DensityOperator::ghz(4).unwrap();
    assert_abs_diff_eq!(entanglement_e_state(&ghz).unwrap(), 2.0 * LN_2, epsilon = 1e-10);
    // Local rotations leave every cut entropy unchanged.
    let h = named_gate("HI").unwrap();
    let rotated = dense_to_matrix(&apply_dense(&dense_from_matrix(ghz.matrix()), 4, &Operation::Unitary(h), 2, 3), 16);
    assert_abs_diff_eq!(entanglement_e(&rotated, 4).unwrap(), 2.0 * LN_2, epsilon = 1e-10);
}

#[test]
fn pure_state_shortcut_matches_mutual_information() {
    let mut rng = task_rng(5, 0);
    for _ in 0..5 {
        let psi = random_pure_state(16, &mut rng).unwrap();
        let rho = &psi * psi.adjoint();
        assert_abs_diff_eq!(entanglement_of_ket(&psi, 4).unwrap(), entanglement_e(&rho, 4).unwrap(), epsilon = 1e-9);
    }
}

#[test]
fn continuity_bound_shape() {
    assert_abs_diff_eq!(continuity_bound(0.0, 4), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(continuity_bound(10.0, 4), 8.0 * LN_2 / 3.0, epsilon = 1e-12);
    assert!(continuity_bound(0.01, 4) < 0.1 * continuity_bound(10.0, 4));
}

#[test]
fn continuity_trials_respect_bounds() {
    let report = continuity_trial(4, 60, 3, &GateSource::HaarSU4).unwrap();
    assert_eq!(report.coarse_violations, 0);
    assert_eq!(report.refined_violations, 0);
    let near = continuity_trial(4, 40, 4, &GateSource::NearIdentity(0.01)).unwrap();
    assert_eq!(near.refined_violations, 0);
    assert!(near.max_delta < 0.5 * 8.0 * LN_2 / 3.0);
    let only_identity = GateSet::finite(vec![Gate::unitary("HH", named_gate("HI").unwrap())], Connectivity::Chain).unwrap();
    let local = continuity_trial(4, 10, 5, &GateSource::Finite(only_identity)).unwrap();
    assert!(local.max_delta < 1e-9);
}

#[test]
fn entanglement_bound_product_and_random() {
    let g = chain_set();
    let zero = DensityOperator::zeros_state(3).unwrap();
    let b = entanglement_bound_check(&zero, &g, 0, 1.0).unwrap();
    assert!(b.rhs <= 1e-12 && b.lhs >= -1e-12);
    let mut rng = task_rng(9, 0);
    for _ in 0..5 {
        let m = random_density(8, 3, &mut rng).unwrap();
        let rho = DensityOperator::new(QubitRegister::new(3).unwrap(), m).unwrap();
        for (r, eta) in [(0, 0.9), (1, 0.99)] {
            assert!(entanglement_bound_check(&rho, &g, r, eta).unwrap().slack >= -1e-9);
        }
    }
    let all = GateSet::default_finite(Connectivity::AllToAll);
    assert!(entanglement_bound_check(&zero, &all, 0, 1.0).is_err());
}

#[test]
fn transition_shallow_is_certified_zero() {
    let g = chain_set().adjoint_closed();
    let rows = transition_scan(3, &[0, 1], 2, 1.0, &g, 4, 11).unwrap();
    assert_eq!(rows[0].gates, 0);
    assert_eq!(rows[1].gates, 1);
    for row in &rows {
        assert_eq!(row.certified_zero, 1.0);
        assert_abs_diff_eq!(row.max_h, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn quench_starts_unentangled_and_respects_rate() {
    let spec = IsingSpec { n: 4, coupling: 1.0, field: 1.0, periodic: true, initial: InitialState::Ones };
    let times: Vec<f64> = (0..=10).map(|k| 0.2 * k as f64).collect();
    let trace = ising_quench(&spec, &times).unwrap();
    assert_abs_diff_eq!(trace.entanglement[0], 0.0, epsilon = 1e-12);
    assert!(trace.entanglement[5] > 1e-3);
    assert_eq!(trace.violations, 0);
    assert!(trace.converged.iter().all(|&x| x));
    let doubled = IsingSpec { coupling: 2.0, field: 2.0, ..spec };
    let t2 = ising_quench(&doubled, &times).unwrap();
    assert_abs_diff_eq!(t2.bound, 2.0 * trace.bound, epsilon = 1e-9);
    assert_eq!(t2.violations, 0);
}

#[test]
fn commuting_quench_grows_then_saturates() {
    let spec = IsingSpec { n: 4, coupling: 1.0, field: 0.0, periodic: false, initial: InitialState::Plus };
    let times: Vec<f64> = (0..=16).map(|k| 0.1 * k as f64).collect();
    let trace = ising_quench(&spec, &times).unwrap();
    assert_abs_diff_eq!(trace.entanglement[0], 0.0, epsilon = 1e-12);
    let peak = trace.entanglement.iter().cloned().fold(0.0, f64::max);
    assert!(peak > 0.5);
    assert!(peak <= 2.0 * LN_2 + 1e-9);
    assert_eq!(trace.violations, 0);
    // Eigenstates of the ZZ part never entangle.
    let ones = ising_quench(&IsingSpec { initial: InitialState::Ones, ..spec }, &times).unwrap();
    assert!(ones.entanglement.iter().all(|&e| e.abs() < 1e-12));
}

#[test]
fn quench_rejects_bad_times() {
    let spec = IsingSpec { n: 3, coupling: 1.0, field: 1.0, periodic: false, initial: InitialState::Ones };
    assert!(ising_quench(&spec, &[0.0, 0.0]).is_err());
    assert!(ising_quench(&IsingSpec { n: 11, ..spec }, &[0.0]).is_err());
}

#[test]
fn chain_rule_product_has_nonnegative_slack() {
    let g = GateSet::default_finite(Connectivity::AllToAll);
    let mut rng = task_rng(21, 0);
    for _ in 0..3 {
        let a = random_density(2, 2, &mut rng).unwrap();
        let br = random_density(4, 3, &mut rng).unwrap();
        let rho = DensityOperator::new(tripartite_register(1, 1, 1).unwrap(), kron(&a, &br)).unwrap();
        let rec = chain_rule_slack(&rho, 1, &g, 1, 0.9).unwrap();
        assert!(rec.slack >= -1e-8, "slack {}", rec.slack);
        assert!(rec.vn_slack >= -1e-9);
    }
}

#[test]
fn probe_is_reproducible_and_verifiable() {
    let g = GateSet::default_finite(Connectivity::AllToAll);
    let report = decoupling_probe(1, 1, 1, &g, 1, 0.9, 12, 4).unwrap();
    assert_eq!(report.slacks.len(), 12);
    assert!(report.vn_min_slack >= -1e-9);
    let again = decoupling_probe(1, 1, 1, &g, 1, 0.9, 12, 4).unwrap();
    assert_eq!(report, again);
    // A serialized record recomputes to the same slack.
    let cx = Counterexample {
        n_a: 1,
        n_b: 1,
        n_r: 1,
        rho: DensityOperator::ghz(3).unwrap().matrix().transpose().iter().map(|z| (z.re, z.im)).collect(),
        gate_names: Vec::new(),
        connectivity: String::new(),
        r: 1,
        eta: 0.9,
        h_ab_given_r: 0.0,
        h_b_given_r: 0.0,
        slack: 0.0,
        witness_ab: Vec::new(),
        witness_b: Vec::new(),
    };
    let ghz = DensityOperator::new(tripartite_register(1, 1, 1).unwrap(), DensityOperator::ghz(3).unwrap().into_matrix()).unwrap();
    let direct = chain_rule_slack(&ghz, 1, &g, 1, 0.9).unwrap().slack;
    assert_abs_diff_eq!(verify_counterexample(&cx, &g).unwrap(), direct, epsilon = 1e-12);
}

#[test]
fn decoupling_already_decoupled_succeeds() {
    let g = GateSet::default_finite(Connectivity::AllToAll);
    let zero = CMatrix::from_fn(2, 2, |i, j| if i == 0 && j == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let rho_ar = kron(&(CMatrix::identity(2, 2) * c(0.5, 0.0)), &zero);
    let out = decoupling_simulate(&rho_ar, 1, 1, &g, 0, 2, 0, 0.9, 0.5, 1).unwrap();
    assert!(out.success);
    assert!(out.consistent);
    assert!(out.conditional_on_conjecture);
}

#[test]
fn decoupling_maximally_entangled() {
    let g = GateSet::default_finite(Connectivity::AllToAll);
    // Referee with two gates sees the Bell projector: D = 2 log 2.
    let fail = decoupling_simulate(&bell(), 1, 1, &g, 0, 2, 0, 1.0, 0.5, 1).unwrap();
    assert_abs_diff_eq!(fail.d_value, 2.0 * LN_2, epsilon = 1e-10);
    assert!(!fail.success);
    let pass = decoupling_simulate(&bell(), 1, 1, &g, 0, 2, 0, 1.0, 0.125, 1).unwrap();
    assert!(pass.success);
    assert!(pass.consistent);
    // Discarding A leaves ρ_R against itself.
    let all = decoupling_simulate(&bell(), 1, 1, &g, 0, 2, 1, 1.0, 0.5, 1).unwrap();
    assert_abs_diff_eq!(all.d_value, 0.0, epsilon = 1e-10);
    assert!(all.success);
}

#[test]
fn decoupling_rejects_bad_parameters() {
    let g = GateSet::default_finite(Connectivity::AllToAll);
    assert!(decoupling_simulate(&bell(), 1, 1, &g, 2, 1, 0, 1.0, 0.5, 1).is_err());
    assert!(decoupling_simulate(&bell(), 1, 1, &g, 0, 1, 2, 1.0, 0.5, 1).is_err());
}
