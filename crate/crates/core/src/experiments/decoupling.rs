use crate::cxent::{conditional_cx_entropy, cx_relative_entropy_matrix, ConditionalSpec, Solver, Variant};
use crate::entropy::von_neumann_matrix;
use crate::error::{Error, Result};
use crate::gates::{apply_dense, budget_from_env, dense_from_matrix, dense_to_matrix, GateSet};
use crate::quantum::{c, kron, partial_trace_matrix, random_density, CMatrix, DensityOperator, QubitRegister, RegisterOperator};
use crate::rng::task_rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

const VIOLATION_TOL: f64 = 1e-8;

fn labels(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

/// Register A0.. B0.. R0.. in that order.
pub fn tripartite_register(n_a: usize, n_b: usize, n_r: usize) -> Result<QubitRegister> {
    let mut l = labels("A", n_a);
    l.extend(labels("B", n_b));
    l.extend(labels("R", n_r));
    QubitRegister::with_labels(l)
}

/// Everything needed to recompute one chain-rule slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub n_a: usize,
    pub n_b: usize,
    pub n_r: usize,
    /// Row-major (re, im) entries of ρ_ABR.
    pub rho: Vec<(f64, f64)>,
    pub gate_names: Vec<String>,
    pub connectivity: String,
    pub r: usize,
    pub eta: f64,
    pub h_ab_given_r: f64,
    pub h_b_given_r: f64,
    pub slack: f64,
    pub witness_ab: Vec<String>,
    pub witness_b: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackRecord {
    pub h_ab_given_r: f64,
    pub h_b_given_r: f64,
    pub slack: f64,
    /// Same combination with von Neumann conditional entropies.
    pub vn_slack: f64,
    pub witness_ab: Vec<String>,
    pub witness_b: Vec<String>,
}

/// H_Hc(AB|R) + n_A log 2 − H_Hc(B|R) on a state over [`tripartite_register`].
pub fn chain_rule_slack(rho: &DensityOperator, n_a: usize, g: &GateSet, r: usize, eta: f64) -> Result<SlackRecord> {
    let names = rho.register().labels();
    let pick = |p: char| -> Vec<String> { names.iter().filter(|l| l.starts_with(p)).cloned().collect() };
    let (a, b, rr) = (pick('A'), pick('B'), pick('R'));
    if a.len() != n_a || b.is_empty() || rr.is_empty() {
        return Err(Error::InvalidParameter("state must carry A, B and R labels".into()));
    }
    let ab: Vec<String> = a.iter().chain(&b).cloned().collect();
    let hab = conditional_cx_entropy(rho, &ConditionalSpec { a: ab, b: rr.clone(), r, eta }, g, Solver::Enumeration)?;
    let hb = conditional_cx_entropy(rho, &ConditionalSpec { a: b.clone(), b: rr.clone(), r, eta }, g, Solver::Enumeration)?;

    let n = rho.n();
    let idx = |ls: &[String]| -> Vec<usize> { ls.iter().map(|l| rho.register().index_of(l).expect("own label")).collect() };
    let (bi, ri) = (idx(&b), idx(&rr));
    let mut bri: Vec<usize> = bi.iter().chain(&ri).copied().collect();
    bri.sort_unstable();
    let s_abr = von_neumann_matrix(rho.matrix())?;
    let s_br = von_neumann_matrix(&partial_trace_matrix(rho.matrix(), n, &bri))?;
    let s_r = von_neumann_matrix(&partial_trace_matrix(rho.matrix(), n, &ri))?;
    let vn_slack = (s_abr - s_r) + n_a as f64 * LN_2 - (s_br - s_r);

    Ok(SlackRecord {
        h_ab_given_r: hab.value,
        h_b_given_r: hb.value,
        slack: hab.value + n_a as f64 * LN_2 - hb.value,
        vn_slack,
        witness_ab: hab.witness_circuit(),
        witness_b: hb.witness_circuit(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub trials: usize,
    pub min_slack: f64,
    pub min_trial: usize,
    pub vn_min_slack: f64,
    pub slacks: Vec<f64>,
    pub counterexamples: Vec<Counterexample>,
}

fn connectivity_name(g: &GateSet) -> String {
    format!("{:?}", g.connectivity)
}

/// Chain-rule slack on random mixed ρ_ABR; slacks below −1e-8 are kept as counterexamples.
#[allow(clippy::too_many_arguments)]
pub fn decoupling_probe(
    n_a: usize,
    n_b: usize,
    n_r: usize,
    g: &GateSet,
    r: usize,
    eta: f64,
    trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if n_a == 0 || n_b == 0 || n_r == 0 {
        return Err(Error::InvalidParameter("every subsystem needs at least one qubit".into()));
    }
    if !g.is_finite() {
        return Err(Error::InvalidParameter("the probe needs a finite gate set".into()));
    }
    let register = tripartite_register(n_a, n_b, n_r)?;
    let d = register.dim();
    let rows: Vec<Result<(CMatrix, SlackRecord)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = task_rng(seed, k as u64);
            let rank = rng.random_range(1..=d);
            let m = random_density(d, rank, &mut rng)?;
            let rho = DensityOperator::new(register.clone(), m.clone())?;
            Ok((m, chain_rule_slack(&rho, n_a, g, r, eta)?))
        })
        .collect();
    let mut report = ProbeReport {
        trials,
        min_slack: f64::INFINITY,
        min_trial: 0,
        vn_min_slack: f64::INFINITY,
        slacks: Vec::with_capacity(trials),
        counterexamples: Vec::new(),
    };
    for (k, row) in rows.into_iter().enumerate() {
        let (m, rec) = row?;
        if rec.slack < report.min_slack {
            report.min_slack = rec.slack;
            report.min_trial = k;
        }
        report.vn_min_slack = report.vn_min_slack.min(rec.vn_slack);
        report.slacks.push(rec.slack);
        if rec.slack < -VIOLATION_TOL {
            report.counterexamples.push(Counterexample {
                n_a,
                n_b,
                n_r,
                rho: m.transpose().iter().map(|z| (z.re, z.im)).collect(),
                gate_names: g.gates().iter().map(|x| x.name.clone()).collect(),
                connectivity: connectivity_name(g),
                r,
                eta,
                h_ab_given_r: rec.h_ab_given_r,
                h_b_given_r: rec.h_b_given_r,
                slack: rec.slack,
                witness_ab: rec.witness_ab,
                witness_b: rec.witness_b,
            });
        }
    }
    Ok(report)
}

/// Recompute the slack of a serialized instance; returns the fresh value.
pub fn verify_counterexample(cx: &Counterexample, g: &GateSet) -> Result<f64> {
    let register = tripartite_register(cx.n_a, cx.n_b, cx.n_r)?;
    let d = register.dim();
    if cx.rho.len() != d * d {
        return Err(Error::InvalidDimension(format!("{} entries for dimension {d}", cx.rho.len())));
    }
    let m = CMatrix::from_row_iterator(d, d, cx.rho.iter().map(|&(re, im)| c(re, im)));
    let rho = DensityOperator::new(register, m)?;
    Ok(chain_rule_slack(&rho, cx.n_a, g, cx.r, cx.eta)?.slack)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecouplingOutcome {
    pub success: bool,
    /// D_H^{r₁,η}(ρ'_{A₂R} ‖ π_{A₂} ⊗ ρ_R), nats.
    pub d_value: f64,
    /// −log(δ/η), nats.
    pub threshold: f64,
    /// ½[n_A − H_Hc^{r₁−r₀,η}(A|R)/log 2 + log₂(δ/η)].
    pub bound_k: f64,
    pub h_conditional: f64,
    /// bound_k relies on the unproven chain rule for the conditional entropy.
    pub conditional_on_conjecture: bool,
    /// Either the run failed or k ≥ bound_k.
    pub consistent: bool,
    pub scrambler: Vec<String>,
}

/// A random ≤ r₀-gate circuit on A, then k qubits of A discarded, judged by an r₁-gate referee.
#[allow(clippy::too_many_arguments)]
pub fn decoupling_simulate(
    rho_ar: &CMatrix,
    n_a: usize,
    n_r: usize,
    g: &GateSet,
    r0: usize,
    r1: usize,
    k: usize,
    eta: f64,
    delta: f64,
    seed: u64,
) -> Result<DecouplingOutcome> {
    if r1 < r0 {
        return Err(Error::InvalidParameter("referee complexity must be at least the scrambler's".into()));
    }
    if n_a == 0 || n_r == 0 || k > n_a {
        return Err(Error::InvalidParameter(format!("n_A = {n_a}, n_R = {n_r}, k = {k}")));
    }
    if !(eta > 0.0 && eta <= 1.0 && delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("η = {eta}, δ = {delta} must lie in (0, 1]")));
    }
    if !g.is_finite() {
        return Err(Error::InvalidParameter("decoupling needs a finite gate set".into()));
    }
    let n = n_a + n_r;
    let mut register_labels = labels("A", n_a);
    register_labels.extend(labels("R", n_r));
    let rho = DensityOperator::new(QubitRegister::with_labels(register_labels)?, rho_ar.clone())?;

    // Scrambler: r₀ uniform draws among placements inside A.
    let inside: Vec<_> = g.placements(n).into_iter().filter(|p| p.edge.0 < n_a && p.edge.1 < n_a).collect();
    let mut rng = task_rng(seed, 0);
    let mut x = dense_from_matrix(rho_ar);
    let mut scrambler = Vec::new();
    if !inside.is_empty() {
        for _ in 0..r0 {
            let p = &inside[rng.random_range(0..inside.len())];
            x = apply_dense(&x, n, &p.op, p.edge.0, p.edge.1);
            scrambler.push(p.label());
        }
    }
    let scrambled = dense_to_matrix(&x, 1 << n);

    let keep: Vec<usize> = (k..n).collect();
    let n2 = n - k;
    let reduced = partial_trace_matrix(&scrambled, n, &keep);
    let rho_r = partial_trace_matrix(&reduced, n2, &((n_a - k)..n2).collect::<Vec<_>>());
    let pi = CMatrix::identity(1 << (n_a - k), 1 << (n_a - k)) * c(2f64.powi(-((n_a - k) as i32)), 0.0);
    let gamma = kron(&pi, &rho_r);
    let d = cx_relative_entropy_matrix(&reduced, &gamma, n2, g, r1, eta, Variant::Normalized, Solver::Enumeration, budget_from_env())?;
    let threshold = -(delta / eta).ln();
    let success = d.value <= threshold + 1e-12;

    let spec = ConditionalSpec { a: labels("A", n_a), b: labels("R", n_r), r: r1 - r0, eta };
    let h = conditional_cx_entropy(&rho, &spec, g, Solver::Enumeration)?.value;
    let bound_k = 0.5 * (n_a as f64 - h / LN_2 + (delta / eta).log2());
    Ok(DecouplingOutcome {
        success,
        d_value: d.value,
        threshold,
        bound_k,
        h_conditional: h,
        conditional_on_conjecture: true,
        consistent: !success || k as f64 >= bound_k - 1e-9,
        scrambler,
    })
}
