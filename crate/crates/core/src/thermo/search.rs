//! Exhaustive protocol searches for erasure and data compression.
//!
//! Both searches run the candidate protocols directly (gates, then resets of
//! the chosen qubits) and read the success probability off the final state.

use super::{ket0, replace_qubit, Protocol, Step, ThermalModel};
use crate::error::{Error, Result};
use crate::gates::{apply_dense, dense_from_matrix, dense_to_matrix, invariant_check, GateSet, PlacedOp};
use crate::quantum::{partial_trace_matrix, CMatrix, DensityOperator, RegisterOperator};
use num_complex::Complex64;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

fn state_hash(x: &[Complex64]) -> u64 {
    let mut h = DefaultHasher::new();
    for z in x {
        ((z.re * 1e10).round() as i64).hash(&mut h);
        ((z.im * 1e10).round() as i64).hash(&mut h);
    }
    h.finish()
}

/// Distinct states reachable with ≤ r placements, in breadth-first order, with their paths.
pub fn reachable_states(
    rho: &CMatrix,
    n: usize,
    placements: &[PlacedOp],
    r: usize,
    budget: u64,
) -> Result<Vec<(CMatrix, Vec<usize>)>> {
    let d = 1usize << n;
    let start = dense_from_matrix(rho);
    let mut seen = HashSet::new();
    seen.insert(state_hash(&start));
    let mut out = vec![(start.clone(), Vec::new())];
    let mut frontier = vec![(start, Vec::<usize>::new())];
    for _ in 0..r {
        let mut next = Vec::new();
        for (x, path) in &frontier {
            for (k, p) in placements.iter().enumerate() {
                let y = apply_dense(x, n, &p.op, p.edge.0, p.edge.1);
                if !seen.insert(state_hash(&y)) {
                    continue;
                }
                let mut q = path.clone();
                q.push(k);
                out.push((y.clone(), q.clone()));
                next.push((y, q));
                if (out.len() as u64).saturating_mul(d as u64) > budget {
                    return Err(Error::BudgetExceeded { cap: budget });
                }
            }
        }
        frontier = next;
    }
    Ok(out.into_iter().map(|(x, p)| (dense_to_matrix(&x, d), p)).collect())
}

/// ⟨0ⁿ| ρ' |0ⁿ⟩ after resetting the qubits in `w`.
fn success_after_resets(state: &CMatrix, n: usize, w: &[usize]) -> f64 {
    let mut m = state.clone();
    for &i in w {
        m = replace_qubit(&m, n, i, &ket0());
    }
    m[(0, 0)].re
}

fn qubits_of(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

#[derive(Debug, Clone)]
pub struct Erasure {
    pub beta_work: f64,
    pub protocol: Protocol,
    pub success: f64,
}

/// Least βW over ≤ r gates from 𝒯 followed by resets, reaching |0ⁿ⟩ with probability ≥ η.
pub fn erasure_search(rho: &DensityOperator, model: &ThermalModel, t: &GateSet, r: usize, eta: f64) -> Result<Erasure> {
    let n = rho.n();
    if model.n() != n {
        return Err(Error::RegisterMismatch("model and state sizes differ".into()));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!("success threshold {eta}")));
    }
    if !t.is_finite() {
        return Err(Error::InvalidParameter("erasure search needs a finite set".into()));
    }
    let placements = t.placements(n);
    invariant_check(&model.gamma(), n, &placements)?;
    let states = reachable_states(rho.matrix(), n, &placements, r, crate::gates::budget_from_env())?;

    let mut subsets: Vec<(f64, usize)> =
        (0..1usize << n).map(|w| (qubits_of(w, n).iter().map(|&i| model.log_partition(i)).sum(), w)).collect();
    subsets.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.count_ones().cmp(&b.1.count_ones())).then(a.1.cmp(&b.1)));
    let need = if eta >= 1.0 { 1.0 - 1e-12 } else { eta - 1e-12 };
    for (work, w) in subsets {
        let qubits = qubits_of(w, n);
        for (state, path) in &states {
            let f = success_after_resets(state, n, &qubits);
            if f >= need {
                let mut protocol = Protocol::new(n);
                protocol.steps.extend(path.iter().map(|&k| Step::Gate(placements[k].clone())));
                protocol.steps.extend(qubits.iter().map(|&i| Step::Reset(i)));
                return Ok(Erasure { beta_work: work, protocol, success: f });
            }
        }
    }
    Err(Error::EmptyCandidates("no erasure protocol reaches the threshold".into()))
}

#[derive(Debug, Clone)]
pub struct Compression {
    /// Number of qubits kept as the compressed register.
    pub m: usize,
    pub circuit: Vec<PlacedOp>,
    /// Kept qubits.
    pub kept: Vec<usize>,
    pub fidelity: f64,
}

/// Least m such that a ≤ r-gate unitary leaves all but m qubits in |0⟩ with probability ≥ 1 − ε.
pub fn compression_search(rho: &DensityOperator, g: &GateSet, r: usize, eps: f64) -> Result<Compression> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("compression error {eps}")));
    }
    if !g.is_finite() || !g.is_unitary() {
        return Err(Error::InvalidParameter("compression needs a finite unitary gate set".into()));
    }
    let n = rho.n();
    let placements = g.placements(n);
    let states = reachable_states(rho.matrix(), n, &placements, r, crate::gates::budget_from_env())?;
    let need = 1.0 - eps - 1e-12;
    for m in 0..=n {
        let mut masks: Vec<usize> = (0..1usize << n).filter(|w| w.count_ones() as usize == m).collect();
        masks.sort_unstable();
        for w in masks {
            let kept = qubits_of(w, n);
            let discard: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();
            for (state, path) in &states {
                let f = if discard.is_empty() {
                    state.trace().re
                } else {
                    partial_trace_matrix(state, n, &discard)[(0, 0)].re
                };
                if f >= need {
                    let circuit = path.iter().map(|&k| placements[k].clone()).collect();
                    return Ok(Compression { m, circuit, kept, fidelity: f });
                }
            }
        }
    }
    Ok(Compression { m: n, circuit: Vec::new(), kept: (0..n).collect(), fidelity: rho.matrix().trace().re })
}
