//! Rewriting midcircuit resets and extractions with ancillas.

use super::{Protocol, Step, ThermalModel};
use crate::cxent::{cx_relative_entropy_matrix, Solver, Variant};
use crate::error::{Error, Result};
use crate::gates::{budget_from_env, mat4_close, named_gate, GateSet, Operation, PlacedOp};
use crate::quantum::{c, kron, CMatrix, DensityOperator, QubitRegister, RegisterOperator};
use std::f64::consts::LN_2;

#[derive(Debug, Clone)]
pub struct LiftedProtocol {
    /// End-reset protocol on n + m₁ + m₂ qubits.
    pub protocol: Protocol,
    pub model: ThermalModel,
    pub n: usize,
    /// Ancillas standing in for midcircuit resets (qubits n..n+m₁).
    pub m1: usize,
    /// Ancillas standing in for midcircuit extractions (qubits n+m₁..).
    pub m2: usize,
}

impl LiftedProtocol {
    /// ρ ⊗ |0⟩⟨0|^{⊗(m₁+m₂)}: the register the lifted protocol starts from.
    pub fn input_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let mut m = rho.matrix().clone();
        for _ in 0..self.m1 + self.m2 {
            m = kron(&m, &super::ket0());
        }
        DensityOperator::new(QubitRegister::new(self.n + self.m1 + self.m2)?, m)
    }
}

fn find_swap(t: &GateSet) -> Result<PlacedOp> {
    let swap = named_gate("SWAP").expect("library gate");
    t.gates()
        .iter()
        .find(|g| matches!(&g.op, Operation::Unitary(u) if mat4_close(u, &swap, 1e-12)))
        .map(|g| PlacedOp { name: "SWAP".into(), op: g.op.clone(), edge: (0, 0) })
        .ok_or(Error::MissingSwap)
}

/// Move every midcircuit Reset/Extract onto a fresh ancilla so that all
/// Extracts come first and all Resets last.
///
/// A midcircuit Reset(i) becomes a SWAP with a |0⟩ ancilla that is reset at
/// the end; a midcircuit Extract(i) becomes an initial Extract on an ancilla
/// that is swapped in at that point. Ancillas copy the gap of the qubit they
/// serve, so the work ledger is unchanged.
pub fn lift_midcircuit(p: &Protocol, model: &ThermalModel, t: &GateSet) -> Result<LiftedProtocol> {
    let n = p.n;
    let len = p.steps.len();
    let prefix = p.steps.iter().take_while(|s| matches!(s, Step::Extract(_))).count();
    let suffix = p.steps[prefix..].iter().rev().take_while(|s| matches!(s, Step::Reset(_))).count();
    let middle = &p.steps[prefix..len - suffix];
    let m1 = middle.iter().filter(|s| matches!(s, Step::Reset(_))).count();
    let m2 = middle.iter().filter(|s| matches!(s, Step::Extract(_))).count();
    if m1 + m2 == 0 {
        return Ok(LiftedProtocol { protocol: p.clone(), model: model.clone(), n, m1: 0, m2: 0 });
    }
    let swap = find_swap(t)?;
    let total = n + m1 + m2;
    let mut extra = vec![0.0; m1 + m2];
    let mut head: Vec<Step> = p.steps[..prefix].to_vec();
    let mut body = Vec::new();
    let mut tail: Vec<Step> = p.steps[len - suffix..].to_vec();
    let (mut next_reset, mut next_extract) = (n, n + m1);
    for s in middle {
        match s {
            Step::Reset(i) => {
                let a = next_reset;
                next_reset += 1;
                extra[a - n] = model.energies[*i];
                body.push(Step::Gate(PlacedOp { edge: (*i, a), ..swap.clone() }));
                tail.push(Step::Reset(a));
            }
            Step::Extract(i) => {
                let b = next_extract;
                next_extract += 1;
                extra[b - n] = model.energies[*i];
                head.push(Step::Extract(b));
                body.push(Step::Gate(PlacedOp { edge: (*i, b), ..swap.clone() }));
            }
            Step::Gate(_) => body.push(s.clone()),
        }
    }
    let mut steps = head;
    steps.extend(body);
    steps.extend(tail);
    Ok(LiftedProtocol { protocol: Protocol { n: total, steps }, model: model.extended(&extra), n, m1, m2 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GBound {
    /// Minimum found, in nats; an upper bound on the untruncated infimum.
    pub value: f64,
    pub m1: usize,
    pub m2: usize,
    /// Largest ancilla count searched.
    pub cap: usize,
}

/// min over m₁, m₂ ≤ m_max of H_H^{r+m₁+m₂,η}(ρ ⊗ |0⟩⟨0|^{⊗m₁} ⊗ (I/2)^{⊗m₂}) − m₂ log 2.
pub fn g_lower_bound(rho: &DensityOperator, t: &GateSet, r: usize, eta: f64, m_max: usize) -> Result<GBound> {
    let n = rho.n();
    let half = CMatrix::identity(2, 2) * c(0.5, 0.0);
    let mut best: Option<GBound> = None;
    for m1 in 0..=m_max {
        for m2 in 0..=m_max {
            let mut m = rho.matrix().clone();
            for _ in 0..m1 {
                m = kron(&m, &super::ket0());
            }
            for _ in 0..m2 {
                m = kron(&m, &half);
            }
            let total = n + m1 + m2;
            let id = CMatrix::identity(1 << total, 1 << total);
            let d = cx_relative_entropy_matrix(
                &m,
                &id,
                total,
                t,
                r + m1 + m2,
                eta,
                Variant::Normalized,
                Solver::Auto,
                budget_from_env(),
            )?;
            let value = -d.value - m2 as f64 * LN_2;
            if best.is_none_or(|b| value < b.value) {
                best = Some(GBound { value, m1, m2, cap: m_max });
            }
        }
    }
    Ok(best.expect("at least one ancilla configuration"))
}
