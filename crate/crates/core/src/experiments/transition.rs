use super::{brickwork_circuit, GateSource};
use crate::cxent::{cx_entropy, Solver, Variant};
use crate::error::{Error, Result};
use crate::gates::{mat4_close, pullback_effect, GateSet, Operation, SimpleEffect};
use crate::quantum::{CVector, DensityOperator, QubitRegister, RegisterOperator};
use crate::rng::child_seed;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::LN_2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionRow {
    pub depth: usize,
    pub gates: usize,
    pub samples: usize,
    /// Fraction with an inverse-circuit witness proving H = 0.
    pub certified_zero: f64,
    pub mean_h: f64,
    pub min_h: f64,
    pub max_h: f64,
    /// Fraction with H ≥ (n − 1) log 2.
    pub high_fraction: f64,
}

/// Is every dagger of the circuit's gates an element of `g`?
fn inverse_in_set(ops: &[crate::gates::PlacedOp], g: &GateSet) -> bool {
    ops.iter().all(|p| {
        let dag = p.op.dagger();
        g.gates().iter().any(|x| match (&x.op, &dag) {
            (Operation::Unitary(a), Operation::Unitary(b)) => mat4_close(a, b, 1e-12),
            _ => false,
        })
    })
}

/// Random brickwork states V|0ⁿ⟩ and their complexity entropy, per depth.
pub fn transition_scan(
    n: usize,
    depths: &[usize],
    r: usize,
    eta: f64,
    g: &GateSet,
    samples: usize,
    seed: u64,
) -> Result<Vec<TransitionRow>> {
    if !g.is_finite() {
        return Err(Error::InvalidParameter("transition scan needs a finite gate set".into()));
    }
    let register = QubitRegister::new(n)?;
    let source = GateSource::Finite(g.clone());
    let mut rows = Vec::with_capacity(depths.len());
    for (di, &depth) in depths.iter().enumerate() {
        let results: Vec<Result<(usize, bool, f64)>> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let circuit = brickwork_circuit(n, depth, &source, child_seed(seed, ((di as u64) << 32) | s as u64))?;
                let u = circuit.unitary().expect("unitary circuit");
                let psi = CVector::from_fn(1 << n, |i, _| u[(i, 0)]);
                let rho = DensityOperator::pure(register.clone(), &psi)?;
                let mut certified = false;
                if circuit.complexity() <= r && inverse_in_set(&circuit.ops, g) {
                    // Q = V|0ⁿ⟩⟨0ⁿ|V† is the pullback of the all-zero projector through V†.
                    let q = pullback_effect(&circuit.inverse(), SimpleEffect::new(n, (1u32 << n) - 1), &register)?;
                    certified = q.expectation(rho.matrix()) >= eta - 1e-12;
                }
                let h = cx_entropy(&rho, g, r, eta, Variant::Normalized, Solver::Enumeration)?.value;
                Ok((circuit.complexity(), certified, h))
            })
            .collect();
        let mut gates = 0;
        let (mut cert, mut high, mut sum) = (0usize, 0usize, 0.0);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for res in results {
            let (k, certified, h) = res?;
            gates = k;
            cert += certified as usize;
            high += (h >= (n - 1) as f64 * LN_2 - 1e-9) as usize;
            sum += h;
            lo = lo.min(h);
            hi = hi.max(h);
        }
        let denom = samples.max(1) as f64;
        rows.push(TransitionRow {
            depth,
            gates,
            samples,
            certified_zero: cert as f64 / denom,
            mean_h: if samples > 0 { sum / denom } else { f64::NAN },
            min_h: lo,
            max_h: hi,
            high_fraction: high as f64 / denom,
        });
    }
    Ok(rows)
}
