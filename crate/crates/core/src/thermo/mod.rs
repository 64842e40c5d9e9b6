//! Thermodynamic protocols on qubits with a product Hamiltonian.
//!
//! Work is tracked as the dimensionless βW; multiplying by k_BT is left to
//! presentation code.

mod gibbs;
mod lift;
mod search;

pub use gibbs::gibbs_preserving_set;
pub use lift::{g_lower_bound, lift_midcircuit, GBound, LiftedProtocol};
pub use search::{compression_search, erasure_search, reachable_states, Compression, Erasure};

use crate::error::{Error, Result};
use crate::gates::{apply_dense, dense_from_matrix, dense_to_matrix, GateSet, PlacedOp};
use crate::quantum::{c, CMatrix, DensityOperator, HermitianOperator, QubitRegister, RegisterOperator};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Fidelity below which an Extract is rejected.
pub const EXTRACT_TOL: f64 = 1e-9;

/// Per-qubit energy gaps in units of k_BT (βE_i ≥ 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalModel {
    pub energies: Vec<f64>,
}

impl ThermalModel {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if let Some(e) = energies.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::InvalidParameter(format!("energy gap {e} must be finite and nonnegative")));
        }
        Ok(Self { energies })
    }

    /// Every gap zero.
    pub fn degenerate(n: usize) -> Self {
        Self { energies: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.energies.len()
    }

    /// Γ_i = diag(1, e^{−βE_i}).
    pub fn gamma_qubit(&self, i: usize) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c((-self.energies[i]).exp(), 0.0)]))
    }

    /// Z_i = 1 + e^{−βE_i}.
    pub fn partition(&self, i: usize) -> f64 {
        1.0 + (-self.energies[i]).exp()
    }

    pub fn log_partition(&self, i: usize) -> f64 {
        self.partition(i).ln()
    }

    /// βF_i = −log Z_i.
    pub fn free_energy(&self, i: usize) -> f64 {
        -self.log_partition(i)
    }

    /// γ_i = Γ_i / Z_i.
    pub fn thermal_qubit(&self, i: usize) -> CMatrix {
        self.gamma_qubit(i) * c(1.0 / self.partition(i), 0.0)
    }

    /// Γ = ⊗ Γ_i (diagonal).
    pub fn gamma(&self) -> CMatrix {
        let n = self.n();
        let d = 1usize << n;
        let diag: Vec<Complex64> = (0..d)
            .map(|b| {
                let e: f64 = (0..n).filter(|&i| (b >> (n - 1 - i)) & 1 == 1).map(|i| self.energies[i]).sum();
                c((-e).exp(), 0.0)
            })
            .collect();
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
    }

    pub fn gamma_operator(&self) -> Result<HermitianOperator> {
        HermitianOperator::new(QubitRegister::new(self.n())?, self.gamma())
    }

    /// Model with extra qubits appended.
    pub fn extended(&self, extra: &[f64]) -> Self {
        let mut energies = self.energies.clone();
        energies.extend_from_slice(extra);
        Self { energies }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Reset(usize),
    Extract(usize),
    Gate(PlacedOp),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub n: usize,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub complexity: usize,
    pub beta_work: f64,
}

impl Protocol {
    pub fn new(n: usize) -> Self {
        Self { n, steps: Vec::new() }
    }

    pub fn gate_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Gate(_))).count()
    }

    /// True when every Extract precedes every gate and every Reset follows them.
    pub fn is_end_reset_form(&self) -> bool {
        let mut phase = 0;
        for s in &self.steps {
            let p = match s {
                Step::Extract(_) => 0,
                Step::Gate(_) => 1,
                Step::Reset(_) => 2,
            };
            if p < phase {
                return false;
            }
            phase = p;
        }
        true
    }

    /// Parse `RESET i`, `EXTRACT i` and `GATE name a,b` lines; gate names resolve in `g`.
    pub fn parse(text: &str, n: usize, g: &GateSet) -> Result<Self> {
        let mut p = Protocol::new(n);
        for (k, line) in text.lines().enumerate() {
            let ln = k + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let perr = |msg: &str| Error::Parse { line: ln, msg: msg.to_string() };
            let qubit = |w: Option<&&str>| -> Result<usize> {
                let q: usize = w.and_then(|w| w.parse().ok()).ok_or_else(|| perr("expected a qubit index"))?;
                if q >= n {
                    return Err(perr("qubit index out of range"));
                }
                Ok(q)
            };
            match words[0].to_ascii_uppercase().as_str() {
                "RESET" => p.steps.push(Step::Reset(qubit(words.get(1))?)),
                "EXTRACT" => p.steps.push(Step::Extract(qubit(words.get(1))?)),
                "GATE" => {
                    let name = words.get(1).ok_or_else(|| perr("GATE needs a name"))?;
                    let edge = words.get(2).ok_or_else(|| perr("GATE needs an edge a,b"))?;
                    let (a, b) = edge.split_once(',').ok_or_else(|| perr("edge must be a,b"))?;
                    let a: usize = a.parse().map_err(|_| perr("bad edge"))?;
                    let b: usize = b.parse().map_err(|_| perr("bad edge"))?;
                    if a >= n || b >= n || a == b || !g.connectivity.contains(n, a, b) {
                        return Err(Error::OffGraph((a, b)));
                    }
                    let gate = g.gate(name).ok_or_else(|| perr(&format!("unknown gate {name}")))?;
                    if let Some(e) = gate.edge {
                        if e != (a, b) {
                            return Err(Error::OffGraph((a, b)));
                        }
                    }
                    p.steps.push(Step::Gate(PlacedOp { name: name.to_string(), op: gate.op.clone(), edge: (a, b) }));
                }
                other => return Err(perr(&format!("unknown step `{other}`"))),
            }
        }
        Ok(p)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            match s {
                Step::Reset(i) => writeln!(f, "RESET {i}")?,
                Step::Extract(i) => writeln!(f, "EXTRACT {i}")?,
                Step::Gate(p) => writeln!(f, "GATE {} {},{}", p.name, p.edge.0, p.edge.1)?,
            }
        }
        Ok(())
    }
}

/// tr_i(ρ) with qubit `i` replaced by the single-qubit state `sigma`.
pub fn replace_qubit(rho: &CMatrix, n: usize, i: usize, sigma: &CMatrix) -> CMatrix {
    let d = 1usize << n;
    let bit = 1usize << (n - 1 - i);
    CMatrix::from_fn(d, d, |x, y| {
        let (xi, yi) = ((x & bit != 0) as usize, (y & bit != 0) as usize);
        let (x0, y0) = (x & !bit, y & !bit);
        (rho[(x0, y0)] + rho[(x0 | bit, y0 | bit)]) * sigma[(xi, yi)]
    })
}

pub(crate) fn ket0() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
}

/// ⟨0|ρ_i|0⟩ for the marginal of qubit `i`.
pub fn zero_population(rho: &CMatrix, n: usize, i: usize) -> f64 {
    let bit = 1usize << (n - 1 - i);
    (0..1usize << n).filter(|x| x & bit == 0).map(|x| rho[(x, x)].re).sum()
}

/// Execute a protocol and return the final state with its costs.
pub fn run_protocol(p: &Protocol, rho: &DensityOperator, model: &ThermalModel) -> Result<(DensityOperator, CostLedger)> {
    let n = p.n;
    if rho.n() != n || model.n() != n {
        return Err(Error::RegisterMismatch(format!(
            "protocol on {n} qubits, state on {}, model on {}",
            rho.n(),
            model.n()
        )));
    }
    let mut m = rho.matrix().clone();
    let mut ledger = CostLedger::default();
    for s in &p.steps {
        match s {
            Step::Reset(i) => {
                m = replace_qubit(&m, n, *i, &ket0());
                ledger.beta_work += model.log_partition(*i);
            }
            Step::Extract(i) => {
                let f = zero_population(&m, n, *i) / m.trace().re;
                if f < 1.0 - EXTRACT_TOL {
                    return Err(Error::IllegalExtract { qubit: *i, fidelity: f });
                }
                m = replace_qubit(&m, n, *i, &model.thermal_qubit(*i));
                ledger.beta_work -= model.log_partition(*i);
            }
            Step::Gate(g) => {
                let x = apply_dense(&dense_from_matrix(&m), n, &g.op, g.edge.0, g.edge.1);
                m = dense_to_matrix(&x, 1 << n);
                ledger.complexity += 1;
            }
        }
    }
    Ok((DensityOperator::new(rho.register().clone(), m)?, ledger))
}
