//! Gate sets, circuits, simple effects and the complexity-restricted effect sets.

mod apply;
mod channel;
mod complexity;
mod engine;
mod enumerate;
mod geometry;
mod library;
mod spec_file;

pub use apply::{
    adjoint_dense, apply_dense, apply_ket, dense_from_matrix, dense_to_matrix, diag_of_dense, mat4_close, Mat4,
};
pub use channel::{choi_of_kraus, gibbs_check, kraus_from_choi, q_mixed_channel};
pub use complexity::{approx_state_complexity, circuit_complexity};
pub use engine::{
    budget_from_env, subset_sums, Carrier, SearchBest, SearchConfig, SearchStats, StateSearch,
    DEFAULT_BUDGET,
};
pub use enumerate::enumerate_effects;
pub use geometry::{entangling_power, su4_generators, unitary_from_generator, EntanglingPower};
pub use library::{named_gate, standard_gates};
pub use spec_file::parse_gate_set;

use crate::error::{Error, Result};
use crate::quantum::{c, CMatrix, DensityOperator, PovmEffect, QubitRegister, RegisterOperator};
use num_complex::Complex64;
use std::collections::HashSet;

/// Action of a two-qubit element.
#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    Unitary(Mat4),
    /// Kraus operators of a CPTP map.
    Channel(Vec<Mat4>),
}

impl Operation {
    pub fn is_unitary(&self) -> bool {
        matches!(self, Operation::Unitary(_))
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Operation::Unitary(u) => apply::mat4_close(u, &apply::MAT4_IDENTITY, 1e-12),
            Operation::Channel(k) => k.len() == 1 && apply::mat4_close(&k[0], &apply::MAT4_IDENTITY, 1e-12),
        }
    }

    /// Kraus list of the adjoint map's dual, i.e. the operation with every operator daggered.
    pub fn dagger(&self) -> Operation {
        match self {
            Operation::Unitary(u) => Operation::Unitary(apply::mat4_adjoint(u)),
            Operation::Channel(ks) => Operation::Channel(ks.iter().map(apply::mat4_adjoint).collect()),
        }
    }

    /// Same action with the two qubits exchanged.
    pub fn flipped(&self) -> Operation {
        match self {
            Operation::Unitary(u) => Operation::Unitary(apply::mat4_swap_conj(u)),
            Operation::Channel(ks) => Operation::Channel(ks.iter().map(apply::mat4_swap_conj).collect()),
        }
    }

    pub fn kraus(&self) -> Vec<Mat4> {
        match self {
            Operation::Unitary(u) => vec![*u],
            Operation::Channel(ks) => ks.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub op: Operation,
    /// Restrict placement to one ordered edge (used for pair-specific thermal channels).
    pub edge: Option<(usize, usize)>,
}

impl Gate {
    pub fn new(name: &str, op: Operation) -> Self {
        Self { name: name.to_string(), op, edge: None }
    }

    pub fn unitary(name: &str, u: Mat4) -> Self {
        Self::new(name, Operation::Unitary(u))
    }

    pub fn on_edge(mut self, a: usize, b: usize) -> Self {
        self.edge = Some((a, b));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Connectivity {
    AllToAll,
    /// Nearest neighbours 0-1, 1-2, …
    Chain,
    Edges(Vec<(usize, usize)>),
}

impl Connectivity {
    /// Unordered edges with `a < b`.
    pub fn edges(&self, n: usize) -> Vec<(usize, usize)> {
        match self {
            Connectivity::AllToAll => (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect(),
            Connectivity::Chain => (0..n.saturating_sub(1)).map(|a| (a, a + 1)).collect(),
            Connectivity::Edges(e) => {
                let mut v: Vec<(usize, usize)> = e
                    .iter()
                    .filter(|(a, b)| a != b && *a < n && *b < n)
                    .map(|&(a, b)| (a.min(b), a.max(b)))
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    pub fn contains(&self, n: usize, a: usize, b: usize) -> bool {
        self.edges(n).contains(&(a.min(b), a.max(b)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateSetKind {
    Finite(Vec<Gate>),
    /// Arbitrary two-qubit unitaries.
    ContinuousSU4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSet {
    pub kind: GateSetKind,
    pub connectivity: Connectivity,
}

/// A gate bound to an ordered pair of qubits; the first tensor factor acts on `edge.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedOp {
    pub name: String,
    pub op: Operation,
    pub edge: (usize, usize),
}

impl PlacedOp {
    pub fn label(&self) -> String {
        format!("{}@{},{}", self.name, self.edge.0, self.edge.1)
    }
}

impl GateSet {
    pub fn finite(gates: Vec<Gate>, connectivity: Connectivity) -> Result<Self> {
        for g in &gates {
            check_operation(&g.op)?;
        }
        let mut gates = gates;
        if !gates.iter().any(|g| g.op.is_identity()) {
            gates.insert(0, Gate::unitary("I", apply::MAT4_IDENTITY));
        }
        Ok(Self { kind: GateSetKind::Finite(gates), connectivity })
    }

    /// Identity, both CNOT orientations, CZ, SWAP, H, T and X on either qubit, and X⊗X.
    pub fn default_finite(connectivity: Connectivity) -> Self {
        Self::finite(standard_gates(), connectivity).expect("library gates are unitary")
    }

    pub fn continuous(connectivity: Connectivity) -> Self {
        Self { kind: GateSetKind::ContinuousSU4, connectivity }
    }

    pub fn gates(&self) -> &[Gate] {
        match &self.kind {
            GateSetKind::Finite(g) => g,
            GateSetKind::ContinuousSU4 => &[],
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, GateSetKind::Finite(_))
    }

    pub fn is_unitary(&self) -> bool {
        self.gates().iter().all(|g| g.op.is_unitary())
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates().iter().find(|g| g.name == name)
    }

    /// Add the dagger of every unitary gate that is not already present.
    pub fn adjoint_closed(&self) -> Self {
        let mut gates = self.gates().to_vec();
        for g in self.gates() {
            let Operation::Unitary(u) = &g.op else { continue };
            let dag = apply::mat4_adjoint(u);
            let present = gates.iter().any(|h| match &h.op {
                Operation::Unitary(v) => apply::mat4_close(v, &dag, 1e-12) && h.edge == g.edge,
                _ => false,
            });
            if !present {
                let mut h = g.clone();
                h.name = format!("{}dg", g.name);
                h.op = Operation::Unitary(dag);
                gates.push(h);
            }
        }
        Self { kind: GateSetKind::Finite(gates), connectivity: self.connectivity.clone() }
    }

    /// Every distinct placement of a non-identity gate on an `n`-qubit register.
    ///
    /// Placements are deduplicated by their action, so e.g. `H⊗I` on (0,1)
    /// and on (0,2) collapse to a single element.
    pub fn placements(&self, n: usize) -> Vec<PlacedOp> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for g in self.gates() {
            if g.op.is_identity() {
                continue;
            }
            let mut targets = Vec::new();
            match g.edge {
                Some((a, b)) => {
                    if a < n && b < n && self.connectivity.contains(n, a, b) {
                        targets.push((a, b));
                    }
                }
                None => {
                    for (a, b) in self.connectivity.edges(n) {
                        targets.push((a, b));
                        targets.push((b, a));
                    }
                }
            }
            for (a, b) in targets {
                let key = apply::placement_key(&g.op, a, b);
                if seen.insert(key) {
                    out.push(PlacedOp { name: g.name.clone(), op: g.op.clone(), edge: (a, b) });
                }
            }
        }
        out
    }
}

pub(crate) fn check_operation(op: &Operation) -> Result<()> {
    match op {
        Operation::Unitary(u) => {
            let dev = apply::unitarity_deviation(u);
            if dev > 1e-10 {
                return Err(Error::NotUnitary(dev));
            }
        }
        Operation::Channel(ks) => {
            let dev = apply::trace_preservation_deviation(ks);
            if dev > 1e-9 {
                return Err(Error::NotCptp(format!("Kraus completeness deviation {dev:.3e}")));
            }
        }
    }
    Ok(())
}

/// Ordered list of placed operations, applied left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub connectivity: Connectivity,
    pub ops: Vec<PlacedOp>,
}

impl Circuit {
    pub fn new(n: usize, connectivity: Connectivity) -> Self {
        Self { n, connectivity, ops: Vec::new() }
    }

    pub fn push(&mut self, name: &str, op: Operation, edge: (usize, usize)) -> Result<()> {
        let (a, b) = edge;
        if a == b || a >= self.n || b >= self.n || !self.connectivity.contains(self.n, a, b) {
            return Err(Error::OffGraph(edge));
        }
        check_operation(&op)?;
        self.ops.push(PlacedOp { name: name.to_string(), op, edge });
        Ok(())
    }

    pub fn push_placed(&mut self, p: PlacedOp) -> Result<()> {
        self.push(&p.name, p.op, p.edge)
    }

    /// C_G: number of non-identity elements.
    pub fn complexity(&self) -> usize {
        self.ops.iter().filter(|p| !p.op.is_identity()).count()
    }

    pub fn is_unitary(&self) -> bool {
        self.ops.iter().all(|p| p.op.is_unitary())
    }

    /// Reverse order with every element daggered; the inverse of a unitary circuit.
    pub fn inverse(&self) -> Circuit {
        let ops = self
            .ops
            .iter()
            .rev()
            .map(|p| PlacedOp { name: format!("{}dg", p.name), op: p.op.dagger(), edge: p.edge })
            .collect();
        Circuit { n: self.n, connectivity: self.connectivity.clone(), ops }
    }

    /// Composed unitary, if every element is unitary.
    pub fn unitary(&self) -> Option<CMatrix> {
        if !self.is_unitary() {
            return None;
        }
        let d = 1 << self.n;
        let mut cols = CMatrix::identity(d, d);
        for j in 0..d {
            let mut col: Vec<Complex64> = (0..d).map(|i| cols[(i, j)]).collect();
            for p in &self.ops {
                if let Operation::Unitary(u) = &p.op {
                    apply_ket(&mut col, self.n, u, p.edge.0, p.edge.1);
                }
            }
            for i in 0..d {
                cols[(i, j)] = col[i];
            }
        }
        Some(cols)
    }

    pub fn labels(&self) -> Vec<String> {
        self.ops.iter().map(PlacedOp::label).collect()
    }
}

/// Tensor product of |0⟩⟨0| on the masked qubits and I elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimpleEffect {
    pub n: usize,
    /// Bit `i` set ⇔ qubit `i` carries |0⟩⟨0|.
    pub proj0: u32,
}

impl SimpleEffect {
    pub fn new(n: usize, proj0: u32) -> Self {
        Self { n, proj0: proj0 & ((1u32 << n) - 1) }
    }

    pub fn all(n: usize) -> impl Iterator<Item = SimpleEffect> {
        (0..1u32 << n).map(move |m| SimpleEffect::new(n, m))
    }

    pub fn identity_count(&self) -> usize {
        self.n - self.proj0.count_ones() as usize
    }

    /// Diagonal 0/1 matrix of the effect.
    pub fn matrix(&self) -> CMatrix {
        let d = 1usize << self.n;
        let mut m = CMatrix::zeros(d, d);
        for b in 0..d {
            if self.accepts(b) {
                m[(b, b)] = c(1.0, 0.0);
            }
        }
        m
    }

    /// Basis index `b` lies in the support.
    pub fn accepts(&self, b: usize) -> bool {
        (0..self.n).all(|q| self.proj0 & (1 << q) == 0 || (b >> (self.n - 1 - q)) & 1 == 0)
    }

    /// Index of this effect in the subset-sum table from [`subset_sums`].
    pub fn free_bits(&self) -> usize {
        let mut t = 0usize;
        for q in 0..self.n {
            if self.proj0 & (1 << q) == 0 {
                t |= 1 << (self.n - 1 - q);
            }
        }
        t
    }

    pub fn from_free_bits(n: usize, t: usize) -> Self {
        let mut proj0 = 0u32;
        for q in 0..n {
            if (t >> (n - 1 - q)) & 1 == 0 {
                proj0 |= 1 << q;
            }
        }
        Self { n, proj0 }
    }
}

pub fn apply_circuit(circuit: &Circuit, rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.n() != circuit.n {
        return Err(Error::RegisterMismatch(format!("circuit on {} qubits, state on {}", circuit.n, rho.n())));
    }
    let mut m = dense_from_matrix(rho.matrix());
    for p in &circuit.ops {
        m = apply_dense(&m, circuit.n, &p.op, p.edge.0, p.edge.1);
    }
    DensityOperator::new(rho.register().clone(), dense_to_matrix(&m, 1 << circuit.n))
}

/// Q = E₁†⋯E_r†(P) for the circuit E₁, …, E_r.
pub fn pullback_effect(circuit: &Circuit, p: SimpleEffect, register: &QubitRegister) -> Result<PovmEffect> {
    if register.n() != circuit.n || p.n != circuit.n {
        return Err(Error::RegisterMismatch("effect and circuit sizes differ".into()));
    }
    let mut q = dense_from_matrix(&p.matrix());
    for op in circuit.ops.iter().rev() {
        q = adjoint_dense(&q, circuit.n, &op.op, op.edge.0, op.edge.1);
    }
    let effect = PovmEffect::new(register.clone(), dense_to_matrix(&q, 1 << circuit.n))?;
    Ok(effect.with_provenance(crate::quantum::EffectProvenance { circuit: circuit.labels(), proj0_mask: p.proj0 }))
}

/// Error naming the first placement that does not leave `m` unchanged (to 1e-12 relative).
pub fn invariant_check(m: &CMatrix, n: usize, placements: &[PlacedOp]) -> Result<()> {
    let x = dense_from_matrix(m);
    let scale = x.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    for p in placements {
        let y = apply_dense(&x, n, &p.op, p.edge.0, p.edge.1);
        if y.iter().zip(&x).any(|(u, v)| (u - v).norm() > 1e-12 * scale) {
            return Err(Error::NotGibbsPreserving(p.label()));
        }
    }
    Ok(())
}
