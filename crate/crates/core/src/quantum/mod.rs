//! Dense complex linear algebra on labeled qubit registers.
//!
//! Qubit `0` is the leftmost tensor factor, so basis index `b` has qubit `i`
//! in bit position `n - 1 - i`.

mod ops;
mod sample;

pub use ops::{
    fidelity, hermitian_eig, kron, operator_norm, partial_trace, partial_trace_matrix, psd_sqrt,
    state_distance, tensor, trace_distance, trace_norm, DistanceMetric, Eigen,
};
pub use sample::{haar_unitary, random_density, random_pure_state, sample, Sample, SampleKind};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Hard cap on register size for dense matrices.
pub const MAX_QUBITS: usize = 12;
/// Tolerance for Hermiticity and eigenvalue floors.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitRegister {
    labels: Vec<String>,
}

impl QubitRegister {
    /// Register with labels `q0 .. q{n-1}`.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_labels((0..n).map(|i| format!("q{i}")).collect())
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidDimension("register needs at least one qubit".into()));
        }
        if labels.len() > MAX_QUBITS {
            return Err(Error::InvalidDimension(format!(
                "{} qubits exceeds the cap of {MAX_QUBITS}",
                labels.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::OverlappingLabels(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Concatenation; labels must be disjoint.
    pub fn concat(&self, other: &QubitRegister) -> Result<Self> {
        if let Some(l) = self.labels.iter().find(|l| other.labels.contains(l)) {
            return Err(Error::OverlappingLabels(l.clone()));
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Self::with_labels(labels)
    }

    /// Same register with every label prefixed, handy for building disjoint copies.
    pub fn prefixed(&self, prefix: &str) -> Self {
        Self { labels: self.labels.iter().map(|l| format!("{prefix}{l}")).collect() }
    }
}

/// Common surface of the register-carrying operator types.
pub trait RegisterOperator: Sized {
    fn register(&self) -> &QubitRegister;
    fn matrix(&self) -> &CMatrix;
    fn from_parts(register: QubitRegister, matrix: CMatrix) -> Result<Self>;

    fn n(&self) -> usize {
        self.register().n()
    }

    fn dim(&self) -> usize {
        self.register().dim()
    }

    fn trace(&self) -> f64 {
        self.matrix().trace().re
    }
}

fn check_shape(register: &QubitRegister, m: &CMatrix) -> Result<()> {
    let d = register.dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::InvalidDimension(format!(
            "matrix is {}x{}, register needs {d}x{d}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

fn check_hermitian(m: &CMatrix) -> Result<CMatrix> {
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    Ok(hermitize(m))
}

/// Clamp eigenvalues in `[floor, 0)` to zero; reject anything below the floor.
fn clamp_psd(m: CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(&m)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -HERMITIAN_TOL {
        return Err(Error::NotPsd(min));
    }
    if min < 0.0 {
        let clamped: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
        return Ok(eig.reconstruct_with(&clamped));
    }
    Ok(m)
}

/// Positive-semidefinite operator with trace in (0, 1]; subnormalized states allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    register: QubitRegister,
    matrix: CMatrix,
}

impl RegisterOperator for DensityOperator {
    fn register(&self) -> &QubitRegister {
        &self.register
    }

    fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    fn from_parts(register: QubitRegister, matrix: CMatrix) -> Result<Self> {
        Self::new(register, matrix)
    }
}

impl DensityOperator {
    pub fn new(register: QubitRegister, matrix: CMatrix) -> Result<Self> {
        check_shape(&register, &matrix)?;
        let matrix = clamp_psd(check_hermitian(&matrix)?)?;
        let tr = matrix.trace().re;
        if !(tr > 0.0 && tr <= 1.0 + HERMITIAN_TOL) {
            return Err(Error::InvalidParameter(format!("state trace {tr} outside (0, 1]")));
        }
        Ok(Self { register, matrix })
    }

    /// Pure state from an (unnormalized) ket.
    pub fn pure(register: QubitRegister, ket: &CVector) -> Result<Self> {
        let norm = ket.norm();
        if ket.len() != register.dim() || norm == 0.0 {
            return Err(Error::InvalidDimension("ket length or norm".into()));
        }
        let v = ket / c(norm, 0.0);
        Self::new(register, &v * v.adjoint())
    }

    /// Computational-basis state given as a bit string, qubit 0 first.
    pub fn basis(register: QubitRegister, bits: &[u8]) -> Result<Self> {
        if bits.len() != register.n() {
            return Err(Error::InvalidDimension("bit string length".into()));
        }
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1));
        let mut m = CMatrix::zeros(register.dim(), register.dim());
        m[(idx, idx)] = c(1.0, 0.0);
        Ok(Self { register, matrix: m })
    }

    pub fn zeros_state(n: usize) -> Result<Self> {
        Self::basis(QubitRegister::new(n)?, &vec![0; n])
    }

    pub fn ones_state(n: usize) -> Result<Self> {
        Self::basis(QubitRegister::new(n)?, &vec![1; n])
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let reg = QubitRegister::new(n)?;
        let d = reg.dim();
        Ok(Self { matrix: CMatrix::identity(d, d) * c(1.0 / d as f64, 0.0), register: reg })
    }

    /// (|0…0⟩ + |1…1⟩)/√2.
    pub fn ghz(n: usize) -> Result<Self> {
        let reg = QubitRegister::new(n)?;
        let d = reg.dim();
        let mut v = CVector::zeros(d);
        v[0] = c(1.0, 0.0);
        v[d - 1] = c(1.0, 0.0);
        Self::pure(reg, &v)
    }

    pub fn with_register(self, register: QubitRegister) -> Result<Self> {
        check_shape(&register, &self.matrix)?;
        Ok(Self { register, matrix: self.matrix })
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Largest eigenvector if the state has rank one (to `tol`).
    pub fn as_pure_ket(&self, tol: f64) -> Option<CVector> {
        let eig = hermitian_eig(&self.matrix).ok()?;
        let total: f64 = eig.values.iter().sum();
        if eig.values.iter().skip(1).all(|v| v.abs() <= tol * total.max(1e-300)) {
            Some(eig.vectors.column(0) * c(eig.values[0].max(0.0).sqrt(), 0.0))
        } else {
            None
        }
    }
}

/// Hermitian operator, e.g. a thermal weight Γ or a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    register: QubitRegister,
    matrix: CMatrix,
}

impl RegisterOperator for HermitianOperator {
    fn register(&self) -> &QubitRegister {
        &self.register
    }

    fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    fn from_parts(register: QubitRegister, matrix: CMatrix) -> Result<Self> {
        Self::new(register, matrix)
    }
}

impl HermitianOperator {
    pub fn new(register: QubitRegister, matrix: CMatrix) -> Result<Self> {
        check_shape(&register, &matrix)?;
        let matrix = check_hermitian(&matrix)?;
        Ok(Self { register, matrix })
    }

    pub fn identity(register: QubitRegister) -> Self {
        let d = register.dim();
        Self { register, matrix: CMatrix::identity(d, d) }
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_psd(&self) -> bool {
        hermitian_eig(&self.matrix)
            .map(|e| e.values.last().copied().unwrap_or(0.0) >= -HERMITIAN_TOL)
            .unwrap_or(false)
    }
}

impl From<DensityOperator> for HermitianOperator {
    fn from(rho: DensityOperator) -> Self {
        Self { register: rho.register, matrix: rho.matrix }
    }
}

/// Circuit and simple-effect indices that generated an effect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectProvenance {
    /// Names of the placed operations, applied left to right.
    pub circuit: Vec<String>,
    /// Bitmask of qubits carrying |0⟩⟨0| (bit i = qubit i).
    pub proj0_mask: u32,
}

/// Two-outcome POVM element 0 ≤ Q ≤ I.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmEffect {
    register: QubitRegister,
    matrix: CMatrix,
    pub provenance: Option<EffectProvenance>,
}

impl RegisterOperator for PovmEffect {
    fn register(&self) -> &QubitRegister {
        &self.register
    }

    fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    fn from_parts(register: QubitRegister, matrix: CMatrix) -> Result<Self> {
        Self::new(register, matrix)
    }
}

impl PovmEffect {
    pub fn new(register: QubitRegister, matrix: CMatrix) -> Result<Self> {
        check_shape(&register, &matrix)?;
        let matrix = check_hermitian(&matrix)?;
        let eig = hermitian_eig(&matrix)?;
        let (hi, lo) = (eig.values[0], *eig.values.last().unwrap());
        if lo < -HERMITIAN_TOL || hi > 1.0 + HERMITIAN_TOL {
            return Err(Error::InvalidEffect(format!("spectrum [{lo:.3e}, {hi:.3e}]")));
        }
        Ok(Self { register, matrix, provenance: None })
    }

    pub fn with_provenance(mut self, p: EffectProvenance) -> Self {
        self.provenance = Some(p);
        self
    }

    pub fn identity(register: QubitRegister) -> Self {
        let d = register.dim();
        Self { register, matrix: CMatrix::identity(d, d), provenance: None }
    }

    /// tr(Q X) for a matrix on the same register.
    pub fn expectation(&self, x: &CMatrix) -> f64 {
        trace_product(&self.matrix, x)
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// Re tr(AB) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for k in 0..d {
            let x = a[(i, k)] * b[(k, i)];
            acc += x.re;
        }
    }
    acc
}
