use crate::entropy::von_neumann_matrix;
use crate::error::{Error, Result};
use crate::quantum::{c, hermitian_eig, kron, operator_norm, CMatrix, CVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::LN_2;

/// Constant in the incremental-entangling rate bound C(n − 1)‖h‖.
pub const RATE_CONSTANT: f64 = 22.0 * LN_2;
const DERIVATIVE_TOL: f64 = 1e-4;
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitialState {
    /// |1…1⟩
    Ones,
    /// |+…+⟩
    Plus,
}

/// h = −J Z⊗Z − (g/2)(X⊗I + I⊗X) on every chain edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingSpec {
    pub n: usize,
    pub coupling: f64,
    pub field: f64,
    pub periodic: bool,
    pub initial: InitialState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchTrace {
    pub times: Vec<f64>,
    pub entanglement: Vec<f64>,
    pub derivative: Vec<f64>,
    /// Whether the halving sequence settled within tolerance at each time.
    pub converged: Vec<bool>,
    pub bound: f64,
    pub violations: usize,
    pub local_norm: f64,
}

fn pauli(name: char) -> CMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match name {
        'X' => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        'Z' => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => CMatrix::identity(2, 2),
    }
}

/// Product of single-site operators, `sites[i]` on qubit i.
fn site_product(sites: &[CMatrix]) -> CMatrix {
    sites[1..].iter().fold(sites[0].clone(), |acc, s| kron(&acc, s))
}

impl IsingSpec {
    pub fn local_term(&self) -> CMatrix {
        let zz = kron(&pauli('Z'), &pauli('Z'));
        let xi = kron(&pauli('X'), &pauli('I'));
        let ix = kron(&pauli('I'), &pauli('X'));
        zz * c(-self.coupling, 0.0) - (xi + ix) * c(self.field / 2.0, 0.0)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = (0..self.n - 1).map(|a| (a, a + 1)).collect();
        if self.periodic && self.n > 2 {
            e.push((self.n - 1, 0));
        }
        e
    }

    pub fn hamiltonian(&self) -> CMatrix {
        let n = self.n;
        let d = 1usize << n;
        let mut h = CMatrix::zeros(d, d);
        for (a, b) in self.edges() {
            let mut zz = vec![pauli('I'); n];
            zz[a] = pauli('Z');
            zz[b] = pauli('Z');
            h -= site_product(&zz) * c(self.coupling, 0.0);
            for q in [a, b] {
                let mut x = vec![pauli('I'); n];
                x[q] = pauli('X');
                h -= site_product(&x) * c(self.field / 2.0, 0.0);
            }
        }
        h
    }

    pub fn initial_ket(&self) -> CVector {
        let d = 1usize << self.n;
        match self.initial {
            InitialState::Ones => CVector::from_fn(d, |i, _| if i == d - 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }),
            InitialState::Plus => CVector::from_element(d, c((d as f64).powf(-0.5), 0.0)),
        }
    }
}

/// E of a pure chain state: the mutual information across cut j is twice the left entropy.
pub fn entanglement_of_ket(psi: &CVector, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("entanglement measure needs n ≥ 2".into()));
    }
    let mut total = 0.0;
    for j in 1..n {
        let rows = 1usize << j;
        let cols = 1usize << (n - j);
        let m = CMatrix::from_fn(rows, cols, |a, b| psi[a * cols + b]);
        total += 2.0 * von_neumann_matrix(&(&m * m.adjoint()))?;
    }
    Ok(total / (n - 1) as f64)
}

struct Propagator {
    vectors: CMatrix,
    energies: Vec<f64>,
    coeffs: CVector,
}

impl Propagator {
    fn new(h: &CMatrix, psi0: &CVector) -> Result<Self> {
        let eig = hermitian_eig(h)?;
        let coeffs = eig.vectors.adjoint() * psi0;
        Ok(Self { vectors: eig.vectors, energies: eig.values, coeffs })
    }

    fn state(&self, t: f64) -> CVector {
        let phased = CVector::from_fn(self.coeffs.len(), |k, _| self.coeffs[k] * Complex64::from_polar(1.0, -self.energies[k] * t));
        &self.vectors * phased
    }
}

/// Exact evolution e^{−iHt}|ψ₀⟩, E(t), and central-difference dE/dt checked against C(n − 1)‖h‖.
pub fn ising_quench(spec: &IsingSpec, times: &[f64]) -> Result<QuenchTrace> {
    if !(2..=10).contains(&spec.n) {
        return Err(Error::InvalidParameter(format!("quench needs 2 ≤ n ≤ 10, got {}", spec.n)));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("quench times must be strictly increasing".into()));
    }
    let n = spec.n;
    let prop = Propagator::new(&spec.hamiltonian(), &spec.initial_ket())?;
    let e_at = |t: f64| entanglement_of_ket(&prop.state(t), n);
    let local_norm = operator_norm(&spec.local_term());
    let bound = RATE_CONSTANT * (n - 1) as f64 * local_norm;
    let step0 = times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let step0 = if step0.is_finite() { step0 } else { 1e-2 };

    let mut trace = QuenchTrace {
        times: times.to_vec(),
        entanglement: Vec::with_capacity(times.len()),
        derivative: Vec::with_capacity(times.len()),
        converged: Vec::with_capacity(times.len()),
        bound,
        violations: 0,
        local_norm,
    };
    for &t in times {
        trace.entanglement.push(e_at(t)?);
        let mut step = step0;
        let mut prev = (e_at(t + step)? - e_at(t - step)?) / (2.0 * step);
        let mut converged = false;
        for _ in 0..MAX_HALVINGS {
            step /= 2.0;
            let next = (e_at(t + step)? - e_at(t - step)?) / (2.0 * step);
            let settled = (next - prev).abs() <= DERIVATIVE_TOL;
            prev = next;
            if settled {
                converged = true;
                break;
            }
        }
        if prev.abs() > bound + 1e-6 {
            trace.violations += 1;
        }
        trace.derivative.push(prev);
        trace.converged.push(converged);
    }
    Ok(trace)
}
