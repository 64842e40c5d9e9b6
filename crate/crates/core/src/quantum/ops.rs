use super::{c, hermitian_deviation, CMatrix, DensityOperator, QubitRegister, RegisterOperator};
use crate::error::{Error, Result};
use nalgebra::SymmetricEigen;
use num_complex::Complex64;

/// Spectral decomposition with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl Eigen {
    /// V f(Λ) V† for replacement eigenvalues.
    pub fn reconstruct_with(&self, values: &[f64]) -> CMatrix {
        let d = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for (j, &v) in values.iter().enumerate() {
            for i in 0..d {
                scaled[(i, j)] *= v;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(&self.values)
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let w: Vec<f64> = self.values.iter().map(|&v| if keep(v) { 1.0 } else { 0.0 }).collect();
        self.reconstruct_with(&w)
    }
}

pub fn hermitian_eig(h: &CMatrix) -> Result<Eigen> {
    if h.nrows() != h.ncols() {
        return Err(Error::InvalidDimension("eigendecomposition of a non-square matrix".into()));
    }
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dev = hermitian_deviation(h);
    if dev > 1e-9 * scale {
        return Err(Error::NotHermitian(dev));
    }
    let sym = (h + h.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(h.nrows(), h.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor<T: RegisterOperator>(a: &T, b: &T) -> Result<T> {
    let register = a.register().concat(b.register())?;
    T::from_parts(register, kron(a.matrix(), b.matrix()))
}

/// Partial trace keeping `keep` (qubit indices, any order; result keeps register order).
pub fn partial_trace_matrix(m: &CMatrix, n: usize, keep: &[usize]) -> CMatrix {
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let embed = |sub: usize, qubits: &[usize]| -> usize {
        let len = qubits.len();
        qubits.iter().enumerate().fold(0usize, |acc, (pos, &q)| {
            let bit = (sub >> (len - 1 - pos)) & 1;
            acc | (bit << (n - 1 - q))
        })
    };
    let kept_idx: Vec<usize> = (0..dk).map(|s| embed(s, &kept)).collect();
    let traced_idx: Vec<usize> = (0..dt).map(|s| embed(s, &traced)).collect();
    CMatrix::from_fn(dk, dk, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &t in &traced_idx {
            acc += m[(kept_idx[i] | t, kept_idx[j] | t)];
        }
        acc
    })
}

pub fn partial_trace<T: RegisterOperator>(op: &T, keep: &[&str]) -> Result<T> {
    let reg = op.register();
    let mut idx = Vec::with_capacity(keep.len());
    for l in keep {
        idx.push(reg.index_of(l)?);
    }
    idx.sort_unstable();
    idx.dedup();
    if idx.is_empty() {
        return Err(Error::InvalidDimension("partial trace over every qubit".into()));
    }
    let labels = idx.iter().map(|&i| reg.labels()[i].clone()).collect();
    let m = partial_trace_matrix(op.matrix(), reg.n(), &idx);
    T::from_parts(QubitRegister::with_labels(labels)?, m)
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Schatten-1 norm.
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    let roots: Vec<f64> = eig.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok(eig.reconstruct_with(&roots))
}

/// Root fidelity tr √(√σ τ √σ).
pub fn fidelity(sigma: &CMatrix, tau: &CMatrix) -> Result<f64> {
    let s = psd_sqrt(sigma)?;
    let inner = &s * tau * &s;
    let eig = hermitian_eig(&inner)?;
    Ok(eig.values.iter().map(|v| v.max(0.0).sqrt()).sum())
}

pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let eig = hermitian_eig(&(a - b))?;
    Ok(0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMetric {
    Fidelity,
    Trace,
}

pub fn state_distance(rho: &DensityOperator, sigma: &DensityOperator, metric: DistanceMetric) -> Result<f64> {
    if rho.register() != sigma.register() {
        return Err(Error::RegisterMismatch(format!(
            "{:?} vs {:?}",
            rho.register().labels(),
            sigma.register().labels()
        )));
    }
    match metric {
        DistanceMetric::Fidelity => Ok(fidelity(rho.matrix(), sigma.matrix())?.min(1.0)),
        DistanceMetric::Trace => trace_distance(rho.matrix(), sigma.matrix()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{random_density, random_pure_state, CVector, HermitianOperator};
    use crate::rng::task_rng;
    use approx::assert_abs_diff_eq;

    fn reg(labels: &[&str]) -> QubitRegister {
        QubitRegister::with_labels(labels.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let a = HermitianOperator::identity(reg(&["a"]));
        let b = HermitianOperator::identity(reg(&["b"]));
        let ab = tensor(&a, &b).unwrap();
        assert_eq!(ab.matrix(), &CMatrix::identity(4, 4));
        assert_abs_diff_eq!(ab.trace(), 4.0);
    }

    #[test]
    fn basis_tensor_is_joint_basis() {
        let z = DensityOperator::basis(reg(&["a"]), &[0]).unwrap();
        let o = DensityOperator::basis(reg(&["b"]), &[1]).unwrap();
        let zo = tensor(&z, &o).unwrap();
        let expect = DensityOperator::basis(reg(&["a", "b"]), &[0, 1]).unwrap();
        assert_eq!(zo, expect);
    }

    #[test]
    fn overlapping_labels_rejected() {
        let a = HermitianOperator::identity(reg(&["a"]));
        assert!(matches!(tensor(&a, &a), Err(Error::OverlappingLabels(_))));
    }

    #[test]
    fn trace_is_multiplicative() {
        let mut rng = task_rng(7, 0);
        for _ in 0..20 {
            let a = random_density(2, 2, &mut rng).unwrap();
            let b = random_density(2, 1, &mut rng).unwrap();
            let ab = kron(&a, &b);
            assert_abs_diff_eq!(ab.trace().re, a.trace().re * b.trace().re, epsilon = 1e-12);
        }
    }

    #[test]
    fn ghz_marginal_is_maximally_mixed() {
        let ghz = DensityOperator::ghz(2).unwrap();
        let a = partial_trace(&ghz, &["q1"]).unwrap();
        let half = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert!((a.matrix() - half).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let mut rng = task_rng(11, 0);
        let a = random_density(4, 4, &mut rng).unwrap();
        let b = random_density(2, 2, &mut rng).unwrap() * c(0.6, 0.0);
        let ab = kron(&a, &b);
        let got = partial_trace_matrix(&ab, 3, &[0, 1]);
        assert!((got - &a * c(0.6, 0.0)).norm() < 1e-12);
        let got_b = partial_trace_matrix(&ab, 3, &[2]);
        assert!((got_b - &b).norm() < 1e-12);
    }

    #[test]
    fn keeping_everything_is_identity_map() {
        let mut rng = task_rng(3, 0);
        let m = random_density(8, 3, &mut rng).unwrap();
        assert_eq!(partial_trace_matrix(&m, 3, &[0, 1, 2]), m);
    }

    #[test]
    fn unknown_label_rejected() {
        let ghz = DensityOperator::ghz(2).unwrap();
        assert!(matches!(partial_trace(&ghz, &["zz"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn pauli_z_spectrum() {
        let z = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let e = hermitian_eig(&z).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = task_rng(5, 0);
        for d in [2, 4, 8, 16] {
            let g = random_density(d, d, &mut rng).unwrap();
            let h = &g - CMatrix::identity(d, d) * c(0.3 / d as f64, 0.0);
            let e = hermitian_eig(&h).unwrap();
            let sum: f64 = e.values.iter().sum();
            assert_abs_diff_eq!(sum, h.trace().re, epsilon = 1e-9);
            assert!((e.reconstruct() - &h).norm() <= 1e-9 * h.norm().max(1.0));
            let gram = e.vectors.adjoint() * &e.vectors;
            assert!((gram - CMatrix::identity(d, d)).norm() < 1e-9);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn distances_of_basic_states() {
        let z = DensityOperator::zeros_state(1).unwrap();
        let o = DensityOperator::ones_state(1).unwrap();
        assert_abs_diff_eq!(state_distance(&z, &z, DistanceMetric::Fidelity).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(state_distance(&z, &o, DistanceMetric::Trace).unwrap(), 1.0, epsilon = 1e-12);
        let two = DensityOperator::zeros_state(2).unwrap();
        assert!(state_distance(&z, &two, DistanceMetric::Trace).is_err());
    }

    #[test]
    fn pure_state_trace_distance_formula() {
        let mut rng = task_rng(9, 0);
        for _ in 0..50 {
            let phi: CVector = random_pure_state(4, &mut rng).unwrap();
            let psi: CVector = random_pure_state(4, &mut rng).unwrap();
            let overlap = phi.dotc(&psi).norm_sqr();
            let td = trace_distance(&(&phi * phi.adjoint()), &(&psi * psi.adjoint())).unwrap();
            assert_abs_diff_eq!(td, (1.0 - overlap).sqrt(), epsilon = 1e-10);
        }
    }

    #[test]
    fn pinching_partial_order() {
        // I_X ⊗ ρ_Y − ρ_XY / d_X ⪰ 0 for subnormalized joint states.
        let mut rng = task_rng(13, 0);
        for trial in 0..50 {
            let (nx, ny) = (1 + trial % 2, 1 + (trial / 2) % 2);
            let d = 1 << (nx + ny);
            let rho = random_density(d, 1 + trial % d, &mut rng).unwrap() * c(0.4 + 0.01 * trial as f64, 0.0);
            let rho_y = partial_trace_matrix(&rho, nx + ny, &(nx..nx + ny).collect::<Vec<_>>());
            let dx = (1 << nx) as f64;
            let diff = kron(&CMatrix::identity(1 << nx, 1 << nx), &rho_y) - &rho * c(1.0 / dx, 0.0);
            let e = hermitian_eig(&diff).unwrap();
            assert!(*e.values.last().unwrap() >= -1e-9);
        }
    }
}
