use super::{c, CMatrix, CVector};
use crate::error::{Error, Result};
use crate::rng::task_rng;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    HaarUnitary { d: usize },
    PureState { d: usize },
    Density { d: usize, rank: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Unitary(CMatrix),
    Ket(CVector),
    Density(CMatrix),
}

/// Seeded draw; identical output for identical `(kind, seed)`.
pub fn sample(kind: SampleKind, seed: u64) -> Result<Sample> {
    let mut rng = task_rng(seed, 0);
    match kind {
        SampleKind::HaarUnitary { d } => haar_unitary(d, &mut rng).map(Sample::Unitary),
        SampleKind::PureState { d } => random_pure_state(d, &mut rng).map(Sample::Ket),
        SampleKind::Density { d, rank } => random_density(d, rank, &mut rng).map(Sample::Density),
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // Fill column by column so the draw order is fixed.
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// Haar-distributed unitary: QR of a Ginibre matrix with R's diagonal phases removed.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("d = 0".into()));
    }
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CVector> {
    if d == 0 {
        return Err(Error::InvalidDimension("d = 0".into()));
    }
    let v = CVector::from_fn(d, |_, _| gaussian(rng));
    let norm = v.norm();
    Ok(v / c(norm, 0.0))
}

/// Random normalized density matrix of the given rank (induced measure).
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<CMatrix> {
    if d == 0 || rank == 0 || rank > d {
        return Err(Error::InvalidDimension(format!("density d={d} rank={rank}")));
    }
    let g = ginibre(d, rank, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    Ok(rho / c(tr, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{hermitian_eig, DensityOperator, QubitRegister};

    #[test]
    fn pure_state_is_normalized() {
        let Sample::Ket(v) = sample(SampleKind::PureState { d: 2 }, 1).unwrap() else { panic!() };
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_is_unitary_and_reproducible() {
        let a = sample(SampleKind::HaarUnitary { d: 8 }, 42).unwrap();
        let b = sample(SampleKind::HaarUnitary { d: 8 }, 42).unwrap();
        assert_eq!(a, b);
        let Sample::Unitary(u) = a else { panic!() };
        assert!((u.adjoint() * &u - CMatrix::identity(8, 8)).norm() < 1e-10);
    }

    #[test]
    fn density_has_requested_rank() {
        let Sample::Density(m) = sample(SampleKind::Density { d: 8, rank: 3 }, 4).unwrap() else { panic!() };
        let e = hermitian_eig(&m).unwrap();
        assert_eq!(e.values.iter().filter(|v| **v > 1e-9).count(), 3);
        assert!(DensityOperator::new(QubitRegister::new(3).unwrap(), m).is_ok());
    }

    #[test]
    fn invalid_dims_rejected() {
        assert!(sample(SampleKind::Density { d: 2, rank: 3 }, 0).is_err());
        assert!(sample(SampleKind::HaarUnitary { d: 0 }, 0).is_err());
    }

    #[test]
    fn haar_kets_have_zero_mean_z() {
        // ⟨Z⟩ for a Haar qubit is uniform on [-1, 1]: mean 0, variance 1/3.
        let mut rng = task_rng(2024, 0);
        let trials = 10_000;
        let mut sum = 0.0;
        for _ in 0..trials {
            let v = random_pure_state(2, &mut rng).unwrap();
            sum += v[0].norm_sqr() - v[1].norm_sqr();
        }
        let mean = sum / trials as f64;
        let sigma = (1.0f64 / 3.0 / trials as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn haar_is_left_invariant_in_distribution() {
        // |U_00|^2 has mean 1/d; a fixed left rotation must not move it.
        let d = 4;
        let fixed = haar_unitary(d, &mut task_rng(1, 99)).unwrap();
        let mut rng = task_rng(77, 0);
        let trials = 4000;
        let (mut plain, mut rotated) = (0.0, 0.0);
        for _ in 0..trials {
            let u = haar_unitary(d, &mut rng).unwrap();
            plain += u[(0, 0)].norm_sqr();
            rotated += (&fixed * &u)[(0, 0)].norm_sqr();
        }
        // variance of |U_00|^2 is (d-1)/(d^2 (d+1)) = 3/80
        let sigma = (3.0f64 / 80.0 / trials as f64).sqrt();
        assert!((plain / trials as f64 - 0.25).abs() < 4.0 * sigma);
        assert!((rotated / trials as f64 - 0.25).abs() < 4.0 * sigma);
    }
}
