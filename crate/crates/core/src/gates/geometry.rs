//! Eigenphase geometry of unitaries.

use crate::error::{Error, Result};
use crate::quantum::{c, hermitian_eig, CMatrix};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglingPower {
    /// Half the shortest arc containing every eigenphase.
    pub e: f64,
    /// ½‖U·U† − id‖◇ = sin(min{e, π/2}).
    pub diamond_to_identity: f64,
}

fn eigenphases(u: &CMatrix) -> Result<Vec<f64>> {
    let d = u.nrows();
    let dev = crate::quantum::operator_norm(&(u.adjoint() * u - CMatrix::identity(d, d)));
    if dev > 1e-9 {
        return Err(Error::NotUnitary(dev));
    }
    // The Schur form of a normal matrix is diagonal.
    let vals = u
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::InvalidParameter("Schur decomposition failed".into()))?;
    Ok(vals.iter().map(|z| z.arg()).collect())
}

pub fn entangling_power(u: &CMatrix) -> Result<EntanglingPower> {
    let mut ph = eigenphases(u)?;
    ph.sort_by(f64::total_cmp);
    let mut largest_gap: f64 = 0.0;
    for w in ph.windows(2) {
        largest_gap = largest_gap.max(w[1] - w[0]);
    }
    largest_gap = largest_gap.max(ph[0] + 2.0 * PI - ph[ph.len() - 1]);
    let arc = (2.0 * PI - largest_gap).max(0.0);
    let e = arc / 2.0;
    Ok(EntanglingPower { e, diamond_to_identity: e.min(FRAC_PI_2).sin() })
}

/// The 15 Pauli products σ_a ⊗ σ_b other than I ⊗ I.
pub fn su4_generators() -> Vec<CMatrix> {
    let paulis = [
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    ];
    let mut out = Vec::with_capacity(15);
    for a in 0..4 {
        for b in 0..4 {
            if a == 0 && b == 0 {
                continue;
            }
            out.push(paulis[a].kronecker(&paulis[b]));
        }
    }
    out
}

/// exp(i Σ θ_k G_k) for the generators of [`su4_generators`].
pub fn unitary_from_generator(theta: &[f64]) -> CMatrix {
    let gens = su4_generators();
    let mut h = CMatrix::zeros(4, 4);
    for (t, g) in theta.iter().zip(&gens) {
        h += g * c(*t, 0.0);
    }
    let eig = hermitian_eig(&h).expect("generator is Hermitian");
    let mut scaled = eig.vectors.clone();
    for (j, &v) in eig.values.iter().enumerate() {
        let p = c(v.cos(), v.sin());
        for i in 0..4 {
            scaled[(i, j)] *= p;
        }
    }
    &scaled * eig.vectors.adjoint()
}
