use super::apply::{apply_dense, dense_from_matrix, dense_to_matrix, trace_preservation_deviation, Mat4};
use super::Operation;
use crate::error::{Error, Result};
use crate::quantum::{c, hermitian_eig, trace_norm, CMatrix};
use num_complex::Complex64;

/// Choi matrix Σ |i⟩⟨j| ⊗ E(|i⟩⟨j|), input index first.
pub fn choi_of_kraus(ks: &[Mat4]) -> CMatrix {
    let mut j = CMatrix::zeros(16, 16);
    for k in ks {
        for i in 0..4 {
            for o in 0..4 {
                for ip in 0..4 {
                    for op in 0..4 {
                        j[(i * 4 + o, ip * 4 + op)] += k[o * 4 + i] * k[op * 4 + ip].conj();
                    }
                }
            }
        }
    }
    j
}

/// Kraus operators from the eigendecomposition of a two-qubit Choi matrix.
pub fn kraus_from_choi(choi: &CMatrix) -> Result<Vec<Mat4>> {
    if choi.nrows() != 16 || choi.ncols() != 16 {
        return Err(Error::InvalidDimension("Choi matrix must be 16x16".into()));
    }
    for i in 0..4 {
        for ip in 0..4 {
            let mut s = Complex64::new(0.0, 0.0);
            for o in 0..4 {
                s += choi[(i * 4 + o, ip * 4 + o)];
            }
            let want = if i == ip { 1.0 } else { 0.0 };
            if (s - c(want, 0.0)).norm() > 1e-9 {
                return Err(Error::NotCptp("not trace preserving".into()));
            }
        }
    }
    let eig = hermitian_eig(choi)?;
    let min = *eig.values.last().unwrap();
    if min < -1e-9 {
        return Err(Error::NotCptp(format!("Choi matrix has eigenvalue {min:.3e}")));
    }
    let mut out = Vec::new();
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= 1e-13 {
            continue;
        }
        let s = lam.sqrt();
        let mut m = [Complex64::new(0.0, 0.0); 16];
        for i in 0..4 {
            for o in 0..4 {
                m[o * 4 + i] = eig.vectors[(i * 4 + o, k)] * s;
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// (1 − q)·U·U† + q·tr(·)·γ, with γ a two-qubit state.
pub fn q_mixed_channel(u: &Mat4, gamma: &CMatrix, q: f64) -> Result<Operation> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("mixing weight {q}")));
    }
    let mut choi = choi_of_kraus(&[*u]) * c(1.0 - q, 0.0);
    for i in 0..4 {
        for o in 0..4 {
            for op in 0..4 {
                choi[(i * 4 + o, i * 4 + op)] += gamma[(o, op)] * q;
            }
        }
    }
    Ok(Operation::Channel(kraus_from_choi(&choi)?))
}

/// True iff the two-qubit map fixes `gamma` to trace-norm 1e-9.
pub fn gibbs_check(op: &Operation, gamma: &CMatrix) -> Result<bool> {
    if gamma.nrows() != 4 {
        return Err(Error::InvalidDimension("two-qubit reference expected".into()));
    }
    let dev = trace_preservation_deviation(&op.kraus());
    if dev > 1e-9 {
        return Err(Error::NotCptp(format!("Kraus completeness deviation {dev:.3e}")));
    }
    let out = apply_dense(&dense_from_matrix(gamma), 2, op, 0, 1);
    Ok(trace_norm(&(dense_to_matrix(&out, 4) - gamma)) <= 1e-9)
}
