//! Local action of two-qubit elements on kets and row-major dense matrices.

use super::Operation;
use crate::quantum::CMatrix;
use num_complex::Complex64;

/// Row-major 4×4 matrix; index `2·x + y` with `x` the bit of the first qubit.
pub type Mat4 = [Complex64; 16];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const MAT4_IDENTITY: Mat4 = [
    ONE, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ONE,
];

pub fn mat4_close(a: &Mat4, b: &Mat4, tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

pub fn mat4_adjoint(a: &Mat4) -> Mat4 {
    let mut out = [ZERO; 16];
    for r in 0..4 {
        for c in 0..4 {
            out[c * 4 + r] = a[r * 4 + c].conj();
        }
    }
    out
}

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [ZERO; 16];
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = ZERO;
            for k in 0..4 {
                acc += a[r * 4 + k] * b[k * 4 + c];
            }
            out[r * 4 + c] = acc;
        }
    }
    out
}

/// SWAP · A · SWAP.
pub fn mat4_swap_conj(a: &Mat4) -> Mat4 {
    const P: [usize; 4] = [0, 2, 1, 3];
    let mut out = [ZERO; 16];
    for r in 0..4 {
        for c in 0..4 {
            out[P[r] * 4 + P[c]] = a[r * 4 + c];
        }
    }
    out
}

pub fn unitarity_deviation(u: &Mat4) -> f64 {
    let p = mat4_mul(&mat4_adjoint(u), u);
    p.iter().zip(MAT4_IDENTITY.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn trace_preservation_deviation(ks: &[Mat4]) -> f64 {
    let mut sum = [ZERO; 16];
    for k in ks {
        let p = mat4_mul(&mat4_adjoint(k), k);
        for i in 0..16 {
            sum[i] += p[i];
        }
    }
    sum.iter().zip(MAT4_IDENTITY.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn round_key(z: Complex64) -> (i64, i64) {
    ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64)
}

/// If `u = A ⊗ I` return `A` (row-major 2×2).
fn left_factor(u: &Mat4) -> Option<[Complex64; 4]> {
    let a = [u[0], u[2], u[8], u[10]];
    for x in 0..2 {
        for xp in 0..2 {
            for y in 0..2 {
                for yp in 0..2 {
                    let want = if y == yp { a[x * 2 + xp] } else { ZERO };
                    if (u[(2 * x + y) * 4 + 2 * xp + yp] - want).norm() > 1e-12 {
                        return None;
                    }
                }
            }
        }
    }
    Some(a)
}

/// Hashable identity of a placement's action on the full register.
pub(crate) fn placement_key(op: &Operation, a: usize, b: usize) -> (u8, usize, usize, Vec<(i64, i64)>) {
    match op {
        Operation::Unitary(u) => {
            if let Some(f) = left_factor(u) {
                return (1, a, a, f.iter().map(|z| round_key(*z)).collect());
            }
            if let Some(f) = left_factor(&mat4_swap_conj(u)) {
                return (1, b, b, f.iter().map(|z| round_key(*z)).collect());
            }
            let oriented = if a < b { *u } else { mat4_swap_conj(u) };
            (2, a.min(b), a.max(b), oriented.iter().map(|z| round_key(*z)).collect())
        }
        Operation::Channel(ks) => {
            // Superoperator Σ K ⊗ K̄ is independent of the Kraus representation.
            let mut sup = vec![ZERO; 256];
            for k in ks {
                let k = if a < b { *k } else { mat4_swap_conj(k) };
                for r1 in 0..4 {
                    for c1 in 0..4 {
                        for r2 in 0..4 {
                            for c2 in 0..4 {
                                sup[(r1 * 4 + r2) * 16 + c1 * 4 + c2] += k[r1 * 4 + c1] * k[r2 * 4 + c2].conj();
                            }
                        }
                    }
                }
            }
            (3, a.min(b), a.max(b), sup.iter().map(|z| round_key(*z)).collect())
        }
    }
}

#[inline]
fn group_indices(n: usize, a: usize, b: usize) -> (usize, usize) {
    (1 << (n - 1 - a), 1 << (n - 1 - b))
}

/// In-place `ψ ← M ψ` on qubits (a, b) for a vector with arbitrary stride.
#[inline]
fn transform_strided(v: &mut [Complex64], offset: usize, stride: usize, n: usize, m: &Mat4, a: usize, b: usize) {
    let (ma, mb) = group_indices(n, a, b);
    let d = 1usize << n;
    for base in 0..d {
        if base & ma != 0 || base & mb != 0 {
            continue;
        }
        let idx = [base, base | mb, base | ma, base | ma | mb];
        let x = [
            v[offset + idx[0] * stride],
            v[offset + idx[1] * stride],
            v[offset + idx[2] * stride],
            v[offset + idx[3] * stride],
        ];
        for r in 0..4 {
            v[offset + idx[r] * stride] =
                m[r * 4] * x[0] + m[r * 4 + 1] * x[1] + m[r * 4 + 2] * x[2] + m[r * 4 + 3] * x[3];
        }
    }
}

pub fn apply_ket(psi: &mut [Complex64], n: usize, u: &Mat4, a: usize, b: usize) {
    transform_strided(psi, 0, 1, n, u, a, b);
}

/// M·X for row-major X.
fn left_mul(x: &mut [Complex64], n: usize, m: &Mat4, a: usize, b: usize) {
    let d = 1usize << n;
    for col in 0..d {
        transform_strided(x, col, d, n, m, a, b);
    }
}

/// X·M for row-major X (rows transform by Mᵀ).
fn right_mul(x: &mut [Complex64], n: usize, m: &Mat4, a: usize, b: usize) {
    let d = 1usize << n;
    let mut mt = [ZERO; 16];
    for r in 0..4 {
        for c in 0..4 {
            mt[c * 4 + r] = m[r * 4 + c];
        }
    }
    for row in 0..d {
        transform_strided(&mut x[row * d..(row + 1) * d], 0, 1, n, &mt, a, b);
    }
}

/// E(X) = Σ K X K†.
pub fn apply_dense(x: &[Complex64], n: usize, op: &Operation, a: usize, b: usize) -> Vec<Complex64> {
    match op {
        Operation::Unitary(u) => {
            let mut y = x.to_vec();
            left_mul(&mut y, n, u, a, b);
            right_mul(&mut y, n, &mat4_adjoint(u), a, b);
            y
        }
        Operation::Channel(ks) => {
            let mut acc = vec![ZERO; x.len()];
            for k in ks {
                let mut y = x.to_vec();
                left_mul(&mut y, n, k, a, b);
                right_mul(&mut y, n, &mat4_adjoint(k), a, b);
                for (s, v) in acc.iter_mut().zip(y) {
                    *s += v;
                }
            }
            acc
        }
    }
}

/// E†(X) = Σ K† X K.
pub fn adjoint_dense(x: &[Complex64], n: usize, op: &Operation, a: usize, b: usize) -> Vec<Complex64> {
    match op {
        Operation::Unitary(u) => {
            let mut y = x.to_vec();
            left_mul(&mut y, n, &mat4_adjoint(u), a, b);
            right_mul(&mut y, n, u, a, b);
            y
        }
        Operation::Channel(ks) => {
            let mut acc = vec![ZERO; x.len()];
            for k in ks {
                let mut y = x.to_vec();
                left_mul(&mut y, n, &mat4_adjoint(k), a, b);
                right_mul(&mut y, n, k, a, b);
                for (s, v) in acc.iter_mut().zip(y) {
                    *s += v;
                }
            }
            acc
        }
    }
}

pub fn dense_from_matrix(m: &CMatrix) -> Vec<Complex64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn dense_to_matrix(x: &[Complex64], d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| x[i * d + j])
}

pub fn diag_of_dense(x: &[Complex64], d: usize) -> Vec<f64> {
    (0..d).map(|i| x[i * d + i].re).collect()
}
