use super::apply::apply_ket;
use super::{GateSet, Operation};
use crate::error::{Error, Result};
use crate::quantum::{CMatrix, CVector};
use num_complex::Complex64;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

fn hash_entries<'a>(it: impl Iterator<Item = &'a Complex64>) -> u64 {
    let mut h = DefaultHasher::new();
    for z in it {
        ((z.re * 1e9).round() as i64).hash(&mut h);
        ((z.im * 1e9).round() as i64).hash(&mut h);
    }
    h.finish()
}

fn unitary_placements(g: &GateSet, n: usize) -> Result<Vec<(super::Mat4, (usize, usize))>> {
    g.placements(n)
        .into_iter()
        .map(|p| match p.op {
            Operation::Unitary(u) => Ok((u, p.edge)),
            Operation::Channel(_) => Err(Error::InvalidParameter("unitary gate set expected".into())),
        })
        .collect()
}

/// Least number of gates whose product equals `target` (operator norm 1e-8); `None` if above `r_max`.
pub fn circuit_complexity(g: &GateSet, target: &CMatrix, r_max: usize) -> Result<Option<usize>> {
    if !g.is_finite() {
        return Err(Error::InvalidParameter("finite gate set required".into()));
    }
    let d = target.nrows();
    let n = d.trailing_zeros() as usize;
    if d != 1 << n || target.ncols() != d {
        return Err(Error::InvalidDimension("target must be 2^n square".into()));
    }
    let placements = unitary_placements(g, n)?;
    // Columns stored row-major as a flat d×d array; gates act on each column.
    let mut start = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        start[i * d + i] = Complex64::new(1.0, 0.0);
    }
    let matches = |m: &[Complex64]| {
        let diff = CMatrix::from_fn(d, d, |i, j| m[j * d + i] - target[(i, j)]);
        diff.norm() <= 1e-8 || crate::quantum::operator_norm(&diff) <= 1e-8
    };
    if matches(&start) {
        return Ok(Some(0));
    }
    let mut seen = HashSet::new();
    seen.insert(hash_entries(start.iter()));
    let mut frontier = vec![start];
    for depth in 1..=r_max {
        let mut next = Vec::new();
        for m in &frontier {
            for (u, (a, b)) in &placements {
                let mut child = m.clone();
                for col in child.chunks_mut(d) {
                    apply_ket(col, n, u, *a, *b);
                }
                if !seen.insert(hash_entries(child.iter())) {
                    continue;
                }
                if matches(&child) {
                    return Ok(Some(depth));
                }
                next.push(child);
            }
        }
        frontier = next;
    }
    Ok(None)
}

/// Least r such that some ≤ r-gate circuit maps |0ⁿ⟩ within trace distance ε of ψ.
pub fn approx_state_complexity(psi: &CVector, g: &GateSet, eps: f64, r_max: usize) -> Result<Option<usize>> {
    let d = psi.len();
    let n = d.trailing_zeros() as usize;
    if d != 1 << n {
        return Err(Error::InvalidDimension("ket length must be 2^n".into()));
    }
    let psi = psi / Complex64::new(psi.norm(), 0.0);
    let placements = unitary_placements(g, n)?;
    let close = |v: &[Complex64]| {
        let overlap: Complex64 = v.iter().zip(psi.iter()).map(|(a, b)| a.conj() * b).sum();
        (1.0 - overlap.norm_sqr()).max(0.0).sqrt() <= eps + 1e-12
    };
    let mut start = vec![Complex64::new(0.0, 0.0); d];
    start[0] = Complex64::new(1.0, 0.0);
    if close(&start) {
        return Ok(Some(0));
    }
    let mut seen = HashSet::new();
    seen.insert(hash_entries(start.iter()));
    let mut frontier = vec![start];
    for depth in 1..=r_max {
        let mut next = Vec::new();
        for v in &frontier {
            for (u, (a, b)) in &placements {
                let mut w = v.clone();
                apply_ket(&mut w, n, u, *a, *b);
                if !seen.insert(hash_entries(w.iter())) {
                    continue;
                }
                if close(&w) {
                    return Ok(Some(depth));
                }
                next.push(w);
            }
        }
        frontier = next;
    }
    Ok(None)
}
