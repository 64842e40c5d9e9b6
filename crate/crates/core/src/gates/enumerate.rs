use super::apply::{adjoint_dense, dense_from_matrix, dense_to_matrix};
use super::{GateSet, SimpleEffect};
use crate::error::{Error, Result};
use crate::quantum::{EffectProvenance, PovmEffect, QubitRegister};
use num_complex::Complex64;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

fn effect_hash(q: &[Complex64]) -> u64 {
    let mut h = DefaultHasher::new();
    for z in q {
        ((z.re * 1e10).round() as i64).hash(&mut h);
        ((z.im * 1e10).round() as i64).hash(&mut h);
    }
    h.finish()
}

/// Materialise M_r: every pulled-back simple effect E₁†⋯E_k†(P), k ≤ r.
///
/// Works in the Heisenberg picture, growing the set one adjoint at a time.
/// With `dedup` the output holds each matrix once (rounded to 1e-10).
pub fn enumerate_effects(g: &GateSet, r: usize, n: usize, dedup: bool, budget: u64) -> Result<Vec<PovmEffect>> {
    if !g.is_finite() {
        return Err(Error::InvalidParameter("effect enumeration needs a finite gate set".into()));
    }
    let register = QubitRegister::new(n)?;
    let d = 1usize << n;
    let placements = g.placements(n);
    let mut seen = HashSet::new();
    let mut out: Vec<(Vec<Complex64>, Vec<usize>, u32)> = Vec::new();
    let mut frontier = Vec::new();
    for p in SimpleEffect::all(n) {
        let q = dense_from_matrix(&p.matrix());
        if !dedup || seen.insert(effect_hash(&q)) {
            frontier.push((q.clone(), Vec::new(), p.proj0));
            out.push((q, Vec::new(), p.proj0));
        }
    }
    for _ in 0..r {
        let mut next = Vec::new();
        for (q, path, mask) in &frontier {
            for (gi, op) in placements.iter().enumerate() {
                let child = adjoint_dense(q, n, &op.op, op.edge.0, op.edge.1);
                if dedup && !seen.insert(effect_hash(&child)) {
                    continue;
                }
                // The newest adjoint is outermost, i.e. the first gate applied to a state.
                let mut cpath = Vec::with_capacity(path.len() + 1);
                cpath.push(gi);
                cpath.extend_from_slice(path);
                out.push((child.clone(), cpath.clone(), *mask));
                next.push((child, cpath, *mask));
                if out.len() as u64 > budget {
                    return Err(Error::BudgetExceeded { cap: budget });
                }
            }
        }
        frontier = next;
    }
    out.into_iter()
        .map(|(q, path, mask)| {
            let e = PovmEffect::new(register.clone(), dense_to_matrix(&q, d))?;
            let circuit = path.iter().map(|&i| placements[i].label()).collect();
            Ok(e.with_provenance(EffectProvenance { circuit, proj0_mask: mask }))
        })
        .collect()
}
