//! Breadth-first search over states reachable with at most `r` placed gates.
//!
//! Because tr(E†(P) X) = tr(P E(X)), scanning every effect of M_r against a
//! tuple of operators is the same as pushing the operators forward through
//! every circuit and reading off simple-effect expectations, which only need
//! the diagonal. Distinct reachable tuples are deduplicated by a hash of their
//! entries rounded to 1e-10; the frontier is expanded in parallel and merged
//! sequentially in frontier order, so results do not depend on thread count.

use super::apply::{apply_dense, apply_ket, diag_of_dense};
use super::{Operation, PlacedOp};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
const CHUNK: usize = 512;

/// Candidate cap, overridable through `CXTHERM_BUDGET`.
pub fn budget_from_env() -> u64 {
    std::env::var("CXTHERM_BUDGET").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

/// Operator pushed through circuits: a ket (for pure states under unitaries) or a row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Carrier {
    Ket(Vec<Complex64>),
    Dense(Vec<Complex64>),
}

impl Carrier {
    fn dim(&self) -> usize {
        match self {
            Carrier::Ket(v) => v.len(),
            Carrier::Dense(m) => (m.len() as f64).sqrt().round() as usize,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        match self {
            Carrier::Ket(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            Carrier::Dense(m) => diag_of_dense(m, self.dim()),
        }
    }

    fn to_dense(&self) -> Vec<Complex64> {
        match self {
            Carrier::Ket(v) => {
                let d = v.len();
                let mut m = vec![Complex64::new(0.0, 0.0); d * d];
                for i in 0..d {
                    for j in 0..d {
                        m[i * d + j] = v[i] * v[j].conj();
                    }
                }
                m
            }
            Carrier::Dense(m) => m.clone(),
        }
    }

    pub fn apply(&self, n: usize, p: &PlacedOp) -> Carrier {
        match (self, &p.op) {
            (Carrier::Ket(v), Operation::Unitary(u)) => {
                let mut w = v.clone();
                apply_ket(&mut w, n, u, p.edge.0, p.edge.1);
                canonical_phase(&mut w);
                Carrier::Ket(w)
            }
            (Carrier::Ket(_), Operation::Channel(_)) => {
                Carrier::Dense(apply_dense(&self.to_dense(), n, &p.op, p.edge.0, p.edge.1))
            }
            (Carrier::Dense(m), _) => Carrier::Dense(apply_dense(m, n, &p.op, p.edge.0, p.edge.1)),
        }
    }

    fn hash_into(&self, h: &mut DefaultHasher) {
        let round = |x: f64| (x * 1e10).round() as i64;
        match self {
            Carrier::Ket(v) => {
                0u8.hash(h);
                for z in v {
                    round(z.re).hash(h);
                    round(z.im).hash(h);
                }
            }
            Carrier::Dense(m) => {
                1u8.hash(h);
                let d = self.dim();
                for i in 0..d {
                    for j in i..d {
                        round(m[i * d + j].re).hash(h);
                        round(m[i * d + j].im).hash(h);
                    }
                }
            }
        }
    }
}

/// Rotate the global phase so the first non-negligible amplitude is real positive.
fn canonical_phase(v: &mut [Complex64]) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-6).copied() {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// g[T] = Σ_{b ⊆ T} x_b over bit masks of length n.
pub fn subset_sums(x: &[f64], n: usize) -> Vec<f64> {
    let mut g = x.to_vec();
    for k in 0..n {
        let bit = 1usize << k;
        for t in 0..g.len() {
            if t & bit != 0 {
                g[t] += g[t ^ bit];
            }
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub r: usize,
    pub budget: u64,
}

impl SearchConfig {
    pub fn new(r: usize) -> Self {
        Self { r, budget: budget_from_env() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Distinct reachable tuples evaluated.
    pub nodes: u64,
    /// Effects examined (nodes × 2^n).
    pub candidates: u64,
    pub stopped_early: bool,
}

#[derive(Debug, Clone)]
pub struct SearchBest<T> {
    pub score: f64,
    pub payload: T,
    /// Indices into the placement list, in application order.
    pub path: Vec<usize>,
}

struct Node {
    carriers: Vec<Carrier>,
    path: Vec<u16>,
}

pub struct StateSearch<'a> {
    pub n: usize,
    pub placements: &'a [PlacedOp],
    pub config: SearchConfig,
}

impl<'a> StateSearch<'a> {
    pub fn new(n: usize, placements: &'a [PlacedOp], config: SearchConfig) -> Self {
        Self { n, placements, config }
    }

    /// Minimise `eval` over all tuples reachable with ≤ r placements.
    ///
    /// `roots` pairs each operator with a flag marking it invariant under every
    /// placement (it is then never propagated). `eval` receives the diagonals
    /// in root order and returns a score to minimise plus a payload. The search
    /// stops as soon as a score ≤ `floor` is found. Ties keep the earliest tuple
    /// in breadth-first order.
    pub fn minimize<T, F>(&self, roots: Vec<(Carrier, bool)>, floor: f64, eval: F) -> Result<(Option<SearchBest<T>>, SearchStats)>
    where
        T: Send,
        F: Fn(&[Vec<f64>]) -> Option<(f64, T)> + Sync,
    {
        let frozen: Vec<Option<Vec<f64>>> =
            roots.iter().map(|(c, f)| if *f { Some(c.diag()) } else { None }).collect();
        let moving: Vec<Carrier> = roots.into_iter().filter(|(_, f)| !*f).map(|(c, _)| c).collect();
        let n = self.n;
        let per_node = 1u64 << n;
        let diags = |node: &Node| -> Vec<Vec<f64>> {
            let mut it = node.carriers.iter();
            frozen
                .iter()
                .map(|f| match f {
                    Some(d) => d.clone(),
                    None => it.next().expect("moving carrier").diag(),
                })
                .collect()
        };

        let mut stats = SearchStats::default();
        let mut best: Option<SearchBest<T>> = None;
        let mut visited: HashSet<u64> = HashSet::new();
        let root = Node { carriers: moving, path: Vec::new() };
        visited.insert(node_hash(&root));

        let consider = |best: &mut Option<SearchBest<T>>, cand: Option<(f64, T)>, path: &[u16]| {
            if let Some((score, payload)) = cand {
                if best.as_ref().is_none_or(|b| score < b.score) {
                    *best = Some(SearchBest { score, payload, path: path.iter().map(|&i| i as usize).collect() });
                }
            }
        };

        stats.nodes += 1;
        stats.candidates += per_node;
        consider(&mut best, eval(&diags(&root)), &root.path);
        let done = |best: &Option<SearchBest<T>>| best.as_ref().is_some_and(|b| b.score <= floor);
        if done(&best) {
            stats.stopped_early = true;
            return Ok((best, stats));
        }

        let mut frontier = vec![root];
        for depth in 1..=self.config.r {
            let keep_children = depth < self.config.r;
            let mut next = Vec::new();
            for chunk in frontier.chunks(CHUNK) {
                let children: Vec<Vec<(u64, Node)>> = chunk
                    .par_iter()
                    .map(|node| {
                        self.placements
                            .iter()
                            .enumerate()
                            .map(|(g, p)| {
                                let carriers = node.carriers.iter().map(|c| c.apply(n, p)).collect();
                                let mut path = node.path.clone();
                                path.push(g as u16);
                                let child = Node { carriers, path };
                                (node_hash(&child), child)
                            })
                            .collect()
                    })
                    .collect();
                let fresh: Vec<Node> = children
                    .into_iter()
                    .flatten()
                    .filter_map(|(h, child)| visited.insert(h).then_some(child))
                    .collect();
                stats.nodes += fresh.len() as u64;
                stats.candidates += per_node * fresh.len() as u64;
                if stats.candidates > self.config.budget {
                    return Err(Error::BudgetExceeded { cap: self.config.budget });
                }
                let evals: Vec<Option<(f64, T)>> = fresh.par_iter().map(|c| eval(&diags(c))).collect();
                for (cand, node) in evals.into_iter().zip(&fresh) {
                    consider(&mut best, cand, &node.path);
                }
                if done(&best) {
                    stats.stopped_early = true;
                    return Ok((best, stats));
                }
                if keep_children {
                    next.extend(fresh);
                }
            }
            if next.is_empty() && keep_children {
                break;
            }
            frontier = next;
        }
        Ok((best, stats))
    }
}

fn node_hash(node: &Node) -> u64 {
    let mut h = DefaultHasher::new();
    for c in &node.carriers {
        c.hash_into(&mut h);
    }
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_sums_match_direct_sums() {
        let x: Vec<f64> = (0..16).map(|i| (i * i) as f64 * 0.1 + 1.0).collect();
        let g = subset_sums(&x, 4);
        for (t, got) in g.iter().enumerate() {
            let direct: f64 = (0..16usize).filter(|b| b & !t == 0).map(|b| x[b]).sum();
            assert!((got - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_phase_removes_global_phase() {
        let mut a = vec![Complex64::new(0.0, 0.0), Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let mut b: Vec<Complex64> = a.iter().map(|z| z * Complex64::from_polar(1.0, 1.234)).collect();
        canonical_phase(&mut a);
        canonical_phase(&mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
