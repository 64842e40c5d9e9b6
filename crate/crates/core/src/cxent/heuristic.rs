//! Penalised parameter search over circuits of arbitrary two-qubit unitaries.

use super::{build_witness, Certainty, EntropyEstimate, Problem, SolverKind, Variant};
use crate::error::{Error, Result};
use crate::gates::{
    apply_dense, dense_from_matrix, diag_of_dense, subset_sums, unitary_from_generator, GateSet, Mat4, Operation,
    PlacedOp, SearchStats, SimpleEffect,
};
use crate::quantum::{PovmEffect, QubitRegister};
use crate::rng::task_rng;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Best score, layout edges, parameters and target mask of one restart.
type Run = (f64, Vec<(usize, usize)>, Vec<f64>, usize);

const PARAMS_PER_GATE: usize = 15;
const FD_STEP: f64 = 1e-5;
const STAGES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicConfig {
    pub restarts: usize,
    /// Gradient steps per restart, split evenly over the penalty stages.
    pub iterations: usize,
    pub seed: u64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self { restarts: 32, iterations: 120, seed: 0 }
    }
}

fn to_mat4(theta: &[f64]) -> Mat4 {
    let u = unitary_from_generator(theta);
    let mut m = [Complex64::new(0.0, 0.0); 16];
    for i in 0..4 {
        for j in 0..4 {
            m[4 * i + j] = u[(i, j)];
        }
    }
    m
}

struct Layout<'a> {
    problem: &'a Problem<'a>,
    edges: Vec<(usize, usize)>,
    rho: Vec<Complex64>,
    gamma: Vec<Complex64>,
}

impl Layout<'_> {
    /// Subset-sum tables of ρ and Γ after the circuit.
    fn tables(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.problem.n;
        let d = 1usize << n;
        let mut rho = self.rho.clone();
        let mut gamma = self.gamma.clone();
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            let op = Operation::Unitary(to_mat4(&theta[k * PARAMS_PER_GATE..(k + 1) * PARAMS_PER_GATE]));
            rho = apply_dense(&rho, n, &op, a, b);
            gamma = apply_dense(&gamma, n, &op, a, b);
        }
        (subset_sums(&diag_of_dense(&rho, d), n), subset_sums(&diag_of_dense(&gamma, d), n))
    }

    fn objective(&self, theta: &[f64], t: usize, penalty: f64) -> f64 {
        let (a, b) = self.tables(theta);
        let (a, b) = (a[t], b[t]);
        let eta = if self.problem.eta >= 1.0 { 1.0 - super::FEASIBILITY_TOL } else { self.problem.eta };
        let core = match self.problem.variant {
            Variant::Normalized => (b.max(1e-300) / a.max(1e-300)).ln(),
            Variant::Reduced => b.max(1e-300).ln(),
        };
        core + penalty * (eta - a).max(0.0).powi(2)
    }

    fn best_feasible(&self, theta: &[f64]) -> Option<(f64, usize)> {
        let (a, b) = self.tables(theta);
        let mut best: Option<(f64, usize)> = None;
        for t in (0..a.len()).rev() {
            if let Some(s) = self.problem.score(a[t], b[t]) {
                if best.is_none_or(|(bs, _)| s < bs) {
                    best = Some((s, t));
                }
            }
        }
        best
    }
}

fn descend(layout: &Layout, theta: &mut [f64], t: usize, iterations: usize) {
    let per_stage = (iterations / STAGES).max(1);
    let mut penalty = 10.0;
    for _ in 0..STAGES {
        let mut step = 0.1;
        let mut f = layout.objective(theta, t, penalty);
        for _ in 0..per_stage {
            let mut grad = vec![0.0; theta.len()];
            for i in 0..theta.len() {
                let keep = theta[i];
                theta[i] = keep + FD_STEP;
                let up = layout.objective(theta, t, penalty);
                theta[i] = keep - FD_STEP;
                let down = layout.objective(theta, t, penalty);
                theta[i] = keep;
                grad[i] = (up - down) / (2.0 * FD_STEP);
            }
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm < 1e-10 {
                break;
            }
            // Backtracking along the normalised gradient.
            let mut moved = false;
            while step > 1e-8 {
                let trial: Vec<f64> = theta.iter().zip(&grad).map(|(x, g)| x - step * g / norm).collect();
                let ft = layout.objective(&trial, t, penalty);
                if ft < f {
                    theta.copy_from_slice(&trial);
                    f = ft;
                    step *= 1.5;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        penalty *= 10.0;
    }
}

pub(super) fn solve(problem: &Problem, register: &QubitRegister, g: &GateSet, r: usize, cfg: HeuristicConfig) -> Result<EntropyEstimate> {
    let n = problem.n;
    let edges = g.connectivity.edges(n);
    if r > 0 && edges.is_empty() {
        return Err(Error::InvalidParameter("connectivity has no edges".into()));
    }
    let floor = problem.floor()?;
    let rho = dense_from_matrix(problem.rho);
    let gamma = dense_from_matrix(problem.gamma);

    // Restarts cycle through the non-identity simple effects, fewest free qubits first.
    let mut targets: Vec<usize> = (0..(1usize << n) - 1).collect();
    targets.sort_by_key(|t| (t.count_ones(), *t));
    if targets.is_empty() {
        targets.push(0);
    }
    let runs: Vec<Option<Run>> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = task_rng(cfg.seed, k as u64);
            let layout_edges: Vec<(usize, usize)> = (0..r).map(|_| edges[rng.random_range(0..edges.len())]).collect();
            let layout = Layout { problem, edges: layout_edges, rho: rho.clone(), gamma: gamma.clone() };
            let mut theta: Vec<f64> =
                (0..r * PARAMS_PER_GATE).map(|_| 0.5 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
            let start = targets[k % targets.len()];
            if r > 0 {
                descend(&layout, &mut theta, start, cfg.iterations);
            }
            layout.best_feasible(&theta).map(|(s, t)| (s, layout.edges, theta, t))
        })
        .collect();

    let mut best: Option<Run> = None;
    for run in runs.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| run.0 < b.0) {
            best = Some(run);
        }
    }
    let solver = SolverKind::Heuristic { restarts: cfg.restarts, iterations: cfg.iterations };
    let Some((score, edges, theta, t)) = best else {
        let s = problem.identity_score();
        return Ok(EntropyEstimate {
            value: -s.ln(),
            certainty: Certainty::LowerBound,
            witness: Some(PovmEffect::identity(register.clone())),
            solver,
            stats: SearchStats::default(),
        });
    };
    let ops: Vec<PlacedOp> = edges
        .iter()
        .enumerate()
        .map(|(k, &e)| PlacedOp {
            name: format!("U{k}"),
            op: Operation::Unitary(to_mat4(&theta[k * PARAMS_PER_GATE..(k + 1) * PARAMS_PER_GATE])),
            edge: e,
        })
        .collect();
    let witness = build_witness(problem, register, &g.connectivity, ops, SimpleEffect::from_free_bits(n, t), score)?;
    let exact = score <= floor * (1.0 + 1e-9) + 1e-15;
    Ok(EntropyEstimate {
        value: if score > 0.0 { -score.ln() } else { f64::INFINITY },
        certainty: if exact { Certainty::Exact } else { Certainty::LowerBound },
        witness: Some(witness),
        solver: if exact { SolverKind::Sandwich } else { solver },
        stats: SearchStats::default(),
    })
}
