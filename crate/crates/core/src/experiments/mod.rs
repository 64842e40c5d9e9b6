//! Numerical experiments on random circuits, entanglement and decoupling.
//!
//! Every random trial draws from its own ChaCha stream keyed by (seed, trial),
//! trials run in parallel, and results are gathered in trial order.

mod decoupling;
mod quench;
mod transition;
#[cfg(test)]
mod tests;

pub use decoupling::{
    chain_rule_slack, decoupling_probe, decoupling_simulate, tripartite_register, verify_counterexample,
    Counterexample, DecouplingOutcome, ProbeReport, SlackRecord,
};
pub use quench::{entanglement_of_ket, ising_quench, InitialState, IsingSpec, QuenchTrace, RATE_CONSTANT};
pub use transition::{transition_scan, TransitionRow};

use crate::cxent::{cx_entropy, Solver, Variant};
use crate::entropy::{mutual_information_matrix, von_neumann_matrix};
use crate::error::{Error, Result};
use crate::gates::{
    apply_dense, dense_from_matrix, dense_to_matrix, entangling_power, unitary_from_generator, Circuit,
    Connectivity, GateSet, Mat4, Operation,
};
use crate::quantum::{haar_unitary, random_density, CMatrix, DensityOperator, RegisterOperator};
use crate::rng::task_rng;
use crate::units::binary_entropy;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, LN_2};

/// Where brickwork and trial gates come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GateSource {
    HaarSU4,
    /// Uniform over the non-identity unitary gates of a finite set.
    Finite(GateSet),
    /// exp(i Σ θ_k G_k) with θ_k ~ N(0, scale²).
    NearIdentity(f64),
}

fn finite_choices(g: &GateSet) -> Result<Vec<(String, Mat4)>> {
    let v: Vec<(String, Mat4)> = g
        .gates()
        .iter()
        .filter(|x| x.edge.is_none() && !x.op.is_identity())
        .filter_map(|x| match &x.op {
            Operation::Unitary(u) => Some((x.name.clone(), *u)),
            Operation::Channel(_) => None,
        })
        .collect();
    if v.is_empty() {
        return Err(Error::EmptyCandidates("gate source has no unitary gates".into()));
    }
    Ok(v)
}

fn to_mat4(u: &CMatrix) -> Mat4 {
    let mut m = [num_complex::Complex64::new(0.0, 0.0); 16];
    for i in 0..4 {
        for j in 0..4 {
            m[4 * i + j] = u[(i, j)];
        }
    }
    m
}

fn draw_gate<R: Rng>(source: &GateSource, choices: &[(String, Mat4)], rng: &mut R) -> (String, Mat4) {
    match source {
        GateSource::HaarSU4 => ("U".into(), to_mat4(&haar_unitary(4, rng).expect("dimension 4"))),
        GateSource::Finite(_) => choices[rng.random_range(0..choices.len())].clone(),
        GateSource::NearIdentity(scale) => {
            let normal = Normal::new(0.0, *scale).expect("finite scale");
            let theta: Vec<f64> = (0..15).map(|_| normal.sample(rng)).collect();
            ("V".into(), to_mat4(&unitary_from_generator(&theta)))
        }
    }
}

/// Staggered nearest-neighbour layers on a chain: even layers start at edge (0,1), odd at (1,2).
pub fn brickwork_circuit(n: usize, t: usize, source: &GateSource, seed: u64) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidParameter("brickwork needs at least two qubits".into()));
    }
    let choices = match source {
        GateSource::Finite(g) => finite_choices(g)?,
        _ => Vec::new(),
    };
    let mut rng = task_rng(seed, 0);
    let mut c = Circuit::new(n, Connectivity::Chain);
    for layer in 0..t {
        let mut a = layer % 2;
        while a + 1 < n {
            let (name, u) = draw_gate(source, &choices, &mut rng);
            c.push(&name, Operation::Unitary(u), (a, a + 1))?;
            a += 2;
        }
    }
    Ok(c)
}

/// E(ρ): mean mutual information across the n − 1 contiguous cuts.
pub fn entanglement_e(rho: &CMatrix, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("entanglement measure needs n ≥ 2".into()));
    }
    let mut total = 0.0;
    for j in 1..n {
        let a: Vec<usize> = (0..j).collect();
        total += mutual_information_matrix(rho, n, &a)?;
    }
    Ok(total / (n - 1) as f64)
}

pub fn entanglement_e_state(rho: &DensityOperator) -> Result<f64> {
    entanglement_e(rho.matrix(), rho.n())
}

/// Single-gate continuity bound (1/(n−1))·min{8 log 2, 8ν log 2 + 3(1+ν) h(ν/(1+ν))}, ν = sin(min{e, π/2}).
pub fn continuity_bound(e: f64, n: usize) -> f64 {
    let nu = e.min(FRAC_PI_2).sin();
    let refined = 8.0 * nu * LN_2 + 3.0 * (1.0 + nu) * binary_entropy(nu / (1.0 + nu));
    (8.0 * LN_2).min(refined) / (n - 1) as f64
}

/// μ(𝒢): continuity bound for the largest entangling power in the set.
pub fn mu_of_set(g: &GateSet, n: usize) -> Result<f64> {
    let mut e_max: f64 = 0.0;
    for gate in g.gates() {
        let Operation::Unitary(u) = &gate.op else {
            return Err(Error::InvalidParameter("entanglement bounds need unitary gates".into()));
        };
        let m = CMatrix::from_fn(4, 4, |i, j| u[4 * i + j]);
        e_max = e_max.max(entangling_power(&m)?.e);
    }
    Ok(continuity_bound(e_max, n))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContinuityReport {
    pub trials: usize,
    pub max_delta: f64,
    /// |ΔE| above 8 log 2/(n − 1) + 1e-9.
    pub coarse_violations: usize,
    /// |ΔE| above the entangling-power bound + 1e-9.
    pub refined_violations: usize,
    /// Largest ratio |ΔE| / refined bound seen.
    pub max_ratio: f64,
}

/// Random states hit by one random nearest-neighbour gate.
pub fn continuity_trial(n: usize, trials: usize, seed: u64, source: &GateSource) -> Result<ContinuityReport> {
    if n < 2 {
        return Err(Error::InvalidParameter("continuity trials need n ≥ 2".into()));
    }
    let choices = match source {
        GateSource::Finite(g) => finite_choices(g)?,
        _ => Vec::new(),
    };
    let d = 1usize << n;
    let rows: Vec<Result<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = task_rng(seed, k as u64);
            let rank = rng.random_range(1..=d);
            let rho = random_density(d, rank, &mut rng)?;
            let a = rng.random_range(0..n - 1);
            let (_, u) = draw_gate(source, &choices, &mut rng);
            let out = dense_to_matrix(&apply_dense(&dense_from_matrix(&rho), n, &Operation::Unitary(u), a, a + 1), d);
            let delta = (entanglement_e(&out, n)? - entanglement_e(&rho, n)?).abs();
            let e = entangling_power(&CMatrix::from_fn(4, 4, |i, j| u[4 * i + j]))?.e;
            Ok((delta, continuity_bound(e, n)))
        })
        .collect();
    let coarse = 8.0 * LN_2 / (n - 1) as f64;
    let mut report = ContinuityReport { trials, ..Default::default() };
    for row in rows {
        let (delta, bound) = row?;
        report.max_delta = report.max_delta.max(delta);
        if delta > coarse + 1e-9 {
            report.coarse_violations += 1;
        }
        if delta > bound + 1e-9 {
            report.refined_violations += 1;
        }
        if bound > 0.0 {
            report.max_ratio = report.max_ratio.max(delta / bound);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementBound {
    /// Exact H_H^{r,η}(ρ).
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Compare H_H^{r,η}(ρ) with (1/η)[E − rμ + H − 2h(η) − (1−η) n log 2] − 2 log η.
pub fn entanglement_bound_check(rho: &DensityOperator, g: &GateSet, r: usize, eta: f64) -> Result<EntanglementBound> {
    let n = rho.n();
    if g.connectivity != Connectivity::Chain {
        return Err(Error::InvalidParameter("entanglement bound needs chain connectivity".into()));
    }
    let mu = mu_of_set(g, n)?;
    let e = entanglement_e(rho.matrix(), n)?;
    let h = von_neumann_matrix(rho.matrix())?;
    let rhs = (e - r as f64 * mu + h - 2.0 * binary_entropy(eta) - (1.0 - eta) * n as f64 * LN_2) / eta - 2.0 * eta.ln();
    let lhs = cx_entropy(rho, g, r, eta, Variant::Normalized, Solver::Enumeration)?.value;
    Ok(EntanglementBound { lhs, rhs, slack: lhs - rhs })
}
