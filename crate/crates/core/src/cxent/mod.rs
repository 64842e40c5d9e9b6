//! Complexity-restricted entropies.
//!
//! Exact values come from a breadth-first search over every circuit of at
//! most `r` placements (see [`crate::gates::StateSearch`]); continuous gate
//! sets fall back to a penalised parameter search whose feasible points bound
//! the relative entropy from below.

mod heuristic;
#[cfg(test)]
mod tests;

pub use heuristic::HeuristicConfig;

use crate::entropy::hyp_relative_entropy_matrix;
use crate::error::{Error, Result};
use crate::gates::{
    dense_from_matrix, pullback_effect, subset_sums, Carrier, Circuit, GateSet, PlacedOp,
    SearchConfig, SearchStats, SimpleEffect, StateSearch,
};
use crate::quantum::{
    c, hermitian_eig, partial_trace_matrix, CMatrix, DensityOperator, HermitianOperator,
    PovmEffect, QubitRegister, RegisterOperator,
};
use serde::{Deserialize, Serialize};

/// Slack used when comparing tr(Qρ) with η.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certainty {
    Exact,
    UpperBound,
    LowerBound,
}

impl Certainty {
    fn flipped(self) -> Self {
        match self {
            Certainty::Exact => Certainty::Exact,
            Certainty::UpperBound => Certainty::LowerBound,
            Certainty::LowerBound => Certainty::UpperBound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    Enumeration,
    Heuristic { restarts: usize, iterations: usize },
    /// Candidate met the unrestricted optimum, so it is exact.
    Sandwich,
}

/// Which solver to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solver {
    /// Enumeration for finite sets, heuristic otherwise.
    Auto,
    Enumeration,
    Heuristic(HeuristicConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// −log inf tr(QΓ)/tr(Qρ).
    Normalized,
    /// −log inf tr(QΓ).
    Reduced,
}

#[derive(Debug, Clone)]
pub struct EntropyEstimate {
    /// Nats.
    pub value: f64,
    pub certainty: Certainty,
    pub witness: Option<PovmEffect>,
    pub solver: SolverKind,
    pub stats: SearchStats,
}

impl EntropyEstimate {
    fn negated(mut self) -> Self {
        self.value = -self.value;
        self.certainty = self.certainty.flipped();
        self
    }

    /// Placement labels of the witness circuit, in application order.
    pub fn witness_circuit(&self) -> Vec<String> {
        self.witness.as_ref().and_then(|w| w.provenance.as_ref()).map(|p| p.circuit.clone()).unwrap_or_default()
    }
}

/// Problem data shared by the solvers.
pub(crate) struct Problem<'a> {
    pub n: usize,
    pub rho: &'a CMatrix,
    pub gamma: &'a CMatrix,
    pub eta: f64,
    pub variant: Variant,
}

impl Problem<'_> {
    /// Score to minimise for a candidate with acceptance `a` and weight `b`, if feasible.
    pub fn score(&self, a: f64, b: f64) -> Option<f64> {
        let need = if self.eta >= 1.0 { 1.0 - FEASIBILITY_TOL } else { self.eta - FEASIBILITY_TOL };
        if a < need || a <= 0.0 {
            return None;
        }
        Some(match self.variant {
            Variant::Normalized => b / a,
            Variant::Reduced => b,
        })
    }

    /// Lowest score any effect can reach, from the unrestricted solver.
    pub fn floor(&self) -> Result<f64> {
        let (d, ..) = hyp_relative_entropy_matrix(self.rho, self.gamma, self.eta)?;
        let base = (-d).exp();
        Ok(match self.variant {
            Variant::Normalized => base,
            Variant::Reduced => self.eta * base,
        })
    }

    /// Value and score of Q = I.
    pub fn identity_score(&self) -> f64 {
        let a = self.rho.trace().re;
        let b = self.gamma.trace().re;
        match self.variant {
            Variant::Normalized => b / a,
            Variant::Reduced => b,
        }
    }
}

fn check_inputs(rho: &CMatrix, gamma: &CMatrix, eta: f64) -> Result<()> {
    let tr = rho.trace().re;
    if !(eta > 0.0 && eta <= tr + 1e-12) {
        return Err(Error::InfeasibleEta { eta, trace: tr });
    }
    if gamma.nrows() != rho.nrows() {
        return Err(Error::RegisterMismatch("state and reference dimensions differ".into()));
    }
    let g = hermitian_eig(gamma)?;
    if *g.values.last().unwrap() < -1e-10 {
        return Err(Error::NotPsd(*g.values.last().unwrap()));
    }
    Ok(())
}

/// Carrier for ρ: a ket when ρ is pure and every placement is unitary.
pub(crate) fn state_carrier(rho: &CMatrix, placements: &[PlacedOp]) -> Carrier {
    if placements.iter().all(|p| p.op.is_unitary()) {
        let eig = hermitian_eig(rho).expect("state is Hermitian");
        let total: f64 = eig.values.iter().sum();
        if eig.values.iter().skip(1).all(|v| v.abs() <= 1e-13 * total.max(1e-300)) {
            let s = eig.values[0].max(0.0).sqrt();
            return Carrier::Ket(eig.vectors.column(0).iter().map(|z| z * s).collect());
        }
    }
    Carrier::Dense(dense_from_matrix(rho))
}

/// True when every placement leaves `m` unchanged.
pub(crate) fn invariant_under(m: &CMatrix, n: usize, placements: &[PlacedOp]) -> bool {
    crate::gates::invariant_check(m, n, placements).is_ok()
}

/// Best score over M_r on placements, with the winning circuit and simple effect.
pub(crate) struct Enumerated {
    pub score: f64,
    pub circuit: Vec<usize>,
    pub effect: SimpleEffect,
    pub stats: SearchStats,
    pub reached_floor: bool,
}

pub(crate) fn enumerate_min(problem: &Problem, placements: &[PlacedOp], r: usize, budget: u64) -> Result<Option<Enumerated>> {
    let n = problem.n;
    let floor = problem.floor()?;
    let slack = floor * (1.0 + 1e-10) + 1e-15;
    let gamma_frozen = invariant_under(problem.gamma, n, placements);
    let roots = vec![
        (state_carrier(problem.rho, placements), false),
        (Carrier::Dense(dense_from_matrix(problem.gamma)), gamma_frozen),
    ];
    let search = StateSearch::new(n, placements, SearchConfig { r, budget });
    let (best, stats) = search.minimize(roots, slack, |diags| {
        let a = subset_sums(&diags[0], n);
        let b = subset_sums(&diags[1], n);
        let mut best: Option<(f64, usize)> = None;
        // Descending so that ties prefer effects with more identity factors.
        for t in (0..a.len()).rev() {
            if let Some(s) = problem.score(a[t], b[t]) {
                if best.is_none_or(|(bs, _)| s < bs) {
                    best = Some((s, t));
                }
            }
        }
        best
    })?;
    Ok(best.map(|b| Enumerated {
        score: b.score,
        circuit: b.path,
        effect: SimpleEffect::from_free_bits(n, b.payload),
        reached_floor: stats.stopped_early,
        stats,
    }))
}

/// Rebuild Q = E†(P) for a found circuit and verify its acceptance and score.
pub(crate) fn build_witness(
    problem: &Problem,
    register: &QubitRegister,
    connectivity: &crate::gates::Connectivity,
    ops: Vec<PlacedOp>,
    effect: SimpleEffect,
    score: f64,
) -> Result<PovmEffect> {
    let mut circuit = Circuit::new(problem.n, connectivity.clone());
    for p in ops {
        circuit.push_placed(p)?;
    }
    let q = pullback_effect(&circuit, effect, register)?;
    let a = q.expectation(problem.rho);
    let b = q.expectation(problem.gamma);
    let check = problem.score(a + 1e-10, b);
    match check {
        Some(s) if (s - score).abs() <= 1e-9 * score.abs().max(1.0) => Ok(q),
        _ => Err(Error::InvalidParameter(format!("witness re-verification failed: acceptance {a}, weight {b}"))),
    }
}

fn value_of(score: f64) -> f64 {
    if score > 0.0 {
        -score.ln()
    } else {
        f64::INFINITY
    }
}

/// D_H^{r,η}(ρ‖Γ) on raw matrices of an `n`-qubit register.
#[allow(clippy::too_many_arguments)]
pub fn cx_relative_entropy_matrix(
    rho: &CMatrix,
    gamma: &CMatrix,
    n: usize,
    g: &GateSet,
    r: usize,
    eta: f64,
    variant: Variant,
    solver: Solver,
    budget: u64,
) -> Result<EntropyEstimate> {
    check_inputs(rho, gamma, eta)?;
    if rho.nrows() != 1 << n {
        return Err(Error::InvalidDimension(format!("matrix of size {} on {n} qubits", rho.nrows())));
    }
    let register = QubitRegister::new(n)?;
    let problem = Problem { n, rho, gamma, eta, variant };
    let use_heuristic = match solver {
        Solver::Auto => !g.is_finite(),
        Solver::Enumeration => {
            if !g.is_finite() {
                return Err(Error::InvalidParameter("enumeration needs a finite gate set".into()));
            }
            false
        }
        Solver::Heuristic(_) => true,
    };
    if use_heuristic {
        let cfg = match solver {
            Solver::Heuristic(c) => c,
            _ => HeuristicConfig::default(),
        };
        return heuristic::solve(&problem, &register, g, r, cfg);
    }

    let placements = g.placements(n);
    match enumerate_min(&problem, &placements, r, budget)? {
        Some(found) => {
            let ops = found.circuit.iter().map(|&i| placements[i].clone()).collect();
            let witness = build_witness(&problem, &register, &g.connectivity, ops, found.effect, found.score)?;
            Ok(EntropyEstimate {
                value: value_of(found.score),
                certainty: Certainty::Exact,
                witness: Some(witness),
                solver: if found.reached_floor { SolverKind::Sandwich } else { SolverKind::Enumeration },
                stats: found.stats,
            })
        }
        None => Ok(EntropyEstimate {
            value: value_of(problem.identity_score()),
            certainty: Certainty::Exact,
            witness: Some(PovmEffect::identity(register)),
            solver: SolverKind::Enumeration,
            stats: SearchStats::default(),
        }),
    }
}

pub fn cx_relative_entropy(
    rho: &DensityOperator,
    gamma: &HermitianOperator,
    g: &GateSet,
    r: usize,
    eta: f64,
    variant: Variant,
    solver: Solver,
) -> Result<EntropyEstimate> {
    if rho.register() != gamma.register() {
        return Err(Error::RegisterMismatch("state and reference".into()));
    }
    cx_relative_entropy_matrix(
        rho.matrix(),
        gamma.matrix(),
        rho.n(),
        g,
        r,
        eta,
        variant,
        solver,
        crate::gates::budget_from_env(),
    )
    .map(|e| relabel(e, rho.register()))
}

fn relabel(mut e: EntropyEstimate, register: &QubitRegister) -> EntropyEstimate {
    if let Some(w) = e.witness.take() {
        let prov = w.provenance.clone();
        let mut q = PovmEffect::new(register.clone(), w.into_matrix()).expect("witness already validated");
        q.provenance = prov;
        e.witness = Some(q);
    }
    e
}

/// H_H^{r,η}(ρ) = −D_H^{r,η}(ρ‖I).
pub fn cx_entropy(rho: &DensityOperator, g: &GateSet, r: usize, eta: f64, variant: Variant, solver: Solver) -> Result<EntropyEstimate> {
    let id = HermitianOperator::identity(rho.register().clone());
    Ok(cx_relative_entropy(rho, &id, g, r, eta, variant, solver)?.negated())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSpec {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub r: usize,
    pub eta: f64,
}

/// I_A ⊗ M_B on `n` qubits, where `b_pos` lists the positions of B in order.
pub fn identity_extend(m_b: &CMatrix, n: usize, b_pos: &[usize]) -> CMatrix {
    let d = 1usize << n;
    let bits = |x: usize| -> usize {
        b_pos.iter().fold(0usize, |acc, &q| (acc << 1) | ((x >> (n - 1 - q)) & 1))
    };
    let b_mask: usize = b_pos.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    CMatrix::from_fn(d, d, |x, y| if x & !b_mask == y & !b_mask { m_b[(bits(x), bits(y))] } else { c(0.0, 0.0) })
}

/// H_Hc^{r,η}(A|B) = −D_H^{r,η}(ρ_AB ‖ I_A ⊗ ρ_B); qubits outside A ∪ B are traced out.
pub fn conditional_cx_entropy(rho: &DensityOperator, spec: &ConditionalSpec, g: &GateSet, solver: Solver) -> Result<EntropyEstimate> {
    if spec.a.is_empty() {
        return Err(Error::InvalidParameter("conditional entropy needs a nonempty A".into()));
    }
    let mut a_idx = Vec::new();
    let mut b_idx = Vec::new();
    for l in &spec.a {
        a_idx.push(rho.register().index_of(l)?);
    }
    for l in &spec.b {
        let i = rho.register().index_of(l)?;
        if a_idx.contains(&i) {
            return Err(Error::OverlappingLabels(l.clone()));
        }
        b_idx.push(i);
    }
    let mut keep: Vec<usize> = a_idx.iter().chain(&b_idx).copied().collect();
    keep.sort_unstable();
    let n_ab = keep.len();
    let rho_ab = partial_trace_matrix(rho.matrix(), rho.n(), &keep);
    let b_pos: Vec<usize> = keep.iter().enumerate().filter(|(_, q)| b_idx.contains(q)).map(|(p, _)| p).collect();
    let rho_b = partial_trace_matrix(&rho_ab, n_ab, &b_pos);
    let gamma = identity_extend(&rho_b, n_ab, &b_pos);
    let labels: Vec<String> = keep.iter().map(|&q| rho.register().labels()[q].clone()).collect();
    let register = QubitRegister::with_labels(labels)?;
    let est = cx_relative_entropy_matrix(
        &rho_ab,
        &gamma,
        n_ab,
        g,
        spec.r,
        spec.eta,
        Variant::Normalized,
        solver,
        crate::gates::budget_from_env(),
    )?;
    Ok(relabel(est, &register).negated())
}

/// Best acceptance, its witness, and search statistics.
#[derive(Debug, Clone)]
pub struct SuccessProbability {
    pub probability: f64,
    pub witness: PovmEffect,
    pub stats: SearchStats,
}

/// max tr(Qρ) over Q ∈ M_r with log₂ tr Q = ⌊m / log 2⌋.
pub fn success_probability(rho: &DensityOperator, g: &GateSet, r: usize, m: f64) -> Result<SuccessProbability> {
    if !g.is_finite() {
        return Err(Error::InvalidParameter("success probability needs a finite gate set".into()));
    }
    let n = rho.n();
    let k = (m / std::f64::consts::LN_2 + 1e-12).floor();
    if !(0.0..=n as f64).contains(&k) {
        return Err(Error::EmptyCandidates(format!("no effect with trace 2^{k}")));
    }
    let target = 2f64.powi(k as i32);
    let placements = g.placements(n);
    let id = CMatrix::identity(1 << n, 1 << n);
    let eig = hermitian_eig(rho.matrix())?;
    let ky_fan: f64 = eig.values.iter().take(target as usize).sum();
    let floor = -(ky_fan.min(rho.matrix().trace().re)) * (1.0 - 1e-10);
    let roots = vec![
        (state_carrier(rho.matrix(), &placements), false),
        (Carrier::Dense(dense_from_matrix(&id)), invariant_under(&id, n, &placements)),
    ];
    let search = StateSearch::new(n, &placements, SearchConfig::new(r));
    let (best, stats) = search.minimize(roots, floor, |diags| {
        let a = subset_sums(&diags[0], n);
        let b = subset_sums(&diags[1], n);
        let mut best: Option<(f64, usize)> = None;
        for t in (0..a.len()).rev() {
            if (b[t] - target).abs() <= 1e-9 * target && best.is_none_or(|(s, _)| -a[t] < s) {
                best = Some((-a[t], t));
            }
        }
        best
    })?;
    let best = best.ok_or_else(|| Error::EmptyCandidates("no effect of the requested trace".into()))?;
    let mut circuit = Circuit::new(n, g.connectivity.clone());
    for &i in &best.path {
        circuit.push_placed(placements[i].clone())?;
    }
    let witness = pullback_effect(&circuit, SimpleEffect::from_free_bits(n, best.payload), rho.register())?;
    Ok(SuccessProbability { probability: witness.expectation(rho.matrix()), witness, stats })
}

/// β^r(ρ, σ) = max over M_r of |tr(M(ρ − σ))|.
pub fn distinguishability_beta(rho: &DensityOperator, sigma: &DensityOperator, g: &GateSet, r: usize) -> Result<f64> {
    if rho.register() != sigma.register() {
        return Err(Error::RegisterMismatch("states for distinguishability".into()));
    }
    if !g.is_finite() {
        return Err(Error::InvalidParameter("distinguishability needs a finite gate set".into()));
    }
    let n = rho.n();
    let diff = rho.matrix() - sigma.matrix();
    let eig = hermitian_eig(&diff)?;
    let pos: f64 = eig.values.iter().filter(|&&v| v > 0.0).sum();
    let neg: f64 = -eig.values.iter().filter(|&&v| v < 0.0).sum::<f64>();
    let floor = -pos.max(neg) * (1.0 - 1e-10);
    let placements = g.placements(n);
    let search = StateSearch::new(n, &placements, SearchConfig::new(r));
    let (best, _) = search.minimize(vec![(Carrier::Dense(dense_from_matrix(&diff)), false)], floor, |diags| {
        let a = subset_sums(&diags[0], n);
        let m = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        Some((-m, ()))
    })?;
    Ok(best.map(|b| -b.score).unwrap_or(0.0))
}

/// A test accepting ρ with probability exactly η and σ with probability at most δ.
#[derive(Debug, Clone)]
pub struct TestWitness {
    pub effect: PovmEffect,
    /// Probability of running the measurement; otherwise reject.
    pub coin: f64,
    pub accept_rho: f64,
    pub accept_sigma: f64,
}

/// Returns a witness iff D_H^{r,η}(ρ‖σ) ≥ −log(δ/η).
pub fn hypothesis_test_witness(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    g: &GateSet,
    r: usize,
    eta: f64,
    delta: f64,
) -> Result<Option<TestWitness>> {
    if !(eta > 0.0 && eta <= 1.0 && delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("η = {eta}, δ = {delta} must lie in (0, 1]")));
    }
    let gamma = HermitianOperator::from(sigma.clone());
    let est = cx_relative_entropy(rho, &gamma, g, r, eta, Variant::Normalized, Solver::Auto)?;
    let Some(q) = est.witness else { return Ok(None) };
    let p = q.expectation(rho.matrix());
    let s = q.expectation(sigma.matrix());
    let coin = (eta / p).min(1.0);
    let accept_rho = coin * p;
    let accept_sigma = coin * s;
    if (accept_rho - eta).abs() > 1e-10 || accept_sigma > delta + 1e-12 {
        return Ok(None);
    }
    Ok(Some(TestWitness { effect: q, coin, accept_rho, accept_sigma }))
}
