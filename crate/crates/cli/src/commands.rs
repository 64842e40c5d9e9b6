use crate::config::{parse_list, require, Format, RunConfig, Units};
use crate::emit::{fmt_num, Cell, Table};
use crate::state::{load_state, write_matrix_file};
use anyhow::{anyhow, bail, Context, Result};
use cxtherm::cxent::{cx_entropy, HeuristicConfig, Solver, Variant};
use cxtherm::entropy::{hyp_entropy, von_neumann};
use cxtherm::experiments::{
    continuity_trial, decoupling_probe, decoupling_simulate, entanglement_bound_check, ising_quench, transition_scan,
    GateSource, InitialState, IsingSpec,
};
use cxtherm::gates::{parse_gate_set, Connectivity, GateSet};
use cxtherm::quantum::{random_density, RegisterOperator};
use cxtherm::rng::task_rng;
use cxtherm::selfcheck::property_suite;
use cxtherm::thermo::{compression_search, erasure_search, gibbs_preserving_set, ThermalModel};
use cxtherm::{DensityOperator, QubitRegister};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::LN_2;

/// Marker for a finished run whose checks did not hold.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

/// Marker for a chain-rule violation found by the probe.
#[derive(Debug)]
pub struct ConjectureViolation(pub usize);

impl std::fmt::Display for ConjectureViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} candidate counterexample(s) found", self.0)
    }
}

impl std::error::Error for ConjectureViolation {}

/// Everything a command prints or writes.
pub struct Report {
    pub stdout: String,
    pub table: Table,
    pub failure: Option<anyhow::Error>,
}

fn connectivity(cfg: &RunConfig, default: Connectivity) -> Result<Connectivity> {
    Ok(match cfg.connectivity.as_deref() {
        None => default,
        Some("all") => Connectivity::AllToAll,
        Some("chain") => Connectivity::Chain,
        Some(other) => bail!("unknown connectivity `{other}` (all | chain)"),
    })
}

fn gate_set(cfg: &RunConfig, default: Connectivity) -> Result<GateSet> {
    let conn = connectivity(cfg, default)?;
    match &cfg.gates {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut g = parse_gate_set(&text)?;
            if cfg.connectivity.is_some() {
                g.connectivity = conn;
            }
            Ok(g)
        }
        None => Ok(GateSet::default_finite(conn)),
    }
}

fn state(cfg: &RunConfig) -> Result<DensityOperator> {
    let spec = cfg.state.as_deref().ok_or_else(|| anyhow!("missing --state"))?;
    let rho = load_state(spec, cfg.n)?;
    if let Some(path) = &cfg.save_state {
        write_matrix_file(&rho, path)?;
    }
    Ok(rho)
}

fn variant(cfg: &RunConfig) -> Result<Variant> {
    Ok(match cfg.variant.as_deref().unwrap_or("normalized") {
        "normalized" => Variant::Normalized,
        "reduced" => Variant::Reduced,
        other => bail!("unknown variant `{other}`"),
    })
}

fn solver(cfg: &RunConfig) -> Result<Solver> {
    Ok(match cfg.solver.as_deref().unwrap_or("auto") {
        "auto" => Solver::Auto,
        "enumeration" => Solver::Enumeration,
        "heuristic" => Solver::Heuristic(HeuristicConfig { seed: cfg.seed(), ..HeuristicConfig::default() }),
        other => bail!("unknown solver `{other}`"),
    })
}

fn eta_in_range(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        bail!("eta = {eta} must lie in (0, 1]");
    }
    Ok(eta)
}

fn show(x: f64, units: Units) -> String {
    Cell::Entropy(x).render(units)
}

fn report(stdout: String, table: Table) -> Result<Report> {
    Ok(Report { stdout, table, failure: None })
}

pub fn entropy(cfg: &RunConfig, hash: String) -> Result<Report> {
    let rho = state(cfg)?;
    let eta = eta_in_range(cfg.eta_or(1.0))?;
    let vn = von_neumann(&rho);
    let hyp = hyp_entropy(&rho, eta)?.value;
    let mut t = Table::new("entropy", cfg.seed(), hash, &["n", "eta", "von_neumann", "hyp_entropy"]);
    t.push(vec![Cell::Int(rho.n() as i64), Cell::Num(eta), Cell::Entropy(vn), Cell::Entropy(hyp)]);
    let u = cfg.units();
    report(format!("von_neumann {}\nhyp_entropy {}\n", show(vn, u), show(hyp, u)), t)
}

pub fn cx_entropy_cmd(cfg: &RunConfig, hash: String) -> Result<Report> {
    let rho = state(cfg)?;
    let g = gate_set(cfg, Connectivity::AllToAll)?;
    let r = cfg.r.unwrap_or(1);
    let eta = eta_in_range(cfg.eta_or(1.0))?;
    let est = cx_entropy(&rho, &g, r, eta, variant(cfg)?, solver(cfg)?)?;
    let mut t = Table::new(
        "cx-entropy",
        cfg.seed(),
        hash,
        &["n", "r", "eta", "value", "certainty", "solver", "witness"],
    );
    t.push(vec![
        Cell::Int(rho.n() as i64),
        Cell::Int(r as i64),
        Cell::Num(eta),
        Cell::Entropy(est.value),
        Cell::Text(format!("{:?}", est.certainty)),
        Cell::Text(format!("{:?}", est.solver)),
        Cell::Text(est.witness_circuit().join(" ")),
    ]);
    report(format!("{}\n", show(est.value, cfg.units())), t)
}

fn model(cfg: &RunConfig, n: usize) -> Result<ThermalModel> {
    match &cfg.energies {
        None => Ok(ThermalModel::degenerate(n)),
        Some(text) => {
            let e: Vec<f64> = parse_list(text, "energy")?;
            if e.len() != n {
                bail!("{} energies for {n} qubits", e.len());
            }
            Ok(ThermalModel::new(e)?)
        }
    }
}

pub fn erasure(cfg: &RunConfig, hash: String) -> Result<Report> {
    let rho = state(cfg)?;
    let n = rho.n();
    let m = model(cfg, n)?;
    let degenerate = m.energies.iter().all(|&e| e == 0.0);
    let t_set = if degenerate || cfg.gates.is_some() {
        gate_set(cfg, Connectivity::AllToAll)?
    } else {
        gibbs_preserving_set(&m, connectivity(cfg, Connectivity::AllToAll)?)?
    };
    let r = cfg.r.unwrap_or(0);
    let eta = eta_in_range(cfg.eta_or(1.0))?;
    let found = erasure_search(&rho, &m, &t_set, r, eta)?;
    let steps = found.protocol.to_string().lines().collect::<Vec<_>>().join("; ");
    let mut t = Table::new("erasure", cfg.seed(), hash, &["n", "r", "eta", "beta_work", "success", "protocol"]);
    t.push(vec![
        Cell::Int(n as i64),
        Cell::Int(r as i64),
        Cell::Num(eta),
        Cell::Entropy(found.beta_work),
        Cell::Num(found.success),
        Cell::Text(steps),
    ]);
    report(format!("{}\n{}", show(found.beta_work, cfg.units()), found.protocol), t)
}

pub fn compress(cfg: &RunConfig, hash: String) -> Result<Report> {
    let rho = state(cfg)?;
    let g = gate_set(cfg, Connectivity::AllToAll)?;
    let r = cfg.r.unwrap_or(1);
    let eps = require(cfg.eps, "eps")?;
    let c = compression_search(&rho, &g, r, eps)?;
    let kept = c.kept.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
    let circuit = c.circuit.iter().map(|p| p.label()).collect::<Vec<_>>().join(" ");
    let mut t = Table::new("compress", cfg.seed(), hash, &["n", "r", "eps", "m", "kept", "fidelity", "circuit"]);
    t.push(vec![
        Cell::Int(rho.n() as i64),
        Cell::Int(r as i64),
        Cell::Num(eps),
        Cell::Int(c.m as i64),
        Cell::Text(kept),
        Cell::Num(c.fidelity),
        Cell::Text(circuit),
    ]);
    report(format!("{}\n", c.m), t)
}

pub fn transition(cfg: &RunConfig, hash: String) -> Result<Report> {
    let n = cfg.n.unwrap_or(3);
    let depths: Vec<usize> = parse_list(cfg.depths.as_deref().unwrap_or("0,1,2,50,100"), "depth")?;
    let r = cfg.r.unwrap_or(2);
    let eta = eta_in_range(cfg.eta_or(1.0))?;
    let samples = cfg.samples.unwrap_or(20);
    let g = gate_set(cfg, Connectivity::Chain)?.adjoint_closed();
    let rows = transition_scan(n, &depths, r, eta, &g, samples, cfg.seed())?;
    let mut t = Table::new(
        "transition",
        cfg.seed(),
        hash,
        &["depth", "gates", "samples", "certified_zero", "mean_h", "min_h", "max_h", "high_fraction"],
    );
    let mut out = String::new();
    for row in rows {
        out += &format!(
            "depth {} gates {} certified_zero {} min_h {} high_fraction {}\n",
            row.depth,
            row.gates,
            fmt_num(row.certified_zero),
            show(row.min_h, cfg.units()),
            fmt_num(row.high_fraction)
        );
        t.push(vec![
            Cell::Int(row.depth as i64),
            Cell::Int(row.gates as i64),
            Cell::Int(row.samples as i64),
            Cell::Num(row.certified_zero),
            Cell::Entropy(row.mean_h),
            Cell::Entropy(row.min_h),
            Cell::Entropy(row.max_h),
            Cell::Num(row.high_fraction),
        ]);
    }
    report(out, t)
}

fn gate_source(cfg: &RunConfig) -> Result<GateSource> {
    let text = cfg.source.as_deref().unwrap_or("haar");
    if text == "haar" {
        return Ok(GateSource::HaarSU4);
    }
    if text == "finite" {
        return Ok(GateSource::Finite(gate_set(cfg, Connectivity::Chain)?));
    }
    if let Some(scale) = text.strip_prefix("near:") {
        return Ok(GateSource::NearIdentity(scale.parse().map_err(|_| anyhow!("bad scale `{scale}`"))?));
    }
    bail!("unknown gate source `{text}` (haar | finite | near:<scale>)")
}

pub fn entangle(cfg: &RunConfig, hash: String) -> Result<Report> {
    let seed = cfg.seed();
    match cfg.mode.as_deref().unwrap_or("continuity") {
        "continuity" => {
            let n = cfg.n.unwrap_or(4);
            let trials = cfg.trials.unwrap_or(1000);
            let rep = continuity_trial(n, trials, seed, &gate_source(cfg)?)?;
            let coarse = 8.0 * LN_2 / (n - 1) as f64;
            let mut t = Table::new(
                "entangle-continuity",
                seed,
                hash,
                &["n", "trials", "max_delta", "coarse_bound", "coarse_violations", "refined_violations", "max_ratio"],
            );
            t.push(vec![
                Cell::Int(n as i64),
                Cell::Int(trials as i64),
                Cell::Entropy(rep.max_delta),
                Cell::Entropy(coarse),
                Cell::Int(rep.coarse_violations as i64),
                Cell::Int(rep.refined_violations as i64),
                Cell::Num(rep.max_ratio),
            ]);
            let bad = rep.coarse_violations + rep.refined_violations;
            let stdout = format!(
                "max_delta {} coarse_violations {} refined_violations {}\n",
                show(rep.max_delta, cfg.units()),
                rep.coarse_violations,
                rep.refined_violations
            );
            let failure = (bad > 0).then(|| anyhow::Error::new(CheckFailed(format!("{bad} continuity violations"))));
            Ok(Report { stdout, table: t, failure })
        }
        "bound" => {
            let n = cfg.n.unwrap_or(3);
            let trials = cfg.trials.unwrap_or(100);
            let r = cfg.r.unwrap_or(0);
            let eta = eta_in_range(cfg.eta_or(0.9))?;
            let g = gate_set(cfg, Connectivity::Chain)?;
            let register = QubitRegister::new(n)?;
            let d = register.dim();
            let rows: Vec<cxtherm::Result<_>> = (0..trials)
                .into_par_iter()
                .map(|k| {
                    let mut rng = task_rng(seed, k as u64);
                    let rank = rng.random_range(1..=d);
                    let rho = DensityOperator::new(register.clone(), random_density(d, rank, &mut rng)?)?;
                    entanglement_bound_check(&rho, &g, r, eta)
                })
                .collect();
            let mut t = Table::new("entangle-bound", seed, hash, &["trial", "lhs", "rhs", "slack"]);
            let mut min_slack = f64::INFINITY;
            for (k, row) in rows.into_iter().enumerate() {
                let b = row?;
                min_slack = min_slack.min(b.slack);
                t.push(vec![Cell::Int(k as i64), Cell::Entropy(b.lhs), Cell::Entropy(b.rhs), Cell::Entropy(b.slack)]);
            }
            let failure =
                (min_slack < -1e-9).then(|| anyhow::Error::new(CheckFailed(format!("min slack {min_slack}"))));
            Ok(Report { stdout: format!("min_slack {}\n", show(min_slack, cfg.units())), table: t, failure })
        }
        other => bail!("unknown mode `{other}` (continuity | bound)"),
    }
}

pub fn quench(cfg: &RunConfig, hash: String) -> Result<Report> {
    let initial = match cfg.initial.as_deref().unwrap_or("ones") {
        "ones" => InitialState::Ones,
        "plus" => InitialState::Plus,
        other => bail!("unknown initial state `{other}` (ones | plus)"),
    };
    let spec = IsingSpec {
        n: cfg.n.unwrap_or(6),
        coupling: cfg.coupling.unwrap_or(1.0),
        field: cfg.field.unwrap_or(1.0),
        periodic: cfg.periodic.unwrap_or(true),
        initial,
    };
    let tmax = cfg.tmax.unwrap_or(3.0);
    let steps = cfg.steps.unwrap_or(30).max(1);
    let times: Vec<f64> = (0..=steps).map(|k| tmax * k as f64 / steps as f64).collect();
    let trace = ising_quench(&spec, &times)?;
    let mut t = Table::new("quench", cfg.seed(), hash, &["time", "entanglement", "derivative", "converged", "bound"]);
    for k in 0..times.len() {
        t.push(vec![
            Cell::Num(trace.times[k]),
            Cell::Entropy(trace.entanglement[k]),
            Cell::Entropy(trace.derivative[k]),
            Cell::Bool(trace.converged[k]),
            Cell::Entropy(trace.bound),
        ]);
    }
    let max_rate = trace.derivative.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let unconverged = trace.converged.iter().filter(|c| !**c).count();
    if unconverged > 0 {
        eprintln!("warning: derivative did not settle at {unconverged} time(s); consider a finer grid");
    }
    let stdout = format!(
        "max_rate {} bound {} violations {}\n",
        show(max_rate, cfg.units()),
        show(trace.bound, cfg.units()),
        trace.violations
    );
    let failure = (trace.violations > 0)
        .then(|| anyhow::Error::new(CheckFailed(format!("{} rate-bound violations", trace.violations))));
    Ok(Report { stdout, table: t, failure })
}

pub fn decouple(cfg: &RunConfig, hash: String) -> Result<Report> {
    let na = cfg.na.unwrap_or(1);
    let nr = cfg.nr.unwrap_or(1);
    let spec = cfg.state.as_deref().ok_or_else(|| anyhow!("missing --state"))?;
    let rho = load_state(spec, Some(na + nr))?;
    let g = gate_set(cfg, Connectivity::AllToAll)?;
    let (r0, r1) = (cfg.r0.unwrap_or(0), cfg.r1.unwrap_or(2));
    let k = cfg.k.unwrap_or(0);
    let eta = eta_in_range(cfg.eta_or(1.0))?;
    let delta = require(cfg.delta, "delta")?;
    let out = decoupling_simulate(rho.matrix(), na, nr, &g, r0, r1, k, eta, delta, cfg.seed())?;
    let mut t = Table::new(
        "decouple",
        cfg.seed(),
        hash,
        &["k", "success", "d_value", "threshold", "bound_k", "h_conditional", "conditional_on_conjecture", "consistent", "scrambler"],
    );
    t.push(vec![
        Cell::Int(k as i64),
        Cell::Bool(out.success),
        Cell::Entropy(out.d_value),
        Cell::Entropy(out.threshold),
        Cell::Num(out.bound_k),
        Cell::Entropy(out.h_conditional),
        Cell::Bool(out.conditional_on_conjecture),
        Cell::Bool(out.consistent),
        Cell::Text(out.scrambler.join(" ")),
    ]);
    let stdout = format!(
        "success {} d_value {} threshold {} bound_k {} (conditional on the chain-rule conjecture)\n",
        out.success,
        show(out.d_value, cfg.units()),
        show(out.threshold, cfg.units()),
        fmt_num(out.bound_k)
    );
    report(stdout, t)
}

pub fn probe(cfg: &RunConfig, hash: String) -> Result<Report> {
    let (na, nb, nr) = (cfg.na.unwrap_or(1), cfg.nb.unwrap_or(1), cfg.nr.unwrap_or(1));
    let g = gate_set(cfg, Connectivity::AllToAll)?;
    let r = cfg.r.unwrap_or(1);
    let eta = eta_in_range(cfg.eta_or(0.9))?;
    let trials = cfg.trials.unwrap_or(500);
    let seed = cfg.seed();
    let rep = decoupling_probe(na, nb, nr, &g, r, eta, trials, seed)?;
    let mut t = Table::new("probe-conjecture", seed, hash, &["trial", "slack"]);
    for (k, s) in rep.slacks.iter().enumerate() {
        t.push(vec![Cell::Int(k as i64), Cell::Entropy(*s)]);
    }
    let mut stdout = format!(
        "min_slack {} at trial {} vn_min_slack {} counterexamples {}\n",
        show(rep.min_slack, cfg.units()),
        rep.min_trial,
        show(rep.vn_min_slack, cfg.units()),
        rep.counterexamples.len()
    );
    let mut failure = None;
    if !rep.counterexamples.is_empty() {
        let text = serde_json::to_string_pretty(&rep.counterexamples)? + "\n";
        let dir = cfg.out_dir().map(|p| p.to_path_buf()).unwrap_or_else(|| ".".into());
        std::fs::create_dir_all(&dir)?;
        let path = dir.join(format!("probe-conjecture-{seed}-counterexamples.json"));
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        stdout += &format!("counterexamples written to {}\n", path.display());
        failure = Some(anyhow::Error::new(ConjectureViolation(rep.counterexamples.len())));
    }
    Ok(Report { stdout, table: t, failure })
}

pub fn selftest(cfg: &RunConfig, hash: String) -> Result<Report> {
    let instances = cfg.instances.unwrap_or(20);
    let reports = property_suite(instances, cfg.seed())?;
    let mut t = Table::new("selftest", cfg.seed(), hash, &["property", "instances", "violations", "worst_margin"]);
    let mut out = String::new();
    let mut failed = Vec::new();
    for p in &reports {
        out += &format!("{} {} ({} instances)\n", if p.passed() { "PASS" } else { "FAIL" }, p.name, p.instances);
        if !p.passed() {
            failed.push(p.name.clone());
        }
        t.push(vec![
            Cell::Text(p.name.clone()),
            Cell::Int(p.instances as i64),
            Cell::Int(p.violations as i64),
            Cell::Num(p.worst_margin),
        ]);
    }
    let failure = (!failed.is_empty()).then(|| anyhow::Error::new(CheckFailed(failed.join(", "))));
    Ok(Report { stdout: out, table: t, failure })
}

/// Write the table if an output directory was given; returns the file path.
pub fn persist(cfg: &RunConfig, table: &Table) -> Result<Option<std::path::PathBuf>> {
    match cfg.out_dir() {
        Some(dir) => Ok(Some(table.write(dir, cfg.format.unwrap_or(Format::Csv), cfg.units())?)),
        None => Ok(None),
    }
}
