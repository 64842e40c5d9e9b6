//! Acceptance gate: thirteen numbered criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line reaches stdout.
//! `cargo test -p cxtherm-cli --test acceptance` runs everything;
//! passing numbers as arguments (e.g. `-- 4 12`) runs a subset.

use anyhow::{anyhow, ensure, Result};
use cxtherm::cxent::{cx_entropy, cx_relative_entropy_matrix, Certainty, Solver, Variant};
use cxtherm::entropy::{hyp_dual_objective, hyp_relative_entropy_matrix};
use cxtherm::experiments::{
    continuity_trial, entanglement_bound_check, ising_quench, transition_scan, verify_counterexample, Counterexample,
    GateSource, InitialState, IsingSpec,
};
use cxtherm::gates::{entangling_power, Connectivity, GateSet};
use cxtherm::quantum::{c, haar_unitary, hermitian_eig, operator_norm, random_density, RegisterOperator};
use cxtherm::rng::task_rng;
use cxtherm::selfcheck::property_suite;
use cxtherm::thermo::{compression_search, erasure_search, gibbs_preserving_set, ThermalModel};
use cxtherm::{CMatrix, DensityOperator, QubitRegister};
use rand::Rng;
use std::f64::consts::{LN_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

fn default_set() -> GateSet {
    GateSet::default_finite(Connectivity::AllToAll)
}

fn random_state(n: usize, seed: u64, k: u64) -> Result<DensityOperator> {
    let mut rng = task_rng(seed, k);
    let d = 1usize << n;
    let rank = rng.random_range(1..=d);
    Ok(DensityOperator::new(QubitRegister::new(n)?, random_density(d, rank, &mut rng)?)?)
}

fn bits(rho: &DensityOperator, r: usize, eta: f64) -> Result<f64> {
    let e = cx_entropy(rho, &default_set(), r, eta, Variant::Normalized, Solver::Enumeration)?;
    ensure!(e.certainty == Certainty::Exact, "enumeration returned a bound");
    Ok(e.value / LN_2)
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<()> {
    ensure!((got - want).abs() <= tol, "{what}: got {got}, want {want}");
    Ok(())
}

fn worked_examples() -> Result<String> {
    let mut checked = 0;
    for n in 1..=4 {
        let zero = DensityOperator::zeros_state(n)?;
        for r in 0..=2 {
            for eta in [0.5, 0.9, 0.999, 1.0] {
                close(bits(&zero, r, eta)?, 0.0, 1e-9, &format!("|0^{n}> r={r} eta={eta}"))?;
                checked += 1;
            }
        }
    }
    let ones = DensityOperator::ones_state(4)?;
    close(bits(&ones, 1, 0.9)?, 2.0, 1e-9, "|1111> r=1")?;
    for r in 2..=3 {
        close(bits(&ones, r, 0.9)?, 0.0, 1e-9, &format!("|1111> r={r}"))?;
    }
    let mixed = DensityOperator::maximally_mixed(3)?;
    for r in 0..=2 {
        close(bits(&mixed, r, 0.9)?, 3.0, 1e-9, &format!("mixed r={r}"))?;
    }
    let ghz = DensityOperator::ghz(4)?;
    for r in 0..=3 {
        close(bits(&ghz, r, 0.999)?, (4 - r) as f64, 1e-9, &format!("GHZ4 r={r}"))?;
    }
    for r in 4..=5 {
        close(bits(&ghz, r, 0.999)?, 0.0, 1e-9, &format!("GHZ4 r={r}"))?;
    }
    checked += 12;
    Ok(format!("{checked} table entries match to 1e-9 bits"))
}

fn erasure_equality() -> Result<String> {
    let g = default_set();
    let model = ThermalModel::degenerate(3);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for k in 0..50u64 {
        let rho = random_state(3, 200, k)?;
        let r = (k % 3) as usize;
        for eta in [0.7, 0.9, 0.999] {
            let w = erasure_search(&rho, &model, &g, r, eta)?.beta_work;
            let h_red = cx_entropy(&rho, &g, r, eta, Variant::Reduced, Solver::Enumeration)?.value;
            let h = cx_entropy(&rho, &g, r, eta, Variant::Normalized, Solver::Enumeration)?.value;
            close(w, h_red, 1e-9, &format!("state {k} r={r} eta={eta}: βW vs reduced entropy"))?;
            ensure!(h - (1.0 / eta).ln() <= w + 1e-9 && w <= h + 1e-9, "state {k}: sandwich fails ({h}, {w})");
            worst = worst.max((w - h_red).abs());
            cases += 1;
        }
    }
    Ok(format!("{cases} cases, max |βW − H_h| = {worst:.2e}"))
}

fn product_hamiltonian() -> Result<String> {
    let model = ThermalModel::new(vec![0.5, 1.0])?;
    let t = gibbs_preserving_set(&model, Connectivity::AllToAll)?;
    let gamma = model.gamma();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for k in 0..25u64 {
        let rho = random_state(2, 300, k)?;
        let eta = [0.7, 0.9, 0.999][(k % 3) as usize];
        for r in 0..=2 {
            let w = erasure_search(&rho, &model, &t, r, eta)?.beta_work;
            let d = cx_relative_entropy_matrix(rho.matrix(), &gamma, 2, &t, r, eta, Variant::Reduced, Solver::Enumeration, 1 << 30)?
                .value;
            close(w, -d, 1e-9, &format!("state {k} r={r}"))?;
            worst = worst.max((w + d).abs());
            cases += 1;
        }
    }
    Ok(format!("{cases} cases, max |βW + D_h| = {worst:.2e}"))
}

fn hypothesis_testing() -> Result<String> {
    let mut worst_gap: f64 = 0.0;
    for k in 0..200u64 {
        let mut rng = task_rng(400, k);
        let d = [2, 4, 8][(k % 3) as usize];
        let rho = random_density(d, rng.random_range(1..=d), &mut rng)?;
        let gamma = random_density(d, d, &mut rng)? * c(rng.random_range(0.5..4.0), 0.0);
        let eta: f64 = rng.random_range(0.05..1.0);
        let (value, q, _, primal, dual) = hyp_relative_entropy_matrix(&rho, &gamma, eta)?;
        close(primal, dual, 1e-8, &format!("instance {k}: primal vs dual"))?;
        worst_gap = worst_gap.max((primal - dual).abs());
        // The returned effect certifies the primal value on its own.
        let eig = hermitian_eig(&q)?;
        ensure!(eig.values[0] <= 1.0 + 1e-10 && *eig.values.last().unwrap() >= -1e-10, "instance {k}: effect not in [0, I]");
        ensure!((&q * &rho).trace().re >= eta - 1e-10, "instance {k}: effect accepts too little");
        close(-((&q * &gamma).trace().re / eta).ln(), value, 1e-9, &format!("instance {k}: effect value"))?;
        // Any dual point bounds the optimum from the other side.
        let mu = rng.random_range(0.0..10.0);
        let lower = hyp_dual_objective(&rho, &gamma, eta, mu)?;
        ensure!(lower <= (-value).exp() + 1e-9, "instance {k}: weak duality fails");

        let mut prev = f64::INFINITY;
        for step in 1..=10 {
            let e = step as f64 / 10.0;
            let v = hyp_relative_entropy_matrix(&rho, &gamma, e)?.0;
            ensure!(v <= prev + 1e-8, "instance {k}: not monotone at eta={e}");
            prev = v;
        }
        let own = hyp_relative_entropy_matrix(&rho, &rho, eta)?.0;
        close(own, 0.0, 1e-10, &format!("instance {k}: D(ρ‖ρ)"))?;
    }
    Ok(format!("200 instances, max primal-dual gap {worst_gap:.2e}"))
}

fn properties() -> Result<String> {
    let reports = property_suite(200, 500)?;
    let failed: Vec<String> =
        reports.iter().filter(|p| !p.passed()).map(|p| format!("{} ({} violations)", p.name, p.violations)).collect();
    ensure!(failed.is_empty(), "failed: {}", failed.join(", "));
    ensure!(reports.iter().all(|p| p.instances >= 200), "too few instances");
    Ok(format!("{} properties × 200 instances, zero violations", reports.len()))
}

fn transition() -> Result<String> {
    let g = GateSet::default_finite(Connectivity::Chain).adjoint_closed();
    let rows = transition_scan(3, &[1, 2, 100], 2, 1.0, &g, 20, 600)?;
    for row in &rows[..2] {
        ensure!(row.gates <= 2, "depth {} has {} gates", row.depth, row.gates);
        ensure!(row.certified_zero == 1.0, "depth {}: certified fraction {}", row.depth, row.certified_zero);
        ensure!(row.max_h.abs() <= 1e-9, "depth {}: H = {}", row.depth, row.max_h);
    }
    let deep = &rows[2];
    ensure!(deep.gates >= 50, "deep circuit has only {} gates", deep.gates);
    ensure!(deep.high_fraction >= 0.9, "deep circuits reach 2 log 2 in only {:.0}%", 100.0 * deep.high_fraction);
    Ok(format!(
        "shallow certified 100%, {} gates: H ≥ 2 log 2 in {:.0}% of 20",
        deep.gates,
        100.0 * deep.high_fraction
    ))
}

fn continuity() -> Result<String> {
    let rep = continuity_trial(4, 1000, 700, &GateSource::HaarSU4)?;
    ensure!(rep.trials == 1000, "ran {} trials", rep.trials);
    ensure!(rep.coarse_violations == 0, "{} coarse violations", rep.coarse_violations);
    ensure!(rep.refined_violations == 0, "{} refined violations", rep.refined_violations);
    Ok(format!("1000 trials, max |ΔE| = {:.4}, max ratio to refined bound {:.4}", rep.max_delta, rep.max_ratio))
}

fn entanglement_bound() -> Result<String> {
    let g = GateSet::default_finite(Connectivity::Chain);
    let mut min_slack = f64::INFINITY;
    for k in 0..100u64 {
        let rho = random_state(3, 800, k)?;
        for r in 0..=1 {
            for eta in [0.9, 0.99] {
                let b = entanglement_bound_check(&rho, &g, r, eta)?;
                ensure!(b.slack >= -1e-9, "state {k} r={r} eta={eta}: slack {}", b.slack);
                min_slack = min_slack.min(b.slack);
            }
        }
    }
    Ok(format!("400 cases, min slack {min_slack:.4}"))
}

fn quench() -> Result<String> {
    let spec = IsingSpec { n: 6, coupling: 1.0, field: 1.0, periodic: true, initial: InitialState::Ones };
    let times: Vec<f64> = (0..=60).map(|i| i as f64 * 0.05).collect();
    let trace = ising_quench(&spec, &times)?;
    let worst = trace.derivative.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    ensure!(trace.violations == 0, "{} violations", trace.violations);
    ensure!(worst <= trace.bound + 1e-6, "rate {worst} above bound {}", trace.bound);
    Ok(format!("61 times in [0, 3], max |dE/dt| = {worst:.4} ≤ {:.2}", trace.bound))
}

fn compression() -> Result<String> {
    let g = default_set();
    let mut rng = task_rng(1000, 0);
    let mut seen = Vec::new();
    for k in 0..50u64 {
        let rho = random_state(3, 1001, k)?;
        let r = rng.random_range(0..=2usize);
        let eps: f64 = rng.random_range(0.01..0.6);
        let m = compression_search(&rho, &g, r, eps)?.m;
        let h = cx_entropy(&rho, &g, r, 1.0 - eps, Variant::Reduced, Solver::Enumeration)?.value / LN_2;
        let rounded = h.round();
        ensure!((h - rounded).abs() < 1e-9, "case {k}: H_h/log 2 = {h} is not an integer");
        ensure!(m as f64 == rounded, "case {k}: m = {m}, H_h/log 2 = {h}");
        seen.push(m);
    }
    seen.sort_unstable();
    seen.dedup();
    Ok(format!("50 cases, integer equality, m values {seen:?}"))
}

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_cxtherm")
}

fn run_cli(args: &[&str], out: &Path, threads: usize) -> Result<(i32, String)> {
    let o = Command::new(binary())
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--threads")
        .arg(threads.to_string())
        .output()?;
    let code = o.status.code().ok_or_else(|| anyhow!("killed by a signal"))?;
    let stdout = String::from_utf8(o.stdout)?.replace(out.to_str().unwrap(), "<out>");
    Ok((code, stdout))
}

fn conjecture_probe() -> Result<String> {
    let dir = tempfile::tempdir()?;
    let (code, stdout) = run_cli(&["probe-conjecture", "--trials", "500", "--seed", "11"], dir.path(), 1)?;
    let min_slack: f64 = stdout
        .split_whitespace()
        .nth(1)
        .ok_or_else(|| anyhow!("no min slack in `{stdout}`"))?
        .parse()?;
    match code {
        0 => {
            ensure!(min_slack >= -1e-8, "exit 0 with min slack {min_slack}");
            Ok(format!("exit 0, 500 trials, min slack {min_slack}"))
        }
        4 => {
            let text = std::fs::read_to_string(dir.path().join("probe-conjecture-11-counterexamples.json"))?;
            let cxs: Vec<Counterexample> = serde_json::from_str(&text)?;
            ensure!(!cxs.is_empty(), "exit 4 without counterexamples");
            for cx in &cxs {
                let slack = verify_counterexample(cx, &default_set())?;
                ensure!(slack < -1e-8, "counterexample does not reproduce (slack {slack})");
                close(slack, cx.slack, 1e-9, "recomputed slack")?;
            }
            Ok(format!("exit 4, {} re-verified counterexamples, min slack {min_slack}", cxs.len()))
        }
        other => Err(anyhow!("unexpected exit code {other}: {stdout}")),
    }
}

/// √(1 − dist(0, W(U))²) with the numerical range W(U) located through
/// its support function: min over unit ψ of Re(e^{−iθ}⟨ψ|U|ψ⟩).
fn numerical_range_distance(u: &CMatrix) -> Result<f64> {
    let support = |theta: f64| -> Result<f64> {
        let rot = u * c(theta.cos(), -theta.sin());
        let h = (&rot + rot.adjoint()) * c(0.5, 0.0);
        Ok(*hermitian_eig(&h)?.values.last().unwrap())
    };
    let grid = 720;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..grid {
        let theta = 2.0 * PI * i as f64 / grid as f64;
        let v = support(theta)?;
        if v > best.0 {
            best = (v, theta);
        }
    }
    if best.0 <= 0.0 {
        return Ok(1.0);
    }
    // Concave where positive: golden-section refinement.
    let step = 2.0 * PI / grid as f64;
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if support(x1)? < support(x2)? {
            a = x1;
        } else {
            b = x2;
        }
    }
    let dist = support(0.5 * (a + b))?.max(best.0).max(0.0);
    Ok((1.0 - dist * dist).max(0.0).sqrt())
}

fn diamond_formula() -> Result<String> {
    let id = CMatrix::identity(4, 4);
    let mut worst: f64 = 0.0;
    for k in 0..100u64 {
        let u = haar_unitary(4, &mut task_rng(1200, k))?;
        let ep = entangling_power(&u)?;
        let norm = operator_norm(&(&u - &id));
        ensure!(ep.diamond_to_identity <= norm + 1e-9, "unitary {k}: {} > ‖U − I‖ = {norm}", ep.diamond_to_identity);
        let direct = numerical_range_distance(&u)?;
        close(ep.diamond_to_identity, direct, 1e-9, &format!("unitary {k}: formula vs numerical range"))?;
        worst = worst.max((ep.diamond_to_identity - direct).abs());
    }
    let mut z_i = CMatrix::identity(4, 4);
    z_i[(2, 2)] = c(-1.0, 0.0);
    z_i[(3, 3)] = c(-1.0, 0.0);
    close(entangling_power(&z_i)?.diamond_to_identity, 1.0, 1e-12, "Z⊗I")?;
    close(entangling_power(&id)?.diamond_to_identity, 0.0, 1e-12, "I")?;
    let phase = &id * c(0.3f64.cos(), 0.3f64.sin());
    close(entangling_power(&phase)?.diamond_to_identity, 0.0, 1e-12, "global phase")?;
    Ok(format!("100 Haar unitaries, max deviation from numerical-range route {worst:.2e}; Z⊗I → 1, I → 0"))
}

type Listing = Vec<(String, Vec<u8>)>;

fn dir_contents(dir: &Path) -> Result<Listing> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        files.push((entry.file_name().to_string_lossy().into_owned(), std::fs::read(entry.path())?));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Result<String> {
    let runs: &[&[&str]] = &[
        &["selftest", "--instances", "4", "--seed", "13"],
        &["transition", "--depths", "0,1,2,12", "--samples", "6", "--seed", "13"],
        &["entangle", "--trials", "40", "--seed", "13"],
        &["entangle", "--mode", "bound", "--trials", "8", "--seed", "13", "--format", "json"],
        &["quench", "--n", "4", "--steps", "8", "--tmax", "1", "--seed", "13"],
        &["decouple", "--state", "haar(5)", "--n", "3", "--na", "2", "--nr", "1", "--r0", "1", "--r1", "2", "--k", "1", "--delta", "0.5", "--seed", "13"],
        &["probe-conjecture", "--trials", "30", "--seed", "13", "--units", "bits"],
    ];
    for args in runs {
        let mut reference: Option<(i32, String, Listing)> = None;
        for threads in [1, 2, 8] {
            let dir = tempfile::tempdir()?;
            let (code, stdout) = run_cli(args, dir.path(), threads)?;
            ensure!(code == 0 || code == 4, "{}: exit {code}", args[0]);
            let files = dir_contents(dir.path())?;
            ensure!(!files.is_empty(), "{}: no output file", args[0]);
            let got = (code, stdout, files);
            match &reference {
                None => reference = Some(got),
                Some(want) => ensure!(*want == got, "{} differs at {threads} threads", args.join(" ")),
            }
        }
    }
    Ok(format!("selftest and {} experiment runs byte-identical at 1, 2, 8 threads", runs.len() - 1))
}

type Check = fn() -> Result<String>;

fn main() {
    let criteria: [(&str, Check); 13] = [
        ("worked-example table", worked_examples),
        ("erasure equals reduced complexity entropy", erasure_equality),
        ("product-Hamiltonian erasure", product_hamiltonian),
        ("hypothesis-testing solver", hypothesis_testing),
        ("property suite", properties),
        ("random-circuit transition", transition),
        ("entanglement continuity", continuity),
        ("entanglement lower bound", entanglement_bound),
        ("Ising quench rate", quench),
        ("data compression", compression),
        ("chain-rule probe", conjecture_probe),
        ("diamond-distance formula", diamond_formula),
        ("thread-count determinism", determinism),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err(anyhow!("panicked")));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {number:2} {name}: {detail} [{secs:.1}s]"),
            Err(e) => {
                failures += 1;
                println!("FAIL criterion {number:2} {name}: {e:#} [{secs:.1}s]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
