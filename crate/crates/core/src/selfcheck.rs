//! Randomized invariant suite for the entropy solvers.
//!
//! Each property draws its instances from per-instance ChaCha streams, so a
//! report depends only on `(instances, seed)`.

use crate::cxent::{
    conditional_cx_entropy, cx_entropy, cx_relative_entropy_matrix, distinguishability_beta, ConditionalSpec, Solver,
    Variant,
};
use crate::entropy::hyp_relative_entropy_matrix;
use crate::error::Result;
use crate::gates::{apply_dense, dense_from_matrix, dense_to_matrix, Connectivity, GateSet};
use crate::quantum::{
    c, hermitian_eig, kron, partial_trace_matrix, random_density, CMatrix, DensityOperator, QubitRegister,
    RegisterOperator,
};
use crate::rng::{child_seed, task_rng};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Tolerance for every inequality in the suite.
pub const PROPERTY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    /// Smallest margin seen; negative beyond tolerance means a violation.
    pub worst_margin: f64,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

type Check = fn(&mut ChaCha8Rng) -> Result<f64>;

fn run(name: &str, instances: usize, seed: u64, check: Check) -> Result<PropertyReport> {
    let margins: Vec<Result<f64>> =
        (0..instances).into_par_iter().map(|k| check(&mut task_rng(seed, k as u64))).collect();
    let mut report = PropertyReport { name: name.into(), instances, violations: 0, worst_margin: f64::INFINITY };
    for m in margins {
        let m = m?;
        report.worst_margin = report.worst_margin.min(m);
        if m < -PROPERTY_TOL {
            report.violations += 1;
        }
    }
    Ok(report)
}

fn all_to_all() -> GateSet {
    GateSet::default_finite(Connectivity::AllToAll)
}

fn state(n: usize, rng: &mut ChaCha8Rng) -> Result<DensityOperator> {
    let d = 1usize << n;
    let rank = rng.random_range(1..=d);
    DensityOperator::new(QubitRegister::new(n)?, random_density(d, rank, rng)?)
}

fn eta(rng: &mut ChaCha8Rng) -> f64 {
    // Mix in η = 1 so the boundary case is exercised.
    if rng.random_bool(0.2) {
        1.0
    } else {
        rng.random_range(0.5..1.0)
    }
}

fn h(rho: &DensityOperator, g: &GateSet, r: usize, eta: f64) -> Result<f64> {
    Ok(cx_entropy(rho, g, r, eta, Variant::Normalized, Solver::Enumeration)?.value)
}

fn monotone_r(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=3);
    let rho = state(n, rng)?;
    let (r, e) = (rng.random_range(0..=1), eta(rng));
    let g = all_to_all();
    Ok(h(&rho, &g, r, e)? - h(&rho, &g, r + 1, e)?)
}

fn monotone_eta(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=3);
    let rho = state(n, rng)?;
    let r = rng.random_range(0..=2);
    let (a, b) = (eta(rng), eta(rng));
    let g = all_to_all();
    Ok(h(&rho, &g, r, a.max(b))? - h(&rho, &g, r, a.min(b))?)
}

fn subadditivity(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n1 = rng.random_range(1..=2);
    let (s1, s2) = (state(n1, rng)?, state(1, rng)?);
    let (r1, r2) = (rng.random_range(0..=1), rng.random_range(0..=1));
    let (e1, e2) = (eta(rng), eta(rng));
    let g = all_to_all();
    let joint = DensityOperator::new(QubitRegister::new(n1 + 1)?, kron(s1.matrix(), s2.matrix()))?;
    Ok(h(&s1, &g, r1, e1)? + h(&s2, &g, r2, e2)? - h(&joint, &g, r1 + r2, e1 * e2)?)
}

fn partial_trace_bound(rng: &mut ChaCha8Rng) -> Result<f64> {
    let rho = state(3, rng)?;
    let (r, e) = (rng.random_range(0..=2), eta(rng));
    let g = all_to_all();
    let reduced = DensityOperator::new(QubitRegister::new(2)?, partial_trace_matrix(rho.matrix(), 3, &[0, 1]))?;
    Ok(h(&reduced, &g, r, e)? + std::f64::consts::LN_2 - h(&rho, &g, r, e)?)
}

fn unitary_prerotation(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=3);
    let rho = state(n, rng)?;
    let (r, e) = (rng.random_range(0..=1), eta(rng));
    let g = all_to_all().adjoint_closed();
    let placements = g.placements(n);
    let depth = rng.random_range(0..=1);
    let mut x = dense_from_matrix(rho.matrix());
    for _ in 0..depth {
        let p = &placements[rng.random_range(0..placements.len())];
        x = apply_dense(&x, n, &p.op, p.edge.0, p.edge.1);
    }
    let rotated = DensityOperator::new(rho.register().clone(), dense_to_matrix(&x, 1 << n))?;
    Ok(h(&rho, &g, r, e)? - h(&rotated, &g, r + depth, e)?)
}

fn variant_gap(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=3);
    let rho = state(n, rng)?;
    let (r, e) = (rng.random_range(0..=2), eta(rng));
    let g = all_to_all();
    let norm = h(&rho, &g, r, e)?;
    let red = cx_entropy(&rho, &g, r, e, Variant::Reduced, Solver::Enumeration)?.value;
    let gap = norm - red;
    Ok(gap.min((1.0 / e).ln() - gap))
}

fn conditional_range_and_ssa(rng: &mut ChaCha8Rng) -> Result<f64> {
    let rho = state(3, rng)?;
    let (r, e) = (rng.random_range(0..=2), eta(rng));
    let g = all_to_all();
    let l = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let a_b = ConditionalSpec { a: l(&["q0"]), b: l(&["q1"]), r, eta: e };
    let a_bc = ConditionalSpec { a: l(&["q0"]), b: l(&["q1", "q2"]), r, eta: e };
    let h_ab = conditional_cx_entropy(&rho, &a_b, &g, Solver::Enumeration)?.value;
    let h_abc = conditional_cx_entropy(&rho, &a_bc, &g, Solver::Enumeration)?.value;
    let ln2 = std::f64::consts::LN_2;
    Ok([h_ab + ln2, ln2 - h_ab, h_abc + ln2, ln2 - h_abc, h_ab - h_abc].into_iter().fold(f64::INFINITY, f64::min))
}

fn beta_bound(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(1..=2);
    let (rho, sigma) = (state(n, rng)?, state(n, rng)?);
    let (r, e) = (rng.random_range(0..=2), eta(rng));
    let g = all_to_all();
    let beta = distinguishability_beta(&rho, &sigma, &g, r)?;
    if beta >= e {
        return Ok(f64::INFINITY);
    }
    let d = cx_relative_entropy_matrix(rho.matrix(), sigma.matrix(), n, &g, r, e, Variant::Normalized, Solver::Enumeration, u64::MAX)?;
    Ok(-(1.0 - beta / e).ln() - d.value)
}

fn product_referee_bound(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.random_range(2..=3);
    let sigma = state(n, rng)?;
    let mut taus = Vec::with_capacity(n);
    for _ in 0..n {
        taus.push(random_density(2, 2, rng)?);
    }
    let tau = taus[1..].iter().fold(taus[0].clone(), |acc, t| kron(&acc, t));
    let e = eta(rng);
    let g = all_to_all();
    let d0 = cx_relative_entropy_matrix(sigma.matrix(), &tau, n, &g, 0, e, Variant::Normalized, Solver::Enumeration, u64::MAX)?;
    let mut sum = 0.0;
    for (j, t) in taus.iter().enumerate() {
        let sj = partial_trace_matrix(sigma.matrix(), n, &[j]);
        sum += hyp_relative_entropy_matrix(&sj, t, e)?.0;
    }
    Ok(sum - d0.value)
}

fn pinching(rng: &mut ChaCha8Rng) -> Result<f64> {
    let (nx, ny) = (rng.random_range(1..=2), rng.random_range(1..=2));
    let n = nx + ny;
    let d = 1usize << n;
    let scale = rng.random_range(0.3..=1.0);
    let rank = rng.random_range(1..=d);
    let rho = random_density(d, rank, rng)? * c(scale, 0.0);
    let dx = 1usize << nx;
    let dy = 1usize << ny;
    let rho_y = partial_trace_matrix(&rho, n, &(nx..n).collect::<Vec<_>>());
    // d_X Σ_j |j⟩⟨j| ⊗ ⟨j|ρ|j⟩ sits between ρ and d_X I ⊗ ρ_Y.
    let mut pinched = CMatrix::zeros(d, d);
    for j in 0..dx {
        for a in 0..dy {
            for b in 0..dy {
                pinched[(j * dy + a, j * dy + b)] = rho[(j * dy + a, j * dy + b)] * c(dx as f64, 0.0);
            }
        }
    }
    let upper = kron(&CMatrix::identity(dx, dx), &rho_y) * c(dx as f64, 0.0);
    let lo = |m: CMatrix| -> Result<f64> { Ok(*hermitian_eig(&m)?.values.last().expect("nonempty")) };
    Ok(lo(&pinched - &rho)?.min(lo(&upper - &pinched)?).min(lo(&upper - &rho)?))
}

/// Every property of the suite with `instances` random draws each.
pub fn property_suite(instances: usize, seed: u64) -> Result<Vec<PropertyReport>> {
    let checks: [(&str, Check); 10] = [
        ("monotone-in-r", monotone_r),
        ("monotone-in-eta", monotone_eta),
        ("tensor-subadditivity", subadditivity),
        ("partial-trace-bound", partial_trace_bound),
        ("unitary-prerotation", unitary_prerotation),
        ("reduced-normalized-gap", variant_gap),
        ("conditional-range-and-ssa", conditional_range_and_ssa),
        ("beta-bound", beta_bound),
        ("product-referee-bound", product_referee_bound),
        ("pinching", pinching),
    ];
    checks
        .iter()
        .enumerate()
        .map(|(k, (name, check))| run(name, instances, child_seed(seed, k as u64), *check))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_clean_and_reproducible() {
        let a = property_suite(6, 42).unwrap();
        assert_eq!(a.len(), 10);
        for p in &a {
            assert!(p.passed(), "{} worst margin {}", p.name, p.worst_margin);
        }
        assert_eq!(a, property_suite(6, 42).unwrap());
    }
}
