//! Standard and one-shot entropies.
//!
//! The hypothesis-testing solver works on the dual
//! `g(μ) = μ − tr[(μρ − Γ)₊]/η`, which is concave with slope
//! `η − tr(Π₊(μ) ρ)`. Bisection on the slope finds the optimal μ; the primal
//! test is the positive projector of `μρ − Γ` plus a fractional share of its
//! kernel, rescaled so that `tr(Qρ) = η`.

use crate::error::{Error, Result};
use crate::quantum::{
    c, hermitian_eig, partial_trace_matrix, psd_sqrt, trace_product, CMatrix, DensityOperator,
    HermitianOperator, PovmEffect, RegisterOperator,
};

const EIG_FLOOR: f64 = 1e-12;

pub fn von_neumann_matrix(rho: &CMatrix) -> Result<f64> {
    let eig = hermitian_eig(rho)?;
    Ok(eig.values.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum())
}

pub fn von_neumann(rho: &DensityOperator) -> f64 {
    von_neumann_matrix(rho.matrix()).expect("density operators are Hermitian")
}

/// tr ρ (log ρ − log Γ); `+∞` when supp ρ ⊄ supp Γ.
pub fn umegaki_relative(rho: &DensityOperator, gamma: &HermitianOperator) -> Result<f64> {
    let g = hermitian_eig(gamma.matrix())?;
    let scale = g.values[0].abs().max(1e-300);
    let mut cross = 0.0;
    for (k, &lam) in g.values.iter().enumerate() {
        let v = g.vectors.column(k);
        let weight = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        if lam <= EIG_FLOOR * scale {
            if weight > 1e-12 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * lam.ln();
    }
    let r = hermitian_eig(rho.matrix())?;
    let self_term: f64 = r.values.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum();
    Ok(self_term - cross)
}

/// H(A) + H(B) − H(AB) for the bipartition `a` versus the rest.
pub fn mutual_information_matrix(rho: &CMatrix, n: usize, a: &[usize]) -> Result<f64> {
    if a.is_empty() || a.len() >= n || a.iter().any(|&q| q >= n) {
        return Err(Error::InvalidParameter(format!("bad bipartition {a:?} of {n} qubits")));
    }
    let b: Vec<usize> = (0..n).filter(|q| !a.contains(q)).collect();
    let ha = von_neumann_matrix(&partial_trace_matrix(rho, n, a))?;
    let hb = von_neumann_matrix(&partial_trace_matrix(rho, n, &b))?;
    let hab = von_neumann_matrix(rho)?;
    Ok(ha + hb - hab)
}

pub fn mutual_information(rho: &DensityOperator, a_labels: &[&str]) -> Result<f64> {
    let mut a = Vec::new();
    for l in a_labels {
        a.push(rho.register().index_of(l)?);
    }
    mutual_information_matrix(rho.matrix(), rho.n(), &a)
}

#[derive(Debug, Clone)]
pub struct HypTestResult {
    /// D_H^η in nats (primal, witnessed by `optimal_effect`).
    pub value: f64,
    pub optimal_effect: PovmEffect,
    pub mu_star: f64,
    pub primal_value: f64,
    pub dual_value: f64,
}

struct Split {
    positive: f64,
    nonnegative: f64,
}

fn split_mass(rho: &CMatrix, gamma: &CMatrix, mu: f64, tol: f64) -> Result<(Split, crate::quantum::Eigen)> {
    let a = rho * c(mu, 0.0) - gamma;
    let eig = hermitian_eig(&a)?;
    let mut s = Split { positive: 0.0, nonnegative: 0.0 };
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam < -tol {
            break;
        }
        let v = eig.vectors.column(k);
        let w = (v.adjoint() * rho * v)[(0, 0)].re;
        s.nonnegative += w;
        if lam > tol {
            s.positive += w;
        }
    }
    Ok((s, eig))
}

/// Dual objective μ − tr[(μρ − Γ)₊]/η.
pub fn hyp_dual_objective(rho: &CMatrix, gamma: &CMatrix, eta: f64, mu: f64) -> Result<f64> {
    let eig = hermitian_eig(&(rho * c(mu, 0.0) - gamma))?;
    let pos: f64 = eig.values.iter().filter(|&&v| v > 0.0).sum();
    Ok(mu - pos / eta)
}

/// Generalized eigenvalues μ with det(μρ − Γ) = 0, available when Γ is invertible.
fn breakpoints(rho: &CMatrix, gamma: &CMatrix) -> Result<Vec<f64>> {
    let g = hermitian_eig(gamma)?;
    let scale = g.values[0].abs().max(1e-300);
    if *g.values.last().unwrap() <= EIG_FLOOR * scale {
        return Ok(Vec::new());
    }
    let inv_sqrt = g.reconstruct_with(&g.values.iter().map(|v| 1.0 / v.sqrt()).collect::<Vec<_>>());
    let w = &inv_sqrt * rho * &inv_sqrt;
    let e = hermitian_eig(&w)?;
    Ok(e.values.iter().filter(|&&v| v > 1e-14).map(|v| 1.0 / v).collect())
}

/// D_H^η(ρ‖Γ) = −log min{ tr(QΓ)/η : 0 ≤ Q ≤ I, tr(Qρ) ≥ η }.
pub fn hyp_relative_entropy_matrix(rho: &CMatrix, gamma: &CMatrix, eta: f64) -> Result<(f64, CMatrix, f64, f64, f64)> {
    let tr = rho.trace().re;
    if !(eta > 0.0 && eta <= tr + 1e-12) {
        return Err(Error::InfeasibleEta { eta, trace: tr });
    }
    let d = rho.nrows();
    let g = hermitian_eig(gamma)?;
    if *g.values.last().unwrap() < -1e-10 {
        return Err(Error::NotPsd(*g.values.last().unwrap()));
    }
    let gscale = g.values[0].abs().max(1e-300);

    // Mass of ρ invisible to Γ: a test supported there has zero type-II error.
    let kernel = g.projector(|v| v <= EIG_FLOOR * gscale);
    let kernel_mass = trace_product(&kernel, rho);
    if kernel_mass >= eta - 1e-14 && kernel_mass > 0.0 {
        let q = kernel * c((eta / kernel_mass).min(1.0), 0.0);
        return Ok((f64::INFINITY, q, f64::INFINITY, f64::INFINITY, f64::INFINITY));
    }

    let rscale = hermitian_eig(rho)?.values[0].max(1e-300);
    let tol_at = |mu: f64| 1e-11 * (mu * rscale + gscale);

    // Acceptance slack so that η = tr ρ survives rounding in the eigenvector weights.
    let need = eta - 1e-12;
    let mut lo = 0.0;
    let mut hi = gscale / rscale;
    loop {
        let (s, _) = split_mass(rho, gamma, hi, tol_at(hi))?;
        if s.nonnegative >= need {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::InvalidParameter("dual bracket diverged".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (s, _) = split_mass(rho, gamma, mid, tol_at(mid))?;
        if s.nonnegative >= need {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu_star = hi;
    let tol = tol_at(mu_star);
    let (_, eig) = split_mass(rho, gamma, mu_star, tol)?;
    let pos = eig.projector(|v| v > tol);
    let zero = eig.projector(|v| v.abs() <= tol);
    let p_pos = trace_product(&pos, rho);
    let p_zero = trace_product(&zero, rho);
    let t = if p_zero > 0.0 { ((eta - p_pos) / p_zero).clamp(0.0, 1.0) } else { 0.0 };
    let mut q = &pos + &zero * c(t, 0.0);
    let mut accept = trace_product(&q, rho);
    if accept < eta * (1.0 - 1e-10) {
        q = &pos + &zero;
        accept = trace_product(&q, rho);
    }
    if accept > eta {
        q *= c(eta / accept, 0.0);
    }
    let primal_ratio = trace_product(&q, gamma) / eta;
    let primal = -primal_ratio.ln();

    let mut best = hyp_dual_objective(rho, gamma, eta, 0.0)?;
    let mut candidates = vec![mu_star, lo];
    candidates.extend(breakpoints(rho, gamma)?);
    for mu in candidates {
        best = best.max(hyp_dual_objective(rho, gamma, eta, mu)?);
    }
    let dual = if best > 0.0 { -best.ln() } else { f64::INFINITY };
    debug_assert_eq!(q.nrows(), d);
    Ok((primal, q, mu_star, primal, dual))
}

pub fn hyp_relative_entropy(rho: &DensityOperator, gamma: &HermitianOperator, eta: f64) -> Result<HypTestResult> {
    if rho.register() != gamma.register() {
        return Err(Error::RegisterMismatch("state and reference".into()));
    }
    let (value, q, mu_star, primal_value, dual_value) =
        hyp_relative_entropy_matrix(rho.matrix(), gamma.matrix(), eta)?;
    let optimal_effect = PovmEffect::new(rho.register().clone(), q)?;
    Ok(HypTestResult { value, optimal_effect, mu_star, primal_value, dual_value })
}

/// H_hyp^η(ρ) = −D_H^η(ρ‖I).
pub fn hyp_entropy(rho: &DensityOperator, eta: f64) -> Result<HypTestResult> {
    let id = HermitianOperator::identity(rho.register().clone());
    let mut r = hyp_relative_entropy(rho, &id, eta)?;
    r.value = -r.value;
    r.primal_value = -r.primal_value;
    r.dual_value = -r.dual_value;
    Ok(r)
}

/// ‖Γ^{-1/2} ρ Γ^{-1/2}‖ when Γ is invertible, otherwise `None`.
pub fn max_relative_ratio(rho: &CMatrix, gamma: &CMatrix) -> Result<Option<f64>> {
    let g = hermitian_eig(gamma)?;
    let scale = g.values[0].abs().max(1e-300);
    if *g.values.last().unwrap() <= EIG_FLOOR * scale {
        return Ok(None);
    }
    let root = psd_sqrt(gamma)?;
    let inv = root.try_inverse().ok_or_else(|| Error::InvalidParameter("singular reference".into()))?;
    let w = &inv * rho * &inv;
    Ok(Some(hermitian_eig(&w)?.values[0]))
}
