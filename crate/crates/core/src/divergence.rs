//! Distances, divergences and entropies; every logarithm is base 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, trace_norm, ComplexMatrix, Spectrum};
use crate::pmf::{plogp_sum, JointPmf, Var};
use crate::states::{CQState, DensityMatrix};

/// Relative support cutoff applied to σ when forming its powers.
pub const SUPPORT_TOL: f64 = 1e-10;
/// Weight of ρ outside supp σ tolerated before the divergence is declared infinite.
const LEAK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    #[serde(with = "crate::serde_ext::f64_or_inf")]
    pub value: f64,
    pub support_violation: bool,
}

impl DivergenceValue {
    pub fn finite(value: f64) -> Self {
        DivergenceValue {
            value,
            support_violation: false,
        }
    }

    pub fn infinite() -> Self {
        DivergenceValue {
            value: f64::INFINITY,
            support_violation: true,
        }
    }

    pub fn is_finite(&self) -> bool {
        !self.support_violation
    }

    /// The finite value, or `SupportViolation` naming the quantity.
    pub fn require(&self, what: &str) -> Result<f64> {
        if self.support_violation {
            Err(Error::SupportViolation(what.to_string()))
        } else {
            Ok(self.value)
        }
    }
}

fn same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!(
            "states of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

/// ‖ρ − σ‖₁, in [0, 2].
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    trace_norm(&(rho.matrix() - sigma.matrix()))
}

/// F = tr √(√ρ σ √ρ), formed on the support of the lower-rank argument.
///
/// With M = V_r diag(√λ_r) over the r retained eigenpairs, √ρ σ √ρ and M† σ M share
/// their nonzero spectrum; the r×r form keeps rounding noise in the discarded kernel
/// from surfacing as √ε terms.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let (sr, ss) = (rho.spectrum()?, sigma.spectrum()?);
    let rank = |sp: &Spectrum| {
        let cut = sp.support_cutoff(SUPPORT_TOL);
        sp.eigenvalues.iter().filter(|&&l| l > cut).count()
    };
    let (outer, other) = if rank(&ss) < rank(&sr) {
        (&ss, rho)
    } else {
        (&sr, sigma)
    };
    let cut = outer.support_cutoff(SUPPORT_TOL);
    let kept: Vec<usize> = (0..outer.dim())
        .filter(|&k| outer.eigenvalues[k] > cut)
        .collect();
    let d = outer.dim();
    let mut m = ComplexMatrix::zeros(d, kept.len());
    for (c, &k) in kept.iter().enumerate() {
        let w = outer.eigenvalues[k].sqrt();
        for i in 0..d {
            m[(i, c)] = outer.eigenvectors[(i, k)] * w;
        }
    }
    let inner = m
        .adjoint()
        .matmul(&other.matrix().matmul(&m))
        .hermitian_part();
    let f: f64 = eig_hermitian(&inner)?
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

fn purified_from_fidelity(f: f64) -> f64 {
    (1.0 - f * f).max(0.0).sqrt()
}

/// P = √(1 − F²).
pub fn purified_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(purified_from_fidelity(fidelity(rho, sigma)?))
}

/// Weight of ρ outside the support of σ, and the support cutoff used.
fn support_leak(rho: &DensityMatrix, sigma_sp: &Spectrum, rel_tol: f64) -> (f64, f64) {
    let cutoff = sigma_sp.support_cutoff(rel_tol);
    let proj = sigma_sp.projector_where(|l| l > cutoff);
    let inside = proj.trace_product(rho.matrix()).re;
    (1.0 - inside, cutoff)
}

/// D(ρ‖σ) = tr ρ (log ρ − log σ).
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceValue> {
    relative_entropy_tol(rho, sigma, SUPPORT_TOL)
}

pub fn relative_entropy_tol(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    rel_tol: f64,
) -> Result<DivergenceValue> {
    same_dim(rho, sigma)?;
    let ssp = sigma.spectrum()?;
    let (leak, cutoff) = support_leak(rho, &ssp, rel_tol);
    if leak > LEAK_TOL {
        return Ok(DivergenceValue::infinite());
    }
    let neg_entropy = -von_neumann_entropy(rho)?;
    let mut cross = 0.0;
    for (j, &mu) in ssp.eigenvalues.iter().enumerate() {
        if mu > cutoff {
            let z = ssp.eigenvector(j);
            let w = expectation(rho.matrix(), &z);
            cross += w * mu.log2();
        }
    }
    Ok(DivergenceValue::finite(neg_entropy - cross))
}

fn expectation(m: &ComplexMatrix, z: &[num_complex::Complex64]) -> f64 {
    let n = z.len();
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += z[i].conj() * m[(i, j)] * z[j];
        }
    }
    acc.re
}

/// D̄_order(ρ‖σ) with order = 1 + α, α ∈ (−1, 0) ∪ (0, ∞).
pub fn sandwiched_renyi(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    order: f64,
) -> Result<DivergenceValue> {
    sandwiched_renyi_tol(rho, sigma, order, SUPPORT_TOL)
}

pub fn sandwiched_renyi_tol(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    order: f64,
    rel_tol: f64,
) -> Result<DivergenceValue> {
    same_dim(rho, sigma)?;
    let alpha = order - 1.0;
    if !order.is_finite() || alpha <= -1.0 || alpha == 0.0 {
        return Err(Error::OrderOutOfRange(order));
    }
    let ssp = sigma.spectrum()?;
    let (leak, cutoff) = support_leak(rho, &ssp, rel_tol);
    if alpha > 0.0 && leak > LEAK_TOL {
        return Ok(DivergenceValue::infinite());
    }
    let s = -alpha / (2.0 * (1.0 + alpha));
    let weights: Vec<f64> = ssp
        .eigenvalues
        .iter()
        .map(|&l| if l > cutoff { l.powf(s) } else { 0.0 })
        .collect();
    let sigma_pow = ssp.compose(&weights);
    let x = rho.matrix().conjugate_by(&sigma_pow).hermitian_part();
    let xs = eig_hermitian(&x)?;
    let floor = 1e-300_f64.max(xs.max_eigenvalue() * 1e-15);
    let q: f64 = xs
        .eigenvalues
        .iter()
        .filter(|&&l| l > floor)
        .map(|&l| l.powf(1.0 + alpha))
        .sum();
    if !(q > 0.0) {
        return Ok(DivergenceValue::infinite());
    }
    Ok(DivergenceValue::finite(q.log2() / alpha))
}

/// S(ρ) = −tr ρ log ρ.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let sp = rho.spectrum()?;
    Ok(plogp_sum(sp.eigenvalues.iter().copied()).max(0.0))
}

/// I(U;X) = S(ρ_X) − Σ_u p(u) S(ρ_{X|u}).
pub fn holevo_mutual_info(cq: &CQState) -> Result<f64> {
    let mut cond = 0.0;
    for (p, c) in cq.probs().iter().zip(cq.conditionals()) {
        if *p > 0.0 {
            cond += p * von_neumann_entropy(c)?;
        }
    }
    Ok((von_neumann_entropy(&cq.average())? - cond).max(0.0))
}

/// Entropic terms of the classical rate regions, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTerms {
    pub i_ub_given_s: f64,
    pub i_ue_given_s: f64,
    pub h_s_given_e: f64,
    pub h_s: f64,
    pub i_ub_given_es: f64,
    pub i_ub: f64,
    pub i_ue: f64,
    pub i_us: f64,
}

const CHAIN_TOL: f64 = 1e-9;

/// Terms from a joint table containing U, S, B and E.
pub fn classical_info_terms(joint: &JointPmf) -> Result<ClassicalTerms> {
    use Var::*;
    let t = ClassicalTerms {
        i_ub_given_s: joint.mutual_info(&[U], &[B], &[S])?,
        i_ue_given_s: joint.mutual_info(&[U], &[E], &[S])?,
        h_s_given_e: joint.conditional_entropy(&[S], &[E])?,
        h_s: joint.entropy(&[S])?,
        i_ub_given_es: joint.mutual_info(&[U], &[B], &[E, S])?,
        i_ub: joint.mutual_info(&[U], &[B], &[])?,
        i_ue: joint.mutual_info(&[U], &[E], &[])?,
        i_us: joint.mutual_info(&[U], &[S], &[])?,
    };
    let i_ube_given_s = joint.mutual_info(&[U], &[B, E], &[S])?;
    let gap = (i_ube_given_s - t.i_ue_given_s - t.i_ub_given_es).abs();
    if gap > CHAIN_TOL {
        return Err(Error::NotADistribution(format!(
            "chain rule violated by {gap:.3e}"
        )));
    }
    Ok(t)
}

/// D̄_order(ρ_UX ‖ ρ_U ⊗ ρ_X) evaluated block by block over the labels.
///
/// Both operators are block diagonal in U and the p_u factors cancel, so
/// 2^{α D̄} = Σ_u p_u 2^{α D̄(ρ_{X|u} ‖ ρ_X)}.
pub fn cq_sandwiched_renyi(cq: &CQState, order: f64) -> Result<DivergenceValue> {
    let alpha = order - 1.0;
    if !order.is_finite() || alpha <= -1.0 || alpha == 0.0 {
        return Err(Error::OrderOutOfRange(order));
    }
    let avg = cq.average();
    let mut q = 0.0;
    for (&p, c) in cq.probs().iter().zip(cq.conditionals()) {
        if p == 0.0 {
            continue;
        }
        let d = sandwiched_renyi(c, &avg, order)?;
        if d.support_violation {
            if alpha > 0.0 {
                return Ok(DivergenceValue::infinite());
            }
            continue;
        }
        q += p * (alpha * d.value).exp2();
    }
    if !(q > 0.0) {
        return Ok(DivergenceValue::infinite());
    }
    Ok(DivergenceValue::finite(q.log2() / alpha))
}
