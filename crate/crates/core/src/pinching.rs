//! Pinching maps over distinct eigenspaces and the spectral projection {A ≥ B}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix};
use crate::states::{CQState, DensityMatrix, Factor};

/// Relative gap under which neighbouring eigenvalues share an eigenspace.
pub const GROUP_TOL: f64 = 1e-8;
/// Relative slack when deciding λ ≥ 0 in {A ≥ B}.
const SIGN_TOL: f64 = 1e-12;

/// Eigenspace projectors of a Hermitian operator, one per distinct eigenvalue.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PinchingBasis {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<ComplexMatrix>,
}

impl PinchingBasis {
    /// Number of distinct eigenvalues.
    pub fn v(&self) -> usize {
        self.projectors.len()
    }

    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, |p| p.rows())
    }
}

/// Groups the spectrum of a Hermitian matrix; sorted neighbours within
/// `group_tol · max|λ|` of each other are merged.
pub fn hermitian_eigenspaces(m: &ComplexMatrix, group_tol: f64) -> Result<PinchingBasis> {
    let sp = eig_hermitian(m)?;
    let n = sp.dim();
    let scale = sp.eigenvalues.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
    let gap = group_tol * scale;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match groups.last_mut() {
            Some(g) if sp.eigenvalues[i] - sp.eigenvalues[*g.last().unwrap()] <= gap => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for g in &groups {
        eigenvalues.push(g.iter().map(|&i| sp.eigenvalues[i]).sum::<f64>() / g.len() as f64);
        let w: Vec<f64> = (0..n)
            .map(|i| if g.contains(&i) { 1.0 } else { 0.0 })
            .collect();
        projectors.push(sp.compose(&w));
    }
    Ok(PinchingBasis {
        eigenvalues,
        projectors,
    })
}

pub fn distinct_eigenspaces(sigma: &DensityMatrix, group_tol: f64) -> Result<PinchingBasis> {
    hermitian_eigenspaces(sigma.matrix(), group_tol)
}

/// Σ_i P_i m P_i.
pub fn pinch_matrix(m: &ComplexMatrix, basis: &PinchingBasis) -> Result<ComplexMatrix> {
    if m.rows() != basis.dim() || !m.is_square() {
        return Err(Error::DimMismatch(format!(
            "pinching basis of dimension {} applied to {}x{}",
            basis.dim(),
            m.rows(),
            m.cols()
        )));
    }
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for p in &basis.projectors {
        out = &out + &p.matmul(m).matmul(p);
    }
    Ok(out.hermitian_part())
}

/// E_σ(ρ).
pub fn pinch(rho: &DensityMatrix, basis: &PinchingBasis) -> Result<DensityMatrix> {
    DensityMatrix::new(pinch_matrix(rho.matrix(), basis)?)
}

/// Σ_{i: λ_i ≥ 0} P_i for the spectrum of a − b.
pub fn projector_geq(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != b.rows() || a.cols() != b.cols() || !a.is_square() {
        return Err(Error::DimMismatch(
            "projector arguments differ in shape".into(),
        ));
    }
    let scale = a
        .data()
        .iter()
        .chain(b.data())
        .fold(0.0_f64, |m, z| m.max(z.norm()));
    let sp = eig_hermitian(&(a - b))?;
    let tol = SIGN_TOL * scale;
    Ok(sp.projector_where(|l| l >= -tol))
}

/// Π_UB stored as its diagonal blocks Π_u; the operator is Σ_u |u⟩⟨u| ⊗ Π_u.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CqProjector {
    pub blocks: Vec<ComplexMatrix>,
}

impl CqProjector {
    pub fn block(&self, u: usize) -> &ComplexMatrix {
        &self.blocks[u]
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::direct_sum(&self.blocks)
    }

    /// (tr[(I − Π) ρ_UB], tr[Π (ρ_U ⊗ ρ_B)]).
    pub fn lemma2_traces(&self, rho_ub: &CQState) -> (f64, f64) {
        let rho_b = rho_ub.average();
        let mut miss = 0.0;
        let mut false_alarm = 0.0;
        for (u, (&p, c)) in rho_ub.probs().iter().zip(rho_ub.conditionals()).enumerate() {
            let hit = self.blocks[u].trace_product(c.matrix()).re;
            miss += p * (1.0 - hit);
            false_alarm += p * self.blocks[u].trace_product(rho_b.matrix()).re;
        }
        (miss.max(0.0), false_alarm.max(0.0))
    }
}

/// Π_UB = {E_{ρ_B}(ρ_UB) ≥ 2^{threshold} ρ_U ⊗ ρ_B}, pinching on the quantum factor only.
///
/// Both operators are block diagonal in U, so the projection is taken per block.
pub fn decoder_projector(
    rho_ub: &CQState,
    threshold_exponent: f64,
    group_tol: f64,
) -> Result<CqProjector> {
    if rho_ub.layout().factors().len() != 1 || !rho_ub.layout().contains(Factor::B) {
        return Err(Error::DimMismatch(format!(
            "decoder needs an ensemble on B alone, got {}",
            rho_ub.layout()
        )));
    }
    let rho_b = rho_ub.average();
    let basis = distinct_eigenspaces(&rho_b, group_tol)?;
    let scale = 2f64.powf(threshold_exponent);
    let blocks = rho_ub
        .probs()
        .iter()
        .zip(rho_ub.conditionals())
        .map(|(&p, c)| {
            let a = pinch_matrix(c.matrix(), &basis)?.scale(p);
            let b = rho_b.matrix().scale(p * scale);
            projector_geq(&a, &b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CqProjector { blocks })
}

/// Number of distinct eigenvalues of a state.
pub fn eigencount(sigma: &DensityMatrix, group_tol: f64) -> Result<usize> {
    Ok(distinct_eigenspaces(sigma, group_tol)?.v())
}
