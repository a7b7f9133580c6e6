//! Closed-form one-shot achievability bounds and their (α, R_J) optimization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{cq_sandwiched_renyi, trace_distance};
use crate::error::{Error, Result};
use crate::numerics::Numerics;
use crate::pinching::eigencount;
use crate::states::{
    check_csi_consistency, induced_cq_output, innocent_output, CQState, DensityMatrix, Factor,
    ProblemInstance,
};

/// Message, key and local-randomness rates in bits, plus the bound parameter α ∈ (0, 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRates {
    pub r: f64,
    pub r_k: f64,
    pub r_j: f64,
    pub alpha: f64,
}

impl ProtocolRates {
    pub fn new(r: f64, r_k: f64, r_j: f64, alpha: f64) -> Result<Self> {
        let rates = ProtocolRates { r, r_k, r_j, alpha };
        rates.validate()?;
        Ok(rates)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("R", self.r), ("R_K", self.r_k), ("R_J", self.r_j)] {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {x} must be a finite rate ≥ 0"
                )));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {} outside (0, 1/2)",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        ProtocolRates { alpha, ..self }
    }

    pub fn with_r_j(self, r_j: f64) -> Self {
        ProtocolRates { r_j, ..self }
    }

    /// R_J + R_K + R.
    pub fn total(&self) -> f64 {
        self.r_j + self.r_k + self.r
    }
}

/// Ensemble marginals and eigencounts shared by every bound of one instance.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub rho_us: CQState,
    pub rho_ub: CQState,
    pub rho_ue: CQState,
    pub rho_e: DensityMatrix,
    pub rho0: DensityMatrix,
    pub v_s: usize,
    pub v_b: usize,
    pub v_e: usize,
    /// ‖ρ_E − ρ₀‖₁
    pub covert_gap: f64,
    pub covert_applicable: bool,
}

impl BoundInputs {
    /// Fails with `CsiMismatch` when the ensemble's S-marginal disagrees with the CSI state.
    pub fn new(p: &ProblemInstance, rho_uas: &CQState, num: &Numerics) -> Result<Self> {
        let csi = check_csi_consistency(rho_uas, p, num.csi_tol)?;
        if !csi.consistent {
            return Err(Error::CsiMismatch {
                deviation: csi.deviation,
            });
        }
        let rho_ube = induced_cq_output(&p.channel, rho_uas)?;
        let rho_us = rho_uas.marginal(&[Factor::S])?;
        let rho_ub = rho_ube.marginal(&[Factor::B])?;
        let rho_ue = rho_ube.marginal(&[Factor::E])?;
        let rho_e = rho_ue.average();
        let rho0 = innocent_output(p)?;
        let covert_gap = trace_distance(&rho_e, &rho0)?;
        Ok(BoundInputs {
            v_s: eigencount(&rho_us.average(), num.group_tol)?,
            v_b: eigencount(&rho_ub.average(), num.group_tol)?,
            v_e: eigencount(&rho_e, num.group_tol)?,
            rho_us,
            rho_ub,
            rho_ue,
            rho_e,
            rho0,
            covert_applicable: covert_gap <= num.covert_tol,
            covert_gap,
        })
    }

    pub fn divergences(&self, alpha: f64) -> Result<DivergenceInputs> {
        Ok(DivergenceInputs {
            d_us: cq_sandwiched_renyi(&self.rho_us, 1.0 + alpha)?.require("D(ρ_US‖ρ_U⊗ρ_S)")?,
            d_ub: cq_sandwiched_renyi(&self.rho_ub, 1.0 - alpha)?.require("D(ρ_UB‖ρ_U⊗ρ_B)")?,
            d_ue: cq_sandwiched_renyi(&self.rho_ue, 1.0 + alpha)?.require("D(ρ_UE‖ρ_U⊗ρ_E)")?,
        })
    }
}

/// D̄_{1+α}(ρ_US‖ρ_U⊗ρ_S), D̄_{1−α}(ρ_UB‖ρ_U⊗ρ_B), D̄_{1+α}(ρ_UE‖ρ_U⊗ρ_E) in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceInputs {
    pub d_us: f64,
    pub d_ub: f64,
    pub d_ue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundComponents {
    /// Gel'fand-Pinsker encoding term (2 v_S^α/α) 2^{α(−(R_J+R_K) + D̄_{1+α}(US))}.
    pub encoding_term: f64,
    /// Decoding term 12 v_B^α 2^{α(R_J+R_K+R − D̄_{1−α}(UB))}.
    pub decoding_term: f64,
    /// Squared-purified-distance resolvability term (2 v_E^α/α) 2^{α(−(R_J+R) + D̄_{1+α}(UE))}.
    pub resolvability_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rates: ProtocolRates,
    /// encoding_term + decoding_term.
    pub pe_bound: f64,
    /// Prefactor 2√2 v_E^{α/2}/√α.
    pub covert_bound: f64,
    /// Same exponent with the 2 v_E^{α/2}/√α prefactor of the final chain.
    pub covert_bound_chain: f64,
    /// Secure variant with the 2 v_E^{α/2}/√α prefactor as stated.
    pub secure_covert_bound: Option<f64>,
    /// Secure variant with the 2√2 prefactor that ‖·‖₁ ≤ 2P and Jensen give from the P² bound.
    pub secure_covert_bound_jensen: Option<f64>,
    pub components: BoundComponents,
    pub divergences: DivergenceInputs,
    pub v_s: usize,
    pub v_b: usize,
    pub v_e: usize,
    pub covert_applicable: bool,
    pub covert_gap: f64,
}

fn encoding_term(v_s: usize, d: &DivergenceInputs, rt: &ProtocolRates) -> f64 {
    let a = rt.alpha;
    2.0 * (v_s as f64).powf(a) / a * (a * (-(rt.r_j + rt.r_k) + d.d_us)).exp2()
}

fn decoding_term(v_b: usize, d: &DivergenceInputs, rt: &ProtocolRates) -> f64 {
    let a = rt.alpha;
    12.0 * (v_b as f64).powf(a) * (a * (rt.total() - d.d_ub)).exp2()
}

/// (2 v^α/α) 2^{α(−pool + D̄)}: bound on the expected squared purified distance.
fn resolvability_p2(v_e: usize, d_ue: f64, pool: f64, alpha: f64) -> f64 {
    2.0 * (v_e as f64).powf(alpha) / alpha * (alpha * (-pool + d_ue)).exp2()
}

/// c · v^{α/2}/√α · 2^{(α/2)(−pool + D̄)}.
fn covert_form(prefactor: f64, v_e: usize, d_ue: f64, pool: f64, alpha: f64) -> f64 {
    prefactor * (v_e as f64).powf(alpha / 2.0) / alpha.sqrt()
        * (alpha / 2.0 * (-pool + d_ue)).exp2()
}

pub fn thm1_pe_bound(inp: &BoundInputs, rates: &ProtocolRates) -> Result<f64> {
    rates.validate()?;
    let d = inp.divergences(rates.alpha)?;
    Ok(encoding_term(inp.v_s, &d, rates) + decoding_term(inp.v_b, &d, rates))
}

pub fn thm1_covert_bound(inp: &BoundInputs, rates: &ProtocolRates) -> Result<f64> {
    rates.validate()?;
    let d = inp.divergences(rates.alpha)?;
    Ok(covert_form(
        2.0 * 2f64.sqrt(),
        inp.v_e,
        d.d_ue,
        rates.r_j + rates.r,
        rates.alpha,
    ))
}

/// Covert-and-secure bound; only R_J feeds the resolvability pool.
pub fn thm5_secure_covert_bound(inp: &BoundInputs, rates: &ProtocolRates) -> Result<f64> {
    rates.validate()?;
    let d = inp.divergences(rates.alpha)?;
    Ok(covert_form(2.0, inp.v_e, d.d_ue, rates.r_j, rates.alpha))
}

/// Every `thm1` quantity plus the secure variant at one rate point.
pub fn bound_report(inp: &BoundInputs, rates: &ProtocolRates) -> Result<BoundReport> {
    rates.validate()?;
    let a = rates.alpha;
    let d = inp.divergences(a)?;
    let components = BoundComponents {
        encoding_term: encoding_term(inp.v_s, &d, rates),
        decoding_term: decoding_term(inp.v_b, &d, rates),
        resolvability_term: resolvability_p2(inp.v_e, d.d_ue, rates.r_j + rates.r, a),
    };
    Ok(BoundReport {
        rates: *rates,
        pe_bound: components.encoding_term + components.decoding_term,
        covert_bound: covert_form(2.0 * 2f64.sqrt(), inp.v_e, d.d_ue, rates.r_j + rates.r, a),
        covert_bound_chain: covert_form(2.0, inp.v_e, d.d_ue, rates.r_j + rates.r, a),
        secure_covert_bound: Some(covert_form(2.0, inp.v_e, d.d_ue, rates.r_j, a)),
        secure_covert_bound_jensen: Some(covert_form(
            2.0 * 2f64.sqrt(),
            inp.v_e,
            d.d_ue,
            rates.r_j,
            a,
        )),
        components,
        divergences: d,
        v_s: inp.v_s,
        v_b: inp.v_b,
        v_e: inp.v_e,
        covert_applicable: inp.covert_applicable,
        covert_gap: inp.covert_gap,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} outside (0, 1/2)"
        )));
    }
    Ok(())
}

/// E_C D̄_{1+α}(τ_{E|C} ‖ ρ_E) ≤ (v_E^α/(α ln 2)) 2^{α(−R + D̄_{1+α}(ρ_UE‖ρ_U⊗ρ_E))}.
pub fn lemma1_bound(rho_ue: &CQState, r: f64, alpha: f64, group_tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let v_e = eigencount(&rho_ue.average(), group_tol)?;
    let d = cq_sandwiched_renyi(rho_ue, 1.0 + alpha)?.require("D(ρ_UE‖ρ_U⊗ρ_E)")?;
    Ok(lemma1_formula(v_e, d, r, alpha))
}

pub fn lemma1_formula(v_e: usize, d_ue: f64, r: f64, alpha: f64) -> f64 {
    (v_e as f64).powf(alpha) / (alpha * std::f64::consts::LN_2) * (alpha * (-r + d_ue)).exp2()
}

/// Upper bounds on tr[(I−Π_UB) ρ_UB] and tr[Π_UB (ρ_U ⊗ ρ_B)] with threshold R_J + R_K + R.
pub fn lemma2_bounds(
    rho_ub: &CQState,
    rates: &ProtocolRates,
    group_tol: f64,
) -> Result<(f64, f64)> {
    rates.validate()?;
    let a = rates.alpha;
    let v = (eigencount(&rho_ub.average(), group_tol)? as f64).powf(a);
    let d = cq_sandwiched_renyi(rho_ub, 1.0 - a)?.require("D(ρ_UB‖ρ_U⊗ρ_B)")?;
    let t = rates.total();
    let miss = v * (a * t).exp2() * (-a * d).exp2();
    let false_alarm = v * (-(1.0 - a) * t).exp2() * (-a * d).exp2();
    Ok((miss, false_alarm))
}

/// `n` log-spaced points in [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn default_alpha_grid() -> Vec<f64> {
    log_grid(1e-3, 0.499, 24)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub alphas: Vec<f64>,
    pub r_js: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            alphas: default_alpha_grid(),
            r_js: (0..=32).map(|i| i as f64 * 0.25).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptimum {
    pub alpha: f64,
    pub r_j: f64,
    pub value: f64,
}

/// Grid argmin of `f(α, R_J)`; `None` marks an infeasible point.
/// Ties go to the smallest α, then the smallest R_J.
pub fn optimize_bound<F>(f: F, grid: &GridConfig) -> Result<GridOptimum>
where
    F: Fn(f64, f64) -> Result<Option<f64>> + Sync,
{
    if grid.alphas.is_empty() || grid.r_js.is_empty() {
        return Err(Error::InvalidParameter("empty optimization grid".into()));
    }
    let mut alphas = grid.alphas.clone();
    alphas.sort_by(f64::total_cmp);
    let mut r_js = grid.r_js.clone();
    r_js.sort_by(f64::total_cmp);
    let points: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| r_js.iter().map(move |&rj| (a, rj)))
        .collect();
    let values = points
        .par_iter()
        .map(|&(a, rj)| f(a, rj))
        .collect::<Result<Vec<Option<f64>>>>()?;
    let mut best: Option<GridOptimum> = None;
    for (&(alpha, r_j), v) in points.iter().zip(values) {
        let Some(value) = v else { continue };
        if best.is_none_or(|b| value < b.value) {
            best = Some(GridOptimum { alpha, r_j, value });
        }
    }
    best.ok_or(Error::EmptyFeasibleSet)
}

/// Minimizes pe_bound + covert_bound over the grid at fixed R and R_K.
pub fn optimize_thm1(
    inp: &BoundInputs,
    r: f64,
    r_k: f64,
    grid: &GridConfig,
) -> Result<GridOptimum> {
    optimize_bound(
        |alpha, r_j| {
            let rates = ProtocolRates::new(r, r_k, r_j, alpha)?;
            let rep = bound_report(inp, &rates)?;
            Ok(Some(rep.pe_bound + rep.covert_bound))
        },
        grid,
    )
}
