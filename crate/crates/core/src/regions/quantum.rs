use serde::{Deserialize, Serialize};

use crate::divergence::{holevo_mutual_info, trace_distance};
use crate::error::{Error, Result};
use crate::numerics::Numerics;
use crate::states::{
    check_csi_consistency, induced_cq_output, innocent_output, CQState, Factor, ProblemInstance,
};

use super::polygon::{Constraint, RateRegion};

/// I(U;B), I(U;S), I(U;E) in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionTerms {
    pub i_ub: f64,
    pub i_us: f64,
    pub i_ue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumEvaluation {
    pub terms: RegionTerms,
    /// ‖ρ_E − ρ₀‖₁.
    pub covert_gap: f64,
    pub covert_ok: bool,
}

/// Mutual-information terms of an ensemble after checking CSI consistency and,
/// unless `stealth`, that ρ_E = ρ₀ within `covert_tol`.
pub fn evaluate_ensemble(
    p: &ProblemInstance,
    rho_uas: &CQState,
    stealth: bool,
    num: &Numerics,
) -> Result<QuantumEvaluation> {
    let csi = check_csi_consistency(rho_uas, p, num.csi_tol)?;
    if !csi.consistent {
        return Err(Error::CsiMismatch {
            deviation: csi.deviation,
        });
    }
    let out = induced_cq_output(&p.channel, rho_uas)?;
    let rho_ub = out.marginal(&[Factor::B])?;
    let rho_ue = out.marginal(&[Factor::E])?;
    let rho_us = rho_uas.marginal(&[Factor::S])?;
    let covert_gap = trace_distance(&rho_ue.average(), &innocent_output(p)?)?;
    let covert_ok = covert_gap <= num.covert_tol;
    if !stealth && !covert_ok {
        return Err(Error::CovertInfeasible(format!(
            "warden output differs from the innocent output by {covert_gap:.3e} in trace distance"
        )));
    }
    let terms = RegionTerms {
        i_ub: holevo_mutual_info(&rho_ub)?,
        i_us: holevo_mutual_info(&rho_us)?,
        i_ue: holevo_mutual_info(&rho_ue)?,
    };
    Ok(QuantumEvaluation {
        terms,
        covert_gap,
        covert_ok,
    })
}

pub fn cc_csk_constraints(t: &RegionTerms) -> Vec<Constraint> {
    vec![
        Constraint::new("R <= I(U;B) - I(U;S)", 1.0, 0.0, t.i_ub - t.i_us),
        Constraint::new("R_K <= I(U;B) - I(U;E)", 0.0, 1.0, t.i_ub - t.i_ue),
        Constraint::new("R + R_K <= I(U;B)", 1.0, 1.0, t.i_ub),
    ]
}

pub fn csc_csk_constraints(t: &RegionTerms) -> Vec<Constraint> {
    vec![
        Constraint::new("R <= I(U;B) - I(U;S)", 1.0, 0.0, t.i_ub - t.i_us),
        Constraint::new("R + R_K <= I(U;B) - I(U;E)", 1.0, 1.0, t.i_ub - t.i_ue),
    ]
}

/// Covert communication with covert secret key generation.
pub fn region_cc_csk(
    p: &ProblemInstance,
    rho_uas: &CQState,
    stealth: bool,
    num: &Numerics,
) -> Result<RateRegion> {
    let ev = evaluate_ensemble(p, rho_uas, stealth, num)?;
    Ok(RateRegion::from_constraints(cc_csk_constraints(&ev.terms)))
}

/// Covert secure communication with covert secret key generation.
pub fn region_csc_csk(
    p: &ProblemInstance,
    rho_uas: &CQState,
    stealth: bool,
    num: &Numerics,
) -> Result<RateRegion> {
    let ev = evaluate_ensemble(p, rho_uas, stealth, num)?;
    Ok(RateRegion::from_constraints(csc_csk_constraints(&ev.terms)))
}

/// Single-rate projections of the regions, clamped at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryRates {
    pub r_cc: f64,
    pub r_csk: f64,
    pub r_csc: f64,
    /// I(U;B) ≥ I(U;E), required alongside R_CC.
    pub cc_side_condition: bool,
    /// I(U;B) ≥ I(U;S), required alongside R_CSK.
    pub csk_side_condition: bool,
    pub terms: RegionTerms,
}

pub fn corollary_rates_from_terms(t: RegionTerms) -> CorollaryRates {
    let cc_side_condition = t.i_ub >= t.i_ue;
    let csk_side_condition = t.i_ub >= t.i_us;
    let clamp = |x: f64, ok: bool| if ok { x.max(0.0) } else { 0.0 };
    CorollaryRates {
        r_cc: clamp(t.i_ub - t.i_us, cc_side_condition),
        r_csk: clamp(t.i_ub - t.i_ue, csk_side_condition),
        r_csc: (t.i_ub - t.i_us.max(t.i_ue)).max(0.0),
        cc_side_condition,
        csk_side_condition,
        terms: t,
    }
}

pub fn corollary_rates(
    p: &ProblemInstance,
    rho_uas: &CQState,
    stealth: bool,
    num: &Numerics,
) -> Result<CorollaryRates> {
    Ok(corollary_rates_from_terms(
        evaluate_ensemble(p, rho_uas, stealth, num)?.terms,
    ))
}
