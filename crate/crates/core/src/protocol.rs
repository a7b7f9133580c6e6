//! Exact simulation of the one-shot covert coding scheme for sampled codebooks.
//!
//! The encoder's Uhlmann isometry is never built: the penalty P²(τ_{S|C_m}, ρ_S)
//! stands in for it. Decoding uses the square-root measurement over the
//! blocks of the pinched projector Π_UB.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundInputs, ProtocolRates};
use crate::divergence::{cq_sandwiched_renyi, fidelity};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, trace_norm, ComplexMatrix};
use crate::numerics::Numerics;
use crate::pinching::{decoder_projector, CqProjector};
use crate::random::{rng_from_seed, substream_seed};
use crate::states::{CQState, DensityMatrix, ProblemInstance};

/// ⌊2^rate⌋, or `CapExceeded` past `cap`.
pub fn code_size(rate: f64, cap: u64) -> Result<usize> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rate {rate} must be finite and ≥ 0"
        )));
    }
    let x = rate.exp2().floor();
    if x > cap as f64 {
        return Err(Error::CapExceeded {
            requested: x.min(u128::MAX as f64) as u128,
            cap: cap as u128,
        });
    }
    Ok(x as usize)
}

/// Sizes (|J|, |K|, |M|) = (⌊2^{R_J}⌋, ⌊2^{R_K}⌋, ⌊2^R⌋).
pub fn code_sizes(rates: &ProtocolRates, cap: u64) -> Result<(usize, usize, usize)> {
    let sizes = (
        code_size(rates.r_j, cap)?,
        code_size(rates.r_k, cap)?,
        code_size(rates.r, cap)?,
    );
    let total = sizes.0 as u128 * sizes.1 as u128 * sizes.2 as u128;
    if total > cap as u128 {
        return Err(Error::CapExceeded {
            requested: total,
            cap: cap as u128,
        });
    }
    Ok(sizes)
}

/// Symbols u(j, k, m) stored with j fastest, then k, then m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub sizes: (usize, usize, usize),
    pub entries: Vec<usize>,
    pub seed: u64,
}

impl Codebook {
    pub fn index(&self, j: usize, k: usize, m: usize) -> usize {
        let (nj, nk, _) = self.sizes;
        (m * nk + k) * nj + j
    }

    pub fn symbol(&self, j: usize, k: usize, m: usize) -> usize {
        self.entries[self.index(j, k, m)]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// (j, k, m) of a flat index.
    pub fn triple(&self, idx: usize) -> (usize, usize, usize) {
        let (nj, nk, _) = self.sizes;
        (idx % nj, (idx / nj) % nk, idx / (nj * nk))
    }
}

pub fn sample_codebook(
    p_u: &[f64],
    rates: &ProtocolRates,
    seed: u64,
    cap: u64,
) -> Result<Codebook> {
    let sizes = code_sizes(rates, cap)?;
    let dist = WeightedIndex::new(p_u).map_err(|e| Error::NotADistribution(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let n = sizes.0 * sizes.1 * sizes.2;
    let entries = (0..n).map(|_| dist.sample(&mut rng)).collect();
    Ok(Codebook {
        sizes,
        entries,
        seed,
    })
}

/// Square-root measurement Υ(j,k,m) = S^{−1/2} Γ(j,k,m) S^{−1/2} plus the remainder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoderPovm {
    /// Indexed like [`Codebook::entries`].
    pub elements: Vec<ComplexMatrix>,
    pub fail: ComplexMatrix,
}

impl DecoderPovm {
    /// max |Σ Υ + fail − I|.
    pub fn completeness_deviation(&self) -> f64 {
        let n = self.fail.rows();
        let mut sum = self.fail.clone();
        for e in &self.elements {
            sum = &sum + e;
        }
        sum.max_abs_diff(&ComplexMatrix::identity(n))
    }

    /// Smallest eigenvalue over all elements and the fail operator.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut m = f64::INFINITY;
        for e in self.elements.iter().chain(std::iter::once(&self.fail)) {
            m = m.min(eig_hermitian(e)?.min_eigenvalue());
        }
        Ok(m)
    }
}

/// Pseudo-inverse square root on the support (relative cutoff `rel_tol`).
fn pinv_sqrt(m: &ComplexMatrix, rel_tol: f64) -> Result<ComplexMatrix> {
    let sp = eig_hermitian(m)?;
    let cut = sp.support_cutoff(rel_tol).max(1e-300);
    let w: Vec<f64> = sp
        .eigenvalues
        .iter()
        .map(|&l| if l > cut { 1.0 / l.sqrt() } else { 0.0 })
        .collect();
    Ok(sp.compose(&w))
}

/// Γ(j,k,m) is the block of Π_UB at the codeword's label.
pub fn build_decoder(cb: &Codebook, proj: &CqProjector) -> Result<DecoderPovm> {
    let d = proj.blocks.first().map_or(0, |b| b.rows());
    let mut s = ComplexMatrix::zeros(d, d);
    for &u in &cb.entries {
        s = &s + proj.block(u);
    }
    let s_inv = pinv_sqrt(&s.hermitian_part(), 1e-10)?;
    let elements: Vec<ComplexMatrix> = cb
        .entries
        .iter()
        .map(|&u| proj.block(u).conjugate_by(&s_inv).hermitian_part())
        .collect();
    let mut covered = ComplexMatrix::zeros(d, d);
    for e in &elements {
        covered = &covered + e;
    }
    let fail = (&ComplexMatrix::identity(d) - &covered).hermitian_part();
    Ok(DecoderPovm { elements, fail })
}

/// Builds Π_UB with threshold R_J + R_K + R and the square-root decoder on top of it.
pub fn build_decoder_for(
    cb: &Codebook,
    rho_ub: &CQState,
    rates: &ProtocolRates,
    group_tol: f64,
) -> Result<DecoderPovm> {
    let proj = decoder_projector(rho_ub, rates.total(), group_tol)?;
    build_decoder(cb, &proj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// (ĵ, k̂, m̂) = (j, k, m).
    Triple,
    /// (k̂, m̂) = (k, m).
    #[default]
    MessageKey,
}

/// Exact error probability under uniform (j, k, m); the fail outcome always counts as an error.
pub fn ideal_error_prob(
    cb: &Codebook,
    povm: &DecoderPovm,
    rho_b_given_u: &[DensityMatrix],
    mode: MatchMode,
) -> f64 {
    let (nj, _, _) = cb.sizes;
    let mut success = 0.0;
    for idx in 0..cb.len() {
        let rho = rho_b_given_u[cb.entries[idx]].matrix();
        let (_, k, m) = cb.triple(idx);
        success += match mode {
            MatchMode::Triple => povm.elements[idx].trace_product(rho).re,
            MatchMode::MessageKey => (0..nj)
                .map(|j2| povm.elements[cb.index(j2, k, m)].trace_product(rho).re)
                .sum(),
        };
    }
    (1.0 - success / cb.len() as f64).clamp(0.0, 1.0)
}

fn average_states(states: impl Iterator<Item = DensityMatrix>) -> DensityMatrix {
    let v: Vec<DensityMatrix> = states.collect();
    let w = vec![1.0 / v.len() as f64; v.len()];
    DensityMatrix::mixture(&w, &v).expect("uniform mixture of valid states")
}

/// τ_{S|C_m}: the S-average over the sub-codebook of message m.
pub fn sub_codebook_average(cb: &Codebook, m: usize, family: &[DensityMatrix]) -> DensityMatrix {
    let (nj, nk, _) = cb.sizes;
    average_states(
        (0..nk)
            .flat_map(|k| (0..nj).map(move |j| (j, k)))
            .map(|(j, k)| family[cb.symbol(j, k, m)].clone()),
    )
}

/// P²(τ_{S|C_m}, ρ_S).
pub fn uhlmann_penalty(
    cb: &Codebook,
    m: usize,
    rho_s: &DensityMatrix,
    rho_s_given_u: &[DensityMatrix],
) -> Result<f64> {
    let tau = sub_codebook_average(cb, m, rho_s_given_u);
    let f = fidelity(&tau, rho_s)?;
    Ok((1.0 - f * f).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovertMode {
    /// ρ̂_KE against σ_K ⊗ target: blocks indexed by k, averaged over (j, m).
    CcCsk,
    /// ρ̂_MKE against ρ_M ⊗ σ_K ⊗ target: blocks indexed by (k, m), averaged over j.
    CscCsk,
}

/// Block averages of ρ_{E|u} for the classical registers kept by `mode`.
fn covert_blocks(cb: &Codebook, family: &[DensityMatrix], mode: CovertMode) -> Vec<DensityMatrix> {
    let (nj, nk, nm) = cb.sizes;
    match mode {
        CovertMode::CcCsk => (0..nk)
            .map(|k| {
                average_states(
                    (0..nm)
                        .flat_map(|m| (0..nj).map(move |j| (j, m)))
                        .map(|(j, m)| family[cb.symbol(j, k, m)].clone()),
                )
            })
            .collect(),
        CovertMode::CscCsk => (0..nm)
            .flat_map(|m| (0..nk).map(move |k| (k, m)))
            .map(|(k, m)| average_states((0..nj).map(|j| family[cb.symbol(j, k, m)].clone())))
            .collect(),
    }
}

/// Trace distance to the product target, computed over the uniform classical blocks.
pub fn covert_distance(
    cb: &Codebook,
    rho_e_given_u: &[DensityMatrix],
    target: &DensityMatrix,
    mode: CovertMode,
) -> Result<f64> {
    let blocks = covert_blocks(cb, rho_e_given_u, mode);
    let mut acc = 0.0;
    for b in &blocks {
        acc += trace_norm(&(b.matrix() - target.matrix()))?;
    }
    Ok(acc / blocks.len() as f64)
}

/// Squared purified distance to the product target; fidelity is additive over the blocks.
pub fn covert_purified_sq(
    cb: &Codebook,
    rho_e_given_u: &[DensityMatrix],
    target: &DensityMatrix,
    mode: CovertMode,
) -> Result<f64> {
    let blocks = covert_blocks(cb, rho_e_given_u, mode);
    let mut f = 0.0;
    for b in &blocks {
        f += fidelity(b, target)?;
    }
    let f = (f / blocks.len() as f64).min(1.0);
    Ok((1.0 - f * f).clamp(0.0, 1.0))
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Kahan-compensated sum.
pub fn stable_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for x in xs {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len() as f64;
        let mean = stable_sum(xs.iter().copied()) / n;
        let var = if xs.len() > 1 {
            stable_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_err: (var / n).sqrt(),
        }
    }

    pub fn upper(&self) -> f64 {
        self.mean + 3.0 * self.std_err
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub error_message_key: f64,
    pub error_triple: f64,
    pub uhlmann_penalty: f64,
    pub covert_distance: f64,
    pub secure_covert_distance: f64,
    pub p2_ke: f64,
    pub p2_mke: f64,
    pub povm_deviation: f64,
    pub povm_min_eigenvalue: f64,
}

/// One inequality E_C[lhs] ≤ bound, judged at mean + 3·SE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub estimate: Estimate,
    pub bound: f64,
    pub pass: bool,
    /// The bound exceeds the largest value the left side can take.
    pub vacuous: bool,
}

impl BoundCheck {
    fn new(name: &str, samples: &[f64], bound: f64, trivial_max: f64) -> Self {
        let estimate = Estimate::from_samples(samples);
        BoundCheck {
            name: name.to_string(),
            estimate,
            bound,
            pass: estimate.upper() <= bound,
            vacuous: bound >= trivial_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: usize,
    pub seed: u64,
    pub rates: ProtocolRates,
    /// log₂ of the realized code sizes; bounds are evaluated here.
    pub effective_rates: ProtocolRates,
    pub sizes: (usize, usize, usize),
    pub exact_ideal_error: Estimate,
    pub exact_ideal_error_triple: Estimate,
    pub uhlmann_penalty: Estimate,
    pub covert_distance: Estimate,
    pub secure_covert_distance: Estimate,
    pub checks: Vec<BoundCheck>,
    pub covert_applicable: bool,
    pub max_povm_deviation: f64,
    pub min_povm_eigenvalue: f64,
    pub per_codebook: Vec<TrialRecord>,
}

impl SimulationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Samples `trials` codebooks and checks the chain endpoints against the closed-form bounds.
///
/// Checked at the realized code sizes:
/// E[2·err_triple + 2·P²(τ_{S|C}, ρ_S)] ≤ encoding + decoding terms,
/// E[P²(ρ̂_KE, σ_K⊗ρ_E)] ≤ (2v_E^α/α) 2^{α(−(R_J+R) + D̄)},
/// E[P²(ρ̂_MKE, ρ_M⊗σ_K⊗ρ_E)] ≤ (2v_E^α/α) 2^{α(−R_J + D̄)},
/// and, when ρ_E = ρ₀, the trace-distance covertness bounds.
pub fn monte_carlo_verify(
    p: &ProblemInstance,
    rho_uas: &CQState,
    rates: &ProtocolRates,
    trials: usize,
    seed: u64,
    num: &Numerics,
) -> Result<SimulationReport> {
    rates.validate()?;
    if trials < 30 {
        return Err(Error::InvalidParameter(format!(
            "{trials} trials; at least 30 are required"
        )));
    }
    let inp = BoundInputs::new(p, rho_uas, num)?;
    let sizes = code_sizes(rates, num.codebook_cap)?;
    let eff = ProtocolRates {
        r_j: (sizes.0 as f64).log2(),
        r_k: (sizes.1 as f64).log2(),
        r: (sizes.2 as f64).log2(),
        alpha: rates.alpha,
    };
    let proj = decoder_projector(&inp.rho_ub, eff.total(), num.group_tol)?;
    let p_u = rho_uas.probs().to_vec();
    let rho_s = inp.rho_us.average();
    let (fam_s, fam_b, fam_e) = (
        inp.rho_us.conditionals(),
        inp.rho_ub.conditionals(),
        inp.rho_ue.conditionals(),
    );

    let records = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<TrialRecord> {
            let s = substream_seed(seed, t);
            let cb = sample_codebook(&p_u, &eff, s, num.codebook_cap)?;
            let povm = build_decoder(&cb, &proj)?;
            let penalty = (0..sizes.2)
                .map(|m| uhlmann_penalty(&cb, m, &rho_s, fam_s))
                .collect::<Result<Vec<_>>>()?;
            Ok(TrialRecord {
                seed: s,
                error_message_key: ideal_error_prob(&cb, &povm, fam_b, MatchMode::MessageKey),
                error_triple: ideal_error_prob(&cb, &povm, fam_b, MatchMode::Triple),
                uhlmann_penalty: stable_sum(penalty) / sizes.2 as f64,
                covert_distance: covert_distance(&cb, fam_e, &inp.rho0, CovertMode::CcCsk)?,
                secure_covert_distance: covert_distance(&cb, fam_e, &inp.rho0, CovertMode::CscCsk)?,
                p2_ke: covert_purified_sq(&cb, fam_e, &inp.rho_e, CovertMode::CcCsk)?,
                p2_mke: covert_purified_sq(&cb, fam_e, &inp.rho_e, CovertMode::CscCsk)?,
                povm_deviation: povm.completeness_deviation(),
                povm_min_eigenvalue: povm.min_eigenvalue()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let col = |f: fn(&TrialRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
    let a = eff.alpha;
    let d_us = cq_sandwiched_renyi(&inp.rho_us, 1.0 + a)?.require("D(ρ_US‖ρ_U⊗ρ_S)")?;
    let d_ub = cq_sandwiched_renyi(&inp.rho_ub, 1.0 - a)?.require("D(ρ_UB‖ρ_U⊗ρ_B)")?;
    let d_ue = cq_sandwiched_renyi(&inp.rho_ue, 1.0 + a)?.require("D(ρ_UE‖ρ_U⊗ρ_E)")?;
    let v = |n: usize, e: f64| (n as f64).powf(e);
    let eq9a = 2.0 * v(inp.v_s, a) / a * (a * (-(eff.r_j + eff.r_k) + d_us)).exp2()
        + 12.0 * v(inp.v_b, a) * (a * (eff.total() - d_ub)).exp2();
    let eq24 = 2.0 * v(inp.v_e, a) / a * (a * (-(eff.r_j + eff.r) + d_ue)).exp2();
    let eq43 = 2.0 * v(inp.v_e, a) / a * (a * (-eff.r_j + d_ue)).exp2();

    let chain: Vec<f64> = records
        .iter()
        .map(|r| 2.0 * r.error_triple + 2.0 * r.uhlmann_penalty)
        .collect();
    let mut checks = vec![
        BoundCheck::new("pe_chain", &chain, eq9a, 4.0),
        BoundCheck::new("p2_ke", &col(|r| r.p2_ke), eq24, 1.0),
        BoundCheck::new("p2_mke", &col(|r| r.p2_mke), eq43, 1.0),
    ];
    if inp.covert_applicable {
        let covert = 2.0 * 2f64.sqrt() * v(inp.v_e, a / 2.0) / a.sqrt()
            * (a / 2.0 * (-(eff.r_j + eff.r) + d_ue)).exp2();
        let secure = 2.0 * 2f64.sqrt() * v(inp.v_e, a / 2.0) / a.sqrt()
            * (a / 2.0 * (-eff.r_j + d_ue)).exp2();
        checks.push(BoundCheck::new(
            "covert_trace_distance",
            &col(|r| r.covert_distance),
            covert,
            2.0,
        ));
        checks.push(BoundCheck::new(
            "secure_covert_trace_distance",
            &col(|r| r.secure_covert_distance),
            secure,
            2.0,
        ));
    }

    Ok(SimulationReport {
        trials,
        seed,
        rates: *rates,
        effective_rates: eff,
        sizes,
        exact_ideal_error: Estimate::from_samples(&col(|r| r.error_message_key)),
        exact_ideal_error_triple: Estimate::from_samples(&col(|r| r.error_triple)),
        uhlmann_penalty: Estimate::from_samples(&col(|r| r.uhlmann_penalty)),
        covert_distance: Estimate::from_samples(&col(|r| r.covert_distance)),
        secure_covert_distance: Estimate::from_samples(&col(|r| r.secure_covert_distance)),
        checks,
        covert_applicable: inp.covert_applicable,
        max_povm_deviation: records.iter().map(|r| r.povm_deviation).fold(0.0, f64::max),
        min_povm_eigenvalue: records
            .iter()
            .map(|r| r.povm_min_eigenvalue)
            .fold(f64::INFINITY, f64::min),
        per_codebook: records,
    })
}
