//! Finite-blocklength simulation of the classical covert Gel'fand-Pinsker scheme
//! and exact channel-resolvability computations.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{default_alpha_grid, lemma1_formula};
use crate::error::{Error, Result};
use crate::protocol::Estimate;
use crate::random::{rng_from_seed, substream_seed, SimRng};
use crate::regions::{total_variation, AuxiliaryPolicy, ClassicalProblem};

/// Largest |E|^n for which the warden law is tabulated.
pub const OUTPUT_CAP: usize = 65_536;
/// Largest configuration count for exact resolvability enumeration.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// Per-symbol rates; index sets have ⌊2^{n·rate}⌋ elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRates {
    pub r: f64,
    pub r_k: f64,
    pub r_j: f64,
}

fn block_size(rate: f64, n: usize) -> Result<u128> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rate {rate} must be finite and ≥ 0"
        )));
    }
    let x = (n as f64 * rate).exp2().floor();
    Ok(if x > 1e30 { u128::MAX } else { x as u128 })
}

/// (|J|, |K|, |M|) at blocklength n, or `CapExceeded` when the product passes `cap`.
pub fn block_sizes(rates: &ClassicalRates, n: usize, cap: u64) -> Result<(usize, usize, usize)> {
    let (j, k, m) = (
        block_size(rates.r_j, n)?,
        block_size(rates.r_k, n)?,
        block_size(rates.r, n)?,
    );
    let total = j.saturating_mul(k).saturating_mul(m);
    if total > cap as u128 {
        return Err(Error::CapExceeded {
            requested: total,
            cap: cap as u128,
        });
    }
    Ok((j as usize, k as usize, m as usize))
}

/// Sequences u^n(j,k,m), flat with j fastest, then k, then m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalCodebook {
    pub n: usize,
    pub sizes: (usize, usize, usize),
    pub words: Vec<usize>,
}

impl ClassicalCodebook {
    pub fn len(&self) -> usize {
        self.sizes.0 * self.sizes.1 * self.sizes.2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, j: usize, k: usize, m: usize) -> usize {
        (m * self.sizes.1 + k) * self.sizes.0 + j
    }

    pub fn triple(&self, idx: usize) -> (usize, usize, usize) {
        let (nj, nk, _) = self.sizes;
        (idx % nj, (idx / nj) % nk, idx / (nj * nk))
    }

    pub fn word(&self, idx: usize) -> &[usize] {
        &self.words[idx * self.n..(idx + 1) * self.n]
    }
}

pub fn sample_classical_codebook<R: Rng + ?Sized>(
    p_u: &[f64],
    n: usize,
    sizes: (usize, usize, usize),
    rng: &mut R,
) -> Result<ClassicalCodebook> {
    let dist = WeightedIndex::new(p_u).map_err(|e| Error::NotADistribution(e.to_string()))?;
    let count = sizes.0 * sizes.1 * sizes.2;
    let words = (0..count * n).map(|_| dist.sample(rng)).collect();
    Ok(ClassicalCodebook { n, sizes, words })
}

/// P_U(u) = Σ_s Q_S(s) P_{U|S}(u|s).
pub fn auxiliary_marginal(p: &ClassicalProblem, pol: &AuxiliaryPolicy) -> Vec<f64> {
    let mut pu = vec![0.0; pol.n_u()];
    for (s, row) in pol.p_u_given_s.iter().enumerate() {
        for (u, x) in row.iter().enumerate() {
            pu[u] += p.q_s()[s] * x;
        }
    }
    pu
}

/// Bin selection rule of the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EncodeMode {
    /// (j,k) drawn with weight Π_t P_{U|S}(u_t|s_t)/P_U(u_t).
    #[default]
    Likelihood,
    /// Uniform over bins jointly typical with s^n:
    /// |−(1/n) log P_US(u^n,s^n) − H(U,S)| ≤ eps · H(U,S).
    Typicality { eps: f64 },
}

/// Distribution of the encoder's (j,k) choice, flat as k·|J| + j; None on typicality failure.
pub fn selection_weights(
    cb: &ClassicalCodebook,
    m: usize,
    s: &[usize],
    p: &ClassicalProblem,
    pol: &AuxiliaryPolicy,
    mode: EncodeMode,
) -> Option<Vec<f64>> {
    let (nj, nk, _) = cb.sizes;
    let pu = auxiliary_marginal(p, pol);
    match mode {
        EncodeMode::Likelihood => {
            let logw: Vec<f64> = (0..nk * nj)
                .map(|i| {
                    let w = cb.word(cb.index(i % nj, i / nj, m));
                    w.iter()
                        .zip(s)
                        .map(|(&u, &st)| pol.p_u_given_s[st][u].ln() - pu[u].ln())
                        .sum()
                })
                .collect();
            let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top == f64::NEG_INFINITY {
                return Some(vec![1.0 / (nj * nk) as f64; nj * nk]);
            }
            let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
            let tot: f64 = w.iter().sum();
            Some(w.into_iter().map(|x| x / tot).collect())
        }
        EncodeMode::Typicality { eps } => {
            let p_us = |u: usize, st: usize| p.q_s()[st] * pol.p_u_given_s[st][u];
            let h: f64 = (0..p.n_s())
                .flat_map(|st| (0..pol.n_u()).map(move |u| (u, st)))
                .map(|(u, st)| p_us(u, st))
                .filter(|&x| x > 0.0)
                .map(|x| -x * x.log2())
                .sum();
            let n = s.len() as f64;
            let typical: Vec<bool> = (0..nk * nj)
                .map(|i| {
                    let w = cb.word(cb.index(i % nj, i / nj, m));
                    let mut lp = 0.0;
                    for (&u, &st) in w.iter().zip(s) {
                        let x = p_us(u, st);
                        if x <= 0.0 {
                            return false;
                        }
                        lp += x.log2();
                    }
                    (-lp / n - h).abs() <= eps * h
                })
                .collect();
            let count = typical.iter().filter(|&&t| t).count();
            if count == 0 {
                return None;
            }
            Some(
                typical
                    .iter()
                    .map(|&t| if t { 1.0 / count as f64 } else { 0.0 })
                    .collect(),
            )
        }
    }
}

/// Encoder output (j, k, a^n).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoded {
    pub j: usize,
    pub k: usize,
    pub a: Vec<usize>,
}

/// Picks a bin for message m under state s^n and draws a^n symbol by symbol from P_{A|US}.
pub fn gp_encode<R: Rng + ?Sized>(
    cb: &ClassicalCodebook,
    m: usize,
    s: &[usize],
    p: &ClassicalProblem,
    pol: &AuxiliaryPolicy,
    mode: EncodeMode,
    rng: &mut R,
) -> Result<Encoded> {
    let w = selection_weights(cb, m, s, p, pol, mode).ok_or(Error::EncodingFailure)?;
    let pick = WeightedIndex::new(&w)
        .map_err(|e| Error::NotADistribution(e.to_string()))?
        .sample(rng);
    let (j, k) = (pick % cb.sizes.0, pick / cb.sizes.0);
    let word = cb.word(cb.index(j, k, m));
    let a = word
        .iter()
        .zip(s)
        .map(|(&u, &st)| {
            WeightedIndex::new(&pol.p_a_given_us[u][st])
                .map(|d| d.sample(rng))
                .map_err(|e| Error::NotADistribution(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Encoded { j, k, a })
}

/// ln P(b, s | u) per letter when the receiver sees the state, ln P(b | u) otherwise.
#[derive(Debug, Clone)]
pub struct DecodeModel {
    n_s: usize,
    n_b: usize,
    with_state: Vec<f64>,
    without_state: Vec<f64>,
}

impl DecodeModel {
    pub fn new(p: &ClassicalProblem, pol: &AuxiliaryPolicy) -> Self {
        let (n_u, n_s, n_b) = (pol.n_u(), p.n_s(), p.n_b());
        let pu = auxiliary_marginal(p, pol);
        let mut with_state = vec![f64::NEG_INFINITY; n_u * n_s * n_b];
        let mut without_state = vec![f64::NEG_INFINITY; n_u * n_b];
        for u in 0..n_u {
            for b in 0..n_b {
                let mut marg = 0.0;
                for s in 0..n_s {
                    let pb: f64 = (0..p.n_a())
                        .map(|a| pol.p_a_given_us[u][s][a] * p.w_b(a, s, b))
                        .sum();
                    let post = if pu[u] > 0.0 {
                        p.q_s()[s] * pol.p_u_given_s[s][u] / pu[u]
                    } else {
                        p.q_s()[s]
                    };
                    with_state[(u * n_s + s) * n_b + b] = (post * pb).ln();
                    marg += post * pb;
                }
                without_state[u * n_b + b] = marg.ln();
            }
        }
        DecodeModel {
            n_s,
            n_b,
            with_state,
            without_state,
        }
    }

    fn letter(&self, u: usize, s: Option<usize>, b: usize) -> f64 {
        match s {
            Some(s) => self.with_state[(u * self.n_s + s) * self.n_b + b],
            None => self.without_state[u * self.n_b + b],
        }
    }
}

/// Maximum-likelihood (ĵ, k̂, m̂); the lowest flat index wins ties.
pub fn ml_decode(
    cb: &ClassicalCodebook,
    b: &[usize],
    s: Option<&[usize]>,
    model: &DecodeModel,
) -> (usize, usize, usize) {
    let mut best = 0;
    let mut best_ll = f64::NEG_INFINITY;
    for idx in 0..cb.len() {
        let ll: f64 = cb
            .word(idx)
            .iter()
            .enumerate()
            .map(|(t, &u)| model.letter(u, s.map(|s| s[t]), b[t]))
            .sum();
        if ll > best_ll {
            best = idx;
            best_ll = ll;
        }
    }
    cb.triple(best)
}

fn product_law(rows: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for r in rows {
        let mut next = Vec::with_capacity(out.len() * r.len());
        for &x in &out {
            for &y in r {
                next.push(x * y);
            }
        }
        out = next;
    }
    out
}

fn checked_pow(base: usize, n: usize, cap: usize) -> Result<usize> {
    let mut x: u128 = 1;
    for _ in 0..n {
        x = x.saturating_mul(base as u128);
    }
    if x > cap as u128 {
        return Err(Error::CapExceeded {
            requested: x,
            cap: cap as u128,
        });
    }
    Ok(x as usize)
}

/// Induced law of E^n, indexed with e_1 most significant, and its TV to Q₀^{⊗n}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WardenDistribution {
    pub probs: Vec<f64>,
    pub tv: f64,
}

/// Exact P̂_{E^n} for a fixed codebook: uniform message, state s^n ~ Q_S^{⊗n},
/// the encoder's bin law, and symbolwise P_{A|US}. A typicality failure falls back to a uniform bin.
pub fn exact_warden_distribution(
    cb: &ClassicalCodebook,
    pol: &AuxiliaryPolicy,
    p: &ClassicalProblem,
    mode: EncodeMode,
    state_cap: usize,
) -> Result<WardenDistribution> {
    let n = cb.n;
    let ne = checked_pow(p.n_e(), n, OUTPUT_CAP)?;
    let ns = checked_pow(p.n_s(), n, state_cap)?;
    let (nj, nk, nm) = cb.sizes;
    let r_e = |u: usize, s: usize| -> Vec<f64> {
        (0..p.n_e())
            .map(|e| {
                (0..p.n_a())
                    .map(|a| pol.p_a_given_us[u][s][a] * p.w_e(a, s, e))
                    .sum()
            })
            .collect()
    };
    let mut probs = vec![0.0; ne];
    let mut s = vec![0usize; n];
    for code in 0..ns {
        let mut c = code;
        for t in (0..n).rev() {
            s[t] = c % p.n_s();
            c /= p.n_s();
        }
        let ps: f64 = s.iter().map(|&x| p.q_s()[x]).product();
        if ps == 0.0 {
            continue;
        }
        for m in 0..nm {
            let w = selection_weights(cb, m, &s, p, pol, mode)
                .unwrap_or_else(|| vec![1.0 / (nj * nk) as f64; nj * nk]);
            for (i, &wi) in w.iter().enumerate() {
                if wi == 0.0 {
                    continue;
                }
                let word = cb.word(cb.index(i % nj, i / nj, m));
                let rows: Vec<Vec<f64>> = word.iter().zip(&s).map(|(&u, &st)| r_e(u, st)).collect();
                let weight = ps * wi / nm as f64;
                for (x, y) in probs.iter_mut().zip(product_law(&rows)) {
                    *x += weight * y;
                }
            }
        }
    }
    let q0n = product_law(&vec![p.q0().to_vec(); n]);
    Ok(WardenDistribution {
        tv: total_variation(&probs, &q0n),
        probs,
    })
}

/// D(P ‖ Q) in bits; infinite when P charges a zero of Q.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&x, &y) in p.iter().zip(q) {
        if x > 0.0 {
            if y <= 0.0 {
                return f64::INFINITY;
            }
            d += x * (x / y).log2();
        }
    }
    d.max(0.0)
}

/// D_{1+α}(P_UE ‖ P_U × P_E) for a classical channel, in bits.
pub fn classical_renyi_mi(p_u: &[f64], p_e_given_u: &[Vec<f64>], alpha: f64) -> f64 {
    let p_e = output_law(p_u, p_e_given_u);
    let mut q = 0.0;
    for (pu, row) in p_u.iter().zip(p_e_given_u) {
        if *pu == 0.0 {
            continue;
        }
        for (x, y) in row.iter().zip(&p_e) {
            if *x > 0.0 {
                q += pu * x.powf(1.0 + alpha) * y.powf(-alpha);
            }
        }
    }
    q.log2() / alpha
}

fn output_law(p_u: &[f64], p_e_given_u: &[Vec<f64>]) -> Vec<f64> {
    let ne = p_e_given_u.first().map_or(0, |r| r.len());
    (0..ne)
        .map(|e| {
            p_u.iter()
                .zip(p_e_given_u)
                .map(|(pu, row)| pu * row[e])
                .sum()
        })
        .collect()
}

/// Distinct values under the grouping rule used for pinching: sorted gaps ≤ rel_tol · max.
pub fn distinct_count(values: &[f64], rel_tol: f64) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let scale = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let mut count = 0;
    let mut last = f64::NEG_INFINITY;
    for x in v {
        if count == 0 || x - last > rel_tol * scale {
            count += 1;
        }
        last = x;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ResolvabilityMode {
    Exact,
    MonteCarlo { codebooks: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvabilityEstimate {
    pub estimate: Estimate,
    pub exact: bool,
    pub num_codewords: usize,
    /// Codebooks enumerated or sampled.
    pub samples: u128,
    /// One-shot resolvability bound minimized over the default α grid, with R = log₂ of the codebook size.
    pub lemma1_bound: f64,
    pub lemma1_alpha: f64,
}

/// Classical one-shot resolvability bound for codebooks of `num_codewords` words of length n.
pub fn classical_lemma1_bound(
    p_u: &[f64],
    p_e_given_u: &[Vec<f64>],
    num_codewords: usize,
    n: usize,
) -> (f64, f64) {
    let p_e = output_law(p_u, p_e_given_u);
    let pen = product_law(&vec![p_e; n]);
    let v = distinct_count(&pen, crate::pinching::GROUP_TOL);
    let r = (num_codewords as f64).log2();
    default_alpha_grid()
        .into_iter()
        .map(|a| {
            (
                lemma1_formula(v, n as f64 * classical_renyi_mi(p_u, p_e_given_u, a), r, a),
                a,
            )
        })
        .fold(
            (f64::INFINITY, 0.0),
            |best, x| if x.0 < best.0 { x } else { best },
        )
}

fn codebook_divergence(words: &[usize], n: usize, word_laws: &[Vec<f64>], target: &[f64]) -> f64 {
    let mut mix = vec![0.0; target.len()];
    let inv = 1.0 / (words.len() / n) as f64;
    for w in words.chunks(n) {
        let law = product_law(&w.iter().map(|&u| word_laws[u].clone()).collect::<Vec<_>>());
        for (x, y) in mix.iter_mut().zip(law) {
            *x += inv * y;
        }
    }
    kl_divergence(&mix, target)
}

/// E_C D(P̂_{E^n} ‖ P_E^{⊗n}) for ⌊2^{nR}⌋ codewords drawn i.i.d. from P_U^{⊗n}.
pub fn resolvability_oracle(
    p_u: &[f64],
    p_e_given_u: &[Vec<f64>],
    r: f64,
    n: usize,
    mode: ResolvabilityMode,
) -> Result<ResolvabilityEstimate> {
    if p_u.len() != p_e_given_u.len() || p_u.is_empty() {
        return Err(Error::DimMismatch("P_U and P_E|U disagree on |U|".into()));
    }
    let n_words = block_size(r, n)?;
    if n_words == 0 || n_words > u32::MAX as u128 {
        return Err(Error::CapExceeded {
            requested: n_words,
            cap: u32::MAX as u128,
        });
    }
    let n_words = n_words as usize;
    checked_pow(p_e_given_u[0].len(), n, OUTPUT_CAP)?;
    let target = product_law(&vec![output_law(p_u, p_e_given_u); n]);
    let (lemma1_bound, lemma1_alpha) = classical_lemma1_bound(p_u, p_e_given_u, n_words, n);
    match mode {
        ResolvabilityMode::Exact => {
            let nu = p_u.len() as u128;
            let mut configs: u128 = 1;
            for _ in 0..n * n_words {
                configs = configs.saturating_mul(nu);
            }
            if configs > ENUMERATION_CAP {
                return Err(Error::CapExceeded {
                    requested: configs,
                    cap: ENUMERATION_CAP,
                });
            }
            let len = n * n_words;
            let mut words = vec![0usize; len];
            let mut mean = 0.0;
            for code in 0..configs {
                let mut c = code;
                for x in words.iter_mut() {
                    *x = (c % nu) as usize;
                    c /= nu;
                }
                let prob: f64 = words.iter().map(|&u| p_u[u]).product();
                if prob > 0.0 {
                    mean += prob * codebook_divergence(&words, n, p_e_given_u, &target);
                }
            }
            Ok(ResolvabilityEstimate {
                estimate: Estimate { mean, std_err: 0.0 },
                exact: true,
                num_codewords: n_words,
                samples: configs,
                lemma1_bound,
                lemma1_alpha,
            })
        }
        ResolvabilityMode::MonteCarlo { codebooks, seed } => {
            if codebooks < 2 {
                return Err(Error::InvalidParameter(
                    "Monte Carlo needs at least two codebooks".into(),
                ));
            }
            let dist =
                WeightedIndex::new(p_u).map_err(|e| Error::NotADistribution(e.to_string()))?;
            let samples: Vec<f64> = (0..codebooks)
                .into_par_iter()
                .map(|i| {
                    let mut rng = rng_from_seed(substream_seed(seed, i as u64));
                    let words: Vec<usize> =
                        (0..n * n_words).map(|_| dist.sample(&mut rng)).collect();
                    codebook_divergence(&words, n, p_e_given_u, &target)
                })
                .collect();
            Ok(ResolvabilityEstimate {
                estimate: Estimate::from_samples(&samples),
                exact: false,
                num_codewords: n_words,
                samples: codebooks as u128,
                lemma1_bound,
                lemma1_alpha,
            })
        }
    }
}

/// Setup of an end-to-end classical run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSimConfig {
    pub n: usize,
    pub rates: ClassicalRates,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: EncodeMode,
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSimReport {
    pub config: ClassicalSimConfig,
    pub sizes: (usize, usize, usize),
    /// Pr[(k̂, m̂) ≠ (k, m)].
    pub error_km: Estimate,
    /// Pr[(ĵ, k̂, m̂) ≠ (j, k, m)].
    pub error_jkm: Estimate,
    pub encoding_failure: Estimate,
}

struct TrialOutcome {
    err_km: bool,
    err_jkm: bool,
    enc_fail: bool,
}

fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> Result<usize> {
    Ok(WeightedIndex::new(row)
        .map_err(|e| Error::NotADistribution(e.to_string()))?
        .sample(rng))
}

fn one_trial(
    p: &ClassicalProblem,
    pol: &AuxiliaryPolicy,
    cfg: &ClassicalSimConfig,
    sizes: (usize, usize, usize),
    model: &DecodeModel,
    rng: &mut SimRng,
) -> Result<TrialOutcome> {
    let n = cfg.n;
    let cb = sample_classical_codebook(&auxiliary_marginal(p, pol), n, sizes, rng)?;
    let m = rng.random_range(0..sizes.2);
    let s: Vec<usize> = (0..n)
        .map(|_| sample_row(p.q_s(), rng))
        .collect::<Result<_>>()?;
    let (enc, enc_fail) = match gp_encode(&cb, m, &s, p, pol, cfg.mode, rng) {
        Ok(e) => (e, false),
        Err(Error::EncodingFailure) => (
            Encoded {
                j: 0,
                k: 0,
                a: vec![p.x0(); n],
            },
            true,
        ),
        Err(e) => return Err(e),
    };
    let mut b = Vec::with_capacity(n);
    for (&a, &st) in enc.a.iter().zip(&s) {
        let row: Vec<f64> = (0..p.n_b() * p.n_e())
            .map(|i| p.w(a, st, i / p.n_e(), i % p.n_e()))
            .collect();
        b.push(sample_row(&row, rng)? / p.n_e());
    }
    let csi = if p.receiver_csi() {
        Some(s.as_slice())
    } else {
        None
    };
    let (jh, kh, mh) = ml_decode(&cb, &b, csi, model);
    let err_km = enc_fail || (kh, mh) != (enc.k, m);
    Ok(TrialOutcome {
        err_km,
        err_jkm: err_km || jh != enc.j,
        enc_fail,
    })
}

/// Fresh random codebook, message, state and channel noise per trial.
pub fn simulate_classical(
    p: &ClassicalProblem,
    pol: &AuxiliaryPolicy,
    cfg: &ClassicalSimConfig,
) -> Result<ClassicalSimReport> {
    if cfg.trials < 30 {
        return Err(Error::InvalidParameter(format!(
            "{} trials; at least 30 are required",
            cfg.trials
        )));
    }
    pol.validate()?;
    let sizes = block_sizes(&cfg.rates, cfg.n, cfg.cap)?;
    let model = DecodeModel::new(p, pol);
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(substream_seed(cfg.seed, i as u64));
            one_trial(p, pol, cfg, sizes, &model, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&TrialOutcome) -> bool| {
        outcomes
            .iter()
            .map(|o| if f(o) { 1.0 } else { 0.0 })
            .collect::<Vec<_>>()
    };
    Ok(ClassicalSimReport {
        config: cfg.clone(),
        sizes,
        error_km: Estimate::from_samples(&col(|o| o.err_km)),
        error_jkm: Estimate::from_samples(&col(|o| o.err_jkm)),
        encoding_failure: Estimate::from_samples(&col(|o| o.enc_fail)),
    })
}
