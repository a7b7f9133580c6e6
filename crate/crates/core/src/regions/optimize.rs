use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{holevo_mutual_info, trace_distance};
use crate::error::{Error, Result};
use crate::numerics::Numerics;
use crate::random::{random_distribution, rng_from_seed, substream_seed};
use crate::states::{
    check_csi_consistency, induced_cq_output, innocent_output, CQState, Factor, ProblemInstance,
};

use super::classical::{
    classical_region_evaluate, total_variation, warden_marginal, AuxiliaryPolicy, ClassicalProblem,
    ClassicalWhich,
};

const IMPROVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Auxiliary cardinality; None means |A|·|S| + 3.
    pub n_u: Option<usize>,
    /// Simplex resolution: coordinates are multiples of 1/levels.
    pub levels: usize,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub seed: u64,
    /// Pull P_{A|US} onto {P_E = Q₀} before each evaluation.
    pub project_covert: bool,
    pub stealth: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            n_u: None,
            levels: 32,
            restarts: 6,
            max_sweeps: 40,
            seed: 0,
            project_covert: true,
            stealth: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub policy: AuxiliaryPolicy,
    pub value: f64,
    pub feasible_found: bool,
    pub covert_gap: f64,
    pub evaluations: usize,
}

/// Integer compositions of `levels` per simplex row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Grid {
    /// u[s][u]; a single row when U is independent of S.
    u: Vec<Vec<u32>>,
    /// a[u][s][a]
    a: Vec<Vec<Vec<u32>>>,
}

fn round_composition(p: &[f64], levels: u32) -> Vec<u32> {
    let scaled: Vec<f64> = p.iter().map(|x| x * levels as f64).collect();
    let mut out: Vec<u32> = scaled.iter().map(|x| x.floor() as u32).collect();
    let mut rest = levels - out.iter().sum::<u32>();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&i, &j| {
        (scaled[j] - scaled[j].floor())
            .total_cmp(&(scaled[i] - scaled[i].floor()))
            .then(i.cmp(&j))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        out[i] += 1;
        rest -= 1;
    }
    out
}

impl Grid {
    fn innocent(n_u: usize, n_s: usize, n_a: usize, x0: usize, levels: u32, u_rows: usize) -> Self {
        let u_row = round_composition(&vec![1.0 / n_u as f64; n_u], levels);
        let mut a_row = vec![0; n_a];
        a_row[x0] = levels;
        Grid {
            u: vec![u_row; u_rows],
            a: vec![vec![a_row; n_s]; n_u],
        }
    }

    fn random<R: Rng>(
        n_u: usize,
        n_s: usize,
        n_a: usize,
        levels: u32,
        u_rows: usize,
        rng: &mut R,
    ) -> Self {
        let u = (0..u_rows)
            .map(|_| round_composition(&random_distribution(n_u, rng), levels))
            .collect();
        let a = (0..n_u)
            .map(|_| {
                (0..n_s)
                    .map(|_| round_composition(&random_distribution(n_a, rng), levels))
                    .collect()
            })
            .collect();
        Grid { u, a }
    }

    fn to_policy(&self, n_s: usize, levels: u32) -> AuxiliaryPolicy {
        let l = levels as f64;
        let row = |r: &Vec<u32>| r.iter().map(|&c| c as f64 / l).collect::<Vec<f64>>();
        let p_u_given_s = (0..n_s)
            .map(|s| row(&self.u[s.min(self.u.len() - 1)]))
            .collect();
        let p_a_given_us = self
            .a
            .iter()
            .map(|per_s| per_s.iter().map(row).collect())
            .collect();
        AuxiliaryPolicy {
            p_u_given_s,
            p_a_given_us,
        }
    }

    /// Every single-unit transfer within one row, in a fixed order.
    fn neighbours(&self) -> Vec<Grid> {
        let mut out = Vec::new();
        let transfers = |row: &Vec<u32>| {
            let mut t = Vec::new();
            for i in 0..row.len() {
                if row[i] == 0 {
                    continue;
                }
                for j in 0..row.len() {
                    if i != j {
                        t.push((i, j));
                    }
                }
            }
            t
        };
        for s in 0..self.u.len() {
            for (i, j) in transfers(&self.u[s]) {
                let mut g = self.clone();
                g.u[s][i] -= 1;
                g.u[s][j] += 1;
                out.push(g);
            }
        }
        for u in 0..self.a.len() {
            for s in 0..self.a[u].len() {
                for (i, j) in transfers(&self.a[u][s]) {
                    let mut g = self.clone();
                    g.a[u][s][i] -= 1;
                    g.a[u][s][j] += 1;
                    out.push(g);
                }
            }
        }
        out
    }
}

/// Dykstra projection of P_{A|US} onto {rows on the simplex, P_E = Q₀} with P_{U|S} held fixed.
pub fn project_covert(p: &ClassicalProblem, pol: &AuxiliaryPolicy) -> AuxiliaryPolicy {
    let (n_u, n_s, n_a, n_e) = (pol.n_u(), p.n_s(), p.n_a(), p.n_e());
    let nv = n_u * n_s * n_a;
    let idx = |u: usize, s: usize, a: usize| (u * n_s + s) * n_a + a;
    let rows = n_u * n_s + n_e;
    let mut m = DMatrix::<f64>::zeros(rows, nv);
    let mut rhs = DVector::<f64>::zeros(rows);
    for u in 0..n_u {
        for s in 0..n_s {
            for a in 0..n_a {
                m[(u * n_s + s, idx(u, s, a))] = 1.0;
                let w = p.q_s()[s] * pol.p_u_given_s[s][u];
                for e in 0..n_e {
                    m[(n_u * n_s + e, idx(u, s, a))] = w * p.w_e(a, s, e);
                }
            }
            rhs[u * n_s + s] = 1.0;
        }
    }
    for e in 0..n_e {
        rhs[n_u * n_s + e] = p.q0()[e];
    }
    let gram_pinv = (&m * m.transpose())
        .pseudo_inverse(1e-12)
        .unwrap_or_else(|_| DMatrix::zeros(rows, rows));
    let proj_op = m.transpose() * gram_pinv;
    let affine = |x: &DVector<f64>| x - &proj_op * (&m * x - &rhs);
    let mut x = DVector::from_fn(nv, |i, _| {
        let (us, a) = (i / n_a, i % n_a);
        pol.p_a_given_us[us / n_s][us % n_s][a]
    });
    let mut pcorr = DVector::<f64>::zeros(nv);
    let mut qcorr = DVector::<f64>::zeros(nv);
    for _ in 0..3000 {
        let y = affine(&(&x + &pcorr));
        pcorr = &x + &pcorr - &y;
        let z = (&y + &qcorr).map(|v| v.max(0.0));
        qcorr = &y + &qcorr - &z;
        let moved = (&z - &x).amax();
        let gap = (&z - &y).amax();
        x = z;
        if moved < 1e-14 && gap < 1e-12 {
            break;
        }
    }
    let mut p_a_given_us = vec![vec![vec![0.0; n_a]; n_s]; n_u];
    for u in 0..n_u {
        for s in 0..n_s {
            let row: Vec<f64> = (0..n_a).map(|a| x[idx(u, s, a)].max(0.0)).collect();
            let tot: f64 = row.iter().sum();
            p_a_given_us[u][s] = if tot > 0.0 {
                row.iter().map(|v| v / tot).collect()
            } else {
                pol.p_a_given_us[u][s].clone()
            };
        }
    }
    AuxiliaryPolicy {
        p_u_given_s: pol.p_u_given_s.clone(),
        p_a_given_us,
    }
}

struct Evaluated {
    value: Option<f64>,
    policy: AuxiliaryPolicy,
    gap: f64,
}

fn objective(
    p: &ClassicalProblem,
    grid: &Grid,
    which: ClassicalWhich,
    weights: (f64, f64),
    cfg: &SearchConfig,
    num: &Numerics,
) -> Evaluated {
    let mut policy = grid.to_policy(p.n_s(), cfg.levels as u32);
    if !cfg.stealth && cfg.project_covert {
        let gap = total_variation(&warden_marginal(p, &policy).unwrap_or_default(), p.q0());
        if gap > num.covert_tol {
            policy = project_covert(p, &policy);
        }
    }
    let gap = warden_marginal(p, &policy).map_or(f64::INFINITY, |pe| total_variation(&pe, p.q0()));
    let value = match classical_region_evaluate(p, &policy, which, cfg.stealth, num) {
        Ok(ev) => match (&ev.region, ev.value) {
            (Some(region), _) => Some(region.support_value(weights.0, weights.1)),
            (None, v) => v,
        },
        Err(_) => None,
    };
    Evaluated { value, policy, gap }
}

fn better(a: &Option<f64>, b: &Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => *x > *y + IMPROVE_TOL,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Best-found policy under covertness for the scalarized objective w_R R + w_RK R_K
/// (scalar theorems ignore the weights).
pub fn optimize_auxiliary(
    p: &ClassicalProblem,
    weights: (f64, f64),
    which: ClassicalWhich,
    cfg: &SearchConfig,
    num: &Numerics,
) -> Result<OptimizeResult> {
    if cfg.levels == 0 || cfg.restarts == 0 {
        return Err(Error::InvalidParameter(
            "search needs at least one level and one restart".into(),
        ));
    }
    let n_u = cfg.n_u.unwrap_or_else(|| p.default_n_u());
    if n_u == 0 {
        return Err(Error::InvalidParameter("|U| must be positive".into()));
    }
    let (n_s, n_a) = (p.n_s(), p.n_a());
    let u_rows = if which == ClassicalWhich::Causal {
        1
    } else {
        n_s
    };
    let levels = cfg.levels as u32;
    let runs: Vec<(Grid, Evaluated, usize)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut grid = if r == 0 {
                Grid::innocent(n_u, n_s, n_a, p.x0(), levels, u_rows)
            } else {
                let mut rng = rng_from_seed(substream_seed(cfg.seed, r as u64));
                Grid::random(n_u, n_s, n_a, levels, u_rows, &mut rng)
            };
            let mut cur = objective(p, &grid, which, weights, cfg, num);
            let mut evals = 1;
            // First-improvement scan; after a move the neighbourhood is rebuilt
            // around the new grid and the scan resumes at the same position.
            for _ in 0..cfg.max_sweeps {
                let mut improved = false;
                let mut k = 0;
                let mut nbrs = grid.neighbours();
                while k < nbrs.len() {
                    let cand = objective(p, &nbrs[k], which, weights, cfg, num);
                    evals += 1;
                    if better(&cand.value, &cur.value) {
                        grid = nbrs.swap_remove(k);
                        cur = cand;
                        improved = true;
                        nbrs = grid.neighbours();
                    }
                    k += 1;
                }
                if !improved {
                    break;
                }
            }
            (grid, cur, evals)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.2).sum();
    let mut best: Option<&(Grid, Evaluated, usize)> = None;
    for run in &runs {
        best = match best {
            None => Some(run),
            Some(b) => {
                let tie = match (run.1.value, b.1.value) {
                    (Some(x), Some(y)) => (x - y).abs() <= IMPROVE_TOL,
                    (None, None) => true,
                    _ => false,
                };
                if better(&run.1.value, &b.1.value) || (tie && run.0 < b.0) {
                    Some(run)
                } else {
                    Some(b)
                }
            }
        };
    }
    let best = best.expect("at least one restart");
    match best.1.value {
        Some(value) => Ok(OptimizeResult {
            policy: best.1.policy.clone(),
            value,
            feasible_found: true,
            covert_gap: best.1.gap,
            evaluations,
        }),
        None => Err(Error::CovertInfeasible(format!(
            "no policy within TV {} of Q0 among {evaluations} evaluated",
            num.covert_tol
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausalRate {
    pub value: f64,
    pub best_index: Option<usize>,
    /// Some candidate had I(U;B) > I(U;E).
    pub side_condition: bool,
    /// Some candidate met the covertness constraint.
    pub covert_ok: bool,
    pub i_ub: f64,
    pub i_ue: f64,
}

fn causal_pick(cands: &[(f64, f64, bool)]) -> Result<CausalRate> {
    let covert_ok = cands.iter().any(|c| c.2);
    if !covert_ok {
        return Err(Error::CovertInfeasible(
            "no candidate policy meets the covertness constraint".into(),
        ));
    }
    let mut best = CausalRate {
        value: 0.0,
        best_index: None,
        side_condition: false,
        covert_ok,
        i_ub: 0.0,
        i_ue: 0.0,
    };
    for (i, &(i_ub, i_ue, ok)) in cands.iter().enumerate() {
        if ok && i_ub > i_ue {
            best.side_condition = true;
            if best.best_index.is_none() || i_ub > best.value + IMPROVE_TOL {
                best = CausalRate {
                    value: i_ub,
                    best_index: Some(i),
                    i_ub,
                    i_ue,
                    ..best
                };
            }
        }
    }
    Ok(best)
}

/// max I(U;B) over candidate policies with U independent of S, I(U;B) > I(U;E) and P_E = Q₀.
pub fn causal_rate_classical(
    p: &ClassicalProblem,
    policies: &[AuxiliaryPolicy],
    stealth: bool,
    num: &Numerics,
) -> Result<CausalRate> {
    let mut cands = Vec::with_capacity(policies.len());
    for pol in policies {
        let ev = classical_region_evaluate(p, pol, ClassicalWhich::Causal, true, num)?;
        cands.push((ev.terms.i_ub, ev.terms.i_ue, stealth || ev.covert_ok));
    }
    causal_pick(&cands)
}

/// Quantum counterpart over candidate ensembles ρ_UAS whose S-marginal is the same for every u.
pub fn causal_rate_quantum(
    p: &ProblemInstance,
    ensembles: &[CQState],
    stealth: bool,
    num: &Numerics,
) -> Result<CausalRate> {
    let rho_s = p.csi_marginal()?;
    let rho0 = innocent_output(p)?;
    let mut cands = Vec::with_capacity(ensembles.len());
    for ens in ensembles {
        let csi = check_csi_consistency(ens, p, num.csi_tol)?;
        if !csi.consistent {
            return Err(Error::CsiMismatch {
                deviation: csi.deviation,
            });
        }
        for (u, c) in ens.conditionals().iter().enumerate() {
            if ens.probs()[u] == 0.0 {
                continue;
            }
            let cs = c.reduce(ens.layout(), &[Factor::S])?;
            if trace_distance(&cs, &rho_s)? > num.csi_tol {
                return Err(Error::InvalidParameter(format!(
                    "label {u} is correlated with the state"
                )));
            }
        }
        let out = induced_cq_output(&p.channel, ens)?;
        let ub = out.marginal(&[Factor::B])?;
        let ue = out.marginal(&[Factor::E])?;
        let ok = trace_distance(&ue.average(), &rho0)? <= num.covert_tol;
        cands.push((
            holevo_mutual_info(&ub)?,
            holevo_mutual_info(&ue)?,
            stealth || ok,
        ));
    }
    causal_pick(&cands)
}
