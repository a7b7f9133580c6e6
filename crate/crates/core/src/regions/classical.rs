use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::divergence::{classical_info_terms, ClassicalTerms};
use crate::error::{Error, Result};
use crate::numerics::Numerics;
use crate::pmf::{JointPmf, Var};

use super::polygon::{Constraint, RateRegion};
use super::quantum::{cc_csk_constraints, csc_csk_constraints, RegionTerms};

const ROW_TOL: f64 = 1e-12;
const DEGRADED_TOL: f64 = 1e-6;

fn check_row(row: &[f64], what: &str) -> Result<()> {
    if row.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::NotADistribution(format!(
            "{what} has a negative or non-finite entry"
        )));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > ROW_TOL {
        return Err(Error::NotADistribution(format!("{what} sums to {s}")));
    }
    Ok(())
}

/// Classical state-dependent channel W_{BE|AS} with state law Q_S and innocent symbol x₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassicalProblemRaw", into = "ClassicalProblemRaw")]
pub struct ClassicalProblem {
    n_a: usize,
    n_s: usize,
    n_b: usize,
    n_e: usize,
    q_s: Vec<f64>,
    /// W(b,e|a,s) at ((a·|S| + s)·|B| + b)·|E| + e.
    w: Vec<f64>,
    x0: usize,
    receiver_csi: bool,
    q0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalProblemRaw {
    pub q_s: Vec<f64>,
    /// w[a][s][b][e]
    pub w: Vec<Vec<Vec<Vec<f64>>>>,
    pub x0: usize,
    #[serde(default = "default_true")]
    pub receiver_csi: bool,
}

fn default_true() -> bool {
    true
}

impl TryFrom<ClassicalProblemRaw> for ClassicalProblem {
    type Error = Error;

    fn try_from(raw: ClassicalProblemRaw) -> Result<Self> {
        let n_a = raw.w.len();
        let n_s = raw.q_s.len();
        let n_b = raw.w.first().and_then(|r| r.first()).map_or(0, |r| r.len());
        let n_e = raw
            .w
            .first()
            .and_then(|r| r.first())
            .and_then(|r| r.first())
            .map_or(0, |r| r.len());
        let mut w = Vec::with_capacity(n_a * n_s * n_b * n_e);
        for (a, per_s) in raw.w.iter().enumerate() {
            if per_s.len() != n_s {
                return Err(Error::DimMismatch(format!(
                    "w[{a}] has {} state rows, |S| = {n_s}",
                    per_s.len()
                )));
            }
            for (s, per_b) in per_s.iter().enumerate() {
                if per_b.len() != n_b || per_b.iter().any(|r| r.len() != n_e) {
                    return Err(Error::DimMismatch(format!(
                        "w[{a}][{s}] is not {n_b}x{n_e}"
                    )));
                }
                w.extend(per_b.iter().flatten());
            }
        }
        ClassicalProblem::new(n_a, n_s, n_b, n_e, raw.q_s, w, raw.x0, raw.receiver_csi)
    }
}

impl From<ClassicalProblem> for ClassicalProblemRaw {
    fn from(p: ClassicalProblem) -> Self {
        let w = (0..p.n_a)
            .map(|a| {
                (0..p.n_s)
                    .map(|s| {
                        (0..p.n_b)
                            .map(|b| (0..p.n_e).map(|e| p.w(a, s, b, e)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ClassicalProblemRaw {
            q_s: p.q_s,
            w,
            x0: p.x0,
            receiver_csi: p.receiver_csi,
        }
    }
}

impl ClassicalProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_a: usize,
        n_s: usize,
        n_b: usize,
        n_e: usize,
        q_s: Vec<f64>,
        w: Vec<f64>,
        x0: usize,
        receiver_csi: bool,
    ) -> Result<Self> {
        if n_a == 0 || n_s == 0 || n_b == 0 || n_e == 0 {
            return Err(Error::DimMismatch("empty alphabet".into()));
        }
        if q_s.len() != n_s || w.len() != n_a * n_s * n_b * n_e {
            return Err(Error::DimMismatch(format!(
                "tables do not match alphabets |A|={n_a} |S|={n_s} |B|={n_b} |E|={n_e}"
            )));
        }
        if x0 >= n_a {
            return Err(Error::InvalidParameter(format!(
                "innocent symbol {x0} outside |A| = {n_a}"
            )));
        }
        check_row(&q_s, "Q_S")?;
        let row = n_b * n_e;
        for (i, r) in w.chunks(row).enumerate() {
            check_row(r, &format!("W(.|a={},s={})", i / n_s, i % n_s))?;
        }
        let mut p = ClassicalProblem {
            n_a,
            n_s,
            n_b,
            n_e,
            q_s,
            w,
            x0,
            receiver_csi,
            q0: Vec::new(),
        };
        p.q0 = (0..n_e)
            .map(|e| (0..n_s).map(|s| p.q_s[s] * p.w_e(x0, s, e)).sum())
            .collect();
        Ok(p)
    }

    /// Builds W from a closure over (a, s, b, e).
    #[allow(clippy::too_many_arguments)]
    pub fn from_fn(
        n_a: usize,
        n_s: usize,
        n_b: usize,
        n_e: usize,
        q_s: Vec<f64>,
        f: impl Fn(usize, usize, usize, usize) -> f64,
        x0: usize,
        receiver_csi: bool,
    ) -> Result<Self> {
        let mut w = Vec::with_capacity(n_a * n_s * n_b * n_e);
        for a in 0..n_a {
            for s in 0..n_s {
                for b in 0..n_b {
                    for e in 0..n_e {
                        w.push(f(a, s, b, e));
                    }
                }
            }
        }
        Self::new(n_a, n_s, n_b, n_e, q_s, w, x0, receiver_csi)
    }

    /// W(b,e|a,s) = W_B(b|a,s) · W_E(e|a,s).
    pub fn product(
        q_s: Vec<f64>,
        w_b: &[Vec<Vec<f64>>],
        w_e: &[Vec<Vec<f64>>],
        x0: usize,
        receiver_csi: bool,
    ) -> Result<Self> {
        let n_a = w_b.len();
        let n_s = q_s.len();
        let n_b = w_b.first().and_then(|r| r.first()).map_or(0, |r| r.len());
        let n_e = w_e.first().and_then(|r| r.first()).map_or(0, |r| r.len());
        if w_e.len() != n_a || w_b.iter().chain(w_e).any(|r| r.len() != n_s) {
            return Err(Error::DimMismatch(
                "marginal channel tables disagree".into(),
            ));
        }
        Self::from_fn(
            n_a,
            n_s,
            n_b,
            n_e,
            q_s,
            |a, s, b, e| w_b[a][s][b] * w_e[a][s][e],
            x0,
            receiver_csi,
        )
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    pub fn q_s(&self) -> &[f64] {
        &self.q_s
    }

    pub fn x0(&self) -> usize {
        self.x0
    }

    pub fn receiver_csi(&self) -> bool {
        self.receiver_csi
    }

    /// Warden output law without communication.
    pub fn q0(&self) -> &[f64] {
        &self.q0
    }

    pub fn w(&self, a: usize, s: usize, b: usize, e: usize) -> f64 {
        self.w[((a * self.n_s + s) * self.n_b + b) * self.n_e + e]
    }

    pub fn w_b(&self, a: usize, s: usize, b: usize) -> f64 {
        (0..self.n_e).map(|e| self.w(a, s, b, e)).sum()
    }

    pub fn w_e(&self, a: usize, s: usize, e: usize) -> f64 {
        (0..self.n_b).map(|b| self.w(a, s, b, e)).sum()
    }

    /// Default auxiliary cardinality |A|·|S| + 3.
    pub fn default_n_u(&self) -> usize {
        self.n_a * self.n_s + 3
    }
}

/// P_{U|S} and P_{A|US}.
#[derive(Debug, Clone, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AuxiliaryPolicy {
    /// p_u_given_s[s][u]
    pub p_u_given_s: Vec<Vec<f64>>,
    /// p_a_given_us[u][s][a]
    pub p_a_given_us: Vec<Vec<Vec<f64>>>,
}

impl AuxiliaryPolicy {
    pub fn new(p_u_given_s: Vec<Vec<f64>>, p_a_given_us: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let pol = AuxiliaryPolicy {
            p_u_given_s,
            p_a_given_us,
        };
        pol.validate()?;
        Ok(pol)
    }

    pub fn validate(&self) -> Result<()> {
        let n_s = self.p_u_given_s.len();
        let n_u = self.n_u();
        if n_s == 0 || n_u == 0 || self.p_a_given_us.len() != n_u {
            return Err(Error::DimMismatch("policy tables disagree on |U|".into()));
        }
        let n_a = self.n_a();
        for (s, row) in self.p_u_given_s.iter().enumerate() {
            if row.len() != n_u {
                return Err(Error::DimMismatch(format!(
                    "P(.|s={s}) has {} entries",
                    row.len()
                )));
            }
            check_row(row, &format!("P_U|S(.|{s})"))?;
        }
        for (u, per_s) in self.p_a_given_us.iter().enumerate() {
            if per_s.len() != n_s {
                return Err(Error::DimMismatch(format!(
                    "P_A|US(.|u={u}) has {} state rows",
                    per_s.len()
                )));
            }
            for (s, row) in per_s.iter().enumerate() {
                if row.len() != n_a {
                    return Err(Error::DimMismatch(format!(
                        "P_A|US(.|{u},{s}) has {} entries",
                        row.len()
                    )));
                }
                check_row(row, &format!("P_A|US(.|{u},{s})"))?;
            }
        }
        Ok(())
    }

    pub fn n_u(&self) -> usize {
        self.p_u_given_s.first().map_or(0, |r| r.len())
    }

    pub fn n_s(&self) -> usize {
        self.p_u_given_s.len()
    }

    pub fn n_a(&self) -> usize {
        self.p_a_given_us
            .first()
            .and_then(|r| r.first())
            .map_or(0, |r| r.len())
    }

    /// Every state and label sends the innocent symbol.
    pub fn innocent(n_u: usize, n_s: usize, n_a: usize, x0: usize) -> Self {
        let mut a_row = vec![0.0; n_a];
        a_row[x0] = 1.0;
        AuxiliaryPolicy {
            p_u_given_s: vec![vec![1.0 / n_u as f64; n_u]; n_s],
            p_a_given_us: vec![vec![a_row; n_s]; n_u],
        }
    }

    /// U uniform on |A| labels independent of S, A = U.
    pub fn uniform_identity(n_s: usize, n_a: usize) -> Self {
        AuxiliaryPolicy {
            p_u_given_s: vec![vec![1.0 / n_a as f64; n_a]; n_s],
            p_a_given_us: (0..n_a)
                .map(|u| vec![(0..n_a).map(|a| if a == u { 1.0 } else { 0.0 }).collect(); n_s])
                .collect(),
        }
    }

    /// U' = (U, S) with index u·|S| + s'; A still follows P_{A|US}(·|u, s').
    pub fn lift_superposition(&self) -> AuxiliaryPolicy {
        let (n_u, n_s) = (self.n_u(), self.n_s());
        let p_u_given_s = (0..n_s)
            .map(|s| {
                let mut row = vec![0.0; n_u * n_s];
                for u in 0..n_u {
                    row[u * n_s + s] = self.p_u_given_s[s][u];
                }
                row
            })
            .collect();
        let p_a_given_us = (0..n_u * n_s)
            .map(|u2| vec![self.p_a_given_us[u2 / n_s][u2 % n_s].clone(); n_s])
            .collect();
        AuxiliaryPolicy {
            p_u_given_s,
            p_a_given_us,
        }
    }

    /// Rows of P_{U|S} agree within `tol`.
    pub fn u_independent_of_s(&self, tol: f64) -> bool {
        let first = &self.p_u_given_s[0];
        self.p_u_given_s
            .iter()
            .all(|row| row.iter().zip(first).all(|(x, y)| (x - y).abs() <= tol))
    }

    fn check_against(&self, p: &ClassicalProblem) -> Result<()> {
        if self.n_s() != p.n_s || self.n_a() != p.n_a {
            return Err(Error::DimMismatch(format!(
                "policy over |S|={} |A|={} for a problem with |S|={} |A|={}",
                self.n_s(),
                self.n_a(),
                p.n_s,
                p.n_a
            )));
        }
        Ok(())
    }
}

/// P_SUABE = Q_S P_{U|S} P_{A|US} W_{BE|AS} on variables [S, U, A, B, E].
pub fn joint_distribution(p: &ClassicalProblem, pol: &AuxiliaryPolicy) -> Result<JointPmf> {
    pol.check_against(p)?;
    let n_u = pol.n_u();
    let (n_s, n_a, n_b, n_e) = (p.n_s, p.n_a, p.n_b, p.n_e);
    let mut probs = vec![0.0; n_s * n_u * n_a * n_b * n_e];
    for s in 0..n_s {
        for u in 0..n_u {
            let psu = p.q_s[s] * pol.p_u_given_s[s][u];
            if psu == 0.0 {
                continue;
            }
            for a in 0..n_a {
                let psua = psu * pol.p_a_given_us[u][s][a];
                if psua == 0.0 {
                    continue;
                }
                let base = (((s * n_u + u) * n_a + a) * n_b) * n_e;
                for b in 0..n_b {
                    for e in 0..n_e {
                        probs[base + b * n_e + e] = psua * p.w(a, s, b, e);
                    }
                }
            }
        }
    }
    JointPmf::new(
        vec![Var::S, Var::U, Var::A, Var::B, Var::E],
        vec![n_s, n_u, n_a, n_b, n_e],
        probs,
    )
}

/// Induced warden law P_E.
pub fn warden_marginal(p: &ClassicalProblem, pol: &AuxiliaryPolicy) -> Result<Vec<f64>> {
    pol.check_against(p)?;
    let mut pe = vec![0.0; p.n_e];
    for s in 0..p.n_s {
        for (u, &pu) in pol.p_u_given_s[s].iter().enumerate() {
            for a in 0..p.n_a {
                let w = p.q_s[s] * pu * pol.p_a_given_us[u][s][a];
                if w == 0.0 {
                    continue;
                }
                for (e, x) in pe.iter_mut().enumerate() {
                    *x += w * p.w_e(a, s, e);
                }
            }
        }
    }
    Ok(pe)
}

/// ½ Σ |P − Q|.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalWhich {
    /// Covert secret key capacity with full CSI (scalar).
    Thm3,
    /// Degraded-channel CC-CSK capacity region with full CSI.
    Thm4Degraded,
    /// CSC-CSK capacity region with full CSI.
    Thm6,
    /// Quantum-form CC-CSK region evaluated on classical terms.
    CcCsk,
    /// Quantum-form CSC-CSK region evaluated on classical terms.
    CscCsk,
    /// Causal-CSI covert rate (scalar), U independent of S.
    Causal,
}

impl ClassicalWhich {
    pub fn is_scalar(self) -> bool {
        matches!(self, ClassicalWhich::Thm3 | ClassicalWhich::Causal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Degradedness {
    pub degraded: bool,
    /// max |W_E − W_B T| over the best stochastic T found.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalEvaluation {
    pub which: ClassicalWhich,
    pub terms: ClassicalTerms,
    /// TV(P_E, Q₀).
    pub covert_gap: f64,
    pub covert_ok: bool,
    pub value: Option<f64>,
    pub region: Option<RateRegion>,
    /// Set for thm4_degraded.
    pub degradedness: Option<Degradedness>,
    /// Causal side condition I(U;B) > I(U;E).
    pub side_condition: Option<bool>,
}

pub fn thm3_value(t: &ClassicalTerms) -> f64 {
    t.i_ub_given_s - t.i_ue_given_s + t.h_s_given_e
}

pub fn thm4_constraints(t: &ClassicalTerms) -> Vec<Constraint> {
    vec![
        Constraint::new("R <= I(U;B|S)", 1.0, 0.0, t.i_ub_given_s),
        Constraint::new(
            "R_K <= I(U;B|E,S) + H(S|E)",
            0.0,
            1.0,
            t.i_ub_given_es + t.h_s_given_e,
        ),
        Constraint::new(
            "R + R_K <= I(U;B|S) + H(S)",
            1.0,
            1.0,
            t.i_ub_given_s + t.h_s,
        ),
    ]
}

pub fn thm6_constraints(t: &ClassicalTerms) -> Vec<Constraint> {
    vec![
        Constraint::new("R <= I(U;B|S)", 1.0, 0.0, t.i_ub_given_s),
        Constraint::new(
            "R + R_K <= I(U;B|S) - I(U;E|S) + H(S|E)",
            1.0,
            1.0,
            thm3_value(t),
        ),
    ]
}

fn raw_terms(t: &ClassicalTerms) -> RegionTerms {
    RegionTerms {
        i_ub: t.i_ub,
        i_us: t.i_us,
        i_ue: t.i_ue,
    }
}

/// Evaluates one policy; the theorems with full CSI require `receiver_csi`.
pub fn classical_region_evaluate(
    p: &ClassicalProblem,
    pol: &AuxiliaryPolicy,
    which: ClassicalWhich,
    stealth: bool,
    num: &Numerics,
) -> Result<ClassicalEvaluation> {
    let full_csi = matches!(
        which,
        ClassicalWhich::Thm3 | ClassicalWhich::Thm4Degraded | ClassicalWhich::Thm6
    );
    if full_csi && !p.receiver_csi {
        return Err(Error::InvalidParameter(format!(
            "{which:?} needs the state at the receiver"
        )));
    }
    if which == ClassicalWhich::Causal && !pol.u_independent_of_s(ROW_TOL) {
        return Err(Error::InvalidParameter(
            "causal policies must draw U independently of S".into(),
        ));
    }
    let covert_gap = total_variation(&warden_marginal(p, pol)?, &p.q0);
    let covert_ok = covert_gap <= num.covert_tol;
    if !stealth && !covert_ok {
        return Err(Error::CovertInfeasible(format!(
            "TV(P_E, Q0) = {covert_gap:.3e}"
        )));
    }
    let terms = classical_info_terms(&joint_distribution(p, pol)?)?;
    let mut ev = ClassicalEvaluation {
        which,
        terms,
        covert_gap,
        covert_ok,
        value: None,
        region: None,
        degradedness: None,
        side_condition: None,
    };
    match which {
        ClassicalWhich::Thm3 => ev.value = Some(thm3_value(&terms)),
        ClassicalWhich::Thm4Degraded => {
            ev.region = Some(RateRegion::from_constraints(thm4_constraints(&terms)));
            ev.degradedness = Some(check_degraded(p));
        }
        ClassicalWhich::Thm6 => {
            ev.region = Some(RateRegion::from_constraints(thm6_constraints(&terms)))
        }
        ClassicalWhich::CcCsk => {
            ev.region = Some(RateRegion::from_constraints(cc_csk_constraints(
                &raw_terms(&terms),
            )))
        }
        ClassicalWhich::CscCsk => {
            ev.region = Some(RateRegion::from_constraints(csc_csk_constraints(
                &raw_terms(&terms),
            )))
        }
        ClassicalWhich::Causal => {
            let ok = terms.i_ub > terms.i_ue;
            ev.side_condition = Some(ok);
            ev.value = Some(if ok { terms.i_ub } else { 0.0 });
        }
    }
    Ok(ev)
}

/// Quantum-form terms under B ≜ (B̃,S), U ≜ (Ũ,S) next to their closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionTerms {
    /// Computed on the relabelled joint table.
    pub raw: RegionTerms,
    /// I(Ũ;B̃|S) + H(S), H(S), I(Ũ;E|S) + H(S) − H(S|E).
    pub transformed: RegionTerms,
    pub terms: ClassicalTerms,
    /// I(U;B) − I(U;E) on the relabelled table.
    pub thm3_via_transform: f64,
    pub thm3_direct: f64,
}

pub fn superposition_transform(
    p: &ClassicalProblem,
    pol: &AuxiliaryPolicy,
) -> Result<SuperpositionTerms> {
    if !p.receiver_csi {
        return Err(Error::InvalidParameter(
            "superposition needs the state at the receiver".into(),
        ));
    }
    let joint = joint_distribution(p, pol)?;
    let terms = classical_info_terms(&joint)?;
    let sube = joint.marginal(&[Var::S, Var::U, Var::B, Var::E])?;
    let (n_s, n_u, n_b, n_e) = (p.n_s, pol.n_u(), p.n_b, p.n_e);
    let (n_u2, n_b2) = (n_u * n_s, n_b * n_s);
    let mut probs = vec![0.0; n_s * n_u2 * n_b2 * n_e];
    for s in 0..n_s {
        for u in 0..n_u {
            for b in 0..n_b {
                for e in 0..n_e {
                    let x = sube.probs()[((s * n_u + u) * n_b + b) * n_e + e];
                    let (u2, b2) = (u * n_s + s, b * n_s + s);
                    probs[((s * n_u2 + u2) * n_b2 + b2) * n_e + e] = x;
                }
            }
        }
    }
    let lifted = JointPmf::new(
        vec![Var::S, Var::U, Var::B, Var::E],
        vec![n_s, n_u2, n_b2, n_e],
        probs,
    )?;
    let raw = RegionTerms {
        i_ub: lifted.mutual_info(&[Var::U], &[Var::B], &[])?,
        i_us: lifted.mutual_info(&[Var::U], &[Var::S], &[])?,
        i_ue: lifted.mutual_info(&[Var::U], &[Var::E], &[])?,
    };
    let transformed = RegionTerms {
        i_ub: terms.i_ub_given_s + terms.h_s,
        i_us: terms.h_s,
        i_ue: terms.i_ue_given_s + terms.h_s - terms.h_s_given_e,
    };
    Ok(SuperpositionTerms {
        raw,
        transformed,
        terms,
        thm3_via_transform: raw.i_ub - raw.i_ue,
        thm3_direct: thm3_value(&terms),
    })
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Searches for a stochastic T with W_E(e|a,s) = Σ_b W_B(b|a,s) T(e|b).
pub fn check_degraded(p: &ClassicalProblem) -> Degradedness {
    let m = p.n_a * p.n_s;
    let wb = DMatrix::from_fn(m, p.n_b, |i, b| p.w_b(i / p.n_s, i % p.n_s, b));
    let we = DMatrix::from_fn(m, p.n_e, |i, e| p.w_e(i / p.n_s, i % p.n_s, e));
    let pinv = wb
        .clone()
        .pseudo_inverse(1e-12)
        .unwrap_or_else(|_| DMatrix::zeros(p.n_b, m));
    let mut t = &pinv * &we;
    project_rows(&mut t);
    let step = 1.0 / wb.norm_squared().max(1e-12);
    let residual = |t: &DMatrix<f64>| (&wb * t - &we).abs().max();
    for _ in 0..5000 {
        if residual(&t) <= 1e-12 {
            break;
        }
        let grad = wb.transpose() * (&wb * &t - &we);
        t -= grad * step;
        project_rows(&mut t);
    }
    let r = residual(&t);
    Degradedness {
        degraded: r <= DEGRADED_TOL,
        residual: r,
    }
}

fn project_rows(t: &mut DMatrix<f64>) {
    for i in 0..t.nrows() {
        let row: Vec<f64> = t.row(i).iter().copied().collect();
        for (j, x) in project_simplex(&row).into_iter().enumerate() {
            t[(i, j)] = x;
        }
    }
}
