//! Finite joint distributions over named classical variables.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PMF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    S,
    U,
    A,
    B,
    E,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Probability table over the product alphabet of `vars`, row-major in `vars` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    vars: Vec<Var>,
    dims: Vec<usize>,
    probs: Vec<f64>,
}

pub fn plogp_sum(p: impl IntoIterator<Item = f64>) -> f64 {
    -p.into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| x * x.log2())
        .sum::<f64>()
}

impl JointPmf {
    pub fn new(vars: Vec<Var>, dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if vars.len() != dims.len() {
            return Err(Error::DimMismatch(
                "variable and dimension lists differ".into(),
            ));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::DimMismatch(format!("variable {v} listed twice")));
            }
        }
        let n: usize = dims.iter().product();
        if probs.len() != n {
            return Err(Error::DimMismatch(format!(
                "{} entries for table size {n}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(*p >= -PMF_TOL) || !p.is_finite()) {
            return Err(Error::NotADistribution(
                "negative or non-finite entry".into(),
            ));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > PMF_TOL {
            return Err(Error::NotADistribution(format!("table sums to {s}")));
        }
        Ok(JointPmf {
            vars,
            dims,
            probs: probs.into_iter().map(|p| p.max(0.0)).collect(),
        })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim_of(&self, v: Var) -> Option<usize> {
        self.vars.iter().position(|&w| w == v).map(|i| self.dims[i])
    }

    /// Marginal on `keep`, with variables in the order given.
    pub fn marginal(&self, keep: &[Var]) -> Result<JointPmf> {
        let pos: Vec<usize> = keep
            .iter()
            .map(|v| {
                self.vars
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::DimMismatch(format!("variable {v} not in table")))
            })
            .collect::<Result<_>>()?;
        let out_dims: Vec<usize> = pos.iter().map(|&i| self.dims[i]).collect();
        let mut out = vec![0.0; out_dims.iter().product()];
        let mut idx = vec![0usize; self.dims.len()];
        for &p in &self.probs {
            let mut o = 0;
            for (&i, &d) in pos.iter().zip(&out_dims) {
                o = o * d + idx[i];
            }
            out[o] += p;
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(JointPmf {
            vars: keep.to_vec(),
            dims: out_dims,
            probs: out,
        })
    }

    pub fn entropy(&self, of: &[Var]) -> Result<f64> {
        if of.is_empty() {
            return Ok(0.0);
        }
        Ok(plogp_sum(self.marginal(of)?.probs.iter().copied()))
    }

    /// H(a | given).
    pub fn conditional_entropy(&self, a: &[Var], given: &[Var]) -> Result<f64> {
        Ok(self.entropy(&union(a, given))? - self.entropy(given)?)
    }

    /// I(a; b | given).
    pub fn mutual_info(&self, a: &[Var], b: &[Var], given: &[Var]) -> Result<f64> {
        let ag = union(a, given);
        let bg = union(b, given);
        let abg = union(&ag, b);
        Ok(self.entropy(&ag)? + self.entropy(&bg)? - self.entropy(&abg)? - self.entropy(given)?)
    }
}

fn union(a: &[Var], b: &[Var]) -> Vec<Var> {
    let mut v = a.to_vec();
    for x in b {
        if !v.contains(x) {
            v.push(*x);
        }
    }
    v
}
