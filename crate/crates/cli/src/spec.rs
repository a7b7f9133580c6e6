//! JSON problem specs: `{"version": 1, "kind": "quantum" | "classical", ...}`.

use std::collections::BTreeMap;
use std::path::Path;

use covert_core::classical_sim::{ClassicalRates, EncodeMode};
use covert_core::linalg::ComplexMatrix;
use covert_core::regions::classical::ClassicalProblemRaw;
use covert_core::regions::{AuxiliaryPolicy, ClassicalProblem, SearchConfig};
use covert_core::states::{
    CQState, Csi, DensityMatrix, Factor, Layout, ProblemInstance, QuantumChannel,
};
use covert_core::Numerics;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exit::CliError;

pub const SPEC_VERSION: u32 = 1;

/// Complex matrix as paired real and imaginary row arrays; `im` defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn to_matrix(&self, what: &str) -> Result<ComplexMatrix, CliError> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || self.re.iter().any(|r| r.len() != cols) {
            return Err(CliError::parse(format!(
                "{what}: `re` must be a non-empty rectangular array"
            )));
        }
        if let Some(im) = &self.im {
            if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                return Err(CliError::parse(format!(
                    "{what}: `im` must have the shape of `re` ({rows}x{cols})"
                )));
            }
        }
        let data = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| {
                Complex64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
            })
            .collect();
        Ok(ComplexMatrix::from_vec(rows, cols, data)?)
    }

    pub fn to_state(&self, what: &str, num: &Numerics) -> Result<DensityMatrix, CliError> {
        DensityMatrix::with_tol(self.to_matrix(what)?, num.state_tol)
            .map_err(|e| CliError::from(e).context(what))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub a: usize,
    pub s: usize,
    pub b: usize,
    pub e: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CsiJson {
    Marginal(MatrixJson),
    /// ρ_{S̄S} with S̄ first.
    Bipartite {
        state: MatrixJson,
        dim_sbar: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleJson {
    pub probs: Vec<f64>,
    /// States on A ⊗ S, A first.
    pub conditionals: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesJson {
    pub r: f64,
    pub r_k: f64,
    pub r_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumSpec {
    pub dims: Dims,
    /// Kraus operators from A ⊗ S to B ⊗ E.
    pub kraus: Vec<MatrixJson>,
    pub innocent: MatrixJson,
    pub csi: CsiJson,
    pub ensemble: EnsembleJson,
    /// Candidate ensembles with U independent of S for the causal rate; defaults to `ensemble`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub causal_ensembles: Vec<EnsembleJson>,
    pub rates: RatesJson,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSpec {
    pub problem: ClassicalProblemRaw,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<AuxiliaryPolicy>,
    /// Candidate policies for the causal rate; defaults to `policy`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub causal_policies: Vec<AuxiliaryPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<ClassicalRates>,
    /// Blocklength of the end-to-end simulation.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub mode: EncodeMode,
    /// Simulate with U ≜ (Ũ, S); the natural choice with receiver CSI.
    #[serde(default)]
    pub superposition: bool,
    /// Scalarization weights (w_R, w_RK) for the auxiliary search.
    #[serde(default = "default_weights")]
    pub weights: (f64, f64),
    #[serde(default)]
    pub search: SearchConfig,
}

fn default_n() -> usize {
    6
}

fn default_weights() -> (f64, f64) {
    (1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub version: u32,
    pub kind: Kind,
    #[serde(default)]
    pub numerics: Numerics,
    /// Named states for the divergence command.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub states: BTreeMap<String, MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<QuantumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSpec>,
}

/// Parses with the JSON path of the offending field in the message.
pub fn parse_spec(text: &str, origin: &str) -> Result<SpecFile, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: SpecFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let (line, column) = (inner.line(), inner.column());
        let full = inner.to_string();
        let what = full
            .strip_suffix(&format!(" at line {line} column {column}"))
            .unwrap_or(&full);
        CliError::parse(format!(
            "{origin}: line {line} column {column}, field `{path}`: {what}"
        ))
    })?;
    if spec.version != SPEC_VERSION {
        return Err(CliError::parse(format!(
            "{origin}: field `version`: unsupported version {}, expected {SPEC_VERSION}",
            spec.version
        )));
    }
    Ok(spec)
}

impl SpecFile {
    pub fn quantum(&self) -> Result<&QuantumSpec, CliError> {
        match (&self.quantum, self.kind) {
            (Some(q), Kind::Quantum) => Ok(q),
            _ => Err(CliError::parse(
                "field `quantum`: this command needs a spec of kind quantum",
            )),
        }
    }

    pub fn classical(&self) -> Result<&ClassicalSpec, CliError> {
        match (&self.classical, self.kind) {
            (Some(c), Kind::Classical) => Ok(c),
            _ => Err(CliError::parse(
                "field `classical`: this command needs a spec of kind classical",
            )),
        }
    }
}

pub fn load_spec(path: &Path) -> Result<SpecFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    parse_spec(&text, &path.display().to_string())
}

pub struct QuantumProblem {
    pub instance: ProblemInstance,
    pub ensemble: CQState,
    pub causal_ensembles: Vec<CQState>,
}

fn ensemble(
    e: &EnsembleJson,
    layout: &Layout,
    what: &str,
    num: &Numerics,
) -> Result<CQState, CliError> {
    let conds = e
        .conditionals
        .iter()
        .enumerate()
        .map(|(u, m)| m.to_state(&format!("{what}.conditionals[{u}]"), num))
        .collect::<Result<Vec<_>, _>>()?;
    CQState::new(e.probs.clone(), conds, layout.clone())
        .map_err(|e| CliError::from(e).context(what))
}

impl QuantumSpec {
    pub fn build(&self, num: &Numerics) -> Result<QuantumProblem, CliError> {
        let d = &self.dims;
        let input = Layout::new(&[(Factor::A, d.a), (Factor::S, d.s)])?;
        let output = Layout::new(&[(Factor::B, d.b), (Factor::E, d.e)])?;
        let kraus = self
            .kraus
            .iter()
            .enumerate()
            .map(|(i, k)| k.to_matrix(&format!("quantum.kraus[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, k) in kraus.iter().enumerate() {
            if k.rows() != d.b * d.e || k.cols() != d.a * d.s {
                return Err(CliError::dims(format!(
                    "quantum.kraus[{i}] is {}x{}, expected {}x{}",
                    k.rows(),
                    k.cols(),
                    d.b * d.e,
                    d.a * d.s
                )));
            }
        }
        let channel = QuantumChannel::with_tol(kraus, input.clone(), output, num.state_tol)
            .map_err(|e| CliError::from(e).context("quantum.kraus"))?;
        let innocent = self.innocent.to_state("quantum.innocent", num)?;
        let csi = match &self.csi {
            CsiJson::Marginal(m) => Csi::Marginal(m.to_state("quantum.csi.marginal", num)?),
            CsiJson::Bipartite { state, dim_sbar } => Csi::Bipartite(
                state.to_state("quantum.csi.bipartite.state", num)?,
                Layout::new(&[(Factor::SBar, *dim_sbar), (Factor::S, d.s)])?,
            ),
        };
        let instance = ProblemInstance::new(channel, innocent, csi)?;
        let ens = ensemble(&self.ensemble, &input, "quantum.ensemble", num)?;
        let causal = self
            .causal_ensembles
            .iter()
            .enumerate()
            .map(|(i, e)| ensemble(e, &input, &format!("quantum.causal_ensembles[{i}]"), num))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QuantumProblem {
            instance,
            ensemble: ens,
            causal_ensembles: causal,
        })
    }
}

impl ClassicalSpec {
    pub fn build_problem(&self) -> Result<ClassicalProblem, CliError> {
        ClassicalProblem::try_from(self.problem.clone())
            .map_err(|e| CliError::from(e).context("classical.problem"))
    }

    pub fn policy(&self) -> Result<AuxiliaryPolicy, CliError> {
        let pol = self
            .policy
            .clone()
            .ok_or_else(|| CliError::run("classical.policy is required for this command"))?;
        pol.validate()
            .map_err(|e| CliError::from(e).context("classical.policy"))?;
        Ok(pol)
    }
}
