//! Density matrices, classical-quantum ensembles, Kraus channels and the
//! induced states of a covert-communication problem instance.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace, trace_norm, ComplexMatrix, Spectrum};

const STATE_TOL: f64 = 1e-10;
const PROB_TOL: f64 = 1e-12;

/// Named tensor factor. `U` is never a quantum factor; it is the label of a [`CQState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    A,
    S,
    SBar,
    B,
    E,
    Y,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Factor::A => "A",
            Factor::S => "S",
            Factor::SBar => "SBar",
            Factor::B => "B",
            Factor::E => "E",
            Factor::Y => "Y",
        };
        f.write_str(s)
    }
}

/// Ordered tensor factors with their dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout(Vec<(Factor, usize)>);

impl Layout {
    pub fn new(factors: &[(Factor, usize)]) -> Result<Self> {
        for (i, (f, d)) in factors.iter().enumerate() {
            if *d == 0 {
                return Err(Error::DimMismatch(format!("factor {f} has dimension 0")));
            }
            if factors[..i].iter().any(|(g, _)| g == f) {
                return Err(Error::DimMismatch(format!("factor {f} listed twice")));
            }
        }
        Ok(Layout(factors.to_vec()))
    }

    pub fn single(f: Factor, d: usize) -> Self {
        Layout(vec![(f, d.max(1))])
    }

    pub fn factors(&self) -> &[(Factor, usize)] {
        &self.0
    }

    pub fn dims(&self) -> Vec<usize> {
        self.0.iter().map(|&(_, d)| d).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.0.iter().map(|&(_, d)| d).product()
    }

    pub fn position(&self, f: Factor) -> Option<usize> {
        self.0.iter().position(|&(g, _)| g == f)
    }

    pub fn dim_of(&self, f: Factor) -> Option<usize> {
        self.0.iter().find(|&&(g, _)| g == f).map(|&(_, d)| d)
    }

    pub fn contains(&self, f: Factor) -> bool {
        self.position(f).is_some()
    }

    /// Layout after keeping `keep`, in this layout's order.
    pub fn restrict(&self, keep: &[Factor]) -> Result<Layout> {
        if let Some(f) = keep.iter().find(|f| !self.contains(**f)) {
            return Err(Error::DimMismatch(format!(
                "factor {f} not in layout {self}"
            )));
        }
        Ok(Layout(
            self.0
                .iter()
                .filter(|(f, _)| keep.contains(f))
                .copied()
                .collect(),
        ))
    }

    /// Partial trace of `m` keeping the named factors.
    pub fn reduce(&self, m: &ComplexMatrix, keep: &[Factor]) -> Result<ComplexMatrix> {
        let restricted = self.restrict(keep)?;
        let idx: Vec<usize> = restricted
            .0
            .iter()
            .filter_map(|&(f, _)| self.position(f))
            .collect();
        partial_trace(m, &self.dims(), &idx)
    }

    pub fn concat(&self, other: &Layout) -> Result<Layout> {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Layout::new(&v)
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(g, d)| format!("{g}:{d}")).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Validated positive semidefinite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, STATE_TOL)
    }

    pub fn with_tol(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::DimMismatch(format!(
                "state matrix is {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        matrix.ensure_hermitian(tol)?;
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = eig_hermitian(&matrix)?.min_eigenvalue();
        if min < -tol {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        Ok(DensityMatrix {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Hermitian part divided by its trace; negative eigenvalues are rejected, not clipped.
    pub fn normalize(matrix: &ComplexMatrix) -> Result<Self> {
        let h = matrix.hermitian_part();
        let tr = h.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!("trace {tr} is not positive")));
        }
        Self::new(h.scale(1.0 / tr))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix {
            matrix: ComplexMatrix::identity(d).scale(1.0 / d as f64),
        }
    }

    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(DensityMatrix {
            matrix: ComplexMatrix::outer(&v),
        })
    }

    /// |i⟩⟨i| in dimension `d`.
    pub fn basis(d: usize, i: usize) -> Self {
        DensityMatrix {
            matrix: ComplexMatrix::basis_projector(d, i),
        }
    }

    pub fn from_diag(p: &[f64]) -> Result<Self> {
        check_distribution(p, STATE_TOL)?;
        Ok(DensityMatrix {
            matrix: ComplexMatrix::from_diag_real(p),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        eig_hermitian(&self.matrix)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Convex combination Σ w_i ρ_i; weights must form a distribution.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        check_distribution(weights, PROB_TOL)?;
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        if weights.len() != states.len() || states.iter().any(|s| s.dim() != first.dim()) {
            return Err(Error::DimMismatch("mixture components disagree".into()));
        }
        let mut m = ComplexMatrix::zeros(first.dim(), first.dim());
        for (w, s) in weights.iter().zip(states) {
            if *w != 0.0 {
                m = &m + &s.matrix.scale(*w);
            }
        }
        Ok(DensityMatrix {
            matrix: m.hermitian_part(),
        })
    }

    /// Partial trace under `layout`, validated as a state.
    pub fn reduce(&self, layout: &Layout, keep: &[Factor]) -> Result<DensityMatrix> {
        if layout.total_dim() != self.dim() {
            return Err(Error::DimMismatch(format!(
                "layout {layout} does not match state dimension {}",
                self.dim()
            )));
        }
        DensityMatrix::new(layout.reduce(&self.matrix, keep)?)
    }
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        DensityMatrix::new(m)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(d: DensityMatrix) -> Self {
        d.matrix
    }
}

pub(crate) fn check_distribution(p: &[f64], tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(Error::NotADistribution("empty".into()));
    }
    if let Some(x) = p.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::NotADistribution(format!(
            "entry {x} is negative or not finite"
        )));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::NotADistribution(format!("entries sum to {s}")));
    }
    Ok(())
}

/// Ensemble Σ_u p(u) |u⟩⟨u| ⊗ ρ_{X|u} over the labels 0..|U|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CQState {
    probs: Vec<f64>,
    conditionals: Vec<DensityMatrix>,
    layout: Layout,
}

impl CQState {
    pub fn new(probs: Vec<f64>, conditionals: Vec<DensityMatrix>, layout: Layout) -> Result<Self> {
        check_distribution(&probs, PROB_TOL)?;
        if probs.len() != conditionals.len() {
            return Err(Error::DimMismatch(format!(
                "{} probabilities for {} conditionals",
                probs.len(),
                conditionals.len()
            )));
        }
        let d = layout.total_dim();
        if let Some(c) = conditionals.iter().find(|c| c.dim() != d) {
            return Err(Error::DimMismatch(format!(
                "conditional of dimension {} under layout {layout}",
                c.dim()
            )));
        }
        Ok(CQState {
            probs,
            conditionals,
            layout,
        })
    }

    pub fn num_labels(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn conditional(&self, u: usize) -> &DensityMatrix {
        &self.conditionals[u]
    }

    pub fn conditionals(&self) -> &[DensityMatrix] {
        &self.conditionals
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn quantum_dim(&self) -> usize {
        self.layout.total_dim()
    }

    /// ρ_U = diag(p_U).
    pub fn classical_marginal(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::from_diag_real(&self.probs),
        }
    }

    /// Σ_u p(u) ρ_{X|u}.
    pub fn average(&self) -> DensityMatrix {
        DensityMatrix::mixture(&self.probs, &self.conditionals)
            .expect("validated ensemble always mixes")
    }

    /// Ensemble with every conditional reduced to `keep`.
    pub fn marginal(&self, keep: &[Factor]) -> Result<CQState> {
        let layout = self.layout.restrict(keep)?;
        let conditionals = self
            .conditionals
            .iter()
            .map(|c| c.reduce(&self.layout, keep))
            .collect::<Result<Vec<_>>>()?;
        Ok(CQState {
            probs: self.probs.clone(),
            conditionals,
            layout,
        })
    }

    /// Reduced quantum state on `keep` with the label traced out.
    pub fn reduced_state(&self, keep: &[Factor]) -> Result<DensityMatrix> {
        self.average().reduce(&self.layout, keep)
    }

    /// Block-diagonal joint operator on U ⊗ X.
    pub fn joint(&self) -> DensityMatrix {
        let blocks: Vec<ComplexMatrix> = self
            .probs
            .iter()
            .zip(&self.conditionals)
            .map(|(p, c)| c.matrix.scale(*p))
            .collect();
        DensityMatrix {
            matrix: ComplexMatrix::direct_sum(&blocks),
        }
    }

    /// ρ_U ⊗ ρ_X.
    pub fn product_of_marginals(&self) -> DensityMatrix {
        self.classical_marginal().tensor(&self.average())
    }
}

/// The reduced ensemble on `keep`; tracing every quantum factor leaves only p_U.
pub fn marginals(cq: &CQState, keep: &[Factor]) -> Result<CQState> {
    cq.marginal(keep)
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumChannel {
    kraus: Vec<ComplexMatrix>,
    input: Layout,
    output: Layout,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>, input: Layout, output: Layout) -> Result<Self> {
        Self::with_tol(kraus, input, output, STATE_TOL)
    }

    pub fn with_tol(
        kraus: Vec<ComplexMatrix>,
        input: Layout,
        output: Layout,
        tol: f64,
    ) -> Result<Self> {
        let (din, dout) = (input.total_dim(), output.total_dim());
        if kraus.is_empty() {
            return Err(Error::DimMismatch("channel has no Kraus operators".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.rows() != dout || k.cols() != din) {
            return Err(Error::DimMismatch(format!(
                "Kraus operator is {}x{}, expected {dout}x{din}",
                k.rows(),
                k.cols()
            )));
        }
        let mut sum = ComplexMatrix::zeros(din, din);
        for k in &kraus {
            sum = &sum + &k.adjoint().matmul(k);
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(din));
        if deviation > tol {
            return Err(Error::NotCptp { deviation });
        }
        Ok(QuantumChannel {
            kraus,
            input,
            output,
        })
    }

    pub fn identity(layout: Layout) -> Self {
        let d = layout.total_dim();
        QuantumChannel {
            kraus: vec![ComplexMatrix::identity(d)],
            input: layout.clone(),
            output: layout,
        }
    }

    pub fn unitary(u: ComplexMatrix, input: Layout, output: Layout) -> Result<Self> {
        Self::new(vec![u], input, output)
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn input(&self) -> &Layout {
        &self.input
    }

    pub fn output(&self) -> &Layout {
        &self.output
    }

    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.output.total_dim(), self.output.total_dim());
        for k in &self.kraus {
            out = &out + &m.conjugate_by(k);
        }
        out.hermitian_part()
    }

    /// This channel applied after `first`.
    pub fn compose_after(&self, first: &QuantumChannel) -> Result<QuantumChannel> {
        if first.output.total_dim() != self.input.total_dim() {
            return Err(Error::DimMismatch("channel composition".into()));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| first.kraus.iter().map(move |b| a.matmul(b)))
            .collect();
        Self::new(kraus, first.input.clone(), self.output.clone())
    }
}

pub fn apply_channel(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.input.total_dim() {
        return Err(Error::DimMismatch(format!(
            "state dimension {} vs channel input {}",
            rho.dim(),
            ch.input
        )));
    }
    DensityMatrix::new(ch.apply_matrix(rho.matrix()))
}

/// (I_U ⊗ N)(ρ_UX): same labels, conditionals pushed through the channel.
pub fn induced_cq_output(ch: &QuantumChannel, cq: &CQState) -> Result<CQState> {
    if cq.quantum_dim() != ch.input.total_dim() {
        return Err(Error::DimMismatch(format!(
            "ensemble layout {} vs channel input {}",
            cq.layout, ch.input
        )));
    }
    let conditionals = cq
        .conditionals
        .iter()
        .map(|c| apply_channel(ch, c))
        .collect::<Result<Vec<_>>>()?;
    CQState::new(cq.probs.clone(), conditionals, ch.output.clone())
}

/// State information shared with the transmitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Csi {
    /// ρ_{S̄S} on the layout [S̄, S].
    Bipartite(DensityMatrix, Layout),
    /// ρ_S alone.
    Marginal(DensityMatrix),
}

/// Channel N_{AS→BE}, innocent input φ₀ and the CSI state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub channel: QuantumChannel,
    pub innocent: DensityMatrix,
    pub csi: Csi,
}

impl ProblemInstance {
    /// The channel must map [A, S] to [B, E] in that factor order.
    pub fn new(channel: QuantumChannel, innocent: DensityMatrix, csi: Csi) -> Result<Self> {
        let inp = channel.input.factors();
        let out = channel.output.factors();
        if inp.len() != 2 || inp[0].0 != Factor::A || inp[1].0 != Factor::S {
            return Err(Error::DimMismatch(format!(
                "channel input {} is not [A,S]",
                channel.input
            )));
        }
        if out.len() != 2 || out[0].0 != Factor::B || out[1].0 != Factor::E {
            return Err(Error::DimMismatch(format!(
                "channel output {} is not [B,E]",
                channel.output
            )));
        }
        if innocent.dim() != inp[0].1 {
            return Err(Error::DimMismatch(format!(
                "innocent state has dimension {}, A has {}",
                innocent.dim(),
                inp[0].1
            )));
        }
        let rho_s_dim = match &csi {
            Csi::Bipartite(rho, layout) => {
                if layout.total_dim() != rho.dim() || !layout.contains(Factor::S) {
                    return Err(Error::DimMismatch(format!("CSI layout {layout}")));
                }
                layout.dim_of(Factor::S).unwrap_or(0)
            }
            Csi::Marginal(rho) => rho.dim(),
        };
        if rho_s_dim != inp[1].1 {
            return Err(Error::DimMismatch(format!(
                "CSI marginal has dimension {rho_s_dim}, S has {}",
                inp[1].1
            )));
        }
        Ok(ProblemInstance {
            channel,
            innocent,
            csi,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.channel.input.factors()[0].1
    }

    pub fn dim_s(&self) -> usize {
        self.channel.input.factors()[1].1
    }

    pub fn input_layout(&self) -> &Layout {
        &self.channel.input
    }

    /// tr_{S̄} ρ_{S̄S}.
    pub fn csi_marginal(&self) -> Result<DensityMatrix> {
        match &self.csi {
            Csi::Bipartite(rho, layout) => rho.reduce(layout, &[Factor::S]),
            Csi::Marginal(rho) => Ok(rho.clone()),
        }
    }
}

/// ρ₀ = tr_B N(φ₀ ⊗ ρ_S), the covertness target.
pub fn innocent_output(p: &ProblemInstance) -> Result<DensityMatrix> {
    let input = p.innocent.tensor(&p.csi_marginal()?);
    apply_channel(&p.channel, &input)?.reduce(&p.channel.output, &[Factor::E])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsiCheck {
    pub consistent: bool,
    /// ‖tr_{UA} ρ_UAS − tr_{S̄} ρ_{S̄S}‖₁
    pub deviation: f64,
}

pub fn check_csi_consistency(cq: &CQState, p: &ProblemInstance, tol: f64) -> Result<CsiCheck> {
    let ens = cq.reduced_state(&[Factor::S])?;
    let target = p.csi_marginal()?;
    if ens.dim() != target.dim() {
        return Err(Error::DimMismatch("S marginals differ in dimension".into()));
    }
    let deviation = trace_norm(&(ens.matrix() - target.matrix()))?;
    Ok(CsiCheck {
        consistent: deviation <= tol,
        deviation,
    })
}
