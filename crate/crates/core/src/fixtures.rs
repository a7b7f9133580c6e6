//! Reference instances shared by the command-line examples, tests and the acceptance run.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::random::{random_channel, random_density, random_distribution, rng_from_seed};
use crate::regions::{AuxiliaryPolicy, ClassicalProblem};
use crate::states::{CQState, Csi, DensityMatrix, Factor, Layout, ProblemInstance, QuantumChannel};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn as_layout() -> Layout {
    Layout::new(&[(Factor::A, 2), (Factor::S, 2)]).expect("distinct factors")
}

pub fn be_layout() -> Layout {
    Layout::new(&[(Factor::B, 2), (Factor::E, 2)]).expect("distinct factors")
}

/// Two-qubit unitary (cos θ I − i sin θ SWAP) · CNOT_{S→A}; the warden's qubit
/// picks up the input at strength sin θ.
pub fn leaky_swap_unitary(theta: f64) -> ComplexMatrix {
    let mut cnot = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for s in 0..2 {
            cnot[(((a ^ s) << 1) | s, (a << 1) | s)] = c(1.0);
        }
    }
    let mut mix = ComplexMatrix::identity(4).scale(theta.cos());
    for x in 0..2 {
        for y in 0..2 {
            mix[((y << 1) | x, (x << 1) | y)] += Complex64::new(0.0, -theta.sin());
        }
    }
    mix.matmul(&cnot)
}

/// Leaky-swap channel, innocent input I/2 and ρ_S = diag(1 − p₁, p₁).
pub fn leaky_swap_instance(theta: f64, p1: f64) -> Result<ProblemInstance> {
    let ch = QuantumChannel::unitary(leaky_swap_unitary(theta), as_layout(), be_layout())?;
    let rho_s = DensityMatrix::from_diag(&[1.0 - p1, p1])?;
    ProblemInstance::new(ch, DensityMatrix::maximally_mixed(2), Csi::Marginal(rho_s))
}

/// Four labels u = (bit, s): the computational basis when s = 0 and the Hadamard
/// basis when s = 1. Averages to (I/2) ⊗ ρ_S, so ρ_E equals the innocent output.
pub fn leaky_swap_ensemble(p1: f64) -> Result<CQState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let a_states = [
        vec![c(1.0), c(0.0)],
        vec![c(0.0), c(1.0)],
        vec![c(h), c(h)],
        vec![c(h), c(-h)],
    ];
    let probs = vec![(1.0 - p1) / 2.0, (1.0 - p1) / 2.0, p1 / 2.0, p1 / 2.0];
    let conditionals = a_states
        .iter()
        .enumerate()
        .map(|(u, psi)| Ok(DensityMatrix::pure(psi)?.tensor(&DensityMatrix::basis(2, u / 2))))
        .collect::<Result<Vec<_>>>()?;
    CQState::new(probs, conditionals, as_layout())
}

/// Random two-Kraus channel [A,S] → [B,E] on qubits with a random |U| = 3 ensemble;
/// the CSI marginal is the ensemble's own S marginal.
pub fn random_qubit_fixture(seed: u64) -> Result<(ProblemInstance, CQState)> {
    let mut rng = rng_from_seed(seed);
    let ch = random_channel(as_layout(), be_layout(), 2, &mut rng);
    let probs = random_distribution(3, &mut rng);
    let conds = (0..3).map(|_| random_density(4, 4, &mut rng)).collect();
    let ens = CQState::new(probs, conds, as_layout())?;
    let rho_s = ens.reduced_state(&[Factor::S])?;
    let innocent = random_density(2, 2, &mut rng);
    Ok((
        ProblemInstance::new(ch, innocent, Csi::Marginal(rho_s))?,
        ens,
    ))
}

/// Ternary-input full-CSI channel with innocent symbol 0:
/// B̃ is A through a ternary symmetric channel with error `eps`; E is s (input 1) or 1 − s
/// (input 2) flipped with probability `q`, and uniform under input 0.
/// W_E(·|0,s) = ½ W_E(·|1,s) + ½ W_E(·|2,s), so 0 is redundant for the warden.
pub fn redundant_symbol_problem(q_s1: f64, q: f64, eps: f64) -> Result<ClassicalProblem> {
    let w_e = |a: usize, s: usize, e: usize| -> f64 {
        let toward = |target: usize| if e == target { 1.0 - q } else { q };
        match a {
            0 => 0.5,
            1 => toward(s),
            _ => toward(1 - s),
        }
    };
    let w_b = |a: usize, b: usize| if a == b { 1.0 - eps } else { eps / 2.0 };
    ClassicalProblem::from_fn(
        3,
        2,
        3,
        2,
        vec![1.0 - q_s1, q_s1],
        |a, s, b, e| w_b(a, b) * w_e(a, s, e),
        0,
        true,
    )
}

/// Ũ = A uniform on three symbols, independent of S.
pub fn redundant_symbol_policy() -> AuxiliaryPolicy {
    AuxiliaryPolicy::uniform_identity(2, 3)
}

/// Binary symmetric warden channel with crossover p and uniform input.
pub fn bsc_warden(p: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    (vec![0.5, 0.5], vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
}

/// Crossover with 1 − h(p) = target bits, by bisection on [0, ½].
pub fn bsc_crossover_for_capacity(target: f64) -> f64 {
    let h = |p: f64| {
        if p <= 0.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    };
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - h(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
