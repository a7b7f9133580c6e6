//! Invariant suites run by `covert verify`.

use covert_core::divergence::{
    fidelity, purified_distance, relative_entropy, sandwiched_renyi, trace_distance,
};
use covert_core::linalg::{eig_hermitian, ComplexMatrix};
use covert_core::pinching::{distinct_eigenspaces, eigencount, pinch};
use covert_core::random::{
    random_channel, random_density, random_distribution, random_unitary, rng_from_seed,
    substream_seed, SimRng,
};
use covert_core::regions::fm::fm_check;
use covert_core::states::{apply_channel, DensityMatrix, Factor, Layout, QuantumChannel};
use covert_core::Result;
use rand::Rng;
use serde::{Deserialize, Serialize};

const MAX_LISTED_FAILURES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub cases: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(suite: &str) -> Self {
        SuiteResult {
            suite: suite.to_string(),
            cases: 0,
            passed: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < MAX_LISTED_FAILURES {
            self.failures.push(what());
        }
    }

    pub fn pass(&self) -> bool {
        self.passed == self.cases
    }
}

fn degenerate_state(d: usize, rng: &mut SimRng) -> Result<DensityMatrix> {
    let levels = rng.random_range(1..=d);
    let raw: Vec<f64> = (0..d).map(|k| 1.0 + (k % levels) as f64).collect();
    let s: f64 = raw.iter().sum();
    let diag: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let u = random_unitary(d, rng);
    DensityMatrix::with_tol(
        ComplexMatrix::from_diag_real(&diag)
            .conjugate_by(&u)
            .hermitian_part(),
        1e-9,
    )
}

/// ρ ⪯ v·E_σ(ρ) on random pairs and v(σ^{⊗n}) ≤ (n+1)^d for n ≤ 4, d ≤ 3.
pub fn pinching(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut res = SuiteResult::new("pinching");
    let mut rng = rng_from_seed(substream_seed(seed, 1));
    for i in 0..cases {
        let d = rng.random_range(2..=6);
        let rho = random_density(d, rng.random_range(1..=d), &mut rng);
        let sigma = if i % 2 == 0 {
            random_density(d, d, &mut rng)
        } else {
            degenerate_state(d, &mut rng)?
        };
        let basis = distinct_eigenspaces(&sigma, covert_core::pinching::GROUP_TOL)?;
        let gap = &pinch(&rho, &basis)?.matrix().scale(basis.v() as f64) - rho.matrix();
        let min = eig_hermitian(&gap.hermitian_part())?.min_eigenvalue();
        res.record(min >= -1e-9, || {
            format!("case {i}: d={d}, v={}, min eigenvalue {min:.3e}", basis.v())
        });
    }
    for d in 1..=3usize {
        let sigma = random_density(d, d, &mut rng);
        let mut pow = sigma.clone();
        for n in 1..=4u32 {
            if n > 1 {
                pow = pow.tensor(&sigma);
            }
            let v = eigencount(&pow, covert_core::pinching::GROUP_TOL)?;
            let cap = (n as usize + 1).pow(d as u32);
            res.record(v <= cap, || format!("v(σ^⊗{n}) = {v} > {cap} at d={d}"));
        }
    }
    Ok(res)
}

/// D̄_{1+α}(N(ρ)‖N(σ)) ≤ D̄_{1+α}(ρ‖σ) + 1e-9 over random channels, plus `extra` if given.
pub fn data_processing(
    cases: usize,
    seed: u64,
    extra: Option<&QuantumChannel>,
) -> Result<SuiteResult> {
    let mut res = SuiteResult::new("dataprocessing");
    let mut rng = rng_from_seed(substream_seed(seed, 2));
    let alphas = [0.1, 0.25, 0.4, 0.75, 1.0];
    for i in 0..cases {
        let ch = match extra {
            Some(c) if i % 2 == 1 => c.clone(),
            _ => {
                let (din, dout) = (rng.random_range(2..=4), rng.random_range(2..=4));
                random_channel(
                    Layout::single(Factor::A, din),
                    Layout::single(Factor::B, dout),
                    rng.random_range(1..=3),
                    &mut rng,
                )
            }
        };
        let din = ch.input().total_dim();
        let rho = random_density(din, rng.random_range(1..=din), &mut rng);
        let sigma = random_density(din, din, &mut rng);
        let order = 1.0 + alphas[i % alphas.len()];
        let before = sandwiched_renyi(&rho, &sigma, order)?.value;
        let after = sandwiched_renyi(
            &apply_channel(&ch, &rho)?,
            &apply_channel(&ch, &sigma)?,
            order,
        )?
        .value;
        res.record(after <= before + 1e-9, || {
            format!("case {i}: order {order}, {after:.12} > {before:.12}")
        });
    }
    Ok(res)
}

/// Elimination, closed form and brute force agree on the grid, starting with (0.3, 1.0, 0.4).
pub fn fourier_motzkin(cases: usize, seed: u64) -> SuiteResult {
    let mut res = SuiteResult::new("fm");
    let mut rng = rng_from_seed(substream_seed(seed, 3));
    let mut triples = vec![(0.3, 1.0, 0.4)];
    triples.extend((1..cases).map(|_| {
        (
            rng.random::<f64>() * 1.5,
            rng.random::<f64>() * 1.5,
            rng.random::<f64>() * 1.5,
        )
    }));
    for (a, b, c) in triples {
        let chk = fm_check(a, b, c, 0.02);
        res.record(chk.pass, || {
            format!("(a,b,c)=({a},{b},{c}): {} mismatches", chk.mismatches.len())
        });
    }
    res
}

/// Commuting pairs reduce to the classical formulas within 1e-9.
pub fn reduction(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut res = SuiteResult::new("reduction");
    let mut rng = rng_from_seed(substream_seed(seed, 4));
    let orders = [0.5, 0.8, 1.25, 1.5, 2.0];
    for i in 0..cases {
        let d = rng.random_range(2..=5);
        let (p, q) = (
            random_distribution(d, &mut rng),
            random_distribution(d, &mut rng),
        );
        let u = random_unitary(d, &mut rng);
        let state = |x: &[f64]| {
            DensityMatrix::with_tol(
                ComplexMatrix::from_diag_real(x)
                    .conjugate_by(&u)
                    .hermitian_part(),
                1e-9,
            )
        };
        let (rho, sigma) = (state(&p)?, state(&q)?);
        let order = orders[i % orders.len()];
        let l1: f64 = p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum();
        let bc: f64 = p.iter().zip(&q).map(|(x, y)| (x * y).sqrt()).sum();
        let kl: f64 = p.iter().zip(&q).map(|(x, y)| x * (x / y).log2()).sum();
        let renyi = p
            .iter()
            .zip(&q)
            .map(|(x, y)| x.powf(order) * y.powf(1.0 - order))
            .sum::<f64>()
            .log2()
            / (order - 1.0);
        let errs = [
            ("trace", trace_distance(&rho, &sigma)? - l1),
            ("fidelity", fidelity(&rho, &sigma)? - bc),
            (
                "purified",
                purified_distance(&rho, &sigma)? - (1.0 - bc * bc).max(0.0).sqrt(),
            ),
            ("relative", relative_entropy(&rho, &sigma)?.value - kl),
            (
                "sandwiched",
                sandwiched_renyi(&rho, &sigma, order)?.value - renyi,
            ),
        ];
        for (name, e) in errs {
            res.record(e.abs() <= 1e-9, || {
                format!("case {i}: {name} off by {e:.3e}")
            });
        }
    }
    Ok(res)
}
