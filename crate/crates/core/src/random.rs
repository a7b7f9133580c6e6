//! Seeded random states, channels and distributions for tests and verification suites.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::ComplexMatrix;
use crate::states::{DensityMatrix, Layout, QuantumChannel};

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for trial `index` under `master`.
pub fn substream_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer over a golden-ratio offset of the trial index
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("sizes agree")
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    (&g + &g.adjoint()).scale(0.5)
}

/// Full-rank state G G† / tr from a Ginibre matrix with `rank` columns.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(d, rank.max(1), rng);
    DensityMatrix::normalize(&g.matmul(&g.adjoint())).expect("Ginibre product is a valid state")
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let psi: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
    DensityMatrix::pure(&psi).expect("nonzero Gaussian vector")
}

pub fn random_diagonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_diag(&random_distribution(d, rng)).expect("normalized")
}

/// Uniform draw from the probability simplex.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
    let rest: f64 = p[1..].iter().sum();
    p[0] = 1.0 - rest;
    p
}

/// Columns orthonormalized by modified Gram-Schmidt.
pub fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut q = m.clone();
    for j in 0..cols {
        for k in 0..j {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..rows {
                dot += q[(i, k)].conj() * q[(i, j)];
            }
            for i in 0..rows {
                let v = q[(i, k)];
                q[(i, j)] -= dot * v;
            }
        }
        let norm: f64 = (0..rows).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            q[(i, j)] /= norm;
        }
    }
    q
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    orthonormalize_columns(&ginibre(d, d, rng))
}

/// Channel with `n_kraus` operators cut from a random Stinespring isometry.
/// The count is raised to ⌈d_in/d_out⌉ when fewer cannot form an isometry.
pub fn random_channel<R: Rng + ?Sized>(
    input: Layout,
    output: Layout,
    n_kraus: usize,
    rng: &mut R,
) -> QuantumChannel {
    let (din, dout) = (input.total_dim(), output.total_dim());
    let n_kraus = n_kraus.max(din.div_ceil(dout));
    let v = orthonormalize_columns(&ginibre(dout * n_kraus, din, rng));
    let kraus = (0..n_kraus)
        .map(|k| {
            let mut m = ComplexMatrix::zeros(dout, din);
            for i in 0..dout {
                for j in 0..din {
                    m[(i, j)] = v[(k * dout + i, j)];
                }
            }
            m
        })
        .collect();
    QuantumChannel::with_tol(kraus, input, output, 1e-9).expect("isometry blocks are CPTP")
}
