use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Hermiticity tolerance used when callers do not supply one.
pub const HERMITIAN_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `m = V diag(λ) V†` with λ ascending.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn eigenvector(&self, i: usize) -> Vec<Complex64> {
        self.eigenvectors.column(i)
    }

    /// Σ_i w_i |v_i⟩⟨v_i| for per-eigenvalue weights.
    pub fn compose(&self, weights: &[f64]) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += a * v[(j, k)].conj();
                }
            }
        }
        out.hermitian_part()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.compose(&self.eigenvalues)
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `pred`.
    pub fn projector_where(&self, pred: impl Fn(f64) -> bool) -> ComplexMatrix {
        let w: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if pred(l) { 1.0 } else { 0.0 })
            .collect();
        self.compose(&w)
    }

    /// Applies `f` on eigenvalues above `support_tol` (absolute); the rest map to 0.
    pub fn apply(&self, f: impl Fn(f64) -> f64, support_tol: f64) -> Result<ComplexMatrix> {
        if let Some(&l) = self.eigenvalues.first() {
            if l < -support_tol {
                return Err(Error::NotPsd { min_eigenvalue: l });
            }
        }
        let w: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if l > support_tol { f(l) } else { 0.0 })
            .collect();
        Ok(self.compose(&w))
    }

    /// Absolute cutoff for a support tolerance given relative to the largest eigenvalue.
    pub fn support_cutoff(&self, relative_tol: f64) -> f64 {
        relative_tol * self.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()))
    }
}

fn scaled_tol(m: &ComplexMatrix, tol: f64) -> f64 {
    let max_entry = m.data().iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    tol * max_entry.max(1.0)
}

/// Cyclic complex Jacobi eigensolver with row-major sweep order.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Spectrum> {
    eig_hermitian_tol(m, HERMITIAN_TOL)
}

pub fn eig_hermitian_tol(m: &ComplexMatrix, hermitian_tol: f64) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::DimMismatch(format!(
            "{}x{} is not square",
            m.rows(),
            m.cols()
        )));
    }
    m.ensure_hermitian(scaled_tol(m, hermitian_tol))?;
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();
    let target = 4.0 * f64::EPSILON * norm * n as f64;

    let mut converged = false;
    for _ in 0..=MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, new)] = v[(i, old)];
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Zeroes a[p][q] with the unitary J = diag(1, conj(φ)) · real rotation, a ← J† a J.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let ph = apq / r;
    let ph_c = ph.conj();
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
    let t = if theta.is_finite() {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();

    for i in 0..n {
        let x = a[(i, p)];
        let y = a[(i, q)];
        a[(i, p)] = x * c - y * ph_c * s;
        a[(i, q)] = x * s + y * ph_c * c;
    }
    for j in 0..n {
        let x = a[(p, j)];
        let y = a[(q, j)];
        a[(p, j)] = x * c - y * ph * s;
        a[(q, j)] = x * s + y * ph * c;
    }
    for i in 0..n {
        let x = v[(i, p)];
        let y = v[(i, q)];
        v[(i, p)] = x * c - y * ph_c * s;
        v[(i, q)] = x * s + y * ph_c * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// f(m) on the support of a PSD matrix; eigenvalues ≤ `support_tol` map to 0.
pub fn mat_fn(
    m: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
    support_tol: f64,
) -> Result<ComplexMatrix> {
    eig_hermitian(m)?.apply(f, support_tol)
}

pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Traces out every subsystem not listed in `keep`; kept factors retain their order.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimMismatch(format!(
            "factor dims {dims:?} do not match a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if let Some(&k) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::DimMismatch(format!("factor index {k} out of range")));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|i| keep.contains(i)).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let d_keep: usize = kept_dims.iter().product();
    let d_trace: usize = traced_dims.iter().product();

    // Row-major strides of each factor in the full index.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offsets = |which: &[usize], wdims: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|mut idx| {
                let mut off = 0;
                for (&f, &d) in which.iter().zip(wdims).rev() {
                    off += (idx % d) * strides[f];
                    idx /= d;
                }
                off
            })
            .collect()
    };
    let keep_off = offsets(&kept, &kept_dims, d_keep);
    let trace_off = offsets(&traced, &traced_dims, d_trace);

    let mut out = ComplexMatrix::zeros(d_keep, d_keep);
    for (i, &ri) in keep_off.iter().enumerate() {
        for (j, &rj) in keep_off.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &trace_off {
                acc += m[(ri + t, rj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// ‖m‖₁ = Σ|λ_i| for Hermitian m.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.eigenvalues.iter().map(|l| l.abs()).sum())
}
