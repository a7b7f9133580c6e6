use serde::{Deserialize, Serialize};

const TOL: f64 = 1e-9;

/// coefs · x ≤ bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinIneq {
    pub coefs: Vec<f64>,
    pub bound: f64,
}

impl LinIneq {
    pub fn new(coefs: Vec<f64>, bound: f64) -> Self {
        LinIneq { coefs, bound }
    }

    pub fn holds(&self, x: &[f64], tol: f64) -> bool {
        self.coefs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() <= self.bound + tol
    }
}

/// Eliminates variable `var`: pairs of opposite-sign rows are combined, rows without it are kept.
pub fn fourier_motzkin(ineqs: &[LinIneq], var: usize) -> Vec<LinIneq> {
    let (mut pos, mut neg, mut out) = (Vec::new(), Vec::new(), Vec::new());
    for q in ineqs {
        let c = q.coefs[var];
        if c > 0.0 {
            pos.push(q);
        } else if c < 0.0 {
            neg.push(q);
        } else {
            out.push(q.clone());
        }
    }
    for p in &pos {
        for n in &neg {
            let (sp, sn) = (-n.coefs[var], p.coefs[var]);
            let coefs: Vec<f64> = p
                .coefs
                .iter()
                .zip(&n.coefs)
                .map(|(a, b)| sp * a + sn * b)
                .collect();
            let mut q = LinIneq::new(coefs, sp * p.bound + sn * n.bound);
            q.coefs[var] = 0.0;
            out.push(q);
        }
    }
    out
}

/// Closure of the one-shot rate system over x = (R, R_K, R_J):
/// R_J + R_K ≥ a, R_J + R_K + R ≤ b, R_J + R ≥ c, all rates ≥ 0.
pub fn rate_system(a: f64, b: f64, c: f64) -> Vec<LinIneq> {
    vec![
        LinIneq::new(vec![0.0, -1.0, -1.0], -a),
        LinIneq::new(vec![1.0, 1.0, 1.0], b),
        LinIneq::new(vec![-1.0, 0.0, -1.0], -c),
        LinIneq::new(vec![-1.0, 0.0, 0.0], 0.0),
        LinIneq::new(vec![0.0, -1.0, 0.0], 0.0),
        LinIneq::new(vec![0.0, 0.0, -1.0], 0.0),
    ]
}

/// R ≤ b − a, R_K ≤ b − c, R + R_K ≤ b, R, R_K ≥ 0.
pub fn closed_form_contains(a: f64, b: f64, c: f64, r: f64, r_k: f64) -> bool {
    r >= -TOL && r_k >= -TOL && r <= b - a + TOL && r_k <= b - c + TOL && r + r_k <= b + TOL
}

/// Some R_J ≥ 0 satisfies the system at (R, R_K); candidates are every breakpoint plus a sweep.
pub fn brute_force_contains(a: f64, b: f64, c: f64, r: f64, r_k: f64, sweep_step: f64) -> bool {
    let sys = rate_system(a, b, c);
    let mut cands = vec![0.0, a - r_k, c - r, b - r - r_k];
    let top = b.max(a).max(c) + 1.0;
    let steps = (top / sweep_step).ceil() as usize;
    cands.extend((0..=steps).map(|i| i as f64 * sweep_step));
    cands
        .into_iter()
        .filter(|&rj| rj >= 0.0)
        .any(|rj| sys.iter().all(|q| q.holds(&[r, r_k, rj], TOL)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmCheck {
    pub pass: bool,
    pub grid_points: usize,
    /// (R, R_K, eliminated, closed_form, brute_force) at points where they disagree.
    pub mismatches: Vec<(f64, f64, bool, bool, bool)>,
    pub eliminated: Vec<LinIneq>,
}

/// Compares the R_J-projection of the rate system, by elimination and by brute force,
/// with the closed-form region on a grid over [0, max(b, 0) + 0.1]².
pub fn fm_check(a: f64, b: f64, c: f64, step: f64) -> FmCheck {
    let eliminated = fourier_motzkin(&rate_system(a, b, c), 2);
    let top = b.max(0.0) + 0.1;
    let n = (top / step).floor() as usize;
    let mut mismatches = Vec::new();
    let mut grid_points = 0;
    for i in 0..=n {
        for j in 0..=n {
            let (r, r_k) = (i as f64 * step, j as f64 * step);
            grid_points += 1;
            let fm = eliminated.iter().all(|q| q.holds(&[r, r_k, 0.0], TOL));
            let cf = closed_form_contains(a, b, c, r, r_k);
            let bf = brute_force_contains(a, b, c, r, r_k, step / 4.0);
            if fm != cf || cf != bf {
                mismatches.push((r, r_k, fm, cf, bf));
            }
        }
    }
    FmCheck {
        pass: mismatches.is_empty(),
        grid_points,
        mismatches,
        eliminated,
    }
}
