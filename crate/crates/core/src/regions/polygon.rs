use serde::{Deserialize, Serialize};

const FEAS_TOL: f64 = 1e-9;

/// coef_r · R + coef_rk · R_K ≤ bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub label: String,
    pub coef_r: f64,
    pub coef_rk: f64,
    pub bound: f64,
}

impl Constraint {
    pub fn new(label: &str, coef_r: f64, coef_rk: f64, bound: f64) -> Self {
        Constraint {
            label: label.to_string(),
            coef_r,
            coef_rk,
            bound,
        }
    }

    pub fn slack(&self, r: f64, r_k: f64) -> f64 {
        self.bound - self.coef_r * r - self.coef_rk * r_k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub w_r: f64,
    pub w_rk: f64,
    pub r: f64,
    pub r_k: f64,
    pub active: Vec<String>,
}

/// Polygon {R ≥ 0, R_K ≥ 0} ∩ constraints in the (R, R_K) plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub constraints: Vec<Constraint>,
    /// Counter-clockwise from the origin.
    pub vertices: Vec<(f64, f64)>,
    /// Set when a negative bound emptied the region and it was clamped to (0, 0).
    pub clamped: bool,
    pub boundary: Vec<BoundaryPoint>,
}

impl RateRegion {
    /// Constraint coefficients must be nonnegative so the region is down-closed.
    pub fn from_constraints(constraints: Vec<Constraint>) -> Self {
        debug_assert!(constraints
            .iter()
            .all(|c| c.coef_r >= 0.0 && c.coef_rk >= 0.0));
        let clamped = constraints.iter().any(|c| c.bound < 0.0);
        let vertices = if clamped {
            vec![(0.0, 0.0)]
        } else {
            polygon_vertices(&constraints)
        };
        let mut region = RateRegion {
            constraints,
            vertices,
            clamped,
            boundary: Vec::new(),
        };
        region.boundary = region.sweep(9);
        region
    }

    pub fn contains(&self, r: f64, r_k: f64) -> bool {
        if self.clamped {
            return r.abs() <= FEAS_TOL && r_k.abs() <= FEAS_TOL;
        }
        r >= -FEAS_TOL
            && r_k >= -FEAS_TOL
            && self
                .constraints
                .iter()
                .all(|c| c.slack(r, r_k) >= -FEAS_TOL)
    }

    /// Convexity makes vertex containment sufficient.
    pub fn contains_region(&self, other: &RateRegion) -> bool {
        other.vertices.iter().all(|&(r, rk)| self.contains(r, rk))
    }

    pub fn active_constraints(&self, r: f64, r_k: f64) -> Vec<String> {
        let mut active: Vec<String> = self
            .constraints
            .iter()
            .filter(|c| c.slack(r, r_k).abs() <= FEAS_TOL)
            .map(|c| c.label.clone())
            .collect();
        if r.abs() <= FEAS_TOL {
            active.push("R >= 0".into());
        }
        if r_k.abs() <= FEAS_TOL {
            active.push("R_K >= 0".into());
        }
        active
    }

    /// Vertex maximizing w_r R + w_rk R_K; the first vertex wins ties.
    pub fn support_point(&self, w_r: f64, w_rk: f64) -> BoundaryPoint {
        let mut best = self.vertices[0];
        let mut best_v = w_r * best.0 + w_rk * best.1;
        for &(r, rk) in &self.vertices[1..] {
            let v = w_r * r + w_rk * rk;
            if v > best_v + 1e-12 {
                best = (r, rk);
                best_v = v;
            }
        }
        BoundaryPoint {
            w_r,
            w_rk,
            r: best.0,
            r_k: best.1,
            active: self.active_constraints(best.0, best.1),
        }
    }

    pub fn support_value(&self, w_r: f64, w_rk: f64) -> f64 {
        let p = self.support_point(w_r, w_rk);
        w_r * p.r + w_rk * p.r_k
    }

    /// Support points for `n` weight directions from (1, 0) to (0, 1).
    pub fn sweep(&self, n: usize) -> Vec<BoundaryPoint> {
        (0..n)
            .map(|i| {
                let theta = if n == 1 {
                    0.0
                } else {
                    std::f64::consts::FRAC_PI_2 * i as f64 / (n - 1) as f64
                };
                let (w_r, w_rk) = (round_weight(theta.cos()), round_weight(theta.sin()));
                self.support_point(w_r, w_rk)
            })
            .collect()
    }
}

fn round_weight(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}

fn polygon_vertices(constraints: &[Constraint]) -> Vec<(f64, f64)> {
    let mut lines: Vec<(f64, f64, f64)> = constraints
        .iter()
        .map(|c| (c.coef_r, c.coef_rk, c.bound))
        .collect();
    lines.push((-1.0, 0.0, 0.0));
    lines.push((0.0, -1.0, 0.0));
    let feasible = |r: f64, rk: f64| {
        lines
            .iter()
            .all(|&(a, b, c)| a * r + b * rk <= c + FEAS_TOL)
    };
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (a1, b1, c1) = lines[i];
            let (a2, b2, c2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-14 {
                continue;
            }
            let r = (c1 * b2 - c2 * b1) / det;
            let rk = (a1 * c2 - a2 * c1) / det;
            let (r, rk) = (
                if r.abs() < 1e-13 { 0.0 } else { r },
                if rk.abs() < 1e-13 { 0.0 } else { rk },
            );
            if feasible(r, rk)
                && !pts
                    .iter()
                    .any(|&(x, y)| (x - r).abs() < 1e-9 && (y - rk).abs() < 1e-9)
            {
                pts.push((r, rk));
            }
        }
    }
    if pts.is_empty() {
        return vec![(0.0, 0.0)];
    }
    pts.sort_by(|p, q| {
        let (ap, aq) = (p.1.atan2(p.0), q.1.atan2(q.0));
        let (np, nq) = (p.0.hypot(p.1), q.0.hypot(q.1));
        if p.0 == 0.0 && p.1 == 0.0 {
            return std::cmp::Ordering::Less;
        }
        if q.0 == 0.0 && q.1 == 0.0 {
            return std::cmp::Ordering::Greater;
        }
        ap.total_cmp(&aq).then(np.total_cmp(&nq))
    });
    pts
}
