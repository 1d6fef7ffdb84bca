//! Solver internals for simplex-constrained ridge least squares:
//! `min |Xw - y|^2 + eta |w|^2  over  w >= 0, sum w = 1`.
//!
//! Strategy: primal active set with exact face solves, globalized by
//! accelerated projected gradient when face changes stall. Optimality is
//! certified by the Frank-Wolfe gap `g.w - min_i g_i`, which upper-bounds the
//! objective suboptimality over the simplex; solutions are only accepted once
//! the gap is under the configured tolerance.
//!
//! Face solves use SVD minimum-norm solutions of the KKT system. Null vectors
//! of that system never move the multiplier, so on a degenerate optimal face
//! (duplicate donors, eta = 0) the face solve lands on the minimum-norm
//! optimum; this is what makes tie-breaking across identical donors exact.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numcore::{min_norm_least_squares, RankTolerance};

pub(crate) struct QpSolution {
    pub w: DVector<f64>,
    /// Certified Frank-Wolfe gap; tests assert it against the tolerance.
    #[allow(dead_code)]
    pub gap: f64,
    #[allow(dead_code)]
    pub iterations: usize,
}

struct Quadratic {
    /// `X'X + eta I`.
    p: DMatrix<f64>,
    /// `X'y`.
    b: DVector<f64>,
    /// Constant `y'y`, completing the objective.
    yy: f64,
    /// Lipschitz constant of the gradient: `2 (sigma_max(X)^2 + eta)`.
    lipschitz: f64,
}

impl Quadratic {
    fn build(x: &DMatrix<f64>, y: &DVector<f64>, eta: f64) -> Self {
        let mut p = x.transpose() * x;
        for i in 0..p.nrows() {
            p[(i, i)] += eta;
        }
        let b = x.transpose() * y;
        let sigma_max = x
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max);
        Quadratic {
            p,
            b,
            yy: y.dot(y),
            lipschitz: 2.0 * (sigma_max * sigma_max + eta).max(f64::MIN_POSITIVE),
        }
    }

    fn objective(&self, w: &DVector<f64>) -> f64 {
        // w'Pw - 2 b'w + y'y, with the eta term folded into P.
        (w.transpose() * &self.p * w)[(0, 0)] - 2.0 * self.b.dot(w) + self.yy
    }

    fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
         2.0 * (&self.p * w - &self.b)
    }

    /// Frank-Wolfe gap at a feasible point; non-negative, zero at optima.
    fn fw_gap(&self, w: &DVector<f64>) -> f64 {
        let g = self.gradient(w);
        let min_g = g.iter().cloned().fold(f64::INFINITY, f64::min);
        (g.dot(w) - min_g).max(0.0)
    }
}

/// Euclidean projection onto the probability simplex (sort-based, exact).
pub(crate) fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let d = v.len();
    let mut u: Vec<f64> = v.iter().cloned().collect();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumulative += ui;
        let candidate = (cumulative - 1.0) / (i as f64 + 1.0);
        if ui - candidate > 0.0 {
            theta = candidate;
        }
    }
    DVector::from_fn(d, |i, _| (v[i] - theta).max(0.0))
}

/// Exact renormalization; the active-set constraint row already enforces the
/// sum to near machine precision, this just pins the invariant.
fn renormalize(w: &mut DVector<f64>) {
    let sum: f64 = w.iter().sum();
    if sum > 0.0 {
        *w /= sum;
    }
}

pub(crate) fn solve_simplex_qp(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    eta: f64,
    opt_tol: f64,
    max_iter: usize,
    warm_start: Option<&DVector<f64>>,
) -> Result<QpSolution> {
    let d = x.ncols();
    if d == 1 {
        return Ok(QpSolution {
            w: DVector::from_element(1, 1.0),
            gap: 0.0,
            iterations: 0,
        });
    }
    let quad = Quadratic::build(x, y, eta);
    let mut w = match warm_start {
        Some(w0) if w0.len() == d => project_simplex(w0),
        _ => DVector::from_element(d, 1.0 / d as f64),
    };
    let mut iterations = 0usize;
    let mut best = w.clone();
    let mut best_obj = quad.objective(&w);
    let mut best_gap = quad.fw_gap(&w);

    // Alternate exact face pursuit with projected-gradient blocks until the
    // gap certificate clears or the budget runs out.
    loop {
        if let Some(polished) = active_set_pass(&quad, &w, &mut iterations) {
            let obj = quad.objective(&polished);
            if obj <= best_obj {
                let gap = quad.fw_gap(&polished);
                best_obj = obj;
                best_gap = gap;
                best = polished.clone();
            }
            w = polished;
        }
        if best_gap <= opt_tol {
            let mut out = best;
            renormalize(&mut out);
            return Ok(QpSolution {
                w: out,
                gap: best_gap,
                iterations,
            });
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                achieved_gap: best_gap,
                iterations,
                tolerance: opt_tol,
            });
        }
        let block = 500.min(max_iter - iterations).max(1);
        w = fista_block(&quad, &w, block, &mut iterations);
        let obj = quad.objective(&w);
        if obj <= best_obj {
            best_obj = obj;
            best_gap = quad.fw_gap(&w);
            best = w.clone();
            if best_gap <= opt_tol {
                let mut out = best;
                renormalize(&mut out);
                return Ok(QpSolution {
                    w: out,
                    gap: best_gap,
                    iterations,
                });
            }
        }
    }
}

/// Accelerated projected gradient with restart on objective increase.
fn fista_block(
    quad: &Quadratic,
    w0: &DVector<f64>,
    steps: usize,
    iterations: &mut usize,
) -> DVector<f64> {
    let step = 1.0 / quad.lipschitz;
    let mut w = w0.clone();
    let mut w_prev = w.clone();
    let mut t = 1.0_f64;
    let mut obj_prev = quad.objective(&w);
    for _ in 0..steps {
        *iterations += 1;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        let v = &w + (&w - &w_prev) * momentum;
        let candidate = project_simplex(&(&v - quad.gradient(&v) * step));
        let obj = quad.objective(&candidate);
        if obj > obj_prev {
            // Restart momentum from the last good point.
            t = 1.0;
            w_prev = w.clone();
            let plain = project_simplex(&(&w - quad.gradient(&w) * step));
            obj_prev = quad.objective(&plain);
            w = plain;
        } else {
            w_prev = std::mem::replace(&mut w, candidate);
            t = t_next;
            obj_prev = obj;
        }
    }
    w
}

/// One primal active-set pursuit from `w0`. Returns an improved feasible
/// point, or `None` when the face pursuit made no progress.
fn active_set_pass(
    quad: &Quadratic,
    w0: &DVector<f64>,
    iterations: &mut usize,
) -> Option<DVector<f64>> {
    let d = w0.len();
    let tol = RankTolerance::default();
    let mut w = w0.clone();
    let mut pinned: Vec<bool> = w.iter().map(|&wi| wi <= 1e-14).collect();
    if pinned.iter().all(|&p| p) {
        pinned = vec![false; d];
        w = DVector::from_element(d, 1.0 / d as f64);
    }
    let cap = 30 * (d + 2);
    for _ in 0..cap {
        *iterations += 1;
        let free: Vec<usize> = (0..d).filter(|&i| !pinned[i]).collect();
        if free.is_empty() {
            return None;
        }
        let candidate = face_minimizer(quad, &free, tol)?;
        let min_c = candidate.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_c >= -1e-11 {
            // Candidate face point is feasible; adopt and test multipliers.
            let mut w_new = DVector::zeros(d);
            for (pos, &i) in free.iter().enumerate() {
                w_new[i] = candidate[pos].max(0.0);
            }
            renormalize(&mut w_new);
            w = w_new;
            let g = quad.gradient(&w);
            let nu = free.iter().map(|&i| g[i]).sum::<f64>() / free.len() as f64;
            let scale = 1.0 + g.iter().cloned().fold(0.0_f64, |a, v| a.max(v.abs()));
            let mut worst = f64::INFINITY;
            let mut worst_idx = None;
            for i in 0..d {
                if pinned[i] {
                    let reduced = g[i] - nu;
                    if reduced < worst {
                        worst = reduced;
                        worst_idx = Some(i);
                    }
                }
            }
            match worst_idx {
                Some(i) if worst < -1e-11 * scale => pinned[i] = false,
                _ => return Some(w),
            }
        } else {
            // Step toward the candidate until the first coordinate blocks.
            let mut alpha = 1.0_f64;
            for (pos, &i) in free.iter().enumerate() {
                if candidate[pos] < 0.0 {
                    let denom = w[i] - candidate[pos];
                    if denom > 0.0 {
                        alpha = alpha.min(w[i] / denom);
                    }
                }
            }
            if alpha <= 0.0 || alpha.is_nan() {
                // Degenerate zero step: pin the offending coordinates outright.
                for (pos, &i) in free.iter().enumerate() {
                    if candidate[pos] < 0.0 && w[i] <= 1e-14 {
                        pinned[i] = true;
                    }
                }
                continue;
            }
            for (pos, &i) in free.iter().enumerate() {
                w[i] += alpha * (candidate[pos] - w[i]);
                if w[i] <= 1e-14 {
                    w[i] = 0.0;
                    pinned[i] = true;
                }
            }
            renormalize(&mut w);
        }
    }
    Some(w)
}

/// Minimizer of the quadratic over the affine hull of a face, via the
/// minimum-norm solution of the KKT system
/// `[2 P_FF  1; 1'  0] [w_F; nu] = [2 b_F; 1]`.
fn face_minimizer(quad: &Quadratic, free: &[usize], tol: RankTolerance) -> Option<DVector<f64>> {
    let f = free.len();
    let mut kkt = DMatrix::zeros(f + 1, f + 1);
    let mut rhs = DVector::zeros(f + 1);
    for (r, &i) in free.iter().enumerate() {
        for (c, &j) in free.iter().enumerate() {
            kkt[(r, c)] = 2.0 * quad.p[(i, j)];
        }
        kkt[(r, f)] = 1.0;
        kkt[(f, r)] = 1.0;
        rhs[r] = 2.0 * quad.b[i];
    }
    rhs[f] = 1.0;
    let mut sol = min_norm_least_squares(&kkt, &rhs, tol).ok()?;
    // Small ridge terms make the bordered system ill conditioned; refinement
    // with compensated residuals recovers full working accuracy, where plain
    // refinement stalls at a forward error of order cond * eps.
    let mut residual_norm = f64::INFINITY;
    for _ in 0..4 {
        let residual = compensated_residual(&kkt, &sol, &rhs);
        residual_norm = residual.norm();
        if residual_norm <= 1e-13 * (1.0 + rhs.norm()) {
            break;
        }
        match min_norm_least_squares(&kkt, &residual, tol) {
            Ok(correction) => sol += correction,
            Err(_) => break,
        }
    }
    if residual_norm > 1e-8 * (1.0 + rhs.norm()) {
        return None;
    }
    Some(DVector::from_fn(f, |i, _| sol[i]))
}

/// `rhs - kkt * sol` with error-free product and sum compensation, so the
/// residual stays meaningful once it drops below eps * |rhs|.
fn compensated_residual(
    kkt: &DMatrix<f64>,
    sol: &DVector<f64>,
    rhs: &DVector<f64>,
) -> DVector<f64> {
    DVector::from_fn(rhs.len(), |r, _| {
        let mut sum = -rhs[r];
        let mut compensation = 0.0;
        for k in 0..sol.len() {
            let product = kkt[(r, k)] * sol[k];
            let product_err = kkt[(r, k)].mul_add(sol[k], -product);
            let next = sum + product;
            let sum_err = if sum.abs() >= product.abs() {
                (sum - next) + product
            } else {
                (product - next) + sum
            };
            sum = next;
            compensation += product_err + sum_err;
        }
        -(sum + compensation)
    })
}

/// Minimum-norm point of `{w : sum w = 1, X w = y_hat, w >= 0}`, starting
/// from a feasible `w0`. Primal active set; face solves are direct
/// minimum-norm least-squares solves, so each visited face yields its exact
/// projection of the origin.
pub(crate) fn min_norm_nonneg_fit(
    x: &DMatrix<f64>,
    y_hat: &DVector<f64>,
    w0: &DVector<f64>,
    tol: RankTolerance,
) -> Result<DVector<f64>> {
    let d = x.ncols();
    let t = x.nrows();
    let mut constraints = DMatrix::zeros(t + 1, d);
    let mut rhs = DVector::zeros(t + 1);
    for j in 0..d {
        constraints[(0, j)] = 1.0;
    }
    rhs[0] = 1.0;
    for r in 0..t {
        for j in 0..d {
            constraints[(r + 1, j)] = x[(r, j)];
        }
        rhs[r + 1] = y_hat[r];
    }

    let mut w = w0.clone();
    let mut pinned: Vec<bool> = w.iter().map(|&wi| wi <= 1e-12).collect();
    let cap = 30 * (d + 2);
    for _ in 0..cap {
        let free: Vec<usize> = (0..d).filter(|&i| !pinned[i]).collect();
        if free.is_empty() {
            break;
        }
        let mut c_f = DMatrix::zeros(t + 1, free.len());
        for (pos, &i) in free.iter().enumerate() {
            c_f.set_column(pos, &constraints.column(i));
        }
        let candidate = min_norm_least_squares(&c_f, &rhs, tol)?;
        let min_c = candidate.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_c >= -1e-11 {
            let mut w_new = DVector::zeros(d);
            for (pos, &i) in free.iter().enumerate() {
                w_new[i] = candidate[pos].max(0.0);
            }
            w = w_new;
            // Multipliers: solve C_F' nu = 2 w_F, then mu_i = -C_i' nu on
            // the pinned set; all must be non-negative at the optimum.
            let w_f = DVector::from_fn(free.len(), |p, _| 2.0 * w[free[p]]);
            let nu = min_norm_least_squares(&c_f.transpose(), &w_f, tol)?;
            let release_tol = 1e-10 * (1.0 + nu.norm());
            let mut worst = f64::INFINITY;
            let mut worst_idx = None;
            for (i, _) in pinned.iter().enumerate().filter(|(_, &p)| p) {
                let mu = -constraints.column(i).dot(&nu);
                if mu < worst {
                    worst = mu;
                    worst_idx = Some(i);
                }
            }
            match worst_idx {
                Some(i) if worst < -release_tol => pinned[i] = false,
                _ => break,
            }
        } else {
            let mut alpha = 1.0_f64;
            for (pos, &i) in free.iter().enumerate() {
                if candidate[pos] < 0.0 {
                    let denom = w[i] - candidate[pos];
                    if denom > 0.0 {
                        alpha = alpha.min(w[i] / denom);
                    }
                }
            }
            if alpha <= 0.0 || alpha.is_nan() {
                for (pos, &i) in free.iter().enumerate() {
                    if candidate[pos] < 0.0 && w[i] <= 1e-12 {
                        pinned[i] = true;
                    }
                }
                continue;
            }
            for (pos, &i) in free.iter().enumerate() {
                w[i] += alpha * (candidate[pos] - w[i]);
                if w[i] <= 1e-12 {
                    w[i] = 0.0;
                    pinned[i] = true;
                }
            }
        }
    }

    let feasibility = (&constraints * &w - &rhs).norm();
    if feasibility > 1e-7 * (1.0 + rhs.norm()) {
        return Err(Error::NonConvergence {
            achieved_gap: feasibility,
            iterations: cap,
            tolerance: 1e-7,
        });
    }
    renormalize(&mut w);
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_hits_known_points() {
        let v = DVector::from_vec(vec![0.2, 0.3]);
        let p = project_simplex(&v);
        // Shift both up by the same amount to reach the simplex.
        assert_abs_diff_eq!(p[0], 0.45, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.55, epsilon = 1e-12);

        let v = DVector::from_vec(vec![5.0, -1.0]);
        let p = project_simplex(&v);
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn projection_preserves_feasible_points() {
        let v = DVector::from_vec(vec![0.25, 0.5, 0.25]);
        let p = project_simplex(&v);
        assert!((p - v).norm() <= 1e-12);
    }

    #[test]
    fn qp_splits_duplicate_columns() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 2.0]);
        let sol = solve_simplex_qp(&x, &y, 0.0, 1e-10, 100_000, None).unwrap();
        assert_abs_diff_eq!(sol.w[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.w[1], 0.5, epsilon = 1e-9);
        assert!(sol.gap <= 1e-10);
    }

    #[test]
    fn qp_picks_the_matching_vertex() {
        // Second column equals the target exactly; eta = 0 puts all weight
        // there.
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 1.0]);
        let y = DVector::from_vec(vec![3.0, 1.0]);
        let sol = solve_simplex_qp(&x, &y, 0.0, 1e-10, 100_000, None).unwrap();
        assert_abs_diff_eq!(sol.w[1], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn min_norm_fit_prefers_uniform_on_degenerate_face() {
        let x = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let y_hat = DVector::from_vec(vec![1.0]);
        let w0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let w = min_norm_nonneg_fit(&x, &y_hat, &w0, RankTolerance::default()).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(w[i], 1.0 / 3.0, epsilon = 1e-9);
        }
    }
}
