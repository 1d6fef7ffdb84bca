//! SVD-backed linear algebra kernel.
//!
//! Everything rank-related in the crate goes through one notion of numerical
//! rank: singular values strictly above `rel_tol * sigma_max` count, the rest
//! are treated as zero. Rank-deficient inputs to checked operations are
//! reported as errors; nothing here regularizes silently.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative cutoff for treating singular values as zero.
///
/// A singular value counts toward the rank when it exceeds
/// `rel_tol * sigma_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTolerance {
    rel_tol: f64,
}

impl RankTolerance {
    pub const DEFAULT_REL_TOL: f64 = 1e-10;

    pub fn new(rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rank tolerance must lie in (0, 1), got {rel_tol}"
            )));
        }
        Ok(RankTolerance { rel_tol })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        RankTolerance {
            rel_tol: Self::DEFAULT_REL_TOL,
        }
    }
}

pub(crate) fn check_finite_matrix(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{name} contains NaN or infinity")))
    }
}

pub(crate) fn check_finite_vector(name: &str, v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{name} contains NaN or infinity")))
    }
}

fn check_nonempty(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Thin SVD of a matrix together with its numerical rank.
///
/// `keep[i]` marks the singular triplets that count toward the rank.
pub(crate) struct ThinSvd {
    pub u: DMatrix<f64>,
    pub v_t: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub keep: Vec<bool>,
    pub rank: usize,
}

pub(crate) fn thin_svd(a: &DMatrix<f64>, tol: RankTolerance) -> Result<ThinSvd> {
    check_nonempty("matrix", a)?;
    check_finite_matrix("matrix", a)?;
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let singular_values = DVector::from(svd.singular_values);
    let sigma_max = singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = tol.rel_tol * sigma_max;
    let keep: Vec<bool> = singular_values.iter().map(|&s| s > cutoff).collect();
    let rank = keep.iter().filter(|&&k| k).count();
    Ok(ThinSvd {
        u,
        v_t,
        singular_values,
        keep,
        rank,
    })
}

impl ThinSvd {
    /// Applies the pseudoinverse to `b`: sum over kept triplets of
    /// `v_i (u_i . b) / sigma_i`.
    pub(crate) fn apply_pinv(&self, b: &DVector<f64>) -> DVector<f64> {
        let p = self.v_t.ncols();
        let mut x = DVector::zeros(p);
        for i in 0..self.singular_values.len() {
            if !self.keep[i] {
                continue;
            }
            let coeff = self.u.column(i).dot(b) / self.singular_values[i];
            x.axpy(coeff, &self.v_t.row(i).transpose(), 1.0);
        }
        x
    }
}

/// Minimum-norm solution of the least-squares problem `min |Ax - b|`.
///
/// Among all minimizers, returns the one of least Euclidean norm. Computed
/// via the SVD pseudoinverse; directions below the rank cutoff are dropped,
/// never inverted. For a full-column-rank `A` this is ordinary least squares;
/// for a full-row-rank `A` it interpolates `b` exactly.
pub fn min_norm_least_squares(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    tol: RankTolerance,
) -> Result<DVector<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but target has {} entries",
            a.nrows(),
            b.len()
        )));
    }
    check_finite_vector("target", b)?;
    let svd = thin_svd(a, tol)?;
    Ok(svd.apply_pinv(b))
}

/// Leverage of one column of a full-row-rank matrix: `A_j' (A A')^-1 A_j`.
///
/// Always in `[0, 1]`, and the leverages of all columns sum to the row count.
/// A leverage of exactly 1 means the matrix loses full row rank when that
/// column is removed.
pub fn feature_leverage(a: &DMatrix<f64>, j: usize, tol: RankTolerance) -> Result<f64> {
    if j >= a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "column index {j} out of range for {} columns",
            a.ncols()
        )));
    }
    Ok(feature_leverages(a, tol)?[j])
}

/// Leverages of every column at once; see [`feature_leverage`].
pub fn feature_leverages(a: &DMatrix<f64>, tol: RankTolerance) -> Result<DVector<f64>> {
    let svd = full_row_rank_svd(a, tol)?;
    // A = U S V_r', so S^-1 U' A = V_r' and h_j reduces to the squared norm
    // of column j of V_r'.
    let p = a.ncols();
    let mut h = DVector::<f64>::zeros(p);
    for i in 0..svd.singular_values.len() {
        if !svd.keep[i] {
            continue;
        }
        for j in 0..p {
            h[j] += svd.v_t[(i, j)] * svd.v_t[(i, j)];
        }
    }
    for j in 0..p {
        h[j] = h[j].clamp(0.0, 1.0);
    }
    Ok(h)
}

/// Orthogonal projector onto the row space of a full-row-rank matrix.
pub fn row_space_projection(a: &DMatrix<f64>, tol: RankTolerance) -> Result<DMatrix<f64>> {
    let svd = full_row_rank_svd(a, tol)?;
    let p = a.ncols();
    let mut pi = DMatrix::zeros(p, p);
    for i in 0..svd.singular_values.len() {
        if !svd.keep[i] {
            continue;
        }
        let v_i = svd.v_t.row(i).transpose();
        pi.ger(1.0, &v_i, &v_i, 1.0);
    }
    Ok(pi)
}

/// Trace of `(A A')^-1` for a full-row-rank matrix: sum of `1 / sigma_i^2`.
pub(crate) fn inverse_gram_trace(a: &DMatrix<f64>, tol: RankTolerance) -> Result<f64> {
    let svd = full_row_rank_svd(a, tol)?;
    let mut trace = 0.0;
    for i in 0..svd.singular_values.len() {
        if svd.keep[i] {
            trace += 1.0 / (svd.singular_values[i] * svd.singular_values[i]);
        }
    }
    Ok(trace)
}

pub(crate) fn full_row_rank_svd(a: &DMatrix<f64>, tol: RankTolerance) -> Result<ThinSvd> {
    let svd = thin_svd(a, tol)?;
    if svd.rank < a.nrows() {
        return Err(Error::RankDeficient(format!(
            "matrix of shape {}x{} has numerical rank {}, expected full row rank",
            a.nrows(),
            a.ncols(),
            svd.rank
        )));
    }
    Ok(svd)
}

pub(crate) fn numerical_rank(a: &DMatrix<f64>, tol: RankTolerance) -> Result<usize> {
    Ok(thin_svd(a, tol)?.rank)
}
