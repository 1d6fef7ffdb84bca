//! Simplex-weighted synthetic control with a minimum-norm tie-break.
//!
//! `simplex_lsq` fits convex donor weights to a pre-period target. Once the
//! donor pool is rich enough to fit the target exactly the optimal weights
//! stop being unique; `min_norm_synth` selects the minimum-norm optimum,
//! computed as the small-penalty limit of ridge solutions with an exact
//! two-stage fallback. The minimum-norm solution is an exact convex average
//! of its leave-one-donor-out counterparts; `sc_averaging_decomposition`
//! recovers those averaging weights.

mod qp;

use nalgebra::{DMatrix, DVector};


use crate::error::{Error, Result};
use crate::interp_ols::AveragingWeights;
use crate::numcore::{check_finite_matrix, check_finite_vector, RankTolerance};

/// Outcome panel: one target unit (row 0) and `N` donor units, observed over
/// `pre + post` periods.
#[derive(Debug, Clone)]
pub struct Panel {
    outcomes: DMatrix<f64>,
    pre_periods: usize,
    post_periods: usize,
    unit_names: Vec<String>,
}

impl Panel {
    pub fn new(
        outcomes: DMatrix<f64>,
        pre_periods: usize,
        post_periods: usize,
        unit_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if outcomes.nrows() < 2 {
            return Err(Error::DimensionMismatch(
                "panel needs a target row and at least one donor row".into(),
            ));
        }
        if pre_periods == 0 {
            return Err(Error::InvalidArgument(
                "panel needs at least one pre-treatment period".into(),
            ));
        }
        if outcomes.ncols() != pre_periods + post_periods {
            return Err(Error::DimensionMismatch(format!(
                "panel has {} columns but {} + {} periods were declared",
                outcomes.ncols(),
                pre_periods,
                post_periods
            )));
        }
        check_finite_matrix("panel outcomes", &outcomes)?;
        let unit_names = match unit_names {
            Some(names) => {
                if names.len() != outcomes.nrows() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} unit names for {} rows",
                        names.len(),
                        outcomes.nrows()
                    )));
                }
                names
            }
            None => (0..outcomes.nrows())
                .map(|i| {
                    if i == 0 {
                        "target".to_string()
                    } else {
                        format!("donor{i:02}")
                    }
                })
                .collect(),
        };
        Ok(Panel {
            outcomes,
            pre_periods,
            post_periods,
            unit_names,
        })
    }

    pub fn num_donors(&self) -> usize {
        self.outcomes.nrows() - 1
    }

    pub fn pre_periods(&self) -> usize {
        self.pre_periods
    }

    pub fn post_periods(&self) -> usize {
        self.post_periods
    }

    pub fn unit_names(&self) -> &[String] {
        &self.unit_names
    }

    pub fn pre_target(&self) -> DVector<f64> {
        DVector::from_fn(self.pre_periods, |t, _| self.outcomes[(0, t)])
    }

    pub fn post_target(&self) -> DVector<f64> {
        DVector::from_fn(self.post_periods, |t, _| {
            self.outcomes[(0, self.pre_periods + t)]
        })
    }

    /// Pre-period outcomes of the chosen donors, one column per donor.
    pub fn donor_pre(&self, subset: &DonorSubset) -> DMatrix<f64> {
        DMatrix::from_fn(self.pre_periods, subset.len(), |t, c| {
            self.outcomes[(subset.indices()[c] + 1, t)]
        })
    }

    /// Post-period outcomes of the chosen donors, one column per donor.
    pub fn donor_post(&self, subset: &DonorSubset) -> DMatrix<f64> {
        DMatrix::from_fn(self.post_periods, subset.len(), |t, c| {
            self.outcomes[(subset.indices()[c] + 1, self.pre_periods + t)]
        })
    }
}

/// Non-empty set of donor indices (0-based over donors, excluding the
/// target), stored sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DonorSubset {
    indices: Vec<usize>,
}

impl DonorSubset {
    pub fn new(indices: impl IntoIterator<Item = usize>, num_donors: usize) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        if indices.is_empty() {
            return Err(Error::InvalidArgument("donor subset is empty".into()));
        }
        indices.sort_unstable();
        for pair in indices.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidArgument(format!(
                    "donor index {} listed twice",
                    pair[0]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= num_donors {
                return Err(Error::InvalidArgument(format!(
                    "donor index {last} out of range for {num_donors} donors"
                )));
            }
        }
        Ok(DonorSubset { indices })
    }

    pub fn full(num_donors: usize) -> Self {
        DonorSubset {
            indices: (0..num_donors).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Convex weights over a donor set: non-negative, summing to one within 1e-9.
#[derive(Debug, Clone)]
pub struct SimplexWeights {
    w: DVector<f64>,
}

impl SimplexWeights {
    pub const FEASIBILITY_TOL: f64 = 1e-9;

    pub fn new(w: DVector<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidArgument("empty weight vector".into()));
        }
        check_finite_vector("weights", &w)?;
        let mut sum = 0.0;
        for &wi in w.iter() {
            if wi < -Self::FEASIBILITY_TOL {
                return Err(Error::InvalidArgument(format!(
                    "negative weight {wi} in simplex vector"
                )));
            }
            sum += wi;
        }
        if (sum - 1.0).abs() > Self::FEASIBILITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        let w = w.map(|wi| wi.max(0.0));
        Ok(SimplexWeights { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.w
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        if i < self.w.len() {
            Some(self.w[i])
        } else {
            None
        }
    }
}

/// Tolerances and budgets for the simplex solvers.
#[derive(Debug, Clone)]
pub struct SolverSettings {
    /// Duality-gap certificate each solve must reach.
    pub opt_tol: f64,
    /// Projected-gradient iteration budget per solve.
    pub max_iter: usize,
    /// Decreasing ridge penalties used to approach the minimum-norm limit.
    pub eta_path: Vec<f64>,
    /// Successive path solutions closer than this are accepted as converged.
    pub path_consistency_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            opt_tol: 1e-8,
            max_iter: 200_000,
            eta_path: vec![1e-2, 1e-4, 1e-6, 1e-8],
            path_consistency_tol: 1e-6,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.opt_tol > 0.0 && self.opt_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "opt_tol must be positive and finite, got {}",
                self.opt_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        if self.eta_path.is_empty() {
            return Err(Error::InvalidArgument("eta path is empty".into()));
        }
        for eta in &self.eta_path {
            if !(*eta > 0.0 && eta.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "eta path entries must be positive and finite, got {eta}"
                )));
            }
        }
        for pair in self.eta_path.windows(2) {
            if pair[1] >= pair[0] {
                return Err(Error::InvalidArgument(
                    "eta path must be strictly decreasing".into(),
                ));
            }
        }
        if !(self.path_consistency_tol > 0.0 && self.path_consistency_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "path consistency tolerance must be positive, got {}",
                self.path_consistency_tol
            )));
        }
        Ok(())
    }
}

/// How a minimum-norm solve was resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct MinNormReport {
    /// Successive ridge-path solutions came within the consistency tolerance.
    pub path_consistent: bool,
    /// The exact two-stage construction was used instead of a path point.
    pub used_fallback: bool,
    /// Penalty at which the path was accepted, when it was.
    pub accepted_eta: Option<f64>,
    /// Distance between the last two path solutions.
    pub last_step: Option<f64>,
}

fn validate_problem(pre_controls: &DMatrix<f64>, pre_target: &DVector<f64>) -> Result<()> {
    if pre_controls.nrows() == 0 || pre_controls.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "donor matrix must be non-empty, got {}x{}",
            pre_controls.nrows(),
            pre_controls.ncols()
        )));
    }
    if pre_controls.nrows() != pre_target.len() {
        return Err(Error::DimensionMismatch(format!(
            "donor matrix has {} periods but target has {}",
            pre_controls.nrows(),
            pre_target.len()
        )));
    }
    check_finite_matrix("donor matrix", pre_controls)?;
    check_finite_vector("target", pre_target)?;
    Ok(())
}

/// Simplex-constrained least squares: `min |Xw - y|` over convex weights.
///
/// The minimizer need not be unique once donors can fit the target exactly;
/// use [`min_norm_synth`] when a canonical representative is needed.
pub fn simplex_lsq(
    pre_controls: &DMatrix<f64>,
    pre_target: &DVector<f64>,
    settings: &SolverSettings,
) -> Result<SimplexWeights> {
    settings.validate()?;
    validate_problem(pre_controls, pre_target)?;
    let sol = qp::solve_simplex_qp(
        pre_controls,
        pre_target,
        0.0,
        settings.opt_tol,
        settings.max_iter,
        None,
    )?;
    SimplexWeights::new(sol.w)
}

/// Ridge-penalized simplex least squares: `min |Xw - y|^2 + eta |w|^2`.
/// Strictly convex, so the solution is unique for any `eta > 0`.
pub fn ridge_synth(
    pre_controls: &DMatrix<f64>,
    pre_target: &DVector<f64>,
    eta: f64,
    settings: &SolverSettings,
) -> Result<SimplexWeights> {
    settings.validate()?;
    validate_problem(pre_controls, pre_target)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ridge penalty must be positive and finite, got {eta}"
        )));
    }
    let sol = qp::solve_simplex_qp(
        pre_controls,
        pre_target,
        eta,
        settings.opt_tol,
        settings.max_iter,
        None,
    )?;
    SimplexWeights::new(sol.w)
}

/// Minimum-norm simplex least squares: among all optimal convex weights,
/// the one of least Euclidean norm.
pub fn min_norm_synth(
    pre_controls: &DMatrix<f64>,
    pre_target: &DVector<f64>,
    settings: &SolverSettings,
) -> Result<SimplexWeights> {
    min_norm_synth_with_report(pre_controls, pre_target, settings).map(|(w, _)| w)
}

/// [`min_norm_synth`] plus a report on how the limit was resolved.
///
/// Walks the decreasing ridge path, accepting once successive solutions are
/// Cauchy within the consistency tolerance. A stalling path falls back to the
/// exact two-stage construction; persistent inconsistency is reported in the
/// diagnostics rather than raised as an error.
pub fn min_norm_synth_with_report(
    pre_controls: &DMatrix<f64>,
    pre_target: &DVector<f64>,
    settings: &SolverSettings,
) -> Result<(SimplexWeights, MinNormReport)> {
    settings.validate()?;
    validate_problem(pre_controls, pre_target)?;
    if pre_controls.ncols() == 1 {
        return Ok((
            SimplexWeights::new(DVector::from_element(1, 1.0))?,
            MinNormReport {
                path_consistent: true,
                used_fallback: false,
                accepted_eta: None,
                last_step: None,
            },
        ));
    }

    let mut prev: Option<(f64, DVector<f64>)> = None;
    let mut last_step = None;
    for &eta in &settings.eta_path {
        let warm = prev.as_ref().map(|(_, w)| w);
        let sol = qp::solve_simplex_qp(
            pre_controls,
            pre_target,
            eta,
            settings.opt_tol,
            settings.max_iter,
            warm,
        )?;
        if let Some((_, prev_w)) = &prev {
            let step = (&sol.w - prev_w).norm();
            last_step = Some(step);
            if step < settings.path_consistency_tol {
                return Ok((
                    SimplexWeights::new(sol.w)?,
                    MinNormReport {
                        path_consistent: true,
                        used_fallback: false,
                        accepted_eta: Some(eta),
                        last_step,
                    },
                ));
            }
        }
        prev = Some((eta, sol.w));
    }

    let (_, path_w) = prev.expect("eta path is non-empty");
    match min_norm_synth_two_stage(pre_controls, pre_target, settings) {
        Ok(w) => {
            let path_fit = (pre_controls * &path_w - pre_target).norm();
            let fb_fit = (pre_controls * w.values() - pre_target).norm();
            if fb_fit <= path_fit + 1e-7 * (1.0 + pre_target.norm()) {
                return Ok((
                    w,
                    MinNormReport {
                        path_consistent: false,
                        used_fallback: true,
                        accepted_eta: None,
                        last_step,
                    },
                ));
            }
            Ok((
                SimplexWeights::new(path_w)?,
                MinNormReport {
                    path_consistent: false,
                    used_fallback: false,
                    accepted_eta: None,
                    last_step,
                },
            ))
        }
        Err(_) => Ok((
            SimplexWeights::new(path_w)?,
            MinNormReport {
                path_consistent: false,
                used_fallback: false,
                accepted_eta: None,
                last_step,
            },
        )),
    }
}

/// Exact two-stage minimum-norm construction, independent of the ridge path:
/// first solve the unpenalized fit to find the optimal fitted values, then
/// take the minimum-norm convex weights that reproduce those fitted values.
pub fn min_norm_synth_two_stage(
    pre_controls: &DMatrix<f64>,
    pre_target: &DVector<f64>,
    settings: &SolverSettings,
) -> Result<SimplexWeights> {
    settings.validate()?;
    validate_problem(pre_controls, pre_target)?;
    if pre_controls.ncols() == 1 {
        return SimplexWeights::new(DVector::from_element(1, 1.0));
    }
    let stage1 = qp::solve_simplex_qp(
        pre_controls,
        pre_target,
        0.0,
        settings.opt_tol,
        settings.max_iter,
        None,
    )?;
    let fitted = pre_controls * &stage1.w;
    let w = qp::min_norm_nonneg_fit(
        pre_controls,
        &fitted,
        &stage1.w,
        RankTolerance::default(),
    )?;
    // The norm may not grow and the fit may not degrade across stage two.
    let scale = 1.0 + pre_target.norm();
    let stage1_fit = (pre_controls * &stage1.w - pre_target).norm();
    let stage2_fit = (pre_controls * &w - pre_target).norm();
    if stage2_fit > stage1_fit + 1e-7 * scale || w.norm() > stage1.w.norm() + 1e-7 {
        return Err(Error::NonConvergence {
            achieved_gap: stage2_fit - stage1_fit,
            iterations: 0,
            tolerance: 1e-7,
        });
    }
    SimplexWeights::new(w)
}

/// Convex weights expressing the full-pool minimum-norm solution as an
/// average of its leave-one-donor-out solutions.
///
/// `loo_weights[i]` must live in the same donor coordinate space as `full`
/// (with donor `i`'s own entry zero). The averaging weights exist whenever
/// the inputs really are the minimum-norm solutions, so a combination
/// residual above `tol` is reported as an error rather than absorbed.
pub fn sc_averaging_decomposition(
    full: &SimplexWeights,
    loo_weights: &[SimplexWeights],
    tol: f64,
    settings: &SolverSettings,
) -> Result<AveragingWeights> {
    settings.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "residual tolerance must be positive, got {tol}"
        )));
    }
    if loo_weights.len() < 2 {
        return Err(Error::InvalidArgument(
            "decomposition needs at least two leave-one-out solutions".into(),
        ));
    }
    let d = full.len();
    for (i, w) in loo_weights.iter().enumerate() {
        if w.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "leave-one-out weights {i} have length {}, expected {d}",
                w.len()
            )));
        }
    }
    let design = DMatrix::from_fn(d, loo_weights.len(), |r, c| loo_weights[c].values()[r]);
    let target = full.values().clone();
    let lambda = min_norm_synth(&design, &target, settings)?;
    let residual = (&design * lambda.values() - &target).norm();
    if residual > tol {
        return Err(Error::DecompositionResidual {
            residual,
            tolerance: tol,
        });
    }
    AveragingWeights::new(
        lambda
            .values()
            .iter()
            .enumerate()
            .map(|(i, &l)| (i, l.clamp(0.0, 1.0)))
            .collect(),
    )
}

/// Imputed target outcomes: `post_controls * w`.
pub fn impute(weights: &SimplexWeights, post_controls: &DMatrix<f64>) -> Result<DVector<f64>> {
    if post_controls.ncols() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "post matrix has {} donors but weights have {}",
            post_controls.ncols(),
            weights.len()
        )));
    }
    check_finite_matrix("post matrix", post_controls)?;
    Ok(post_controls * weights.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn settings() -> SolverSettings {
        SolverSettings::default()
    }

    fn objective(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, eta: f64) -> f64 {
        let r = x * w - y;
        r.dot(&r) + eta * w.dot(w)
    }

    #[test]
    fn single_donor_gets_all_weight() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let y = DVector::from_vec(vec![9.0, 9.0, 9.0]);
        let w = min_norm_synth(&x, &y, &settings()).unwrap();
        assert_abs_diff_eq!(w.values()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn duplicate_donors_split_evenly() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 2.0]);
        let w = min_norm_synth(&x, &y, &settings()).unwrap();
        assert_abs_diff_eq!(w.values()[0], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(w.values()[1], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn path_and_two_stage_agree() {
        let mut rng = crate::seeding::stream_rng(5, "test-sc", 0);
        for trial in 0..30 {
            let t = 1 + trial % 3;
            let d = 2 + trial % 5;
            let x = DMatrix::from_fn(t, d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let y = DVector::from_fn(t, |_, _| rng.sample::<f64, _>(StandardNormal));
            let a = min_norm_synth(&x, &y, &settings()).unwrap();
            let b = min_norm_synth_two_stage(&x, &y, &settings()).unwrap();
            assert!(
                (a.values() - b.values()).norm() <= 1e-5,
                "trial {trial}: path and two-stage differ by {}",
                (a.values() - b.values()).norm()
            );
        }
    }

    #[test]
    fn ridge_fit_degrades_with_penalty() {
        let mut rng = crate::seeding::stream_rng(5, "test-sc", 1);
        let x = DMatrix::from_fn(3, 4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w_small = ridge_synth(&x, &y, 1e-6, &settings()).unwrap();
        let w_large = ridge_synth(&x, &y, 1.0, &settings()).unwrap();
        let fit_small = (&x * w_small.values() - &y).norm();
        let fit_large = (&x * w_large.values() - &y).norm();
        assert!(fit_small <= fit_large + 1e-9);
    }

    #[test]
    fn decomposition_recovers_known_combination() {
        // Build loo vectors and a full vector that is exactly their average.
        let loo = vec![
            SimplexWeights::new(DVector::from_vec(vec![0.0, 0.5, 0.5])).unwrap(),
            SimplexWeights::new(DVector::from_vec(vec![0.6, 0.0, 0.4])).unwrap(),
            SimplexWeights::new(DVector::from_vec(vec![0.3, 0.7, 0.0])).unwrap(),
        ];
        let mixed = DVector::from_vec(vec![0.3, 0.4, 0.3]);
        let full = SimplexWeights::new(mixed).unwrap();
        let lambda = sc_averaging_decomposition(&full, &loo, 1e-6, &settings()).unwrap();
        let mut recombined = DVector::zeros(3);
        for (i, l) in lambda.iter() {
            recombined.axpy(l, loo[i].values(), 1.0);
        }
        assert!((recombined - full.values()).norm() <= 1e-6);
    }

    #[test]
    fn decomposition_rejects_unreachable_target() {
        let loo = vec![
            SimplexWeights::new(DVector::from_vec(vec![0.0, 1.0, 0.0])).unwrap(),
            SimplexWeights::new(DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap(),
        ];
        let full = SimplexWeights::new(DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        assert!(matches!(
            sc_averaging_decomposition(&full, &loo, 1e-6, &settings()),
            Err(Error::DecompositionResidual { .. })
        ));
    }

    #[test]
    fn impute_applies_weights() {
        let w = SimplexWeights::new(DVector::from_vec(vec![0.25, 0.75])).unwrap();
        let post = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 8.0]);
        let out = impute(&w, &post).unwrap();
        assert_abs_diff_eq!(out[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out[1], 6.0, epsilon = 1e-12);
    }

    #[test]
    fn settings_validation_catches_bad_path() {
        let mut s = SolverSettings {
            eta_path: vec![1e-4, 1e-2],
            ..SolverSettings::default()
        };
        assert!(s.validate().is_err());
        s.eta_path = vec![];
        assert!(s.validate().is_err());
        s.eta_path = vec![0.0];
        assert!(s.validate().is_err());
    }

    #[test]
    fn panel_accessors_slice_periods() {
        let outcomes = DMatrix::from_row_slice(
            3,
            4,
            &[
                1.0, 2.0, 3.0, 4.0, //
                5.0, 6.0, 7.0, 8.0, //
                9.0, 10.0, 11.0, 12.0,
            ],
        );
        let panel = Panel::new(outcomes, 3, 1, None).unwrap();
        assert_eq!(panel.num_donors(), 2);
        assert_eq!(panel.pre_target(), DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert_eq!(panel.post_target(), DVector::from_vec(vec![4.0]));
        let subset = DonorSubset::new(vec![1], 2).unwrap();
        assert_eq!(
            panel.donor_pre(&subset),
            DMatrix::from_column_slice(3, 1, &[9.0, 10.0, 11.0])
        );
        assert_eq!(
            panel.donor_post(&subset),
            DMatrix::from_column_slice(1, 1, &[12.0])
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_solutions_feasible_and_no_worse_than_vertices(
            seed in 0u64..1500,
            t in 1usize..4,
            d in 1usize..7,
        ) {
            let mut rng = crate::seeding::stream_rng(seed, "prop-sc-feasible", 0);
            let x = DMatrix::from_fn(t, d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let y = DVector::from_fn(t, |_, _| rng.sample::<f64, _>(StandardNormal));
            let w = simplex_lsq(&x, &y, &settings()).unwrap();
            let sum: f64 = w.values().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
            for &wi in w.values().iter() {
                prop_assert!(wi >= 0.0);
            }
            let obj = objective(&x, &y, w.values(), 0.0);
            for i in 0..d {
                let mut vertex = DVector::zeros(d);
                vertex[i] = 1.0;
                prop_assert!(obj <= objective(&x, &y, &vertex, 0.0) + 1e-6);
            }
        }

        #[test]
        fn prop_min_norm_never_beats_lsq_fit_but_shrinks_norm(
            seed in 0u64..1500,
            t in 1usize..4,
            d in 2usize..7,
        ) {
            let mut rng = crate::seeding::stream_rng(seed, "prop-sc-minnorm", 0);
            let x = DMatrix::from_fn(t, d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let y = DVector::from_fn(t, |_, _| rng.sample::<f64, _>(StandardNormal));
            let lsq = simplex_lsq(&x, &y, &settings()).unwrap();
            let mn = min_norm_synth(&x, &y, &settings()).unwrap();
            let lsq_fit = (&x * lsq.values() - &y).norm();
            let mn_fit = (&x * mn.values() - &y).norm();
            prop_assert!(mn_fit <= lsq_fit + 1e-5);
            prop_assert!(mn.values().norm() <= lsq.values().norm() + 1e-5);
        }
    }
}
