//! Raw tabular data to a wide dummy design.
//!
//! Continuous columns are quantile-binned, discrete columns become one
//! indicator per distinct value, declared dummies pass through. All base
//! indicators are then pairwise interacted (never within an exclusion
//! group), all-zero columns are pruned, a small Gaussian jitter breaks exact
//! collinearity among the indicators, and an unjittered intercept is
//! prepended at position 0. Column order is deterministic: bases sorted by
//! name, then interactions sorted by source-name pair.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Real-valued; replaced by quantile-bin indicators.
    Continuous,
    /// Finitely many exact codes; replaced by one indicator per code.
    Discrete,
    /// Already 0/1; passes through unchanged.
    Dummy,
}

/// How one raw column enters the expansion.
#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Columns sharing a group are never interacted with each other.
    /// Defaults to the source column name, so indicators derived from the
    /// same raw column never multiply together.
    pub exclusion_group: Option<String>,
}

/// Knobs for the whole expansion.
#[derive(Debug, Clone)]
pub struct ExpansionPlan {
    pub bins_per_continuous: usize,
    pub jitter_sd: f64,
    pub jitter_seed: u64,
    pub ordering_seed: u64,
    pub num_orderings: usize,
}

impl Default for ExpansionPlan {
    fn default() -> Self {
        ExpansionPlan {
            bins_per_continuous: 50,
            jitter_sd: 0.02,
            jitter_seed: 0,
            ordering_seed: 0,
            num_orderings: 5,
        }
    }
}

impl ExpansionPlan {
    pub fn validate(&self) -> Result<()> {
        if self.bins_per_continuous < 2 {
            return Err(Error::InvalidArgument(format!(
                "bins_per_continuous must be at least 2, got {}",
                self.bins_per_continuous
            )));
        }
        if !(self.jitter_sd >= 0.0 && self.jitter_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "jitter_sd must be non-negative and finite, got {}",
                self.jitter_sd
            )));
        }
        if self.num_orderings == 0 {
            return Err(Error::InvalidArgument(
                "num_orderings must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Result of binning one column: indicator columns over the kept bins.
#[derive(Debug, Clone)]
pub struct BinnedColumn {
    pub indicators: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub edges: Vec<f64>,
    /// True when everything collapsed into a single bin.
    pub constant: bool,
}

/// Quantile-bin a column into (at most) `bins` groups.
///
/// Edges sit at the lower empirical quantiles `v[ceil(k n / bins) - 1]`,
/// duplicates merged; a value equal to an edge goes to the lower bin. Bins
/// left empty by duplicate edges are dropped, so the surviving indicators
/// partition the rows. A constant column yields a single bin; the caller is
/// expected to surface the `constant` flag as a warning.
pub fn quantile_bin(values: &[f64], bins: usize) -> Result<BinnedColumn> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty column".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("column to bin".into()));
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut edges: Vec<f64> = Vec::with_capacity(bins - 1);
    for k in 1..bins {
        let idx = (k * n).div_ceil(bins) - 1;
        let edge = sorted[idx];
        if edges.last() != Some(&edge) {
            edges.push(edge);
        }
    }
    // Ties go to the lower bin: bin(x) counts edges strictly below x.
    let assign = |x: f64| edges.partition_point(|e| *e < x);
    let raw_bins = edges.len() + 1;
    let mut counts = vec![0usize; raw_bins];
    for &v in values {
        counts[assign(v)] += 1;
    }
    let kept: Vec<usize> = (0..raw_bins).filter(|&b| counts[b] > 0).collect();
    let mut remap = vec![usize::MAX; raw_bins];
    for (new, &old) in kept.iter().enumerate() {
        remap[old] = new;
    }
    let mut indicators = vec![vec![0.0; n]; kept.len()];
    for (row, &v) in values.iter().enumerate() {
        indicators[remap[assign(v)]][row] = 1.0;
    }
    let labels = kept
        .iter()
        .map(|&b| {
            if edges.is_empty() {
                "all".to_string()
            } else if b == 0 {
                format!("<={}", edges[0])
            } else if b == edges.len() {
                format!(">{}", edges[b - 1])
            } else {
                format!("({},{}]", edges[b - 1], edges[b])
            }
        })
        .collect();
    Ok(BinnedColumn {
        constant: kept.len() == 1,
        indicators,
        labels,
        edges,
    })
}

/// A 0/1 column carrying its provenance through the pipeline.
#[derive(Debug, Clone)]
pub struct DummyColumn {
    pub name: String,
    pub values: Vec<f64>,
    pub group: Option<String>,
    pub sources: Vec<String>,
    pub detail: String,
}

fn is_zero_one(values: &[f64]) -> bool {
    values.iter().all(|&v| v == 0.0 || v == 1.0)
}

/// All pairwise products of the base indicators, skipping pairs that share
/// an exclusion group and dropping products that are identically zero.
///
/// Input columns must be 0/1. The result keeps the bases first (sorted by
/// name) and appends the interactions sorted by source-name pair.
pub fn expand_interactions(bases: &[DummyColumn]) -> Result<Vec<DummyColumn>> {
    for b in bases {
        if !is_zero_one(&b.values) {
            return Err(Error::InvalidArgument(format!(
                "column {} is not 0/1; interactions need indicator inputs",
                b.name
            )));
        }
    }
    let mut sorted: Vec<DummyColumn> = bases.to_vec();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    for pair in sorted.windows(2) {
        if pair[0].name == pair[1].name {
            return Err(Error::InvalidArgument(format!(
                "duplicate expanded column name {}",
                pair[0].name
            )));
        }
    }
    let mut out: Vec<DummyColumn> = sorted
        .iter()
        .filter(|b| b.values.iter().any(|&v| v != 0.0))
        .cloned()
        .collect();
    for i in 0..sorted.len() {
        for j in (i + 1)..sorted.len() {
            let (a, b) = (&sorted[i], &sorted[j]);
            if let (Some(ga), Some(gb)) = (&a.group, &b.group) {
                if ga == gb {
                    continue;
                }
            }
            let values: Vec<f64> = a
                .values
                .iter()
                .zip(b.values.iter())
                .map(|(x, y)| x * y)
                .collect();
            if values.iter().all(|&v| v == 0.0) {
                continue;
            }
            out.push(DummyColumn {
                name: format!("{}*{}", a.name, b.name),
                values,
                group: None,
                sources: vec![a.name.clone(), b.name.clone()],
                detail: "interaction".to_string(),
            });
        }
    }
    Ok(out)
}

/// Adds independent `N(0, sd^2)` noise to every entry, in row-major order.
/// `sd = 0` returns the input unchanged without consuming randomness.
pub fn jitter(matrix: &DMatrix<f64>, sd: f64, seed: u64) -> Result<DMatrix<f64>> {
    if !(sd >= 0.0 && sd.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "jitter sd must be non-negative and finite, got {sd}"
        )));
    }
    if sd == 0.0 {
        return Ok(matrix.clone());
    }
    let normal = Normal::new(0.0, sd).expect("validated sd");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = matrix.clone();
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            out[(i, j)] += rng.sample::<f64, _>(normal);
        }
    }
    Ok(out)
}

/// Seeded Fisher-Yates permutation of `0..k`.
pub fn random_ordering(k: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..k).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Where one expanded column came from.
#[derive(Debug, Clone)]
pub struct ColumnProvenance {
    pub column: String,
    pub kind: String,
    pub sources: Vec<String>,
    pub detail: String,
}

/// The expanded design: intercept at column 0, then the jittered indicator
/// block.
#[derive(Debug, Clone)]
pub struct ExpandedData {
    pub matrix: DMatrix<f64>,
    pub names: Vec<String>,
    pub provenance: Vec<ColumnProvenance>,
    pub warnings: Vec<String>,
}

/// Runs the full pipeline over a raw matrix whose columns match `specs`.
pub fn expand_dataset(
    raw: &DMatrix<f64>,
    specs: &[ColumnSpec],
    plan: &ExpansionPlan,
) -> Result<ExpandedData> {
    plan.validate()?;
    if specs.len() != raw.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} column specs for {} raw columns",
            specs.len(),
            raw.ncols()
        )));
    }
    if raw.nrows() == 0 {
        return Err(Error::DimensionMismatch("raw data has no rows".into()));
    }
    crate::numcore::check_finite_matrix("raw data", raw)?;
    let mut warnings = Vec::new();
    let mut bases: Vec<DummyColumn> = Vec::new();
    for (c, spec) in specs.iter().enumerate() {
        if spec.name.is_empty() {
            return Err(Error::InvalidArgument(format!("column {c} has no name")));
        }
        let column: Vec<f64> = raw.column(c).iter().cloned().collect();
        let group = Some(
            spec.exclusion_group
                .clone()
                .unwrap_or_else(|| spec.name.clone()),
        );
        match spec.kind {
            ColumnKind::Continuous => {
                let binned = quantile_bin(&column, plan.bins_per_continuous)?;
                if binned.constant {
                    warnings.push(format!(
                        "column {} collapsed to a single bin",
                        spec.name
                    ));
                }
                for (b, values) in binned.indicators.into_iter().enumerate() {
                    bases.push(DummyColumn {
                        name: format!("{}_bin{b:02}", spec.name),
                        values,
                        group: group.clone(),
                        sources: vec![spec.name.clone()],
                        detail: format!("bin {}", binned.labels[b]),
                    });
                }
            }
            ColumnKind::Discrete => {
                let mut distinct = column.clone();
                distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                distinct.dedup();
                if distinct.len() == 1 {
                    warnings.push(format!(
                        "column {} has a single distinct value",
                        spec.name
                    ));
                }
                for v in distinct {
                    bases.push(DummyColumn {
                        name: format!("{}_v{v}", spec.name),
                        values: column.iter().map(|&x| f64::from(x == v)).collect(),
                        group: group.clone(),
                        sources: vec![spec.name.clone()],
                        detail: format!("indicator of value {v}"),
                    });
                }
            }
            ColumnKind::Dummy => {
                if !is_zero_one(&column) {
                    return Err(Error::Data(format!(
                        "column {} declared dummy but has values outside {{0, 1}}",
                        spec.name
                    )));
                }
                bases.push(DummyColumn {
                    name: spec.name.clone(),
                    values: column,
                    group: spec.exclusion_group.clone(),
                    sources: vec![spec.name.clone()],
                    detail: "passthrough".to_string(),
                });
            }
        }
    }

    let expanded = expand_interactions(&bases)?;
    if expanded.is_empty() {
        return Err(Error::Data("expansion produced no columns".into()));
    }
    let n = raw.nrows();
    let block = DMatrix::from_fn(n, expanded.len(), |r, c| expanded[c].values[r]);
    let block = jitter(&block, plan.jitter_sd, plan.jitter_seed)?;

    let k = expanded.len();
    let mut matrix = DMatrix::zeros(n, k + 1);
    for r in 0..n {
        matrix[(r, 0)] = 1.0;
    }
    matrix.view_mut((0, 1), (n, k)).copy_from(&block);

    let mut names = Vec::with_capacity(k + 1);
    let mut provenance = Vec::with_capacity(k + 1);
    names.push("intercept".to_string());
    provenance.push(ColumnProvenance {
        column: "intercept".to_string(),
        kind: "intercept".to_string(),
        sources: vec![],
        detail: "constant 1, never jittered".to_string(),
    });
    for col in &expanded {
        names.push(col.name.clone());
        provenance.push(ColumnProvenance {
            column: col.name.clone(),
            kind: if col.sources.len() > 1 {
                "interaction".to_string()
            } else {
                "base".to_string()
            },
            sources: col.sources.clone(),
            detail: col.detail.clone(),
        });
    }

    Ok(ExpandedData {
        matrix,
        names,
        provenance,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn even_quantiles_split_evenly() {
        let values: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let binned = quantile_bin(&values, 5).unwrap();
        assert_eq!(binned.edges, vec![2.0, 4.0, 6.0, 8.0]);
        assert_eq!(binned.indicators.len(), 5);
        for ind in &binned.indicators {
            assert_eq!(ind.iter().sum::<f64>(), 2.0);
        }
    }

    #[test]
    fn ties_merge_duplicate_edges() {
        let values = vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0];
        let binned = quantile_bin(&values, 4).unwrap();
        assert_eq!(binned.edges, vec![1.0, 2.0]);
        assert_eq!(binned.indicators.len(), 2);
        assert!(!binned.constant);
        // Ties go to the lower bin.
        assert_eq!(binned.indicators[0], vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_column_collapses() {
        let binned = quantile_bin(&[5.0, 5.0, 5.0], 3).unwrap();
        assert!(binned.constant);
        assert_eq!(binned.indicators.len(), 1);
        assert_eq!(binned.indicators[0], vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn same_group_pairs_are_skipped() {
        let bases = vec![
            DummyColumn {
                name: "a0".into(),
                values: vec![1.0, 0.0],
                group: Some("a".into()),
                sources: vec!["a".into()],
                detail: String::new(),
            },
            DummyColumn {
                name: "a1".into(),
                values: vec![0.0, 1.0],
                group: Some("a".into()),
                sources: vec!["a".into()],
                detail: String::new(),
            },
            DummyColumn {
                name: "b0".into(),
                values: vec![1.0, 1.0],
                group: Some("b".into()),
                sources: vec!["b".into()],
                detail: String::new(),
            },
        ];
        let out = expand_interactions(&bases).unwrap();
        let names: Vec<&str> = out.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["a0", "a1", "b0", "a0*b0", "a1*b0"]);
    }

    #[test]
    fn all_zero_products_are_pruned() {
        let bases = vec![
            DummyColumn {
                name: "a".into(),
                values: vec![1.0, 0.0],
                group: Some("a".into()),
                sources: vec!["a".into()],
                detail: String::new(),
            },
            DummyColumn {
                name: "b".into(),
                values: vec![0.0, 1.0],
                group: Some("b".into()),
                sources: vec!["b".into()],
                detail: String::new(),
            },
        ];
        let out = expand_interactions(&bases).unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn zero_jitter_is_identity() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(jitter(&m, 0.0, 7).unwrap(), m);
    }

    #[test]
    fn jitter_is_seed_deterministic() {
        let m = DMatrix::zeros(3, 4);
        let a = jitter(&m, 0.02, 7).unwrap();
        let b = jitter(&m, 0.02, 7).unwrap();
        let c = jitter(&m, 0.02, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|&v| v.abs() < 0.5));
    }

    #[test]
    fn ordering_is_a_permutation() {
        let perm = random_ordering(10, 3);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
        assert_eq!(perm, random_ordering(10, 3));
        assert_eq!(random_ordering(1, 5), vec![0]);
        assert!(random_ordering(0, 5).is_empty());
    }

    #[test]
    fn full_expansion_shapes_up() {
        // Two binary discrete columns, all combinations present.
        let raw = DMatrix::from_row_slice(
            4,
            2,
            &[
                0.0, 0.0, //
                0.0, 1.0, //
                1.0, 0.0, //
                1.0, 1.0,
            ],
        );
        let specs = vec![
            ColumnSpec {
                name: "a".into(),
                kind: ColumnKind::Discrete,
                exclusion_group: None,
            },
            ColumnSpec {
                name: "b".into(),
                kind: ColumnKind::Discrete,
                exclusion_group: None,
            },
        ];
        let plan = ExpansionPlan {
            jitter_sd: 0.0,
            ..ExpansionPlan::default()
        };
        let out = expand_dataset(&raw, &specs, &plan).unwrap();
        // intercept + 4 bases + 4 cross products.
        assert_eq!(out.names.len(), 9);
        assert_eq!(out.names[0], "intercept");
        assert_eq!(
            out.names[1..5],
            ["a_v0", "a_v1", "b_v0", "b_v1"]
        );
        assert_eq!(out.matrix.column(0).iter().sum::<f64>(), 4.0);
        assert!(out.warnings.is_empty());
        // Cross product a=1, b=1 hits exactly the last row.
        let idx = out.names.iter().position(|n| n == "a_v1*b_v1").unwrap();
        let col: Vec<f64> = out.matrix.column(idx).iter().cloned().collect();
        assert_eq!(col, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn dummy_passthrough_validates_entries() {
        let raw = DMatrix::from_column_slice(2, 1, &[0.0, 2.0]);
        let specs = vec![ColumnSpec {
            name: "flag".into(),
            kind: ColumnKind::Dummy,
            exclusion_group: None,
        }];
        assert!(matches!(
            expand_dataset(&raw, &specs, &ExpansionPlan::default()),
            Err(Error::Data(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_bins_partition_rows(
            seed in 0u64..1000,
            n in 1usize..40,
            bins in 2usize..8,
        ) {
            let mut rng = crate::seeding::stream_rng(seed, "prop-bins", 0);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
            let binned = quantile_bin(&values, bins).unwrap();
            for row in 0..n {
                let total: f64 = binned.indicators.iter().map(|ind| ind[row]).sum();
                prop_assert_eq!(total, 1.0);
            }
            for ind in &binned.indicators {
                prop_assert!(ind.contains(&1.0));
            }
        }

        #[test]
        fn prop_binning_is_monotone(seed in 0u64..1000, bins in 2usize..6) {
            let mut rng = crate::seeding::stream_rng(seed, "prop-bin-mono", 0);
            let mut values: Vec<f64> = (0..30).map(|_| rng.random_range(-100..100) as f64).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let binned = quantile_bin(&values, bins).unwrap();
            let assignment: Vec<usize> = (0..values.len())
                .map(|r| binned.indicators.iter().position(|ind| ind[r] == 1.0).unwrap())
                .collect();
            for pair in assignment.windows(2) {
                prop_assert!(pair[0] <= pair[1]);
            }
        }
    }
}
