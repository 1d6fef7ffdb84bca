//! Configuration parsing, command orchestration, and file output.
//!
//! Each command takes the parsed [`RunConfig`] plus an output directory and
//! returns the files it wrote. All randomness flows from seeds named in the
//! config; there are no wall-clock defaults, so a config (plus thread-safe
//! reductions downstream) pins every output byte.

pub mod chart;
pub mod tables;

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::{ols_descent_curve, sc_descent_curve, OlsCurveOptions, ScCurveOptions};
use crate::feature_pipeline::{expand_dataset, ColumnKind, ColumnSpec, ExpansionPlan};
use crate::interp_ols::RegressionDataset;
use crate::numcore::RankTolerance;
use crate::synth_control::{DonorSubset, SolverSettings};
use crate::verify::{self, VerifyReport, VerifySettings};

/// Top-level configuration document. One file can hold the sections for
/// several commands; each command reads only its own section.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Default output directory when the command line gives none.
    pub out_dir: Option<PathBuf>,
    pub expand: Option<ExpandConfig>,
    pub ols_curve: Option<OlsCurveConfig>,
    pub sc_curve: Option<ScCurveConfig>,
    pub verify: Option<VerifyConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        // Input paths resolve against the config's directory so a config can
        // ship next to its data files; out_dir stays relative to the caller.
        if let Some(base) = path.parent() {
            let anchor = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&p);
                }
            };
            if let Some(c) = &mut cfg.expand {
                anchor(&mut c.input);
            }
            if let Some(c) = &mut cfg.ols_curve {
                anchor(&mut c.train);
                anchor(&mut c.eval);
            }
            if let Some(c) = &mut cfg.sc_curve {
                anchor(&mut c.panel);
            }
        }
        Ok(cfg)
    }

    /// Replaces every seed in the document, for quick reproductions under a
    /// different randomization without editing the file.
    pub fn override_seeds(&mut self, seed: u64) {
        if let Some(c) = &mut self.expand {
            c.jitter_seed = seed;
        }
        if let Some(c) = &mut self.ols_curve {
            c.jitter_seed = seed;
            c.ordering_seed = seed;
            c.eval_seed = seed;
        }
        if let Some(c) = &mut self.sc_curve {
            c.subset_seed = seed;
        }
        if let Some(c) = &mut self.verify {
            c.seed = seed;
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKindConfig {
    Continuous,
    Discrete,
    Dummy,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnConfig {
    pub name: String,
    pub kind: ColumnKindConfig,
    pub exclusion_group: Option<String>,
}

impl ColumnConfig {
    fn to_spec(&self) -> ColumnSpec {
        ColumnSpec {
            name: self.name.clone(),
            kind: match self.kind {
                ColumnKindConfig::Continuous => ColumnKind::Continuous,
                ColumnKindConfig::Discrete => ColumnKind::Discrete,
                ColumnKindConfig::Dummy => ColumnKind::Dummy,
            },
            exclusion_group: self.exclusion_group.clone(),
        }
    }
}

fn default_bins() -> usize {
    50
}

fn default_jitter_sd() -> f64 {
    0.02
}

fn default_num_orderings() -> usize {
    5
}

fn default_eval_sizes() -> Vec<usize> {
    vec![1]
}

fn default_num_draws() -> usize {
    100
}

fn default_max_subsets() -> usize {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandConfig {
    pub input: PathBuf,
    /// Outcome column: copied through unexpanded as the last output column.
    pub outcome: String,
    pub columns: Vec<ColumnConfig>,
    #[serde(default = "default_bins")]
    pub bins_per_continuous: usize,
    #[serde(default = "default_jitter_sd")]
    pub jitter_sd: f64,
    pub jitter_seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OlsCurveConfig {
    pub train: PathBuf,
    pub eval: PathBuf,
    pub outcome: String,
    pub columns: Vec<ColumnConfig>,
    #[serde(default = "default_bins")]
    pub bins_per_continuous: usize,
    #[serde(default = "default_jitter_sd")]
    pub jitter_sd: f64,
    pub jitter_seed: u64,
    #[serde(default = "default_num_orderings")]
    pub num_orderings: usize,
    pub ordering_seed: u64,
    /// Complexity grid; every expanded size 1..=k when omitted.
    pub complexity_grid: Option<Vec<usize>>,
    /// Evaluation subset sizes m; one output curve per entry.
    #[serde(default = "default_eval_sizes")]
    pub eval_subset_sizes: Vec<usize>,
    #[serde(default = "default_num_draws")]
    pub num_draws: usize,
    pub eval_seed: u64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelFormat {
    #[default]
    Wide,
    Long,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub opt_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub eta_path: Option<Vec<f64>>,
    pub path_consistency_tol: Option<f64>,
}

impl SolverConfig {
    fn to_settings(&self) -> SolverSettings {
        let mut s = SolverSettings::default();
        if let Some(v) = self.opt_tol {
            s.opt_tol = v;
        }
        if let Some(v) = self.max_iter {
            s.max_iter = v;
        }
        if let Some(v) = &self.eta_path {
            s.eta_path = v.clone();
        }
        if let Some(v) = self.path_consistency_tol {
            s.path_consistency_tol = v;
        }
        s
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScCurveConfig {
    pub panel: PathBuf,
    #[serde(default)]
    pub format: PanelFormat,
    pub target_unit: String,
    pub pre_periods: usize,
    /// Donor-count grid; every pool size 1..=N when omitted.
    pub complexity_grid: Option<Vec<usize>>,
    #[serde(default = "default_max_subsets")]
    pub max_subsets: usize,
    pub subset_seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub identity_instances: Option<usize>,
    pub variance_instances: Option<usize>,
    pub mc_redraws: Option<usize>,
    pub variation_pairs: Option<usize>,
    pub decomposition_instances: Option<usize>,
    pub qp_oracle_instances: Option<usize>,
    pub tie_break_instances: Option<usize>,
    pub permutation_instances: Option<usize>,
    pub eval_points: Option<usize>,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl VerifyConfig {
    fn to_settings(&self) -> VerifySettings {
        let d = VerifySettings::default();
        VerifySettings {
            seed: self.seed,
            identity_instances: self.identity_instances.unwrap_or(d.identity_instances),
            variance_instances: self.variance_instances.unwrap_or(d.variance_instances),
            mc_redraws: self.mc_redraws.unwrap_or(d.mc_redraws),
            variation_pairs: self.variation_pairs.unwrap_or(d.variation_pairs),
            decomposition_instances: self
                .decomposition_instances
                .unwrap_or(d.decomposition_instances),
            qp_oracle_instances: self.qp_oracle_instances.unwrap_or(d.qp_oracle_instances),
            tie_break_instances: self.tie_break_instances.unwrap_or(d.tie_break_instances),
            permutation_instances: self
                .permutation_instances
                .unwrap_or(d.permutation_instances),
            eval_points: self.eval_points.unwrap_or(d.eval_points),
            solver: self.solver.to_settings(),
            tol: d.tol,
        }
    }
}

fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
    section
        .as_ref()
        .ok_or_else(|| Error::Config(format!("config is missing the [{name}] section")))
}

fn opt_str(v: &Option<f64>) -> String {
    v.map(tables::fmt_float).unwrap_or_default()
}

/// Expands one tabular file and writes the expanded matrix plus a
/// column-provenance sidecar. Returns the written paths.
pub fn cmd_expand_features(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let c = require(&cfg.expand, "expand")?;
    let data = tables::read_tabular(&c.input)?;
    let outcome_idx = data.column_index(&c.outcome)?;
    let specs: Vec<ColumnSpec> = c.columns.iter().map(ColumnConfig::to_spec).collect();
    let names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
    let raw = data.select(&names)?;
    let plan = ExpansionPlan {
        bins_per_continuous: c.bins_per_continuous,
        jitter_sd: c.jitter_sd,
        jitter_seed: c.jitter_seed,
        ..ExpansionPlan::default()
    };
    let expanded = expand_dataset(&raw, &specs, &plan)?;
    for w in &expanded.warnings {
        eprintln!("warning: {w}");
    }

    let csv_path = out_dir.join("expanded.csv");
    let mut header: Vec<&str> = expanded.names.iter().map(String::as_str).collect();
    header.push(&c.outcome);
    let rows: Vec<Vec<String>> = (0..expanded.matrix.nrows())
        .map(|r| {
            let mut row: Vec<String> = (0..expanded.matrix.ncols())
                .map(|j| tables::fmt_float(expanded.matrix[(r, j)]))
                .collect();
            row.push(tables::fmt_float(data.rows[r][outcome_idx]));
            row
        })
        .collect();
    tables::write_csv(&csv_path, &header, &rows)?;

    let prov_path = out_dir.join("provenance.csv");
    let prov_rows: Vec<Vec<String>> = expanded
        .provenance
        .iter()
        .map(|p| {
            vec![
                p.column.clone(),
                p.kind.clone(),
                p.sources.join(";"),
                p.detail.clone(),
            ]
        })
        .collect();
    tables::write_csv(
        &prov_path,
        &["column", "kind", "sources", "detail"],
        &prov_rows,
    )?;
    Ok(vec![csv_path, prov_path])
}

/// Reads the train and eval files named in an [`OlsCurveConfig`], expands
/// them jointly (shared bin edges, value codes, pruning, and jitter stream),
/// and splits back into two datasets with identical columns.
pub fn load_ols_datasets(c: &OlsCurveConfig) -> Result<(RegressionDataset, RegressionDataset)> {
    let train = tables::read_tabular(&c.train)?;
    let eval = tables::read_tabular(&c.eval)?;
    if train.headers != eval.headers {
        return Err(Error::Data(format!(
            "train and eval column headers disagree: {} vs {}",
            train.headers.join(","),
            eval.headers.join(",")
        )));
    }
    let outcome_idx = train.column_index(&c.outcome)?;
    let specs: Vec<ColumnSpec> = c.columns.iter().map(ColumnConfig::to_spec).collect();
    let names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
    let raw_train = train.select(&names)?;
    let raw_eval = eval.select(&names)?;
    let n_train = raw_train.nrows();
    let stacked = DMatrix::from_fn(
        n_train + raw_eval.nrows(),
        raw_train.ncols(),
        |r, j| {
            if r < n_train {
                raw_train[(r, j)]
            } else {
                raw_eval[(r - n_train, j)]
            }
        },
    );
    let plan = ExpansionPlan {
        bins_per_continuous: c.bins_per_continuous,
        jitter_sd: c.jitter_sd,
        jitter_seed: c.jitter_seed,
        ordering_seed: c.ordering_seed,
        num_orderings: c.num_orderings,
    };
    let expanded = expand_dataset(&stacked, &specs, &plan)?;
    for w in &expanded.warnings {
        eprintln!("warning: {w}");
    }
    let k = expanded.matrix.ncols();
    let train_x = DMatrix::from_fn(n_train, k, |r, j| expanded.matrix[(r, j)]);
    let eval_x = DMatrix::from_fn(raw_eval.nrows(), k, |r, j| {
        expanded.matrix[(n_train + r, j)]
    });
    let train_y = DVector::from_iterator(n_train, train.rows.iter().map(|r| r[outcome_idx]));
    let eval_y = DVector::from_iterator(
        eval.rows.len(),
        eval.rows.iter().map(|r| r[outcome_idx]),
    );
    Ok((
        RegressionDataset::with_names(train_x, train_y, expanded.names.clone())?,
        RegressionDataset::with_names(eval_x, eval_y, expanded.names)?,
    ))
}

/// Sweeps feature-count complexity and writes one averaged curve CSV per
/// evaluation subset size, plus optional charts.
pub fn cmd_ols_curve(cfg: &RunConfig, out_dir: &Path, chart: bool) -> Result<Vec<PathBuf>> {
    let c = require(&cfg.ols_curve, "ols_curve")?;
    let (train, eval) = load_ols_datasets(c)?;
    let k = train.num_features();
    let grid: Vec<usize> = match &c.complexity_grid {
        Some(g) => g.clone(),
        None => (1..=k).collect(),
    };
    let opts = OlsCurveOptions {
        num_orderings: c.num_orderings,
        ordering_seed: c.ordering_seed,
        eval_sizes: c.eval_subset_sizes.clone(),
        num_draws: c.num_draws,
        eval_seed: c.eval_seed,
        tol: RankTolerance::default(),
    };
    let curves = ols_descent_curve(&train, &eval, &grid, &opts)?;

    let mut written = Vec::new();
    for (m, curve) in &curves.averaged {
        let csv_path = out_dir.join(format!("ols_curve_m{m}.csv"));
        let rows: Vec<Vec<String>> = curve
            .rows()
            .iter()
            .map(|r| {
                vec![
                    r.complexity.to_string(),
                    tables::fmt_float(r.in_rmse),
                    opt_str(&r.out_rmse),
                    opt_str(&r.coef_norm),
                    r.n_models_averaged.to_string(),
                ]
            })
            .collect();
        tables::write_csv(
            &csv_path,
            &["complexity", "in_rmse", "out_rmse", "coef_norm", "n_orderings"],
            &rows,
        )?;
        written.push(csv_path);

        if chart {
            let svg_path = out_dir.join(format!("ols_curve_m{m}.svg"));
            let series = vec![
                chart::Series {
                    label: "in-sample RMSE".into(),
                    color: "#1f77b4".into(),
                    points: curve
                        .rows()
                        .iter()
                        .map(|r| (r.complexity as f64, r.in_rmse))
                        .collect(),
                },
                chart::Series {
                    label: "out-of-sample RMSE".into(),
                    color: "#d62728".into(),
                    points: curve
                        .rows()
                        .iter()
                        .filter_map(|r| r.out_rmse.map(|v| (r.complexity as f64, v)))
                        .collect(),
                },
            ];
            let svg = chart::line_chart(
                &format!("risk over model complexity (m = {m})"),
                "number of features",
                "RMSE",
                &series,
                Some((train.n() as f64, format!("interpolation (l = {})", train.n()))),
                true,
            );
            tables::atomic_write(&svg_path, svg.as_bytes())?;
            written.push(svg_path);
        }
    }
    Ok(written)
}

/// Sweeps donor-pool complexity and writes the synthetic-control curve CSV,
/// plus an optional chart.
pub fn cmd_sc_curve(cfg: &RunConfig, out_dir: &Path, chart: bool) -> Result<Vec<PathBuf>> {
    let c = require(&cfg.sc_curve, "sc_curve")?;
    let panel = match c.format {
        PanelFormat::Wide => tables::read_panel_wide(&c.panel, &c.target_unit, c.pre_periods)?,
        PanelFormat::Long => tables::read_panel_long(&c.panel, &c.target_unit, c.pre_periods)?,
    };
    if panel.post_periods() == 0 {
        eprintln!("warning: no post periods; out_rmse will be empty");
    }
    let pool = DonorSubset::full(panel.num_donors());
    let grid: Vec<usize> = match &c.complexity_grid {
        Some(g) => g.clone(),
        None => (1..=panel.num_donors()).collect(),
    };
    let opts = ScCurveOptions {
        max_subsets: c.max_subsets,
        subset_seed: c.subset_seed,
        settings: c.solver.to_settings(),
    };
    let curve = sc_descent_curve(&panel, &pool, &grid, &opts)?;

    let csv_path = out_dir.join("sc_curve.csv");
    let rows: Vec<Vec<String>> = curve
        .rows()
        .iter()
        .map(|r| {
            vec![
                r.complexity.to_string(),
                tables::fmt_float(r.in_rmse),
                opt_str(&r.out_rmse),
                r.n_models_averaged.to_string(),
            ]
        })
        .collect();
    tables::write_csv(
        &csv_path,
        &["complexity", "train_rmse", "out_rmse", "n_subsets"],
        &rows,
    )?;
    let mut written = vec![csv_path];

    if chart {
        let svg_path = out_dir.join("sc_curve.svg");
        let series = vec![
            chart::Series {
                label: "pre-period RMSE".into(),
                color: "#1f77b4".into(),
                points: curve
                    .rows()
                    .iter()
                    .map(|r| (r.complexity as f64, r.in_rmse))
                    .collect(),
            },
            chart::Series {
                label: "post-period RMSE".into(),
                color: "#d62728".into(),
                points: curve
                    .rows()
                    .iter()
                    .filter_map(|r| r.out_rmse.map(|v| (r.complexity as f64, v)))
                    .collect(),
            },
        ];
        let svg = chart::line_chart(
            "risk over donor-pool size",
            "number of donors",
            "RMSE",
            &series,
            Some((
                panel.pre_periods() as f64,
                format!("pre-periods (T = {})", panel.pre_periods()),
            )),
            true,
        );
        tables::atomic_write(&svg_path, svg.as_bytes())?;
        written.push(svg_path);
    }
    Ok(written)
}

/// Runs the verification suites and writes the machine-readable report.
/// The caller decides the exit status from [`VerifyReport::all_pass`].
pub fn cmd_verify(cfg: &RunConfig, out_dir: &Path) -> Result<(VerifyReport, PathBuf)> {
    let settings = cfg
        .verify
        .as_ref()
        .map(VerifyConfig::to_settings)
        .unwrap_or_default();
    let report = verify::run_all(&settings)?;
    let path = out_dir.join("verify_report.json");
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
    tables::atomic_write(&path, json.as_bytes())?;
    Ok((report, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, content: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn config_rejects_unknown_keys_with_path() {
        let err = toml::from_str::<RunConfig>("[ols_curve]\nbogus_key = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus_key"));
        let err = toml::from_str::<RunConfig>("top_level_bogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("top_level_bogus"));
    }

    #[test]
    fn config_requires_seeds() {
        let toml_text = r#"
            [expand]
            input = "x.csv"
            outcome = "y"
            columns = []
        "#;
        let err = toml::from_str::<RunConfig>(toml_text).unwrap_err();
        assert!(err.to_string().contains("jitter_seed"), "{err}");
    }

    #[test]
    fn seed_override_reaches_every_section() {
        let toml_text = r#"
            [expand]
            input = "x.csv"
            outcome = "y"
            columns = []
            jitter_seed = 1

            [ols_curve]
            train = "t.csv"
            eval = "e.csv"
            outcome = "y"
            columns = []
            jitter_seed = 2
            ordering_seed = 3
            eval_seed = 4

            [sc_curve]
            panel = "p.csv"
            target_unit = "tgt"
            pre_periods = 1
            subset_seed = 5

            [verify]
            seed = 6
        "#;
        let mut cfg: RunConfig = toml::from_str(toml_text).unwrap();
        cfg.override_seeds(99);
        assert_eq!(cfg.expand.as_ref().unwrap().jitter_seed, 99);
        let ols = cfg.ols_curve.as_ref().unwrap();
        assert_eq!(
            (ols.jitter_seed, ols.ordering_seed, ols.eval_seed),
            (99, 99, 99)
        );
        assert_eq!(cfg.sc_curve.as_ref().unwrap().subset_seed, 99);
        assert_eq!(cfg.verify.as_ref().unwrap().seed, 99);
    }

    #[test]
    fn expand_command_writes_matrix_and_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let input = write_file(
            dir.path(),
            "raw.csv",
            "a,y\n0,1.5\n1,2.5\n0,3.5\n1,4.5\n",
        );
        let cfg = RunConfig {
            expand: Some(ExpandConfig {
                input,
                outcome: "y".into(),
                columns: vec![ColumnConfig {
                    name: "a".into(),
                    kind: ColumnKindConfig::Discrete,
                    exclusion_group: None,
                }],
                bins_per_continuous: 50,
                jitter_sd: 0.0,
                jitter_seed: 0,
            }),
            ..RunConfig::default()
        };
        let out = dir.path().join("out");
        fs::create_dir(&out).unwrap();
        let written = cmd_expand_features(&cfg, &out).unwrap();
        assert_eq!(written.len(), 2);
        let expanded = tables::read_tabular(&written[0]).unwrap();
        // intercept + two value indicators + outcome.
        assert_eq!(
            expanded.headers,
            vec!["intercept", "a_v0", "a_v1", "y"]
        );
        assert_eq!(expanded.rows[1], vec![1.0, 0.0, 1.0, 2.5]);
        let prov = fs::read_to_string(&written[1]).unwrap();
        assert!(prov.starts_with("column,kind,sources,detail"));
        assert!(prov.contains("intercept"));
    }

    #[test]
    fn expand_command_errors_on_unknown_column() {
        let dir = tempfile::tempdir().unwrap();
        let input = write_file(dir.path(), "raw.csv", "a,y\n0,1\n1,2\n");
        let cfg = RunConfig {
            expand: Some(ExpandConfig {
                input,
                outcome: "y".into(),
                columns: vec![ColumnConfig {
                    name: "ghost".into(),
                    kind: ColumnKindConfig::Dummy,
                    exclusion_group: None,
                }],
                bins_per_continuous: 50,
                jitter_sd: 0.0,
                jitter_seed: 0,
            }),
            ..RunConfig::default()
        };
        let err = cmd_expand_features(&cfg, dir.path()).unwrap_err();
        assert!(err.to_string().contains("ghost"));
    }

    fn tiny_ols_config(dir: &Path) -> RunConfig {
        let train = write_file(
            dir,
            "train.csv",
            "a,b,y\n0,0,0.0\n0,1,1.0\n1,0,2.0\n1,1,3.5\n0,0,0.2\n1,1,3.4\n",
        );
        let eval = write_file(
            dir,
            "eval.csv",
            "a,b,y\n0,0,0.1\n0,1,1.1\n1,0,1.9\n1,1,3.6\n",
        );
        let column = |name: &str| ColumnConfig {
            name: name.into(),
            kind: ColumnKindConfig::Discrete,
            exclusion_group: None,
        };
        RunConfig {
            ols_curve: Some(OlsCurveConfig {
                train,
                eval,
                outcome: "y".into(),
                columns: vec![column("a"), column("b")],
                bins_per_continuous: 50,
                jitter_sd: 0.01,
                jitter_seed: 11,
                num_orderings: 3,
                ordering_seed: 7,
                complexity_grid: None,
                eval_subset_sizes: vec![1, 4],
                num_draws: 8,
                eval_seed: 13,
            }),
            ..RunConfig::default()
        }
    }

    #[test]
    fn ols_command_writes_one_csv_per_eval_size() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_ols_config(dir.path());
        let out = dir.path().join("out");
        fs::create_dir(&out).unwrap();
        let written = cmd_ols_curve(&cfg, &out, true).unwrap();
        let names: Vec<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            vec![
                "ols_curve_m1.csv",
                "ols_curve_m1.svg",
                "ols_curve_m4.csv",
                "ols_curve_m4.svg"
            ]
        );
        let data = fs::read_to_string(&written[0]).unwrap();
        assert!(data.starts_with("complexity,in_rmse,out_rmse,coef_norm,n_orderings"));
        // 9 expanded columns: intercept + 2 + 2 values + 4 interactions.
        assert_eq!(data.lines().count(), 1 + 9);
        assert!(fs::read_to_string(&written[1]).unwrap().starts_with("<svg"));
    }

    #[test]
    fn ols_command_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_ols_config(dir.path());
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        fs::create_dir(&out_a).unwrap();
        fs::create_dir(&out_b).unwrap();
        let a = cmd_ols_curve(&cfg, &out_a, false).unwrap();
        let b = cmd_ols_curve(&cfg, &out_b, false).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap());
        }
    }

    #[test]
    fn ols_command_rejects_oversized_eval_subsets() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_ols_config(dir.path());
        cfg.ols_curve.as_mut().unwrap().eval_subset_sizes = vec![400];
        let err = cmd_ols_curve(&cfg, dir.path(), false).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    fn tiny_sc_config(dir: &Path, pre_periods: usize) -> RunConfig {
        let panel = write_file(
            dir,
            "panel.csv",
            "unit,p1,p2,p3\ntgt,1.0,2.0,3.0\nd1,1.1,2.1,3.1\nd2,0.5,1.4,2.2\nd3,2.0,3.9,6.2\n",
        );
        RunConfig {
            sc_curve: Some(ScCurveConfig {
                panel,
                format: PanelFormat::Wide,
                target_unit: "tgt".into(),
                pre_periods,
                complexity_grid: None,
                max_subsets: 100,
                subset_seed: 5,
                solver: SolverConfig::default(),
            }),
            ..RunConfig::default()
        }
    }

    #[test]
    fn sc_command_writes_curve_with_post_rmse() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_sc_config(dir.path(), 2);
        let out = dir.path().join("out");
        fs::create_dir(&out).unwrap();
        let written = cmd_sc_curve(&cfg, &out, true).unwrap();
        assert_eq!(written.len(), 2);
        let data = fs::read_to_string(&written[0]).unwrap();
        assert!(data.starts_with("complexity,train_rmse,out_rmse,n_subsets"));
        assert_eq!(data.lines().count(), 1 + 3);
        for line in data.lines().skip(1) {
            assert_eq!(line.split(',').count(), 4);
            assert!(!line.ends_with(','), "out_rmse should be present: {line}");
        }
    }

    #[test]
    fn sc_command_leaves_out_rmse_empty_without_post_periods() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_sc_config(dir.path(), 3);
        let out = dir.path().join("out");
        fs::create_dir(&out).unwrap();
        let written = cmd_sc_curve(&cfg, &out, false).unwrap();
        let data = fs::read_to_string(&written[0]).unwrap();
        for line in data.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 4);
            assert!(cells[2].is_empty(), "expected empty out_rmse: {line}");
        }
    }

    #[test]
    fn sc_command_rejects_oversized_grid() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_sc_config(dir.path(), 2);
        cfg.sc_curve.as_mut().unwrap().complexity_grid = Some(vec![1, 9]);
        let err = cmd_sc_curve(&cfg, dir.path(), false).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn verify_command_writes_report() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            verify: Some(VerifyConfig {
                seed: 42,
                identity_instances: Some(5),
                variance_instances: Some(5),
                mc_redraws: Some(50_000),
                variation_pairs: Some(5),
                decomposition_instances: Some(5),
                qp_oracle_instances: Some(6),
                tie_break_instances: Some(6),
                permutation_instances: Some(4),
                eval_points: Some(2),
                solver: SolverConfig::default(),
            }),
            ..RunConfig::default()
        };
        let (report, path) = cmd_verify(&cfg, dir.path()).unwrap();
        assert!(report.all_pass());
        let text = fs::read_to_string(&path).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["seed"], 42);
        assert!(parsed["checks"].as_array().unwrap().len() >= 12);
    }
}
