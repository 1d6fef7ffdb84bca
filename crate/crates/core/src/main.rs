//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation or verification failure, 2 numerical
//! failure, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mindescent::cli_io::{self, RunConfig};
use mindescent::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "mindescent",
    version,
    about = "Minimum-norm interpolating regression and synthetic control harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a raw tabular CSV into binned indicator features.
    ExpandFeatures(CommonArgs),
    /// Sweep feature-count complexity and write descent-curve CSVs.
    OlsCurve(CurveArgs),
    /// Sweep donor-pool complexity and write a synthetic-control curve CSV.
    ScCurve(CurveArgs),
    /// Run the randomized verification suites and write a report.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; falls back to `out_dir` from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Replace every seed in the config with this value.
    #[arg(long, value_name = "SEED")]
    seed_override: Option<u64>,
    /// Worker threads for the parallel sweeps (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Render an SVG chart next to each CSV.
    #[arg(long, overrides_with = "no_chart")]
    chart: bool,
    /// Suppress chart output (the default).
    #[arg(long)]
    no_chart: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; falls back to `out_dir` from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Replace every seed in the config with this value.
    #[arg(long, value_name = "SEED")]
    seed_override: Option<u64>,
    /// Worker threads for the parallel suites (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

fn load_config(path: Option<&PathBuf>, seed_override: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = seed_override {
        cfg.override_seeds(seed);
    }
    Ok(cfg)
}

fn resolve_out_dir(flag: Option<&PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    let dir = flag
        .cloned()
        .or_else(|| cfg.out_dir.clone())
        .ok_or_else(|| {
            Error::Config("no output directory: pass --out or set out_dir".into())
        })?;
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Runs `f` inside a fixed-size rayon pool when `--threads` is given.
/// Output bytes do not depend on the pool size; this only bounds CPU use.
fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    match threads {
        None => f(),
        Some(n) => {
            if n == 0 {
                return Err(Error::Config("--threads must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(f)
        }
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::ExpandFeatures(a) => {
            let cfg = load_config(Some(&a.config), a.seed_override)?;
            let out = resolve_out_dir(a.out.as_ref(), &cfg)?;
            let written =
                with_threads(a.threads, || cli_io::cmd_expand_features(&cfg, &out))?;
            report_written(&written);
            Ok(0)
        }
        Command::OlsCurve(a) => {
            let cfg = load_config(Some(&a.common.config), a.common.seed_override)?;
            let out = resolve_out_dir(a.common.out.as_ref(), &cfg)?;
            let written =
                with_threads(a.common.threads, || cli_io::cmd_ols_curve(&cfg, &out, a.chart))?;
            report_written(&written);
            Ok(0)
        }
        Command::ScCurve(a) => {
            let cfg = load_config(Some(&a.common.config), a.common.seed_override)?;
            let out = resolve_out_dir(a.common.out.as_ref(), &cfg)?;
            let written =
                with_threads(a.common.threads, || cli_io::cmd_sc_curve(&cfg, &out, a.chart))?;
            report_written(&written);
            Ok(0)
        }
        Command::Verify(a) => {
            let cfg = load_config(a.config.as_ref(), a.seed_override)?;
            let out = resolve_out_dir(a.out.as_ref(), &cfg)?;
            let (report, path) = with_threads(a.threads, || cli_io::cmd_verify(&cfg, &out))?;
            for check in &report.checks {
                println!(
                    "{} {} ({} instances, worst {:.3e} {} {:.3e})",
                    if check.pass { "PASS" } else { "FAIL" },
                    check.name,
                    check.instances,
                    check.worst,
                    check.comparison,
                    check.threshold
                );
            }
            println!("wrote {}", path.display());
            if report.all_pass() {
                println!("all checks passed");
                Ok(0)
            } else {
                println!("some checks FAILED");
                Ok(1)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
