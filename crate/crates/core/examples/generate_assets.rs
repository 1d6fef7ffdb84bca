//! Regenerates the bundled synthetic datasets under `assets/`.
//!
//! Committed output; rerunning must reproduce the files byte for byte.
//!
//!     cargo run -p mindescent --example generate_assets
//!
//! Regression pair: two discrete covariates on {0..9} with the (9,9) cell
//! never observed, so expansion yields intercept + 20 value indicators +
//! 99 interactions = 120 columns. The outcome is a sparse indicator signal
//! plus Gaussian noise.
//!
//! Panel: 12 donors driven by a two-factor model over 5 periods; the target
//! is the donor average plus noise, so it sits deep inside the convex hull.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const REGRESSION_SEED: u64 = 71_113;
const PANEL_SEED: u64 = 71_117;

fn signal(a: usize, b: usize) -> f64 {
    let mut y = 0.6;
    if a == 2 {
        y += 3.0;
    }
    if a == 0 {
        y += 1.5;
    }
    if b == 5 {
        y -= 2.0;
    }
    if a == 7 && b == 1 {
        y += 4.0;
    }
    y
}

fn regression_files(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(REGRESSION_SEED);
    let noise_sd = 0.5;

    // Train: 40 rows over the 99 observable cells.
    let mut train = String::from("a,b,y\n");
    let mut drawn = 0;
    while drawn < 40 {
        let a = rng.random_range(0..10usize);
        let b = rng.random_range(0..10usize);
        if (a, b) == (9, 9) {
            continue;
        }
        let noise: f64 = rng.sample(StandardNormal);
        let y = signal(a, b) + noise_sd * noise;
        let _ = writeln!(train, "{a},{b},{y:.6}");
        drawn += 1;
    }
    fs::write(dir.join("ols_train.csv"), train).expect("write train");

    // Eval: every observable cell twice, plus two repeats to reach 200 rows.
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for rep in 0..2 {
        for a in 0..10usize {
            for b in 0..10usize {
                if (a, b) != (9, 9) {
                    cells.push((a, b));
                }
            }
        }
        if rep == 0 {
            cells.push((0, 0));
            cells.push((1, 1));
        }
    }
    let mut eval = String::from("a,b,y\n");
    for (a, b) in cells {
        let noise: f64 = rng.sample(StandardNormal);
        let y = signal(a, b) + noise_sd * noise;
        let _ = writeln!(eval, "{a},{b},{y:.6}");
    }
    fs::write(dir.join("ols_eval.csv"), eval).expect("write eval");
}

fn panel_file(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(PANEL_SEED);
    let periods = 5;
    let donors = 12;
    let noise_sd = 0.05;
    let factors: [[f64; 5]; 2] = [
        [1.00, 0.82, 1.21, 0.93, 1.12],
        [0.31, 0.94, 0.55, 1.27, 0.68],
    ];

    let loadings: Vec<[f64; 2]> = (0..donors)
        .map(|_| {
            [
                rng.random_range(0.2..1.2),
                rng.random_range(0.2..1.2),
            ]
        })
        .collect();
    let target_loading = [
        loadings.iter().map(|l| l[0]).sum::<f64>() / donors as f64,
        loadings.iter().map(|l| l[1]).sum::<f64>() / donors as f64,
    ];

    let mut value = |loading: &[f64; 2], t: usize| -> f64 {
        let noise: f64 = rng.sample(StandardNormal);
        loading[0] * factors[0][t] + loading[1] * factors[1][t] + noise_sd * noise
    };
    let mut text = String::from("unit,p1,p2,p3,p4,p5\n");
    text.push_str("target");
    for t in 0..periods {
        let _ = write!(text, ",{:.6}", value(&target_loading, t));
    }
    text.push('\n');
    for (i, loading) in loadings.iter().enumerate() {
        let _ = write!(text, "d{:02}", i + 1);
        for t in 0..periods {
            let _ = write!(text, ",{:.6}", value(loading, t));
        }
        text.push('\n');
    }
    fs::write(dir.join("factor_panel.csv"), text).expect("write panel");
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");
    fs::create_dir_all(&dir).expect("create assets dir");
    regression_files(&dir);
    panel_file(&dir);
    println!("regenerated assets under {}", dir.display());
}
