"""Smoke test for the mindescent_py extension module.

Builds nothing itself: expects `cargo build -p mindescent-py` to have run
(pass --release to check that profile instead). Copies the cdylib next to a
temp import root under the name Python expects, imports it, and exercises
each binding once.
"""

import argparse
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_cdylib(profile: str) -> Path:
    names = ["libmindescent_py.so", "libmindescent_py.dylib", "mindescent_py.dll"]
    for name in names:
        candidate = REPO / "target" / profile / name
        if candidate.exists():
            return candidate
    sys.exit(
        f"no built extension under target/{profile}; "
        "run `cargo build -p mindescent-py` first"
    )


def import_module(profile: str):
    src = locate_cdylib(profile)
    stage = Path(tempfile.mkdtemp(prefix="mindescent-smoke-"))
    dest = stage / ("mindescent_py" + (".pyd" if src.suffix == ".dll" else ".so"))
    shutil.copy2(src, dest)
    sys.path.insert(0, str(stage))
    import mindescent_py

    return mindescent_py


def approx_equal(a, b, tol=1e-8):
    return all(abs(x - y) <= tol * (1.0 + abs(y)) for x, y in zip(a, b))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--profile", default="debug", choices=["debug", "release"])
    args = parser.parse_args()
    m = import_module(args.profile)

    # Exact solve on a square system.
    beta = m.min_norm_least_squares([[2.0, 0.0], [0.0, 4.0]], [2.0, 8.0])
    assert approx_equal(beta, [1.0, 2.0]), beta

    # Min-norm solution of an underdetermined row: proportional to the row.
    beta = m.min_norm_least_squares([[1.0, 1.0]], [2.0])
    assert approx_equal(beta, [1.0, 1.0]), beta

    # Leverages of an orthogonal design are 1 (each column spans its axis).
    lev = m.feature_leverages([[1.0, 0.0], [0.0, 1.0]])
    assert approx_equal(lev, [1.0, 1.0]), lev

    # Interpolating fit: 1 row, 2 features.
    x = [[1.0, 2.0], [0.0, 1.0], [1.0, 0.0]]
    y = [3.0, 1.0, 1.0]
    fit = m.fit_subset(x, y)
    assert fit.in_rmse <= 1e-9, fit.in_rmse
    assert fit.subset == [0, 1], fit.subset
    assert math.isclose(fit.coef_norm, math.hypot(*fit.beta)), fit.coef_norm

    # Averaging identity: full interpolant equals the weighted average of
    # leave-one-feature-out fits under the leverage weights. Reduced betas
    # come back embedded over the full feature set (zero at the dropped
    # index), so the average is coordinatewise.
    x = [[1.0, 0.5, -0.3], [0.2, 1.0, 0.8]]
    y = [1.0, -0.5]
    full = m.fit_subset(x, y)
    loo = m.leave_one_out_fits(x, y)
    lam = m.averaging_weights(x, y)
    assert math.isclose(sum(w for _, w in lam), 1.0, abs_tol=1e-10)
    averaged = [0.0, 0.0, 0.0]
    for (dropped, weight), reduced in zip(lam, loo):
        assert dropped not in reduced.subset
        assert reduced.beta[dropped] == 0.0
        for j in range(3):
            averaged[j] += weight * reduced.beta[j]
    assert approx_equal(averaged, full.beta, 1e-8), (averaged, full.beta)

    # Variance proxy is positive and scales with the noise.
    v1 = m.trace_variance(x, noise_variance=1.0)
    v2 = m.trace_variance(x, noise_variance=2.0)
    assert v1 > 0.0 and math.isclose(v2, 2.0 * v1, rel_tol=1e-12)

    # Simplex least squares: y is the second donor.
    w = m.simplex_lsq([[1.0, 3.0], [0.0, 1.0]], [3.0, 1.0])
    assert w[1] > 0.999, w

    # Min-norm tie-break splits duplicate donors evenly.
    w = m.min_norm_synth([[1.0, 1.0], [2.0, 2.0]], [1.5, 3.0])
    assert approx_equal(w, [0.5, 0.5], 1e-5), w

    # Decomposition on a 3-donor panel reproduces the full weights.
    x = [[0.9, 0.1, 0.4], [0.2, 0.8, 0.5]]
    y = [0.5, 0.5]
    full_w = m.min_norm_synth(x, y)
    loo_w = []
    for drop in range(3):
        cols = [j for j in range(3) if j != drop]
        sub = m.min_norm_synth([[row[j] for j in cols] for row in x], y)
        padded = [0.0, 0.0, 0.0]
        for j, wj in zip(cols, sub):
            padded[j] = wj
        loo_w.append(padded)
    lam = m.sc_averaging_decomposition(full_w, loo_w)
    assert math.isclose(sum(w for _, w in lam), 1.0, abs_tol=1e-8)
    recombined = [0.0, 0.0, 0.0]
    for (k, weight) in lam:
        for j in range(3):
            recombined[j] += weight * loo_w[k][j]
    assert approx_equal(recombined, full_w, 1e-5), (recombined, full_w)

    # Imputation is the weighted donor combination.
    post = [[1.0, 3.0], [2.0, 4.0]]
    out = m.impute([0.25, 0.75], post)
    assert approx_equal(out, [2.5, 3.5]), out

    # Quantile binning partitions the rows.
    indicators, labels, edges, constant = m.quantile_bin([1.0, 2.0, 3.0, 4.0], 2)
    assert not constant and len(indicators) == len(labels) == 2
    assert all(sum(col[i] for col in indicators) == 1.0 for i in range(4))
    assert len(edges) == 1

    # Jitter is seed-reproducible, mean-zero-ish, and shape-preserving.
    a = m.jitter([[0.0, 0.0], [0.0, 0.0]], 0.1, 7)
    b = m.jitter([[0.0, 0.0], [0.0, 0.0]], 0.1, 7)
    assert a == b and len(a) == 2 and len(a[0]) == 2
    assert any(abs(v) > 0.0 for row in a for v in row)

    # Orderings are seeded permutations, reproducible per seed.
    order = m.random_ordering(6, 3)
    assert sorted(order) == list(range(6))
    assert order == m.random_ordering(6, 3)
    assert order != m.random_ordering(6, 4)

    # Failure surfaces as the right exception type.
    try:
        m.fit_subset([[1.0, 1.0], [2.0, 2.0]], [1.0, 2.0])
    except ValueError:
        pass
    else:
        sys.exit("rank-deficient fit should raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
