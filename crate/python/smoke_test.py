"""Smoke test for the snss_py extension module.

Builds nothing itself: run `cargo build -p snss-py` first, then
`python3 python/smoke_test.py`. The script copies the cdylib next to a
temporary directory under the import name `snss_py.so`, imports it, and
exercises every exported function with deterministic fixtures.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]


def load_module():
    candidates = [
        ROOT / "target" / profile / "libsnss_py.so"
        for profile in ("release", "debug")
    ]
    src = next((c for c in candidates if c.exists()), None)
    if src is None:
        sys.exit("libsnss_py.so not found; run `cargo build -p snss-py` first")
    tmp = tempfile.mkdtemp(prefix="snss_py_")
    shutil.copy2(src, Path(tmp) / "snss_py.so")
    sys.path.insert(0, tmp)
    import snss_py

    return snss_py


def expect_raises(exc_type, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except exc_type:
        return
    except Exception as other:  # noqa: BLE001 - report the surprise
        raise AssertionError(
            f"expected {exc_type.__name__}, got {type(other).__name__}: {other}"
        )
    raise AssertionError(f"expected {exc_type.__name__}, got no error")


def main():
    snss = load_module()

    # --- coordinate generators ------------------------------------------
    coords = snss.gen_uniform_coords(10, 1)
    assert coords.shape == (100, 2)
    assert coords.min() >= 0.0 and coords.max() <= 10.0
    assert np.array_equal(coords, snss.gen_uniform_coords(10, 1))
    skewed = snss.gen_skewed_coords(10, 1)
    assert skewed.shape == (100, 2)
    # Beta(2,5) has mean 2/7, so the x coordinates pile up on the left.
    assert skewed[:, 0].mean() < 4.0
    print("ok: coordinate generators")

    # --- cluster labels and field simulation ----------------------------
    centers = [(2.0, 2.0), (8.0, 8.0), (2.0, 8.0)]
    labels = snss.nearest_center_labels(coords, centers)
    assert labels.shape == (100,)
    assert set(np.unique(labels)) == {0, 1, 2}
    z = snss.simulate_setting(1, coords, labels.tolist(), 42)
    assert z.shape == (100, 3)
    assert np.isfinite(z).all()
    assert np.array_equal(z, snss.simulate_setting(1, coords, labels.tolist(), 42))
    z5 = snss.simulate_setting(5, coords, labels.tolist(), 42)
    assert z5.shape == (100, 3)
    expect_raises(ValueError, snss.simulate_setting, 7, coords, labels.tolist(), 42)
    print("ok: cluster labels and setting simulation")

    # --- replicate seeds --------------------------------------------------
    s0 = snss.replicate_seed(1, 1, "uniform", 20, 0)
    assert isinstance(s0, int)
    assert s0 == snss.replicate_seed(1, 1, "uniform", 20, 0)
    assert s0 != snss.replicate_seed(1, 1, "uniform", 20, 1)
    assert s0 != snss.replicate_seed(1, 1, "skewed", 20, 0)
    expect_raises(ValueError, snss.replicate_seed, 1, 1, "clustered", 20, 0)
    print("ok: replicate seeds")

    # --- estimation: recover a known mixing -------------------------------
    # Uniform sites on [0,60]² with the first ("bump") cluster alone in the
    # left half, so an x-halving split separates the white-noise variance
    # profiles of setting 1 cleanly.
    coords = snss.gen_uniform_coords(60, 77)
    centers = [(43.8, 15.0), (12.0, 30.0), (43.8, 45.0)]
    labels = snss.nearest_center_labels(coords, centers)
    z = snss.simulate_setting(1, coords, labels.tolist(), 7070)
    a = np.array([[1.0, 0.5, 0.3], [0.2, 1.0, 0.4], [0.3, 0.2, 1.0]])
    b = np.array([1.0, -2.0, 0.5])
    x = z @ a.T + b

    model = snss.fit(coords, x, "sd/halve-x")
    assert model.method == "sd"
    assert model.converged
    assert model.sweeps == 0
    assert model.w.shape == (3, 3)
    assert model.t.shape == (3,)
    gain = model.w @ a
    err = snss.mdi(gain)
    assert err < 0.2, f"sd recovery too poor: mdi={err}"
    scores = model.scores(coords, x)
    assert scores.shape == z.shape
    assert np.allclose(scores, (x - model.t) @ model.w.T, atol=1e-12)
    print(f"ok: sd recovers a known mixing (mdi={err:.3f})")

    # The iterative methods run, converge, and report their diagnostics.
    for spec in ("jd/grid:2x2", "sjd/grid:2x2/f0+ball:2", "sbss/ball:1+ball:2"):
        m = snss.fit(coords, x, spec)
        assert m.method == spec.split("/")[0]
        assert m.converged
        assert m.w.shape == (3, 3)
        hist = m.criterion_history
        assert len(hist) == m.sweeps + 1
        assert all(b >= a - 1e-9 for a, b in zip(hist, hist[1:]))
    m = snss.fit(coords, x, "fobi")
    assert m.method == "fobi" and m.sweeps == 0
    print("ok: jd/sjd/sbss/fobi fit and report diagnostics")

    # --- error mapping -----------------------------------------------------
    expect_raises(ValueError, snss.fit, coords, x, "pca")
    expect_raises(ValueError, snss.fit, coords, x, "sd")
    bad = x.copy()
    bad[0, 0] = np.nan
    expect_raises(ValueError, snss.fit, coords, bad, "fobi")
    # A rank-deficient input breaks the whitening factorization: numerical
    # failures arrive as ArithmeticError, not ValueError.
    degenerate = np.column_stack([x[:, 0], x[:, 0], x[:, 1]])
    expect_raises(ArithmeticError, snss.fit, coords, degenerate, "sd/halve-x")
    print("ok: error mapping (ValueError / ArithmeticError)")

    # --- minimum distance index -------------------------------------------
    assert snss.mdi(np.eye(4)) < 1e-12
    perm = np.array([[0.0, 2.0, 0.0], [-3.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert snss.mdi(perm) < 1e-12
    assert 0.0 <= snss.mdi(np.ones((3, 3)) + np.eye(3)) <= 1.0
    expect_raises(ValueError, snss.mdi, np.ones((2, 3)))
    print("ok: minimum distance index")

    # --- compositional transforms -------------------------------------------
    rng = np.random.default_rng(3)
    comp = rng.uniform(0.1, 5.0, size=(40, 6))
    c = snss.clr(comp)
    assert c.shape == (40, 6)
    assert np.allclose(c.sum(axis=1), 0.0, atol=1e-10)
    ilr, v = snss.ilr_pivot(comp)
    assert ilr.shape == (40, 5) and v.shape == (6, 5)
    assert np.allclose(v.T @ v, np.eye(5), atol=1e-12)
    assert np.allclose(c @ v, ilr, atol=1e-12)
    zeroed = comp.copy()
    zeroed[7, 0] = 0.0
    expect_raises(ValueError, snss.clr, zeroed)
    print("ok: clr / ilr transforms")

    # --- moving-block variance map ------------------------------------------
    pts = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0]])
    scores = [1.0, 3.0, 9.0]
    cells, counts, variances = snss.moving_block_variance(scores, pts, 1.0, 1.0)
    assert cells.shape == (36, 2) and counts.shape == (36,) and variances.shape == (36,)
    assert counts.sum() == 3
    # Cell (0,0) holds the two nearby points; sample variance of {1,3} is 2.
    i00 = int(np.flatnonzero((cells == [0.0, 0.0]).all(axis=1))[0])
    assert counts[i00] == 2 and abs(variances[i00] - 2.0) < 1e-12
    # Single-point cells carry NaN as the missing marker.
    i55 = int(np.flatnonzero((cells == [5.0, 5.0]).all(axis=1))[0])
    assert counts[i55] == 1 and math.isnan(variances[i55])
    assert (np.isnan(variances) == (counts < 2)).all()
    expect_raises(ValueError, snss.moving_block_variance, scores, pts, -1.0, 1.0)
    print("ok: moving-block variance map")

    # --- covariance functions ------------------------------------------------
    for h in (0.0, 0.3, 2.0, 7.5):
        assert abs(snss.matern_cov(h, 2.0, 0.5, 3.0) - 2.0 * math.exp(-h / 3.0)) < 1e-10
    params = (1.5, 2.0, 4.0)
    equivalent_phi = params[2] / (2.0 * math.sqrt(params[1]))
    for h in (0.0, 0.5, 1.0, 4.0):
        direct = snss.matern_cov(h, params[0], params[1], equivalent_phi)
        nonstat = snss.nonstat_matern_cov((0.0, 0.0), (h, 0.0), params, params)
        assert abs(direct - nonstat) < 1e-12
    expect_raises(ValueError, snss.matern_cov, 1.0, -1.0, 0.5, 3.0)
    for x_val in (0.2, 1.0, 3.7):
        closed = math.sqrt(math.pi / (2.0 * x_val)) * math.exp(-x_val)
        assert abs(snss.bessel_k(0.5, x_val) - closed) < 1e-12
    print("ok: Matérn covariances and Bessel K")

    print("smoke test passed")


if __name__ == "__main__":
    main()
