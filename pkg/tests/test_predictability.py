import math

import numpy as np
import pytest

from delaylab.dynamics import GOLDEN_ROTATION, SystemConfig
from delaylab.embedding import delay_series, PairedVectors
from delaylab.observables import Observable
from delaylab.predictability import (
    BruteEngine,
    chi_sigma,
    default_ladder,
    EmptyBallError,
    make_engine,
    neighbor_indices,
    predict_next,
    predictability_report,
    sigma_profile,
    Sorted1DEngine,
)

ALPHA = GOLDEN_ROTATION


def test_neighbor_indices_examples():
    s = delay_series([0.0, 1.0, 2.0], 1)
    assert neighbor_indices(s, [0.0], 0.5).tolist() == [0]
    assert neighbor_indices(s, [0.0], 10.0).tolist() == [0, 1]  # only those with successors
    assert neighbor_indices(s, [0.5], 1e-12).tolist() == []
    with pytest.raises(ValueError):
        neighbor_indices(s, [0.0], 0.0)


def test_chi_sigma_two_neighbors():
    # predecessors 0.0, 0.25 inside the ball; successors are 0.25, 8.0
    s = delay_series([0.0, 0.25, 8.0, 9.0], 1)
    chi, sigma, count = chi_sigma(s, [0.1], 0.5)
    assert count == 2
    assert chi[0] == (0.25 + 8.0) / 2
    assert sigma == abs(8.0 - 0.25) / 2


def test_chi_sigma_identical_successors():
    pv = PairedVectors(1, np.array([[0.0], [0.1], [0.2]]), np.array([[5.0], [5.0], [5.0]]))
    chi, sigma, count = chi_sigma(pv, [0.1], 1.0)
    assert count == 3
    assert sigma == 0.0
    assert chi[0] == 5.0


def test_chi_sigma_empty_ball_distinguished():
    s = delay_series([0.0, 1.0, 2.0], 1)
    chi, sigma, count = chi_sigma(s, [10.0], 0.5)
    assert count == 0 and chi is None and sigma is None


def test_chi_sigma_matches_enumerated_oracle():
    """Conditional mean and deviation against direct enumeration, 1e-12."""
    rng = np.random.default_rng(21)
    for k in (1, 2, 3):
        m = rng.normal(size=300)
        s = delay_series(m, k)
        for _ in range(20):
            y = s.vectors[rng.integers(0, len(s) - 1)] + rng.normal(scale=0.05, size=k)
            eps = rng.uniform(0.05, 1.0)
            idx = [i for i in range(len(s) - 1)
                   if np.linalg.norm(s.vectors[i] - y) < eps]
            chi, sigma, count = chi_sigma(s, y, eps)
            assert count == len(idx)
            if not idx:
                continue
            cloud = np.array([s.vectors[i + 1] for i in idx])
            mean = cloud.mean(axis=0)
            std = math.sqrt(float(np.mean(np.sum((cloud - mean) ** 2, axis=1))))
            assert np.max(np.abs(chi - mean)) < 1e-12
            assert abs(sigma - std) < 1e-12


def test_two_point_formula_exact():
    pv = PairedVectors(1, np.array([[0.0], [0.5]]), np.array([[1.0], [3.0]]))
    chi, sigma, count = chi_sigma(pv, [0.25], 1.0)
    assert count == 2
    assert sigma * sigma == (3.0 - 1.0) ** 2 / 4.0


def test_permutation_invariance():
    rng = np.random.default_rng(22)
    pred = rng.normal(size=(100, 2))
    succ = rng.normal(size=(100, 2))
    perm = rng.permutation(100)
    a = PairedVectors(2, pred, succ)
    b = PairedVectors(2, pred[perm], succ[perm])
    y = pred[0]
    for eps in (0.3, 1.0, 3.0):
        chi_a, sig_a, n_a = chi_sigma(a, y, eps)
        chi_b, sig_b, n_b = chi_sigma(b, y, eps)
        assert n_a == n_b
        assert np.max(np.abs(chi_a - chi_b)) < 1e-12
        assert abs(sig_a - sig_b) < 1e-12


def test_translation_equivariance():
    rng = np.random.default_rng(23)
    pred = rng.normal(size=(200, 3))
    succ = rng.normal(size=(200, 3))
    shift = np.array([2.5, -1.0, 0.5])
    a = PairedVectors(3, pred, succ)
    b = PairedVectors(3, pred + shift, succ + shift)
    y = pred[7]
    chi_a, sig_a, _ = chi_sigma(a, y, 1.5)
    chi_b, sig_b, _ = chi_sigma(b, y + shift, 1.5)
    assert np.max(np.abs(chi_b - (chi_a + shift))) < 1e-12
    assert abs(sig_b - sig_a) < 1e-12


def test_ladder_counts_monotone():
    rng = np.random.default_rng(24)
    s = delay_series(rng.normal(size=2000), 2)
    ladder = default_ladder(s)
    for _ in range(10):
        y = s.vectors[rng.integers(0, len(s))]
        est = sigma_profile(s, y, ladder, min_count=2)
        counts = [e.count for e in est.ladder]
        assert all(b <= a for a, b in zip(counts, counts[1:]))


def test_sigma_profile_identical_vectors():
    s = delay_series([1.0] * 50, 1)
    est = sigma_profile(s, [1.0], [0.5, 0.25], min_count=2)
    assert est.sigma_hat == 0.0
    assert est.predictable is True


def test_sigma_profile_undefined_when_sparse():
    s = delay_series([0.0, 1.0, 2.0, 3.0], 1)
    est = sigma_profile(s, [0.0], [1e-6], min_count=2)
    assert est.sigma_hat is None
    assert est.predictable is None
    assert not est.defined


def test_sigma_profile_ladder_validation():
    s = delay_series([0.0, 1.0, 2.0], 1)
    with pytest.raises(ValueError):
        sigma_profile(s, [0.0], [0.1, 0.2])  # not decreasing
    with pytest.raises(ValueError):
        sigma_profile(s, [0.0], [0.1], min_count=1)


def test_linear_system_sigma_rate():
    """On a 1-Lipschitz deterministic series, sigma_hat shrinks like eps.

    The reference sits away from the sawtooth wrap preimage 1 - gamma, where
    the successor map is an exact isometry.
    """
    n = 20_000
    gamma = GOLDEN_ROTATION
    m = np.mod(0.123 + gamma * np.arange(n), 1.0)
    s = delay_series(m, 1)
    est = sigma_profile(s, [0.6], [0.05 * 2.0**-j for j in range(6)], min_count=10)
    assert est.slope == pytest.approx(1.0, abs=0.3)
    assert est.sigma_hat < 0.01


def test_predict_next_examples():
    pv_series = delay_series([0.0, 0.05, 0.02, 5.0, 0.01], 1)
    # everything except index 3 is within 0.1 of the last vector 0.01
    pred = predict_next(pv_series, 0.1)
    assert pred[0] == pytest.approx(np.mean([0.05, 0.02, 5.0]), abs=1e-15)

    single = delay_series([0.0, 3.0, 1.0, 0.05], 1)
    assert predict_next(single, 0.2)[0] == 3.0  # only index 0 is close to 0.05

    with pytest.raises(EmptyBallError):
        predict_next(delay_series([0.0, 1.0, 2.0], 1), 1e-9)


def test_predict_next_rotation_error_bound():
    n = 5_000
    m = np.mod(0.05 + GOLDEN_ROTATION * np.arange(n + 1), 1.0)
    s = delay_series(m[:-1], 1)
    y_true = m[-1]
    eps = 0.02
    # keep the reference away from the sawtooth wrap
    assert 0.1 < m[-2] < 0.9
    pred = predict_next(s, eps)
    assert abs(pred[0] - y_true) <= eps * 1.05


def test_two_atom_rotation_oracle():
    """Conditional deviation at a circle reference approaches the analytic
    two-atom value |cos 2 pi (t0 + a) - cos 2 pi (-t0 + a)| / 2."""
    n = 200_000
    t0 = 0.2
    t = np.mod(t0 + ALPHA * np.arange(n), 1.0)
    m = np.cos(2 * np.pi * t)
    s = delay_series(m, 1)
    oracle = abs(math.cos(2 * math.pi * (t0 + ALPHA)) - math.cos(2 * math.pi * (-t0 + ALPHA))) / 2
    est = sigma_profile(s, [math.cos(2 * math.pi * t0)], [0.2 * 2.0**-j for j in range(8)])
    assert est.defined
    assert abs(est.sigma_hat - oracle) <= 0.1 * oracle


def test_engines_agree_small():
    rng = np.random.default_rng(25)
    m = rng.normal(size=3000)
    s = delay_series(m, 1)
    ladder = default_ladder(s)
    brute = BruteEngine(s)
    sorted1d = Sorted1DEngine(s)
    for _ in range(25):
        y = [float(rng.normal())]
        ea = brute.profile(y, ladder, 5, 1e-3)
        eb = sorted1d.profile(y, ladder, 5, 1e-3)
        for la, lb in zip(ea.ladder, eb.ladder):
            assert la.count == lb.count
            if la.sigma is not None:
                assert abs(la.sigma - lb.sigma) < 1e-12
                assert np.max(np.abs(la.chi - lb.chi)) < 1e-12


def test_engines_agree_prefix_path():
    # counts above the direct threshold exercise the prefix-sum reduction
    rng = np.random.default_rng(26)
    m = rng.normal(size=60_000)
    s = delay_series(m, 1)
    ladder = [3.0, 1.0, 0.3]
    brute = BruteEngine(s)
    sorted1d = Sorted1DEngine(s)
    ea = brute.profile([0.0], ladder, 5, 1e-3)
    eb = sorted1d.profile([0.0], ladder, 5, 1e-3)
    assert ea.ladder[0].count == eb.ladder[0].count > 16384
    for la, lb in zip(ea.ladder, eb.ladder):
        assert abs(la.sigma - lb.sigma) < 1e-9
        assert np.max(np.abs(la.chi - lb.chi)) < 1e-9


def test_make_engine_dispatch():
    rng = np.random.default_rng(27)
    small = delay_series(rng.normal(size=100), 1)
    assert isinstance(make_engine(small), BruteEngine)
    big = delay_series(rng.normal(size=60_000), 1)
    assert isinstance(make_engine(big), Sorted1DEngine)
    wide = delay_series(rng.normal(size=60_000), 2)
    assert isinstance(make_engine(wide), BruteEngine)


def test_report_constant_observable_fully_predictable():
    cfg = SystemConfig("rotation")
    const = Observable(2, "zero", {(0, 0): 2.0}, 1)
    report = predictability_report(cfg, const, 1, 2_000, 50, seed=3)
    assert report.predictable_fraction == 1.0


def test_report_rotation_k1_not_predictable():
    cfg = SystemConfig("rotation")
    h = Observable(2, "cosine_fiber", degree_bound=1)
    report = predictability_report(cfg, h, 1, 100_000, 100, seed=4)
    assert report.predictable_fraction < 0.5
    sigmas = np.array([e.sigma_hat for e in report.defined_estimates])
    assert np.median(sigmas) > 0.05


def test_report_csv_rows():
    cfg = SystemConfig("rotation")
    h = Observable(2, "cosine_fiber", degree_bound=1)
    report = predictability_report(cfg, h, 1, 3_000, 10, seed=5)
    header, rows = report.csv_rows()
    assert header == ["ref_idx", "eps", "count", "sigma", "chi_norm"]
    assert len(rows) == 10 * len(report.ladder)
    quantiles = report.sigma_quantiles()
    assert set(quantiles) == {0.1, 0.25, 0.5, 0.75, 0.9}
    text = report.summary_text()
    assert text.startswith("{") and text.endswith("}")
    assert '"predictable_fraction"' in text and '"median_loglog_slope"' in text
