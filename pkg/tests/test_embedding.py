import numpy as np
import pytest
from hypothesis import given, strategies as st

from delaylab.dynamics import GOLDEN_ROTATION, SystemConfig, trajectory
from delaylab.embedding import (
    delay_map,
    delay_series,
    DelaySeries,
    measure_states,
    PairedVectors,
    series_rows,
)
from delaylab.observables import Observable, perturb


def test_delay_series_examples():
    s = delay_series([1, 2, 3, 4], 2)
    assert s.vectors.tolist() == [[1, 2], [2, 3], [3, 4]]
    s1 = delay_series([5.0, 6.0], 1)
    assert s1.vectors.tolist() == [[5.0], [6.0]]
    const = delay_series([2.0] * 6, 3)
    assert np.all(const.vectors == 2.0)
    with pytest.raises(ValueError):
        delay_series([1.0], 2)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40), st.integers(1, 6))
def test_delay_series_overlap_invariant(values, k):
    if len(values) < k:
        with pytest.raises(ValueError):
            delay_series(values, k)
        return
    s = delay_series(values, k)
    assert len(s) == len(values) - k + 1
    for a, b in zip(s.vectors, s.vectors[1:]):
        assert np.array_equal(a[1:], b[:-1])


def test_successor_pairing():
    s = delay_series([1.0, 2.0, 3.0, 4.0], 2)
    assert np.array_equal(s.predecessors, s.vectors[:-1])
    assert np.array_equal(s.successors, s.vectors[1:])


def test_delay_map_k1_and_constant():
    cfg = SystemConfig("rotation")
    const = Observable(2, "zero", {(0, 0): 3.5}, 1)
    assert delay_map(const, 1, cfg, (0.2,)).tolist() == [3.5]
    assert delay_map(const, 4, cfg, (0.2,)).tolist() == [3.5] * 4


def test_delay_map_rotation_cosine():
    cfg = SystemConfig("rotation")
    h = Observable(2, "cosine_fiber", degree_bound=1)
    t0 = 0.15
    vec = delay_map(h, 2, cfg, (t0,))
    expected = [np.cos(2 * np.pi * t0), np.cos(2 * np.pi * (t0 + GOLDEN_ROTATION))]
    assert vec == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("system,x0,k", [
    ("rotation", (0.33,), 3),
    ("henon", (0.1, 0.1), 3),
])
def test_two_route_agreement(system, x0, k):
    cfg = SystemConfig(system)
    h = perturb(Observable(2, "coord:0", degree_bound=2), scale=0.3, rng_seed=11)
    n = 400
    orbit = trajectory(cfg, x0, n)
    series = delay_series(measure_states(h, cfg, orbit), k)
    rng = np.random.default_rng(12)
    for i in rng.integers(0, len(series), 12):
        direct = delay_map(h, k, cfg, tuple(orbit[i]))
        assert np.max(np.abs(series.vectors[i] - direct)) < 1e-12


def test_paired_vectors_validation():
    with pytest.raises(ValueError):
        PairedVectors(1, np.zeros((4, 1)), np.zeros((3, 1)))
    with pytest.raises(ValueError):
        PairedVectors(2, np.zeros((4, 1)), np.zeros((4, 1)))
    pv = PairedVectors(1, np.arange(4.0)[:, None], np.arange(4.0)[:, None] + 1)
    assert len(pv) == 4
    assert np.array_equal(pv.predecessors[:, 0], [0, 1, 2, 3])


def test_series_rows_header():
    s = delay_series([1.0, 2.0, 3.0], 2)
    header, rows = series_rows(s)
    assert header == ["i", "y0", "y1"]
    assert rows[0] == [0.0, 1.0, 2.0]
    assert len(rows) == 2


def test_export_csv(tmp_path):
    from delaylab.embedding import export_csv

    s = delay_series([1.0, 2.0, 3.0], 2)
    path = tmp_path / "series.csv"
    export_csv(s, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "i,y0,y1"
    assert lines[1] == "0.0,1.0,2.0"
    assert len(lines) == 3


def test_delay_series_invariant_violation_detected():
    with pytest.raises(ValueError):
        DelaySeries(2, np.zeros((3, 2)), 5)  # count should be 4
