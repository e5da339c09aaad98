"""Delay-coordinate vectors with successor pairing."""

from dataclasses import dataclass

import numpy as np

from .dynamics import ambient_of_states, step_state
from .observables import evaluate


@dataclass(frozen=True)
class DelaySeries:
    """Sliding-window delay vectors y_i of a scalar measurement series.

    vectors has shape (source_len - k + 1, k); consecutive vectors overlap in
    k - 1 entries, and the successor of y_i is y_{i+1}.
    """

    k: int
    vectors: np.ndarray
    source_len: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.vectors.shape != (self.source_len - self.k + 1, self.k):
            raise ValueError("vector block inconsistent with source length")
        if len(self.vectors) < 1:
            raise ValueError("series too short for the requested k")

    def __len__(self):
        return len(self.vectors)

    @property
    def predecessors(self):
        return self.vectors[:-1]

    @property
    def successors(self):
        return self.vectors[1:]


@dataclass(frozen=True)
class PairedVectors:
    """Explicit (vector, successor) pairs for measure-sampled systems.

    Used where no single orbit carries the target measure (the two-piece
    model); pred[i] and succ[i] are the delay images of x_i and of its
    one-step iterate.
    """

    k: int
    pred: np.ndarray
    succ: np.ndarray

    def __post_init__(self):
        if self.pred.shape != self.succ.shape or self.pred.ndim != 2:
            raise ValueError("pred and succ must be matching (n, k) blocks")
        if self.pred.shape[1] != self.k:
            raise ValueError("vector width inconsistent with k")

    def __len__(self):
        return len(self.pred)

    @property
    def predecessors(self):
        return self.pred

    @property
    def successors(self):
        return self.succ


def delay_series(measurements, k):
    """Sliding-window delay vectors of a scalar series."""
    m = np.asarray(measurements, dtype=float)
    if m.ndim != 1:
        raise ValueError("measurements must be one-dimensional")
    if len(m) < k:
        raise ValueError(f"need at least k={k} measurements, got {len(m)}")
    if k == 1:
        vectors = m[:, None]
    else:
        vectors = np.lib.stride_tricks.sliding_window_view(m, k)
    return DelaySeries(k, np.ascontiguousarray(vectors), len(m))


def delay_map(h, k, cfg, x):
    """Delay vector (h(x), h(Tx), ..., h(T^{k-1} x)) at a tuple-encoded state."""
    if k < 1:
        raise ValueError("k must be >= 1")
    states = [tuple(x)]
    for _ in range(k - 1):
        states.append(step_state(cfg, states[-1]))
    coords = ambient_of_states(cfg, np.asarray(states, dtype=float))
    return evaluate(h, coords)


def measure_states(h, cfg, states):
    """Observable values along an (n, state_dim) state array."""
    return evaluate(h, ambient_of_states(cfg, states))


def series_rows(series):
    """(header, rows) for CSV export: one row per vector, i first."""
    header = ["i"] + [f"y{j}" for j in range(series.k)]
    rows = [[float(i)] + [float(v) for v in vec] for i, vec in enumerate(series.vectors)]
    return header, rows


def export_csv(series, path):
    """Write the delay vectors as CSV with header i,y0,...,y{k-1}."""
    from .csvio import emit_csv

    header, rows = series_rows(series)
    emit_csv(path, header, rows)
