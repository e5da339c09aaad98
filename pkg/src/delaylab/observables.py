"""Scalar observables: polynomial perturbations of simple base functions over
ambient coordinates.

An observable is base + sum of coefficient * monomial over a graded basis of
bounded total degree; sampling the perturbation coefficients realizes the
finite-dimensional probe families used for genericity arguments.
"""

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

BASE_IDS = ("zero", "cosine_fiber")  # plus "coord:<j>" resolved dynamically


def monomial_basis(ambient_dim, degree):
    """All exponent multi-indices of total degree <= degree, graded-lex order.

    The count is C(ambient_dim + degree, degree).
    """
    if ambient_dim < 1:
        raise ValueError("ambient_dim must be >= 1")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    idx = [m for m in product(range(degree + 1), repeat=ambient_dim) if sum(m) <= degree]
    idx.sort(key=lambda m: (sum(m), tuple(-e for e in m)))
    return idx


def _coord_index(base_id, ambient_dim):
    if base_id.startswith("coord:"):
        j = int(base_id.split(":", 1)[1])
        if not 0 <= j < ambient_dim:
            raise ValueError(f"coordinate index {j} outside ambient dimension {ambient_dim}")
        return j
    if base_id == "cosine_fiber":
        # cos(2 pi t) is an ambient coordinate: x4 on the 5-dim product
        # embedding, x1 on the bare-circle embedding
        if ambient_dim == 5:
            return 3
        if ambient_dim == 2:
            return 0
        raise ValueError(f"cosine_fiber undefined for ambient dimension {ambient_dim}")
    return None


def _unit_exponent(j, dim):
    e = [0] * dim
    e[j] = 1
    return tuple(e)


@dataclass(frozen=True)
class Observable:
    """base + polynomial over ambient coordinates.

    coeffs maps exponent multi-indices (tuples of length ambient_dim) to the
    perturbation coefficients; the base is kept separate so perturbations
    never touch it.
    """

    ambient_dim: int
    base_id: str = "zero"
    coeffs: dict = field(default_factory=dict)
    degree_bound: int = 1

    def __post_init__(self):
        if _coord_index(self.base_id, self.ambient_dim) is None and self.base_id != "zero":
            raise ValueError(f"unknown base {self.base_id!r}")
        for m, c in self.coeffs.items():
            if len(m) != self.ambient_dim:
                raise ValueError(f"multi-index {m} has wrong length")
            if sum(m) > self.degree_bound:
                raise ValueError(f"multi-index {m} exceeds degree bound {self.degree_bound}")
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient at {m}")

    def base_coeffs(self):
        """The base function as its own exponent -> coefficient map."""
        j = _coord_index(self.base_id, self.ambient_dim)
        if j is None:
            return {}
        return {_unit_exponent(j, self.ambient_dim): 1.0}

    def total_coeffs(self):
        out = dict(self.base_coeffs())
        for m, c in self.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return out

    def coefficient_norm(self):
        """Euclidean norm of base plus perturbation coefficients."""
        return math.sqrt(sum(c * c for c in self.total_coeffs().values()))


def perturb(h, amplitudes=None, scale=0.1, rng_seed=None):
    """Add amplitudes (or seeded uniform [-scale, scale] draws) on the monomial basis.

    The basis is monomial_basis(h.ambient_dim, h.degree_bound); explicit
    amplitudes must match its length.  The base function is untouched.
    """
    basis = monomial_basis(h.ambient_dim, h.degree_bound)
    if amplitudes is None:
        if rng_seed is None:
            raise ValueError("provide amplitudes or rng_seed")
        rng = np.random.default_rng(rng_seed)
        amplitudes = rng.uniform(-scale, scale, size=len(basis))
    amplitudes = np.asarray(amplitudes, dtype=float)
    if amplitudes.shape != (len(basis),):
        raise ValueError(f"expected {len(basis)} amplitudes, got {amplitudes.shape}")
    coeffs = dict(h.coeffs)
    for m, a in zip(basis, amplitudes):
        if a != 0.0 or m in coeffs:
            coeffs[m] = coeffs.get(m, 0.0) + float(a)
    return Observable(h.ambient_dim, h.base_id, coeffs, h.degree_bound)


def evaluate(h, x):
    """Observable value at an AmbientPoint, a coordinate vector, or (n, d) rows."""
    coords = x.as_array() if hasattr(x, "as_array") else np.asarray(x, dtype=float)
    scalar = coords.ndim == 1
    rows = coords[None, :] if scalar else coords
    if rows.shape[1] != h.ambient_dim:
        raise ValueError(f"expected {h.ambient_dim} coordinates, got {rows.shape[1]}")
    out = np.zeros(rows.shape[0])
    for m, c in h.total_coeffs().items():
        term = np.full(rows.shape[0], c)
        for j, e in enumerate(m):
            if e == 1:
                term = term * rows[:, j]
            elif e > 1:
                term = term * rows[:, j] ** e
        out += term
    return float(out[0]) if scalar else out


def lipschitz_sample_bound(h, points):
    """Largest difference quotient of h over consecutive pairs of sample rows.

    A sampled lower bound for the Lipschitz constant on the ambient image;
    reported as a sanity figure, never as an exact constant.
    """
    points = np.asarray(points, dtype=float)
    vals = evaluate(h, points)
    dv = np.abs(np.diff(vals))
    dx = np.linalg.norm(np.diff(points, axis=0), axis=1)
    ok = dx > 0
    if not np.any(ok):
        return 0.0
    return float(np.max(dv[ok] / dx[ok]))


def to_text(h):
    """Plain-text record: base, degree bound, then one (multi-index, coeff) per line."""
    lines = [f"base {h.base_id}", f"ambient_dim {h.ambient_dim}", f"degree_bound {h.degree_bound}"]
    for m in sorted(h.coeffs, key=lambda m: (sum(m), tuple(-e for e in m))):
        mi = " ".join(str(e) for e in m)
        lines.append(f"coeff {mi} : {h.coeffs[m]!r}")
    return "\n".join(lines) + "\n"


def from_text(text):
    base_id = "zero"
    ambient_dim = None
    degree_bound = 1
    coeffs = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("base "):
            base_id = line.split(None, 1)[1]
        elif line.startswith("ambient_dim "):
            ambient_dim = int(line.split()[1])
        elif line.startswith("degree_bound "):
            degree_bound = int(line.split()[1])
        elif line.startswith("coeff "):
            body, val = line[len("coeff "):].split(":")
            m = tuple(int(tok) for tok in body.split())
            coeffs[m] = float(val)
        else:
            raise ValueError(f"unrecognized line {line!r}")
    if ambient_dim is None:
        raise ValueError("missing ambient_dim")
    return Observable(ambient_dim, base_id, coeffs, degree_bound)
