"""Dynamical systems: circle rotation, the slow circle map g, the planar
spiral diffeomorphism, its skew-product extension over the circle, the
two-piece model system, and the Henon/Ikeda benchmark maps.

Step functions are the tested scalar contract; ``trajectory`` runs the same
cores inside compiled loops (see _kernels) so long orbits stay cheap.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .manifold import (
    CirclePoint,
    PolarPoint,
    ProductPoint,
    angle_distance,
    wrap_circle,
)

GOLDEN_ROTATION = (math.sqrt(5.0) - 1.0) / 2.0

SYSTEM_IDS = ("rotation", "circle_g", "spiral_f", "skew_T", "model_T0", "henon", "ikeda")

HENON_DEFAULTS = {"a": 1.4, "b": 0.3}
IKEDA_DEFAULTS = {"c0": 1.0, "c1": 0.4, "c2": 0.9, "c3": 6.0}

STATE_DIM = {
    "rotation": 1,
    "circle_g": 1,
    "spiral_f": 2,
    "skew_T": 3,
    "model_T0": 2,
    "henon": 2,
    "ikeda": 2,
}


class DivergenceError(RuntimeError):
    """Orbit left the finite range; carries the first failing iterate index."""

    def __init__(self, index):
        super().__init__(f"orbit diverged at iterate {index}")
        self.index = index


@dataclass(frozen=True)
class SystemConfig:
    """Which system to iterate and with which constants.

    kappa is the spiral perturbation strength, delta the half-width of the
    angular boxes around the two circle fixed points, alpha the rotation
    angle in turns.
    """

    system_id: str
    alpha: float = GOLDEN_ROTATION
    kappa: float = 0.05
    delta: float = 0.1
    map_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.system_id not in SYSTEM_IDS:
            raise ValueError(f"unknown system {self.system_id!r}")
        if not 0.0 < self.kappa <= 0.1:
            raise ValueError(f"kappa {self.kappa!r} outside (0, 0.1]")
        if not 0.0 < self.delta <= 0.2:
            raise ValueError(f"delta {self.delta!r} outside (0, 0.2]")

    def params(self):
        if self.system_id == "henon":
            return {**HENON_DEFAULTS, **self.map_params}
        if self.system_id == "ikeda":
            return {**IKEDA_DEFAULTS, **self.map_params}
        return dict(self.map_params)


@dataclass(frozen=True)
class VisitRecord:
    """Entry/exit bookkeeping of the i-th stay in each of the two boxes.

    Iteration times index the analysed trajectory segment; durations are
    N_p = n_plus_p - n_minus_p and likewise for q.
    """

    i: int
    n_minus_p: int
    n_plus_p: int
    n_minus_q: int
    n_plus_q: int

    @property
    def N_p(self):
        return self.n_plus_p - self.n_minus_p

    @property
    def N_q(self):
        return self.n_plus_q - self.n_minus_q

    def __post_init__(self):
        if self.i < 1:
            raise ValueError("visit index starts at 1")
        if self.N_p <= 0 or self.N_q <= 0:
            raise ValueError("visit durations must be positive")


# -- single steps -------------------------------------------------------------


def rotation_step(t, alpha):
    return wrap_circle(t.t + alpha)


def g_step(t):
    """Slow circle map t + sin^2(pi t)/100; fixes 0, attracts everything to it."""
    return CirclePoint(_k.g_core(t.t))


def R_map(r, kappa):
    """Radial map r + kappa * r (1-r)^3 / (1 + r^4); fixes 0 and 1."""
    if r < 0.0:
        raise ValueError(f"negative radius {r!r}")
    return _k.r_core(r, kappa)


def theta_fn(phi):
    """Angular speed profile sin^2(phi): pi-periodic, zero exactly at k*pi."""
    if not math.isfinite(phi):
        raise ValueError("non-finite angle")
    return _k.theta_core(phi)


def eta_fn(r):
    """Radial cutoff: identically 1 on [1/2, 3/2], positive, and with
    (1-r)^2 * eta(r) -> 0 at r -> 0+ and r -> infinity."""
    if r <= 0.0:
        raise ValueError(f"eta_fn needs r > 0, got {r!r}")
    return _k.eta_core(r)


def Phi_map(r, phi, kappa):
    """Angle update phi + kappa * theta(phi) + (1-r)^2 eta(r), unwrapped."""
    if r <= 0.0:
        raise ValueError(f"Phi_map needs r > 0, got {r!r}")
    return _k.phi_core(r, phi, kappa)


def f_step(z, kappa):
    """One step of the planar spiral map in polar coordinates.

    The origin and infinity are fixed by convention; the unit circle is
    invariant with fixed points p = (1, 0) and q = (1, pi).
    """
    if z.at_infinity or z.r == 0.0:
        return z
    return PolarPoint(R_map(z.r, kappa), Phi_map(z.r, z.phi, kappa))


def lambda_bump(z, delta):
    """Fiber interpolation weight around p: 1 on U_p, 0 off its 2*delta box."""
    if z.at_infinity:
        return 0.0
    return _k.lambda_bump_core(z.r, z.phi, delta)


def rho_bump(z, delta):
    """Fiber interpolation weight around q."""
    if z.at_infinity:
        return 0.0
    return _k.rho_bump_core(z.r, z.phi, delta)


def fiber_map(z, t, cfg):
    """Circle diffeomorphism attached to base point z.

    Equals g on U_p, the rotation by alpha on U_q, the identity far from
    both, and a smooth interpolation in between; the derivative in t stays
    positive for every z.
    """
    if z.at_infinity:
        return t
    return CirclePoint(_k.fiber_core(z.r, z.phi, t.t, cfg.kappa, cfg.delta, cfg.alpha))


def skew_step(x, cfg):
    """One step (z, t) -> (f(z), h_z(t)) of the skew product."""
    return ProductPoint(f_step(x.base, cfg.kappa), fiber_map(x.base, x.fiber, cfg))


P0_FIBER = CirclePoint(0.0)


def model_T0_step(x, cfg):
    """Two-piece model: the marked point stays fixed, the marked circle rotates.

    The marked point is (p, 0) and the marked circle is the fiber circle over
    q; anything else is off the model set and rejected.
    """
    base = x.base
    if base.at_infinity:
        raise ValueError("state off the model set")
    if base.r == 1.0 and angle_distance(base.phi, 0.0) == 0.0:
        if x.fiber.t != 0.0:
            raise ValueError("state off the model set")
        return x
    if base.r == 1.0 and angle_distance(base.phi, math.pi) == 0.0:
        return ProductPoint(base, rotation_step(x.fiber, cfg.alpha))
    raise ValueError("state off the model set")


def henon_step(x, y, a, b):
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError("non-finite state")
    xn = 1.0 - a * x * x + y
    yn = b * x
    if not (math.isfinite(xn) and math.isfinite(yn)):
        raise DivergenceError(1)
    return xn, yn


def ikeda_step(x, y, params=None):
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError("non-finite state")
    p = {**IKEDA_DEFAULTS, **(params or {})}
    w = p["c1"] - p["c3"] / (1.0 + x * x + y * y)
    xn = p["c0"] + p["c2"] * (x * math.cos(w) - y * math.sin(w))
    yn = p["c2"] * (x * math.sin(w) + y * math.cos(w))
    if not (math.isfinite(xn) and math.isfinite(yn)):
        raise DivergenceError(1)
    return xn, yn


# -- generic state stepping (tuple states, used by delay maps and tests) ------


def step_state(cfg, state):
    """Advance one tuple-encoded state of the configured system.

    Encodings: rotation/circle_g (t,), spiral_f (r, phi), skew_T (r, phi, t),
    model_T0 (component, t) with component 0 = marked point / 1 = circle,
    henon/ikeda (x, y).
    """
    sid = cfg.system_id
    if sid == "rotation":
        return ((state[0] + cfg.alpha) % 1.0,)
    if sid == "circle_g":
        return (_k.g_core(state[0]),)
    if sid == "spiral_f":
        r, phi = state
        return (_k.r_core(r, cfg.kappa), _k.phi_core(r, phi, cfg.kappa))
    if sid == "skew_T":
        r, phi, t = state
        return (
            _k.r_core(r, cfg.kappa),
            _k.phi_core(r, phi, cfg.kappa),
            _k.fiber_core(r, phi, t, cfg.kappa, cfg.delta, cfg.alpha),
        )
    if sid == "model_T0":
        comp, t = state
        if comp == 0.0:
            return state
        return (1.0, (t + cfg.alpha) % 1.0)
    if sid == "henon":
        p = cfg.params()
        return henon_step(state[0], state[1], p["a"], p["b"])
    if sid == "ikeda":
        return ikeda_step(state[0], state[1], cfg.params())
    raise ValueError(sid)


def ambient_of_states(cfg, states):
    """Ambient coordinate rows for an (n, state_dim) array of tuple states.

    Circle systems embed in R^2, the spiral base in R^3 (sphere coordinates),
    product systems in R^5; the planar benchmark maps are their own ambient.
    """
    from .manifold import circle_ambient_array, product_ambient_array, sphere_coords

    states = np.atleast_2d(np.asarray(states, dtype=float))
    sid = cfg.system_id
    if sid in ("rotation", "circle_g"):
        return circle_ambient_array(states[:, 0])
    if sid == "spiral_f":
        x1, x2, x3 = sphere_coords(states[:, 0], states[:, 1])
        return np.column_stack([x1, x2, x3])
    if sid == "skew_T":
        return product_ambient_array(states[:, 0], states[:, 1], states[:, 2])
    if sid == "model_T0":
        comp = states[:, 0]
        t = states[:, 1]
        r = np.ones_like(t)
        phi = np.where(comp == 0.0, 0.0, math.pi)
        tt = np.where(comp == 0.0, 0.0, t)
        return product_ambient_array(r, phi, tt)
    if sid in ("henon", "ikeda"):
        return states[:, :2].copy()
    raise ValueError(sid)


AMBIENT_DIM_BY_SYSTEM = {
    "rotation": 2,
    "circle_g": 2,
    "spiral_f": 3,
    "skew_T": 5,
    "model_T0": 5,
    "henon": 2,
    "ikeda": 2,
}


# -- trajectories --------------------------------------------------------------


DEFAULT_X0 = {
    "rotation": (0.2,),
    "circle_g": (0.2,),
    "spiral_f": (0.5, 1.0),
    "skew_T": (0.5, 1.0, 0.3),
    "model_T0": (1.0, 0.2),
    "henon": (0.0, 0.0),
    "ikeda": (0.1, 0.0),
}


def default_x0(cfg):
    """Generic starting state for the configured system."""
    return DEFAULT_X0[cfg.system_id]


def trajectory(cfg, x0, n, burn_in=0):
    """n states of the configured system after discarding burn_in iterates.

    Returns an (n, state_dim) float array in the encoding of step_state.
    Raises DivergenceError with the failing absolute iterate index if the
    state leaves the finite range (Henon/Ikeda only; the compact systems
    cannot diverge).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    sid = cfg.system_id
    if sid == "rotation":
        t0 = x0[0] % 1.0
        idx = np.arange(burn_in, burn_in + n, dtype=float)
        return ((t0 + idx * cfg.alpha) % 1.0)[:, None]
    if sid == "circle_g":
        out = np.empty((n, 1))
        t = x0[0] % 1.0
        for _ in range(burn_in):
            t = _k.g_core(t)
        for i in range(n):
            out[i, 0] = t
            t = _k.g_core(t)
        return out
    if sid == "spiral_f":
        rs, ps = _k.spiral_orbit(float(x0[0]), float(x0[1]), cfg.kappa, n, burn_in)
        return np.column_stack([rs, ps])
    if sid == "skew_T":
        rs, ps, ts = _k.skew_orbit(
            float(x0[0]), float(x0[1]), float(x0[2]),
            cfg.kappa, cfg.delta, cfg.alpha, n, burn_in,
        )
        return np.column_stack([rs, ps, ts])
    if sid == "model_T0":
        comp, t0 = float(x0[0]), float(x0[1])
        if comp == 0.0:
            return np.column_stack([np.zeros(n), np.zeros(n)])
        idx = np.arange(burn_in, burn_in + n, dtype=float)
        return np.column_stack([np.ones(n), (t0 + idx * cfg.alpha) % 1.0])
    if sid == "henon":
        p = cfg.params()
        xs, ys, fail = _k.henon_orbit(float(x0[0]), float(x0[1]), p["a"], p["b"], n, burn_in)
        if fail < 0:
            raise DivergenceError(-fail)
        if fail > 0:
            raise DivergenceError(burn_in + fail)
        return np.column_stack([xs, ys])
    if sid == "ikeda":
        p = cfg.params()
        xs, ys, fail = _k.ikeda_orbit(
            float(x0[0]), float(x0[1]), p["c0"], p["c1"], p["c2"], p["c3"], n, burn_in
        )
        if fail < 0:
            raise DivergenceError(-fail)
        if fail > 0:
            raise DivergenceError(burn_in + fail)
        return np.column_stack([xs, ys])
    raise ValueError(sid)


# -- visit statistics ----------------------------------------------------------


def box_flags(r, phi, delta):
    """Boolean masks (in U_p, in U_q) for polar arrays; angles taken mod 2*pi."""
    r = np.asarray(r)
    phi = np.asarray(phi) % (2.0 * math.pi)
    radial = np.abs(1.0 - r) < delta
    dp = np.minimum(phi, 2.0 * math.pi - phi)
    dq = np.abs(phi - math.pi)
    return radial & (dp < delta), radial & (dq < delta)


def _runs(mask):
    """(start, stop) index pairs of maximal True runs, completed runs only."""
    m = np.asarray(mask, dtype=bool)
    if m.size == 0:
        return []
    edges = np.flatnonzero(np.diff(m.astype(np.int8)))
    starts = list(edges[~m[edges]] + 1)
    stops = list(edges[m[edges]] + 1)
    if m[0]:
        starts.insert(0, 0)
    if m[-1]:
        # unfinished stay: exit not observed, drop it
        starts = starts[: len(stops)]
    return list(zip(starts, stops))


def visit_statistics(traj, delta):
    """Completed visit records of a spiral-map trajectory.

    traj is an (n, 2) array of polar states (r, phi).  The i-th record pairs
    the i-th completed stay in the box around p with the i-th around q; only
    fully-observed stays are reported.  Also usable on the base component of
    skew-product trajectories.
    """
    traj = np.asarray(traj, dtype=float)
    in_p, in_q = box_flags(traj[:, 0], traj[:, 1], delta)
    runs_p = _runs(in_p)
    runs_q = _runs(in_q)
    records = []
    for i, ((ap, bp), (aq, bq)) in enumerate(zip(runs_p, runs_q), start=1):
        records.append(VisitRecord(i, int(ap), int(bp), int(aq), int(bq)))
    return records


def visit_gaps(traj, delta):
    """Chronological gaps between consecutive completed stays in either box.

    Returns (pair_index, gap_length) arrays: each gap carries the 1-based
    index of the visit pair it follows within.
    """
    traj = np.asarray(traj, dtype=float)
    in_p, in_q = box_flags(traj[:, 0], traj[:, 1], delta)
    events = [("p", a, b) for a, b in _runs(in_p)] + [("q", a, b) for a, b in _runs(in_q)]
    events.sort(key=lambda e: e[1])
    n_pairs = min(len(_runs(in_p)), len(_runs(in_q)))
    idx = []
    gaps = []
    seen = {"p": 0, "q": 0}
    for j in range(len(events) - 1):
        side, _, stop = events[j]
        seen[side] += 1
        pair = max(seen["p"], seen["q"])
        if pair > n_pairs:
            break
        idx.append(pair)
        gaps.append(events[j + 1][1] - stop)
    return np.asarray(idx, dtype=int), np.asarray(gaps, dtype=int)
