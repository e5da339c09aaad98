"""Named experiments, flat-file configuration, CSV emission and keyed RNG.

Each experiment reproduces one family of desk-scale checks; run_experiment
writes plot-ready CSVs plus a plain-text summary and returns the metrics and
pass flags.  All randomness flows through counter-based generators keyed by
(seed, experiment, stage) so reruns are byte-identical.
"""

import hashlib
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as _k
from .csvio import emit_csv, format_cell
from .dimension import (
    ball_mass_dimension,
    box_counting_idim,
    EmpiricalMeasure,
    point_mass_measure,
    pointwise_dim_quantiles,
    sample_model_measure,
    uniform_segment_measure,
)
from .dynamics import (GOLDEN_ROTATION, SystemConfig, box_flags, default_x0,
                       trajectory, visit_gaps, visit_statistics)
from .embedding import delay_series, measure_states, PairedVectors
from .manifold import product_ambient_array
from .observables import evaluate, monomial_basis, Observable, perturb
from .predictability import (
    default_ladder,
    make_engine,
    profile_references,
    Sorted1DEngine,
)

EXPERIMENT_IDS = ("E1_parabolic", "E2_natural_measure", "E3_model_nonpredict",
                  "E4_counterexample", "E5_ergodic_predict", "E6_idim")

_SHORT_IDS = {e.split("_")[0]: e for e in EXPERIMENT_IDS}

DESCRIPTIONS = {
    "E1_parabolic": "radial parabolic decay and visit-time growth of the spiral map",
    "E2_natural_measure": "occupation fractions of the two boxes along spiral orbits",
    "E3_model_nonpredict": "non-predictability of the two-piece model at k = 1",
    "E4_counterexample": "skew-product orbits: fiber passages vs the marked point at k = 1",
    "E5_ergodic_predict": "shrinking conditional deviations for rotation (k=2) and Henon (k=2,3)",
    "E6_idim": "information-dimension estimates: model measure, benchmarks, skew orbit",
}

DEFAULTS = {
    "E1_parabolic": dict(
        rho_kappa=0.05, rho_r0=0.5, rho_n=1_000_000, rho_fit_lo=1_000, rho_fit_hi=1_000_000,
        visits_kappa=0.092, visits_delta=0.2, visits_r0=0.5, visits_phi0=2.0, visits_n=900_000,
    ),
    "E2_natural_measure": dict(
        kappa=0.092, delta=0.2, m_iterates=1_000_000,
        start1_r=0.5, start1_phi=2.0, start2_r=0.9, start2_phi=4.0, start3_r=1.5, start3_phi=1.0,
    ),
    "E3_model_nonpredict": dict(
        n_samples=400_000, n_obs=20, n_refs=200, pert_scale=0.1, alpha=GOLDEN_ROTATION,
        ladder_levels=8, ladder_top=0.2, min_count=20, threshold=1e-3,
    ),
    "E4_counterexample": dict(
        orbit_n=10_000_000, kappa=0.05, delta=0.1, alpha=GOLDEN_ROTATION,
        start_r=0.5, start_phi=1.0, start_t=0.3,
        n_obs=20, n_refs=200, pert_scale=0.1,
        ladder_levels=14, ladder_top=0.2, min_count=20, threshold=1e-3,
        p_ref_fiber_gate=0.01,
    ),
    "E5_ergodic_predict": dict(
        rot_n=1_000_000, henon_n=1_000_000, henon_burn=1_000, n_refs=100,
        pert_scale=0.1, alpha=GOLDEN_ROTATION,
        ladder_levels=8, ladder_top=0.2, min_count=20, threshold=1e-3,
    ),
    "E6_idim": dict(
        n_samples=100_000, n_centers=2_000, point_n=10_000,
        eps_hi_exp=4, eps_lo_exp=8,
        skew_orbit_n=2_000_000, skew_stride=20, kappa=0.05, delta=0.1, alpha=GOLDEN_ROTATION,
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    seed: int = 0
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment_id not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment {self.experiment_id!r}")
        defaults = DEFAULTS[self.experiment_id]
        for key, val in self.overrides.items():
            if key not in defaults:
                raise ValueError(f"unknown key {key!r} for {self.experiment_id}")
            if isinstance(defaults[key], int) and not float(val).is_integer():
                raise ValueError(f"key {key!r} must be an integer")
            if isinstance(val, (int, float)) and val <= 0 and key != "seed":
                raise ValueError(f"key {key!r} must be positive")

    def param(self, key):
        defaults = DEFAULTS[self.experiment_id]
        val = self.overrides.get(key, defaults[key])
        return int(val) if isinstance(defaults[key], int) else float(val)


@dataclass(frozen=True)
class RunSummary:
    experiment_id: str
    config: dict
    metrics: dict
    pass_flags: dict
    wall_time: float
    timings: dict = field(default_factory=dict)

    @property
    def all_passed(self):
        return all(self.pass_flags.values())


def rng_for(seed, experiment, stage):
    """Counter-based generator with a key derived from (seed, experiment, stage)."""
    digest = hashlib.sha256(f"{seed}:{experiment}:{stage}".encode()).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def parse_config(text):
    """Flat ``key = value`` configuration, '#' starts a comment.

    The experiment key is mandatory; seed defaults to 0; every other key must
    belong to the experiment's override table.
    """
    experiment = None
    seed = 0
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key == "experiment":
            experiment = _SHORT_IDS.get(val, val)
            continue
        try:
            num = int(val)
        except ValueError:
            try:
                num = float(val)
            except ValueError:
                raise ValueError(f"line {lineno}: value for {key!r} is not a number: {val!r}") from None
        if key == "seed":
            if not float(num).is_integer():
                raise ValueError(f"line {lineno}: seed must be an integer")
            seed = int(num)
        else:
            overrides[key] = num
    if experiment is None:
        raise ValueError("experiment missing from configuration")
    return ExperimentConfig(experiment, seed, overrides)


def _ols_slope(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    vx = x - x.mean()
    return float(vx @ (y - y.mean()) / (vx @ vx))


def _logspaced_ints(lo, hi, n=200):
    vals = np.unique(np.round(np.logspace(math.log10(lo), math.log10(hi), n)).astype(int))
    return vals[(vals >= lo) & (vals <= hi)]


# -- E1: parabolic decay and visit growth -------------------------------------


def _run_e1(cfg, out):
    metrics = {}
    flags = {}
    timings = {}

    t0 = time.perf_counter()
    kappa = cfg.param("rho_kappa")
    rs = _k.radial_orbit(cfg.param("rho_r0"), kappa, cfg.param("rho_n"))
    rho = 1.0 - rs
    ns = _logspaced_ints(cfg.param("rho_fit_lo"), min(cfg.param("rho_fit_hi"), len(rs)))
    slope = _ols_slope(np.log(ns), np.log(rho[ns - 1]))
    timings["rho_seconds"] = time.perf_counter() - t0
    metrics["rho_slope"] = slope
    flags["rho_slope_in_band"] = -0.55 <= slope <= -0.45
    flags["rho_runtime_ok"] = timings["rho_seconds"] < 30.0
    emit_csv(out / "rho.csv", ["n", "rho"], [[float(n), float(rho[n - 1])] for n in ns])

    t0 = time.perf_counter()
    vis_cfg = SystemConfig("spiral_f", kappa=cfg.param("visits_kappa"), delta=cfg.param("visits_delta"))
    traj = trajectory(vis_cfg, (cfg.param("visits_r0"), cfg.param("visits_phi0")), cfg.param("visits_n"))
    records = visit_statistics(traj, vis_cfg.delta)
    gap_idx, gaps = visit_gaps(traj, vis_cfg.delta)
    timings["visits_seconds"] = time.perf_counter() - t0

    i_arr = np.array([rec.i for rec in records])
    n_p = np.array([rec.N_p for rec in records], dtype=float)
    n_q = np.array([rec.N_q for rec in records], dtype=float)
    metrics["visits_completed"] = float(len(records))

    band = (i_arr >= 10) & (i_arr <= 200)
    if band.any():
        ratio_p = n_p[band] / i_arr[band]
        ratio_q = n_q[band] / i_arr[band]
        metrics["visit_ratio_spread_p"] = float(ratio_p.max() / ratio_p.min())
        metrics["visit_ratio_spread_q"] = float(ratio_q.max() / ratio_q.min())
    else:
        metrics["visit_ratio_spread_p"] = metrics["visit_ratio_spread_q"] = float("nan")
    flags["visit_growth_p"] = metrics["visit_ratio_spread_p"] <= 4.0
    flags["visit_growth_q"] = metrics["visit_ratio_spread_q"] <= 4.0

    diff_band = (i_arr >= 20) & (i_arr <= 200)
    absdiff = np.abs(n_p - n_q)
    if diff_band.sum() >= 2:
        metrics["absdiff_slope"] = _ols_slope(i_arr[diff_band], absdiff[diff_band])
    else:
        metrics["absdiff_slope"] = float("nan")
    flags["bounded_discrepancy"] = abs(metrics["absdiff_slope"]) <= 0.05

    w1 = gaps[(gap_idx >= 50) & (gap_idx <= 100)]
    w2 = gaps[(gap_idx >= 150) & (gap_idx <= 200)]
    metrics["gap_max_50_100"] = float(w1.max()) if len(w1) else float("nan")
    metrics["gap_max_150_200"] = float(w2.max()) if len(w2) else float("nan")
    flags["gap_maxima_equal"] = metrics["gap_max_50_100"] == metrics["gap_max_150_200"]

    if records:
        starts = np.array([[r.n_minus_p, r.n_plus_p, r.n_minus_q, r.n_plus_q] for r in records])
        order = np.argsort(starts[0])  # chronological order of the four markers in visit 1
        seq = starts[:, order].ravel()
        metrics["visits_interleaved"] = float(np.all(np.diff(seq) > 0))
    else:
        metrics["visits_interleaved"] = 0.0

    emit_csv(
        out / "visits.csv",
        ["i", "n_minus_p", "n_plus_p", "N_p", "n_minus_q", "n_plus_q", "N_q", "absdiff"],
        [
            [float(r.i), float(r.n_minus_p), float(r.n_plus_p), float(r.N_p),
             float(r.n_minus_q), float(r.n_plus_q), float(r.N_q), float(abs(r.N_p - r.N_q))]
            for r in records
        ],
    )
    emit_csv(out / "gaps.csv", ["pair_i", "gap"],
             [[float(i), float(g)] for i, g in zip(gap_idx, gaps)])
    return metrics, flags, timings


# -- E2: occupation fractions ---------------------------------------------------


def _run_e2(cfg, out):
    metrics = {}
    flags = {}
    sys_cfg = SystemConfig("spiral_f", kappa=cfg.param("kappa"), delta=cfg.param("delta"))
    m = cfg.param("m_iterates")
    checkpoints = sorted({min(m, c) for c in (10_000, 100_000, 500_000, m)})
    rows = []
    for s in (1, 2, 3):
        r0 = cfg.param(f"start{s}_r")
        phi0 = cfg.param(f"start{s}_phi")
        traj = trajectory(sys_cfg, (r0, phi0), m)
        in_p, in_q = box_flags(traj[:, 0], traj[:, 1], sys_cfg.delta)
        cp = np.cumsum(in_p)
        cq = np.cumsum(in_q)
        for c in checkpoints:
            rows.append([r0, phi0, float(c), cp[c - 1] / c, cq[c - 1] / c])
        frac_p = cp[-1] / m
        frac_q = cq[-1] / m
        metrics[f"occupation_p_start{s}"] = float(frac_p)
        metrics[f"occupation_q_start{s}"] = float(frac_q)
        flags[f"occupation_p_start{s}"] = abs(frac_p - 0.5) <= 0.05
        flags[f"occupation_q_start{s}"] = abs(frac_q - 0.5) <= 0.05
    emit_csv(out / "occupation.csv", ["start_r", "start_phi", "m", "frac_p", "frac_q"], rows)
    return metrics, flags, {}


# -- E3: model system, k = 1 ----------------------------------------------------


def _model_pairs(n, alpha, rng):
    """(pred, succ) ambient rows of n iid model-measure samples and their images."""
    atom = rng.random(n) < 0.5
    t = rng.random(n)
    r = np.ones(n)
    phi = np.where(atom, 0.0, math.pi)
    t_pred = np.where(atom, 0.0, t)
    t_succ = np.where(atom, 0.0, (t + alpha) % 1.0)
    return (
        product_ambient_array(r, phi, t_pred),
        product_ambient_array(r, phi, t_succ),
        atom,
        t,
    )


def _circle_restriction(h):
    """Coefficients (c, a4, a5) of h on the fiber circle over q: c + a4 cos + a5 sin."""
    c = 0.0
    a4 = 0.0
    a5 = 0.0
    zero = (0,) * 5
    x1 = (1, 0, 0, 0, 0)
    x4 = (0, 0, 0, 1, 0)
    x5 = (0, 0, 0, 0, 1)
    for m, v in h.total_coeffs().items():
        if m == zero:
            c += v
        elif m == x1:
            c -= v  # x1 = -1 on the q circle
        elif m == x4:
            a4 += v
        elif m == x5:
            a5 += v
        elif sum(m) > 0 and any(m[j] > 0 for j in (1, 2)):
            continue  # x2 = x3 = 0 there
        elif sum(m) > 1:
            raise ValueError("circle restriction implemented for degree <= 1 only")
    return c, a4, a5


def _two_atom_sigma(h, t0, alpha):
    """Exact eps -> 0 conditional deviation at the circle reference h(t0).

    The level set of the cosine restriction through t0 is the reflected pair
    {t0, 2 t* - t0} with equal conditional weights; the deviation is half the
    gap between the two rotated images.
    """
    c, a4, a5 = _circle_restriction(h)
    tstar = math.atan2(a5, a4) / (2.0 * math.pi)

    def h_c(t):
        return c + a4 * math.cos(2 * math.pi * t) + a5 * math.sin(2 * math.pi * t)

    t1 = t0
    t2 = (2.0 * tstar - t0) % 1.0
    return abs(h_c(t1 + alpha) - h_c(t2 + alpha)) / 2.0


def _run_e3(cfg, out):
    metrics = {}
    flags = {}
    n = cfg.param("n_samples")
    alpha = cfg.param("alpha")
    n_obs = cfg.param("n_obs")
    n_refs = cfg.param("n_refs")
    min_count = cfg.param("min_count")
    threshold = cfg.param("threshold")

    pred_amb, succ_amb, _, _ = _model_pairs(n, alpha, rng_for(cfg.seed, "E3", "samples"))
    ref_t = rng_for(cfg.seed, "E3", "refs").random(n_refs)
    ref_amb = product_ambient_array(np.ones(n_refs), np.full(n_refs, math.pi), ref_t)

    base = Observable(5, "cosine_fiber", degree_bound=1)
    basis_size = len(monomial_basis(5, 1))
    pred_fracs = []
    match_fracs = []
    rows = []
    for j in range(n_obs):
        amps = rng_for(cfg.seed, "E3", f"obs{j}").uniform(
            -cfg.param("pert_scale"), cfg.param("pert_scale"), basis_size)
        h = perturb(base, amplitudes=amps)
        pairs = PairedVectors(1, evaluate(h, pred_amb)[:, None], evaluate(h, succ_amb)[:, None])
        ladder = default_ladder(pairs, levels=cfg.param("ladder_levels"), top=cfg.param("ladder_top"))
        engine = make_engine(pairs)
        y_refs = evaluate(h, ref_amb)
        n_def = n_pred = n_match = 0
        for t0, y in zip(ref_t, y_refs):
            est = engine.profile([y], ladder, min_count, threshold)
            oracle = _two_atom_sigma(h, t0, alpha)
            matched = float("nan")
            if est.defined:
                n_def += 1
                n_pred += bool(est.predictable)
                matched = float(abs(est.sigma_hat - oracle) <= 0.1 * max(oracle, threshold))
                n_match += int(matched)
            rows.append([
                float(j), float(t0), float(y),
                float("nan") if est.sigma_hat is None else est.sigma_hat,
                float(est.sigma_hat_count), oracle, matched,
            ])
        pred_fracs.append(n_pred / n_def if n_def else float("nan"))
        match_fracs.append(n_match / n_def if n_def else float("nan"))

    metrics["predictable_fraction_max"] = float(np.max(pred_fracs))
    metrics["predictable_fraction_mean"] = float(np.mean(pred_fracs))
    metrics["oracle_match_min"] = float(np.min(match_fracs))
    metrics["oracle_match_mean"] = float(np.mean(match_fracs))
    flags["model_nonpredictable"] = metrics["predictable_fraction_max"] <= 0.2
    flags["two_atom_oracle_match"] = metrics["oracle_match_min"] >= 0.8
    emit_csv(out / "model_refs.csv",
             ["obs", "t0", "y", "sigma_hat", "count", "sigma_oracle", "matched"], rows)
    return metrics, flags, {}


# -- E4: skew-product counterexample, k = 1 -------------------------------------


def _run_e4(cfg, out):
    metrics = {}
    flags = {}
    timings = {}
    n = cfg.param("orbit_n")
    kappa = cfg.param("kappa")
    delta = cfg.param("delta")
    alpha = cfg.param("alpha")
    threshold = cfg.param("threshold")
    min_count = cfg.param("min_count")

    t0 = time.perf_counter()
    r, phi, t = _k.skew_orbit(cfg.param("start_r"), cfg.param("start_phi"), cfg.param("start_t"),
                              kappa, delta, alpha, n, 0)
    timings["orbit_seconds"] = time.perf_counter() - t0

    in_p, in_q = box_flags(r, phi, delta)
    late = np.zeros(n, dtype=bool)
    late[n // 2: n - 1] = True  # predecessors only, late half
    fiber_near_zero = np.minimum(t, 1.0 - t) < cfg.param("p_ref_fiber_gate")
    pool_p = np.flatnonzero(in_p & late & fiber_near_zero)
    pool_q = np.flatnonzero(in_q & late)
    if len(pool_p) == 0 or len(pool_q) == 0:
        raise ValueError("empty reference pools; orbit too short for late-time passages")
    rng = rng_for(cfg.seed, "E4", "refs")
    n_refs = cfg.param("n_refs")
    refs_p = np.sort(rng.choice(pool_p, size=min(n_refs, len(pool_p)), replace=False))
    refs_q = np.sort(rng.choice(pool_q, size=min(n_refs, len(pool_q)), replace=False))
    metrics["p_ref_pool"] = float(len(pool_p))
    metrics["q_ref_pool"] = float(len(pool_q))

    base = Observable(5, "coord:0", degree_bound=1)
    basis_size = len(monomial_basis(5, 1))
    n_obs = cfg.param("n_obs")
    p_sigmas = []
    q_sigmas = []
    rows = []
    t1 = time.perf_counter()
    for j in range(n_obs):
        amps = rng_for(cfg.seed, "E4", f"obs{j}").uniform(
            -cfg.param("pert_scale"), cfg.param("pert_scale"), basis_size)
        h = perturb(base, amplitudes=amps)
        m = _chunked_measurements(h, r, phi, t)
        pairs = PairedVectors(1, m[:-1, None], m[1:, None])
        ladder = default_ladder(pairs, levels=cfg.param("ladder_levels"), top=cfg.param("ladder_top"))
        engine = Sorted1DEngine(pairs)
        for side, refs in (("p", refs_p), ("q", refs_q)):
            for i in refs:
                est = engine.profile([m[i]], ladder, min_count, threshold)
                if est.defined:
                    (p_sigmas if side == "p" else q_sigmas).append(est.sigma_hat)
                rows.append([
                    float(j), side, float(i),
                    float("nan") if est.sigma_hat is None else est.sigma_hat,
                    float("nan") if est.sigma_hat_eps is None else est.sigma_hat_eps,
                    float(est.sigma_hat_count),
                ])
    timings["profiles_seconds"] = time.perf_counter() - t1

    p_arr = np.asarray(p_sigmas)
    q_arr = np.asarray(q_sigmas)
    metrics["p_sigma_max"] = float(p_arr.max())
    metrics["p_sigma_median"] = float(np.median(p_arr))
    metrics["q_nonpredictable_fraction"] = float(np.mean(q_arr >= threshold))
    metrics["q_sigma_median"] = float(np.median(q_arr))
    flags["atom_predictable"] = metrics["p_sigma_max"] < 1e-3
    flags["fiber_nonpredictable"] = metrics["q_nonpredictable_fraction"] >= 0.5
    emit_csv(out / "skew_refs.csv",
             ["obs", "side", "ref_idx", "sigma_hat", "sigma_hat_eps", "count"], rows)
    return metrics, flags, timings


def _chunked_measurements(h, r, phi, t, chunk=1_000_000):
    out = np.empty(len(r))
    for a in range(0, len(r), chunk):
        b = min(a + chunk, len(r))
        out[a:b] = evaluate(h, product_ambient_array(r[a:b], phi[a:b], t[a:b]))
    return out


# -- E5: predictability trend for ergodic benchmarks ----------------------------


def _monotone_last4(estimates, min_count):
    eligible = 0
    monotone = 0
    for est in estimates:
        adm = [e for e in est.ladder if e.count >= min_count and e.sigma is not None]
        if len(adm) < 4:
            continue
        eligible += 1
        sig = [e.sigma for e in adm[-4:]]
        if all(b < a for a, b in zip(sig, sig[1:])):
            monotone += 1
    return (monotone / eligible if eligible else float("nan")), eligible


def _trend_case(cfg, stage, sys_cfg, k, n_orbit, burn_in, base_id, degree):
    rng = rng_for(cfg.seed, "E5", f"{stage}_obs")
    ambient_dim = 2
    base = Observable(ambient_dim, base_id, degree_bound=degree)
    amps = rng.uniform(-cfg.param("pert_scale"), cfg.param("pert_scale"),
                       len(monomial_basis(ambient_dim, degree)))
    h = perturb(base, amplitudes=amps)
    orbit = trajectory(sys_cfg, default_x0(sys_cfg), n_orbit, burn_in)
    series = delay_series(measure_states(h, sys_cfg, orbit), k)
    n_pred = len(series) - 1
    tail = np.arange(n_pred // 2, n_pred)
    refs = np.sort(rng_for(cfg.seed, "E5", f"{stage}_refs").choice(
        tail, size=min(cfg.param("n_refs"), len(tail)), replace=False))
    ladder = default_ladder(series, levels=cfg.param("ladder_levels"), top=cfg.param("ladder_top"))
    report = profile_references(series, series.vectors[refs], ladder=ladder,
                                min_count=cfg.param("min_count"),
                                threshold=cfg.param("threshold"), ref_indices=refs)
    return report


def _run_e5(cfg, out):
    metrics = {}
    flags = {}
    min_count = cfg.param("min_count")
    rows = []

    rot_cfg = SystemConfig("rotation", alpha=cfg.param("alpha"))
    rot = _trend_case(cfg, "rotation", rot_cfg, 2, cfg.param("rot_n"), 0, "cosine_fiber", 3)
    frac, eligible = _monotone_last4(rot.estimates, min_count)
    metrics["rotation_k2_monotone_fraction"] = frac
    metrics["rotation_k2_eligible_refs"] = float(eligible)
    metrics["rotation_k2_predictable_fraction"] = rot.predictable_fraction
    flags["rotation_k2_trend"] = frac >= 0.9
    rows += _trend_rows("rotation_k2", rot)

    henon_cfg = SystemConfig("henon")
    for k in (2, 3):
        rep = _trend_case(cfg, f"henon_k{k}", henon_cfg, k,
                          cfg.param("henon_n"), cfg.param("henon_burn"), "coord:0", 2 * k - 1)
        frac, eligible = _monotone_last4(rep.estimates, min_count)
        metrics[f"henon_k{k}_monotone_fraction"] = frac
        metrics[f"henon_k{k}_eligible_refs"] = float(eligible)
        rows += _trend_rows(f"henon_k{k}", rep)
        if k == 3:
            flags["henon_k3_trend"] = frac >= 0.8
    emit_csv(out / "trend_refs.csv", ["case", "ref_idx", "eps", "count", "sigma"], rows)
    return metrics, flags, {}


def _trend_rows(case, report):
    rows = []
    for ref, est in zip(report.ref_indices, report.estimates):
        for entry in est.ladder:
            rows.append([case, float(ref), entry.eps, float(entry.count),
                         float("nan") if entry.sigma is None else entry.sigma])
    return rows


# -- E6: information dimension ---------------------------------------------------


def _run_e6(cfg, out):
    metrics = {}
    flags = {}
    ladder = [2.0 ** (-j) for j in range(cfg.param("eps_hi_exp"), cfg.param("eps_lo_exp") + 1)]
    n_centers = cfg.param("n_centers")
    rows = []

    def record(name, est, kind):
        used = est.levels_used or tuple(0 for _ in est.ladder)
        for (eps, val), n_used in zip(est.ladder, used):
            rows.append([name, kind, eps, val, float(n_used)])
        metrics[f"{name}_{kind}"] = est.estimate

    seed_int = int(rng_for(cfg.seed, "E6", "model").integers(0, 2**63))
    mu0 = sample_model_measure(cfg.param("n_samples"), seed_int)
    ball, pointwise = ball_mass_dimension(
        mu0, ladder, n_centers, int(rng_for(cfg.seed, "E6", "model_centers").integers(0, 2**63)))
    record("model_measure", ball, "ball")
    record("model_measure", box_counting_idim(mu0, ladder), "box")
    for q, v in pointwise_dim_quantiles(pointwise).items():
        metrics[f"model_measure_dimH_proxy_q{int(q * 100):02d}"] = v

    seg = uniform_segment_measure(cfg.param("n_samples"),
                                  int(rng_for(cfg.seed, "E6", "segment").integers(0, 2**63)))
    ball, _ = ball_mass_dimension(
        seg, ladder, n_centers, int(rng_for(cfg.seed, "E6", "segment_centers").integers(0, 2**63)))
    record("uniform_segment", ball, "ball")
    record("uniform_segment", box_counting_idim(seg, ladder), "box")

    pm = point_mass_measure(cfg.param("point_n"))
    ball, _ = ball_mass_dimension(
        pm, ladder, n_centers, int(rng_for(cfg.seed, "E6", "point_centers").integers(0, 2**63)))
    record("point_mass", ball, "ball")
    record("point_mass", box_counting_idim(pm, ladder), "box")

    r, phi, t = _k.skew_orbit(0.5, 1.0, 0.3, cfg.param("kappa"), cfg.param("delta"),
                              cfg.param("alpha"), cfg.param("skew_orbit_n"), 0)
    stride = cfg.param("skew_stride")
    pts = product_ambient_array(r[::stride], phi[::stride], t[::stride])
    mu_skew = EmpiricalMeasure.uniform(pts)
    ball, _ = ball_mass_dimension(
        mu_skew, ladder, n_centers, int(rng_for(cfg.seed, "E6", "skew_centers").integers(0, 2**63)))
    record("skew_orbit", ball, "ball")
    record("skew_orbit", box_counting_idim(mu_skew, ladder), "box")

    flags["model_ball_half"] = abs(metrics["model_measure_ball"] - 0.5) <= 0.1
    flags["model_box_half"] = abs(metrics["model_measure_box"] - 0.5) <= 0.1
    flags["segment_ball_one"] = abs(metrics["uniform_segment_ball"] - 1.0) <= 0.1
    flags["segment_box_one"] = abs(metrics["uniform_segment_box"] - 1.0) <= 0.1
    flags["point_ball_zero"] = abs(metrics["point_mass_ball"]) <= 0.05
    flags["point_box_zero"] = abs(metrics["point_mass_box"]) <= 0.05
    emit_csv(out / "idim.csv", ["measure", "estimator", "eps", "value", "n_used"], rows)
    return metrics, flags, {}


# -- driver ----------------------------------------------------------------------


_RUNNERS = {
    "E1_parabolic": [("parabolic_and_visits", _run_e1)],
    "E2_natural_measure": [("occupation", _run_e2)],
    "E3_model_nonpredict": [("model_nonpredict", _run_e3)],
    "E4_counterexample": [("counterexample", _run_e4)],
    "E5_ergodic_predict": [("ergodic_trend", _run_e5)],
    "E6_idim": [("idim", _run_e6)],
}


def run_experiment(cfg, out_dir):
    """Run one named experiment; write CSVs plus summary.txt under out_dir.

    Raises RuntimeError naming the failing stage if any sub-operation fails.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    metrics = {}
    flags = {}
    timings = {}
    for stage, runner in _RUNNERS[cfg.experiment_id]:
        try:
            m, f, tm = runner(cfg, out)
        except Exception as exc:
            raise RuntimeError(f"stage {stage!r} of {cfg.experiment_id} failed: {exc}") from exc
        metrics.update(m)
        flags.update(f)
        timings.update(tm)
    wall = time.perf_counter() - start
    summary = RunSummary(cfg.experiment_id, _config_echo(cfg), metrics, flags, wall, timings)
    _write_summary(out / "summary.txt", summary)
    return summary


def _config_echo(cfg):
    echo = {"experiment": cfg.experiment_id, "seed": cfg.seed}
    defaults = DEFAULTS[cfg.experiment_id]
    for key in sorted(defaults):
        echo[key] = cfg.overrides.get(key, defaults[key])
    return echo


def _write_summary(path, summary):
    # deliberately excludes wall time so artifact bytes depend on config only
    lines = [f"experiment = {summary.experiment_id}"]
    for key, val in summary.config.items():
        if key == "experiment":
            continue
        lines.append(f"{key} = {format_cell(val)}")
    lines.append("")
    for key in sorted(summary.metrics):
        lines.append(f"metric {key} = {format_cell(summary.metrics[key])}")
    lines.append("")
    for key in sorted(summary.pass_flags):
        lines.append(f"pass {key} = {str(summary.pass_flags[key]).lower()}")
    Path(path).write_text("\n".join(lines) + "\n")
