"""Seeded Monte Carlo sweeps over network size, antenna count, phase error and
FC noise, with CSV/JSON plot-data output.

A config is the flat scenario dictionary accepted by
:meth:`SensorScenario.from_dict` plus experiment fields::

    {"kind": "var-vs-N", "sweep": [5, 10, 20], "realizations": 300,
     "methods": ["sdp", "acma", "all-ones", "bounds"],
     "n_sensors": 10, "n_antennas": 4, "fc_noise_var": 0.1,
     "distances": {"dist": "uniform", "lo": 3, "hi": 20},
     "sensor_noise_vars": {"dist": "uniform", "lo": 0.01, "hi": 0.1},
     "seed": 0}

Every (sweep point, realization) pair draws from its own substream, so
results do not depend on ``jobs`` or on execution order.
"""

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from psfwsn import asymptotics
from psfwsn.acma import acma_phases, admissible_m
from psfwsn.baselines import all_ones_phases, optimize_gain_phase
from psfwsn.estimator import estimate_variance, quadratic_kernel, variance_lower_bound
from psfwsn.network import SensorScenario, generate_channel
from psfwsn.phase_error import phase_error_bound, phase_error_ratio_mc
from psfwsn.rng import substream
from psfwsn.sdp import optimize_phases_sdp
from psfwsn.selection import (
    select_exhaustive,
    select_greedy,
    select_lp,
    select_min_noise,
    selection_kernel,
    reoptimize_phases,
    subset_kernel,
)

__all__ = [
    "ConfigError",
    "Record",
    "KINDS",
    "validate_config",
    "config_hash",
    "run_experiment",
    "emit_plot_data",
    "read_plot_data",
]

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Malformed experiment config, unknown kind or unknown method."""


VARIANCE_METHODS = ("sdp", "acma", "gain-phase", "all-ones", "bounds")
BOUND_NAMES = ("lower-bound", "large-n-lower", "single-antenna-upper", "large-m")

KINDS = {
    "var-vs-N": {"sweeps": "n_sensors", "methods": VARIANCE_METHODS},
    "var-vs-N-fixed-d": {"sweeps": "n_sensors", "methods": VARIANCE_METHODS},
    "var-vs-M": {"sweeps": "n_antennas", "methods": VARIANCE_METHODS},
    "phase-error": {"sweeps": "n_sensors", "methods": ("sdp",)},
    "selection-sweep": {"sweeps": "fc_noise_var", "methods": ("lp", "greedy", "min-noise", "exhaustive", "all")},
}

DEFAULT_METHODS = {
    "var-vs-N": VARIANCE_METHODS,
    "var-vs-N-fixed-d": VARIANCE_METHODS,
    "var-vs-M": VARIANCE_METHODS,
    "phase-error": ("sdp",),
    "selection-sweep": ("lp", "greedy", "min-noise", "all"),
}

DEFAULTS = {
    "realizations": 300,
    "seed": 0,
    "path_loss_exp": 1.0,
    "n_rounds": 100,
    "acma_m": 2,
    "gain_phase_restarts": 20,
    "sigma_p_sq": [0.1, 0.2],
    "trials": 3000,
    "reoptimize": True,
}

_REQUIRED = ("kind", "sweep", "n_antennas", "distances", "sensor_noise_vars", "fc_noise_var")


@dataclass
class Record:
    """Aggregate over realizations for one (sweep point, method)."""

    sweep_value: float
    method: str
    mean_variance: float
    stderr: float
    n: int
    wall_time: float = 0.0
    bound: float = math.nan
    certificates: dict = field(default_factory=dict)


class _Acc:
    """Running mean and sum of squared deviations (Welford)."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self):
        self.n, self.mean, self.m2 = 0, 0.0, 0.0

    def add(self, x):
        self.n += 1
        d = x - self.mean
        self.mean += d / self.n
        self.m2 += d * (x - self.mean)

    @property
    def stderr(self):
        if self.n < 2:
            return math.nan
        return math.sqrt(self.m2 / (self.n - 1) / self.n)


def validate_config(cfg):
    """Fill defaults and check the experiment fields; returns a new dict."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    kind = cfg.get("kind")
    if kind is not None and kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {sorted(KINDS)}")
    # the swept field is filled per point, so it need not be given
    swept = KINDS[kind]["sweeps"] if kind else None
    missing = [k for k in _REQUIRED if k not in cfg and k != swept]
    if missing:
        raise ConfigError(f"missing config fields: {', '.join(missing)}")
    out = dict(DEFAULTS)
    out.update(cfg)
    sweep = out["sweep"]
    if not isinstance(sweep, (list, tuple)) or not sweep:
        raise ConfigError("sweep must be a non-empty list")
    axis = KINDS[kind]["sweeps"]
    if axis in ("n_sensors", "n_antennas"):
        if any(int(v) != v or v < 1 for v in sweep):
            raise ConfigError(f"{axis} sweep values must be positive integers")
    elif any(v <= 0 for v in sweep):
        raise ConfigError("fc_noise_var sweep values must be positive")
    if axis != "n_sensors" and "n_sensors" not in out:
        raise ConfigError("missing config field: n_sensors")
    out["methods"] = list(out.get("methods") or DEFAULT_METHODS[kind])
    unknown = [m for m in out["methods"] if m not in KINDS[kind]["methods"]]
    if unknown:
        raise ConfigError(f"unknown method(s) for {kind}: {', '.join(unknown)}")
    if int(out["realizations"]) < 1:
        raise ConfigError("realizations must be >= 1")
    if kind == "selection-sweep":
        if "K" not in out:
            raise ConfigError("selection-sweep needs K")
        if not 1 <= int(out["K"]) <= int(out["n_sensors"]):
            raise ConfigError("need 1 <= K <= n_sensors")
    if kind == "phase-error":
        s = out["sigma_p_sq"]
        out["sigma_p_sq"] = [float(v) for v in (s if isinstance(s, (list, tuple)) else [s])]
    return out


def config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _point_config(cfg, value):
    axis = KINDS[cfg["kind"]]["sweeps"]
    pc = dict(cfg)
    pc[axis] = int(value) if axis != "fc_noise_var" else float(value)
    return pc


def _acma_m(cfg, N):
    m = int(cfg["acma_m"])
    ok = admissible_m(N)
    if m in ok:
        return m
    return max(ok) if ok else None


def _variance_realization(cfg, scenario, H, B, rng_for):
    methods = cfg["methods"]
    out, times, certs = {}, {}, {}
    sdp_a = None
    if "sdp" in methods or "gain-phase" in methods:
        t0 = time.perf_counter()
        res = optimize_phases_sdp(B, rng=rng_for("sdp"), n_rounds=int(cfg["n_rounds"]), full=True)
        sdp_a = res.a
        if "sdp" in methods:
            out["sdp"] = 1.0 / res.objective
            times["sdp"] = time.perf_counter() - t0
            certs["sdp"] = {"relative_gap": res.relaxation.relative_gap,
                            "iterations": res.relaxation.iterations}
    acma_a = None
    if "acma" in methods or "gain-phase" in methods:
        m = _acma_m(cfg, scenario.n_sensors)
        if m is not None:
            t0 = time.perf_counter()
            acma_a = acma_phases(B, m)
            if "acma" in methods:
                out["acma"] = estimate_variance(acma_a, B)
                times["acma"] = time.perf_counter() - t0
    if "all-ones" in methods:
        t0 = time.perf_counter()
        out["all-ones"] = estimate_variance(all_ones_phases(scenario.n_sensors), B)
        times["all-ones"] = time.perf_counter() - t0
    if "gain-phase" in methods:
        t0 = time.perf_counter()
        init = [v for v in (sdp_a, acma_a) if v is not None]
        gp = optimize_gain_phase(H, scenario.sensor_noise_vars, scenario.fc_noise_var,
                                 n_restarts=int(cfg["gain_phase_restarts"]),
                                 rng=rng_for("gain-phase"), init=init)
        out["gain-phase"] = gp.variance
        times["gain-phase"] = time.perf_counter() - t0
        certs["gain-phase"] = {"converged": float(gp.converged)}
    if "bounds" in methods:
        out["lower-bound"] = variance_lower_bound(B)
        out["large-n-lower"] = asymptotics.large_n_lower_bound(scenario)
        out["single-antenna-upper"] = asymptotics.single_antenna_upper_bound(scenario)
        out["large-m"] = asymptotics.large_m_variance(scenario)
    return out, times, certs


def _phase_error_realization(cfg, scenario, H, B, rng_for):
    res = optimize_phases_sdp(B, rng=rng_for("sdp"), n_rounds=int(cfg["n_rounds"]), full=True)
    out, times = {}, {}
    for k, s2 in enumerate(cfg["sigma_p_sq"]):
        t0 = time.perf_counter()
        name = f"sdp:sigma_p_sq={s2:g}"
        out[name] = phase_error_ratio_mc(B, res.a, s2, int(cfg["trials"]), rng=rng_for("perturb", k))
        times[name] = time.perf_counter() - t0
    return out, times, {}


def _selection_realization(cfg, scenario, H, B, rng_for):
    K = int(cfg["K"])
    methods = cfg["methods"]
    n_rounds = int(cfg["n_rounds"])
    sv, sn = scenario.sensor_noise_vars, scenario.fc_noise_var
    full = optimize_phases_sdp(B, rng=rng_for("sdp-full"), n_rounds=n_rounds)
    out, times = {}, {}
    if "all" in methods:
        out["all"] = estimate_variance(full, B)

    def phases_for(mask, tag):
        if cfg["reoptimize"]:
            opt = lambda BS: optimize_phases_sdp(BS, rng=rng_for("reopt", tag), n_rounds=n_rounds)
            _, val = reoptimize_phases(H, sv, sn, mask, full, opt)
            return 1.0 / val
        return estimate_variance(full[mask], subset_kernel(H, sv, sn, mask))

    pickers = {
        "lp": lambda: select_lp(selection_kernel(H, full), K),
        "greedy": lambda: select_greedy(H, full, K),
        "min-noise": lambda: select_min_noise(sv, K),
    }
    for tag, name in enumerate(("lp", "greedy", "min-noise")):
        if name in methods:
            t0 = time.perf_counter()
            out[name] = phases_for(pickers[name](), tag)
            times[name] = time.perf_counter() - t0
    if "exhaustive" in methods:
        t0 = time.perf_counter()
        opt = lambda BS: optimize_phases_sdp(BS, rng=rng_for("exhaustive"), n_rounds=n_rounds)
        _, val, _ = select_exhaustive(H, sv, sn, K, phase_optimizer=opt, full=True)
        out["exhaustive"] = 1.0 / val
        times["exhaustive"] = time.perf_counter() - t0
    return out, times, {}


_REALIZE = {
    "var-vs-N": _variance_realization,
    "var-vs-N-fixed-d": _variance_realization,
    "var-vs-M": _variance_realization,
    "phase-error": _phase_error_realization,
    "selection-sweep": _selection_realization,
}


def _run_task(task):
    cfg, point_idx, value, r = task
    seed = int(cfg["seed"])
    pc = _point_config(cfg, value)

    def rng_for(*tags):
        return substream(seed, "realization", point_idx, r, *tags)

    scenario = SensorScenario.from_dict(pc, rng=rng_for("scenario"))
    H = generate_channel(scenario, rng=rng_for("channel"))
    B = quadratic_kernel(H, scenario.sensor_noise_vars, scenario.fc_noise_var)
    out, times, certs = _REALIZE[cfg["kind"]](cfg, scenario, H, B, rng_for)
    return point_idx, r, out, times, certs


def run_experiment(cfg, jobs=1, progress=None):
    """Run every sweep point and realization; returns a list of :class:`Record`.

    Parameters
    ----------
    cfg : dict
        Experiment config (validated here).
    jobs : int
        Worker processes. Output is identical for any value.
    progress : callable, optional
        Called with ``(done, total)`` after each realization.
    """
    cfg = validate_config(cfg)
    R = int(cfg["realizations"])
    tasks = [(cfg, i, v, r) for i, v in enumerate(cfg["sweep"]) for r in range(R)]
    results = {}
    if jobs is not None and int(jobs) > 1:
        with ProcessPoolExecutor(max_workers=int(jobs)) as pool:
            for k, res in enumerate(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * int(jobs))))):
                results[res[:2]] = res[2:]
                if progress:
                    progress(k + 1, len(tasks))
    else:
        for k, t in enumerate(tasks):
            res = _run_task(t)
            results[res[:2]] = res[2:]
            if progress:
                progress(k + 1, len(tasks))

    records = []
    for i, v in enumerate(cfg["sweep"]):
        accs, tsum, csum, order = {}, {}, {}, []
        for r in range(R):
            out, times, certs = results[(i, r)]
            for name, val in out.items():
                if name not in accs:
                    accs[name], tsum[name], csum[name] = _Acc(), 0.0, {}
                    order.append(name)
                accs[name].add(float(val))
                tsum[name] += times.get(name, 0.0)
                for ck, cv in certs.get(name, {}).items():
                    lo, hi, s = csum[name].get(ck, (math.inf, -math.inf, 0.0))
                    csum[name][ck] = (min(lo, cv), max(hi, cv), s + cv)
        for name in order:
            a = accs[name]
            bound = math.nan
            if cfg["kind"] == "phase-error":
                s2 = float(name.split("=", 1)[1])
                bound = phase_error_bound(int(v), s2)
            certs = {f"{ck}_{stat}": val for ck, (lo, hi, s) in csum[name].items()
                     for stat, val in (("min", lo), ("max", hi), ("mean", s / a.n))}
            records.append(Record(sweep_value=float(v), method=name, mean_variance=a.mean,
                                  stderr=a.stderr, n=a.n, wall_time=tsum[name] / a.n,
                                  bound=bound, certificates=certs))
    return records


CSV_COLUMNS = ("sweep_value", "method", "mean_variance", "stderr", "n", "wall_time")


def emit_plot_data(records, path, config=None, seed=None):
    """Write ``records`` to the CSV ``path`` plus a ``.json`` sidecar.

    Floats are written with ``repr`` so :func:`read_plot_data` recovers them
    exactly. A ``bound`` column is added when any record carries one.
    Returns ``(csv_path, json_path)``.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with_bound = any(not math.isnan(r.bound) for r in records)
    cols = CSV_COLUMNS + (("bound",) if with_bound else ())
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in records:
            row = [repr(float(r.sweep_value)), r.method, repr(float(r.mean_variance)),
                   repr(float(r.stderr)), str(int(r.n)), repr(float(r.wall_time))]
            if with_bound:
                row.append(repr(float(r.bound)))
            w.writerow(row)
    side = path.with_suffix(".json")
    meta = {
        "config": config,
        "config_hash": config_hash(config) if config is not None else None,
        "seed": seed if seed is not None else (config or {}).get("seed"),
        "csv": path.name,
        "records": [
            {"sweep_value": r.sweep_value, "method": r.method, "certificates": r.certificates}
            for r in records
        ],
    }
    side.write_text(json.dumps(meta, indent=2, sort_keys=True, default=float))
    return path, side


def read_plot_data(path):
    """Parse a CSV written by :func:`emit_plot_data` back into records
    (certificates are not part of the CSV)."""
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(Record(
                sweep_value=float(row["sweep_value"]),
                method=row["method"],
                mean_variance=float(row["mean_variance"]),
                stderr=float(row["stderr"]),
                n=int(row["n"]),
                wall_time=float(row["wall_time"]),
                bound=float(row["bound"]) if "bound" in row else math.nan,
            ))
    return out
