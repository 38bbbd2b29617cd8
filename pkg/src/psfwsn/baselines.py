"""Reference transmit strategies and a brute-force phase oracle."""

import logging
from dataclasses import dataclass

import numpy as np

from psfwsn import kernels
from psfwsn.rng import substream

__all__ = [
    "all_ones_phases",
    "conjugate_phases",
    "GainPhaseResult",
    "gain_phase_objective",
    "optimize_gain_phase",
    "brute_force_phases",
    "MAX_BRUTE_FORCE_SENSORS",
]

log = logging.getLogger(__name__)

MAX_BRUTE_FORCE_SENSORS = 5


def all_ones_phases(N):
    """No-feedback vector ``a = 1``."""
    if int(N) < 1:
        raise ValueError("N must be >= 1")
    return np.ones(int(N), dtype=np.complex128)


def conjugate_phases(H):
    """Phases that co-phase every sensor at the first FC antenna: ``exp(-j angle H[0, i])``.

    Accepts the full ``M x N`` channel or just its first row.
    """
    H = np.asarray(H, dtype=np.complex128)
    row = H if H.ndim == 1 else H[0]
    return np.exp(-1j * np.angle(row))


def gain_phase_objective(H, sensor_noise_vars, fc_noise_var, a):
    """``a^H H^H (H D V D^H H^H + sn I)^-1 H a`` with ``D = diag(a)``."""
    f, _ = kernels.gain_phase_objective(H, sensor_noise_vars, fc_noise_var, a)
    return float(f)


def numeric_gradient(H, sensor_noise_vars, fc_noise_var, a, step=1e-6):
    """Central-difference gradient over the real and imaginary parts of ``a``."""
    a = np.asarray(a, dtype=np.complex128)
    g = np.empty_like(a)
    for i in range(a.size):
        parts = []
        for d in (step, 1j * step):
            e = np.zeros_like(a)
            e[i] = d
            fp = gain_phase_objective(H, sensor_noise_vars, fc_noise_var, a + e)
            fm = gain_phase_objective(H, sensor_noise_vars, fc_noise_var, a - e)
            parts.append((fp - fm) / (2 * step))
        g[i] = parts[0] + 1j * parts[1]
    return g


@dataclass
class GainPhaseResult:
    a: np.ndarray
    objective: float
    converged: bool
    restarts: int
    iterations: int

    @property
    def variance(self):
        return 1.0 / self.objective


def optimize_gain_phase(H, sensor_noise_vars, fc_noise_var, n_restarts=20, rng=None,
                        init=(), max_iter=2000, tol=1e-12):
    """Best local maximiser of the gain-and-phase objective over ``||a||^2 <= N``.

    Projected gradient ascent with Armijo backtracking from ``n_restarts``
    random unit-modulus starts plus any vectors passed in ``init`` (for
    instance an optimised phase-only vector, which is always feasible).
    The best local optimum wins; ties go to the earliest start.
    """
    H = np.asarray(H, dtype=np.complex128)
    M, N = H.shape
    if n_restarts < 1 and not len(init):
        raise ValueError("need at least one start")
    if rng is None:
        rng = substream(0, "gain-phase")
    radius = np.sqrt(N)
    starts = [np.asarray(a0, dtype=np.complex128) for a0 in init]
    if n_restarts > 0:
        starts.extend(np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(n_restarts, N))))
    best = None
    total_it = 0
    for a0 in starts:
        a, f, it, conv = kernels.gain_phase_ascent(H, sensor_noise_vars, fc_noise_var, a0, radius,
                                                   max_iter=max_iter, tol=tol)
        total_it += it
        if best is None or f > best[1]:
            best = (a, f, conv)
    a, f, conv = best
    if not conv:
        log.warning("gain-phase ascent hit the iteration cap; returning best iterate")
    return GainPhaseResult(a=a, objective=f, converged=conv, restarts=len(starts), iterations=total_it)


def brute_force_phases(B, levels=64, full=False):
    """Exhaustive search of ``a^H B a`` over ``levels`` equally spaced phases.

    The first entry is pinned to 1 (global phase is irrelevant), so the
    search costs ``levels^(N-1)`` evaluations; ``N`` is capped at
    ``MAX_BRUTE_FORCE_SENSORS``.
    """
    B = np.asarray(B, dtype=np.complex128)
    N = B.shape[0]
    if N > MAX_BRUTE_FORCE_SENSORS:
        raise ValueError(f"brute force limited to N <= {MAX_BRUTE_FORCE_SENSORS}, got {N}")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    value, idx = kernels.grid_search(B, levels)
    a = np.exp(2j * np.pi * idx / levels)
    return (a, value) if full else a
