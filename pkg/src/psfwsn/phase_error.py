"""Imperfect phase implementation: Gaussian phase jitter and its variance penalty."""

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from psfwsn import kernels
from psfwsn.estimator import DEGENERACY_TOL
from psfwsn.rng import substream

__all__ = ["perturb_phases", "phase_error_ratio_mc", "phase_error_bound", "PhaseErrorStats"]

log = logging.getLogger(__name__)

# beyond this the second-order expansion behind the bound is not meaningful
SMALL_ERROR_LIMIT = 0.5


def perturb_phases(a, sigma_p_sq, rng=None, size=None):
    """``a_i exp(j Delta_i)`` with ``Delta_i ~ N(0, sigma_p_sq)`` radians.

    ``size`` returns that many independent perturbed copies (rows).
    """
    if sigma_p_sq < 0:
        raise ValueError("sigma_p_sq must be >= 0")
    if sigma_p_sq > SMALL_ERROR_LIMIT:
        warnings.warn(f"sigma_p^2 = {sigma_p_sq} is not small; the degradation bound is unreliable",
                      stacklevel=2)
    a = np.asarray(a, dtype=np.complex128)
    if sigma_p_sq == 0:
        return a.copy() if size is None else np.tile(a, (int(size), 1))
    if rng is None:
        rng = substream(0, "phase-error")
    shape = a.shape if size is None else (int(size),) + a.shape
    delta = rng.normal(0.0, np.sqrt(sigma_p_sq), size=shape)
    return a * np.exp(1j * delta)


@dataclass
class PhaseErrorStats:
    mean_ratio: float
    stderr: float
    n_used: int
    n_skipped: int


def phase_error_ratio_mc(B, a, sigma_p_sq, n_trials, rng=None, full=False):
    """Monte Carlo mean of ``Var(perturbed a) / Var(a)`` for a fixed kernel.

    Perturbed draws whose quadratic form is degenerate are skipped and
    counted in ``PhaseErrorStats.n_skipped``.
    """
    B = np.asarray(B, dtype=np.complex128)
    a = np.asarray(a, dtype=np.complex128)
    base = float(kernels.quad_forms(a[None, :], B)[0])
    floor = DEGENERACY_TOL * float(np.trace(B).real)
    if base <= floor:
        raise ValueError("unperturbed phase vector is degenerate")
    if sigma_p_sq == 0:
        stats = PhaseErrorStats(1.0, 0.0, int(n_trials), 0)
        return stats if full else 1.0
    pert = perturb_phases(a, sigma_p_sq, rng=rng, size=n_trials)
    q = kernels.quad_forms(pert, B)
    ok = q > floor
    ratios = base / q[ok]
    n = int(ok.sum())
    if n == 0:
        raise ValueError("every perturbed draw was degenerate")
    stats = PhaseErrorStats(
        mean_ratio=float(ratios.mean()),
        stderr=float(ratios.std(ddof=1) / np.sqrt(n)) if n > 1 else np.nan,
        n_used=n,
        n_skipped=int(n_trials) - n,
    )
    return stats if full else stats.mean_ratio


def phase_error_bound(N, sigma_p_sq):
    """Approximate upper bound ``1 + (1 - 1/N) sigma_p^2`` on the expected ratio."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if sigma_p_sq < 0:
        raise ValueError("sigma_p_sq must be >= 0")
    return 1.0 + (1.0 - 1.0 / N) * sigma_p_sq
