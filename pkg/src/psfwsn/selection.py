"""Choosing ``K`` of ``N`` sensors.

Selectors return boolean masks with exactly ``K`` entries set. The LP and
greedy selectors target the regime where FC noise dominates sensor noise;
the min-noise rule targets the opposite regime.
"""

import itertools
import math

import numpy as np

from psfwsn import kernels
from psfwsn.estimator import quadratic_kernel
from psfwsn.lp import solve_lp

__all__ = [
    "selection_kernel",
    "selection_objective",
    "build_selection_lp",
    "select_lp",
    "select_greedy",
    "select_min_noise",
    "select_exhaustive",
    "mask_from_indices",
    "subset_kernel",
    "reoptimize_phases",
    "EXHAUSTIVE_BUDGET",
]

EXHAUSTIVE_BUDGET = 100_000


def mask_from_indices(idx, N):
    mask = np.zeros(N, dtype=bool)
    mask[np.asarray(idx, dtype=np.int64)] = True
    return mask


def _check_k(K, N):
    if not 1 <= K <= N:
        raise ValueError(f"need 1 <= K <= N, got K={K}, N={N}")


def selection_kernel(H, a):
    """``F = D^H H^H H D`` with ``D = diag(a)``."""
    H = np.asarray(H, dtype=np.complex128)
    a = np.asarray(a, dtype=np.complex128)
    HD = H * a[None, :]
    F = HD.conj().T @ HD
    return 0.5 * (F + F.conj().T)


def subset_kernel(H, sensor_noise_vars, fc_noise_var, mask):
    """Kernel ``B`` of the network reduced to the selected sensors."""
    mask = np.asarray(mask, dtype=bool)
    H = np.asarray(H, dtype=np.complex128)
    return quadratic_kernel(H[:, mask], np.asarray(sensor_noise_vars, dtype=float)[mask], fc_noise_var)


def selection_objective(x, a, H, sensor_noise_vars, fc_noise_var):
    """``x^T D^H H^H (H V X H^H + sn I)^-1 H D x`` for a 0/1 selection ``x``."""
    x = np.asarray(x)
    mask = x.astype(bool)
    if mask.sum() < 1:
        raise ValueError("empty selection")
    a = np.asarray(a, dtype=np.complex128)
    B = subset_kernel(H, sensor_noise_vars, fc_noise_var, mask)
    aS = a[mask]
    return float(np.vdot(aS, B @ aS).real)


def reoptimize_phases(H, sensor_noise_vars, fc_noise_var, mask, a, optimizer):
    """Phases for the selected sub-network.

    Runs ``optimizer`` on the reduced kernel and keeps its answer only if it
    beats ``a`` restricted to the selection, so the variance never gets
    worse than without re-optimisation. Returns ``(phases, a^H B_S a)``.
    """
    mask = np.asarray(mask, dtype=bool)
    B = subset_kernel(H, sensor_noise_vars, fc_noise_var, mask)
    keep = np.asarray(a, dtype=np.complex128)[mask]
    best = float(np.vdot(keep, B @ keep).real)
    new = np.asarray(optimizer(B), dtype=np.complex128)
    val = float(np.vdot(new, B @ new).real)
    return (new, val) if val > best else (keep, best)


def build_selection_lp(F, K):
    """Linearised relaxation data for ``max x^T Re(F) x`` with ``sum x = K``.

    Variables are ``x_1..x_N`` followed by ``y_ij`` for ``i < j`` in
    lexicographic order. Besides the three linearisation inequalities per pair
    (``y <= x_i``, ``y <= x_j``, ``y >= x_i + x_j - 1``) the explicit bounds
    ``x_i <= 1`` are added.

    Returns ``(c, A_ub, b_ub, A_eq, b_eq, pairs)``.
    """
    F = np.asarray(F)
    N = F.shape[0]
    pairs = np.array(list(itertools.combinations(range(N), 2)), dtype=np.int64).reshape(-1, 2)
    P = len(pairs)
    nv = N + P
    c = np.empty(nv)
    c[:N] = F.diagonal().real
    c[N:] = 2.0 * F[pairs[:, 0], pairs[:, 1]].real
    A = np.zeros((3 * P + N, nv))
    rows = np.arange(P)
    ycol = N + rows
    # 1 - x_i - x_j + y_ij >= 0
    A[rows, pairs[:, 0]] = 1.0
    A[rows, pairs[:, 1]] = 1.0
    A[rows, ycol] = -1.0
    # x_i - y_ij >= 0
    A[P + rows, ycol] = 1.0
    A[P + rows, pairs[:, 0]] = -1.0
    # x_j - y_ij >= 0
    A[2 * P + rows, ycol] = 1.0
    A[2 * P + rows, pairs[:, 1]] = -1.0
    A[3 * P + np.arange(N), np.arange(N)] = 1.0
    b = np.concatenate([np.ones(P), np.zeros(2 * P), np.ones(N)])
    A_eq = np.zeros((1, nv))
    A_eq[0, :N] = 1.0
    return c, A, b, A_eq, np.array([float(K)]), pairs


def _round_top_k(values, priority, K):
    """Indices of the ``K`` largest ``values``; ties by larger ``priority``, then lower index."""
    v = np.round(np.asarray(values, dtype=float), 9)
    order = np.lexsort((np.arange(v.size), -np.asarray(priority, dtype=float), -v))
    return np.sort(order[:K])


def select_lp(F, K, full=False):
    """LP relaxation of the selection problem, rounded to the ``K`` largest ``x_i``."""
    F = np.asarray(F, dtype=np.complex128)
    N = F.shape[0]
    _check_k(K, N)
    if K == N:
        mask = np.ones(N, dtype=bool)
        return (mask, None) if full else mask
    c, A, b, A_eq, b_eq, _ = build_selection_lp(F, K)
    res = solve_lp(c, A, b, A_eq, b_eq)
    idx = _round_top_k(res.x[:N], F.diagonal().real, K)
    mask = mask_from_indices(idx, N)
    return (mask, res) if full else mask


def select_greedy(H, a, K):
    """Grow the set one sensor at a time, starting from the strongest channel."""
    H = np.asarray(H, dtype=np.complex128)
    N = H.shape[1]
    _check_k(K, N)
    G = H.conj().T @ H
    return mask_from_indices(kernels.greedy_order(G, a, K), N)


def select_min_noise(sensor_noise_vars, K):
    """The ``K`` sensors with the smallest noise variance (ties: lower index)."""
    sv = np.asarray(sensor_noise_vars, dtype=float)
    _check_k(K, sv.size)
    return mask_from_indices(np.argsort(sv, kind="stable")[:K], sv.size)


def select_exhaustive(H, sensor_noise_vars, fc_noise_var, K, phase_optimizer=None, a=None, full=False):
    """Best subset by full enumeration of the exact selection objective.

    For each subset the phases come from ``phase_optimizer(B_subset)`` when
    given, otherwise from ``a`` restricted to the subset. Ties keep the
    lexicographically first subset.
    """
    H = np.asarray(H, dtype=np.complex128)
    N = H.shape[1]
    _check_k(K, N)
    if math.comb(N, K) > EXHAUSTIVE_BUDGET:
        raise ValueError(f"C({N},{K}) = {math.comb(N, K)} exceeds the enumeration budget")
    if phase_optimizer is None and a is None:
        raise ValueError("need either a phase optimizer or a fixed phase vector")
    sv = np.asarray(sensor_noise_vars, dtype=float)
    best_val, best_mask, best_a = -np.inf, None, None
    for subset in itertools.combinations(range(N), K):
        mask = mask_from_indices(subset, N)
        B = subset_kernel(H, sv, fc_noise_var, mask)
        aS = phase_optimizer(B) if phase_optimizer is not None else np.asarray(a)[mask]
        val = float(np.vdot(aS, B @ aS).real)
        if val > best_val:
            best_val, best_mask, best_a = val, mask, aS
    return (best_mask, best_val, best_a) if full else best_mask
