"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public functions dispatch on :func:`psfwsn._accel.backend`. Both paths
run the same algorithm, so results agree to rounding (the equivalence tests
pin this); the numba path exists only because these loops are called
millions of times inside Monte Carlo sweeps.
"""

import numpy as np

from psfwsn import _accel
from psfwsn._accel import njit

# ---------------------------------------------------------------------------
# batched quadratic forms  Re(a_k^H B a_k)
# ---------------------------------------------------------------------------


@njit
def _quad_forms_nb(A, B):
    K, N = A.shape
    out = np.empty(K)
    for k in range(K):
        acc = 0.0
        for i in range(N):
            s = 0j
            for j in range(N):
                s += B[i, j] * A[k, j]
            acc += (np.conj(A[k, i]) * s).real
        out[k] = acc
    return out


def _quad_forms_np(A, B):
    return np.einsum("ki,ki->k", A.conj(), A @ B.T).real


# above this many multiply-adds the BLAS product beats the scalar loop
_QUAD_BLAS_WORK = 1 << 16


def quad_forms(A, B):
    """Row-wise ``Re(a^H B a)`` for every row ``a`` of the 2-D array ``A``."""
    A = np.ascontiguousarray(A, dtype=np.complex128)
    B = np.ascontiguousarray(B, dtype=np.complex128)
    if _accel.backend() == "numba" and A.shape[0] * B.shape[0] * B.shape[0] < _QUAD_BLAS_WORK:
        return _quad_forms_nb(A, B)
    return _quad_forms_np(A, B)


# ---------------------------------------------------------------------------
# exhaustive phase grid (first entry pinned to 1)
# ---------------------------------------------------------------------------


@njit
def _grid_search_nb(B, levels):
    N = B.shape[0]
    roots = np.exp(2j * np.pi * np.arange(levels) / levels)
    a = np.ones(N, dtype=np.complex128)
    idx = np.zeros(N, dtype=np.int64)
    best_idx = np.zeros(N, dtype=np.int64)
    best = -np.inf
    total = levels ** (N - 1)
    for t in range(total):
        r = t
        for i in range(N - 1, 0, -1):
            idx[i] = r % levels
            r //= levels
            a[i] = roots[idx[i]]
        val = 0.0
        for i in range(N):
            s = 0j
            for j in range(N):
                s += B[i, j] * a[j]
            val += (np.conj(a[i]) * s).real
        if val > best:
            best = val
            best_idx[:] = idx
    return best, best_idx


def _grid_search_np(B, levels, chunk=1 << 16):
    N = B.shape[0]
    roots = np.exp(2j * np.pi * np.arange(levels) / levels)
    powers = levels ** np.arange(N - 2, -1, -1, dtype=np.int64)
    total = levels ** (N - 1)
    best, best_idx = -np.inf, np.zeros(N, dtype=np.int64)
    for start in range(0, total, chunk):
        t = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = np.zeros((t.size, N), dtype=np.int64)
        digits[:, 1:] = (t[:, None] // powers) % levels
        vals = _quad_forms_np(roots[digits], B)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_idx = float(vals[k]), digits[k].copy()
    return best, best_idx


def grid_search(B, levels):
    """Maximise ``a^H B a`` over the ``levels``-point phase grid, ``a[0] = 1``.

    Returns ``(best_value, phase_indices)``; ties resolve to the first grid
    point in lexicographic order.
    """
    B = np.ascontiguousarray(B, dtype=np.complex128)
    if _accel.backend() == "numba":
        best, idx = _grid_search_nb(B, int(levels))
        return float(best), idx
    return _grid_search_np(B, int(levels))


# ---------------------------------------------------------------------------
# projected gradient ascent for the gain-and-phase objective
# ---------------------------------------------------------------------------
#
#   f(a) = a^H H^H C(a)^{-1} H a,   C(a) = H diag(|a|^2 sv) H^H + sn I
#   real gradient (as a complex vector): 2u - 2 sv |u|^2 a,  u = H^H C^{-1} H a


@njit
def _gp_eval_nb(H, sv, sn, a):
    M, N = H.shape
    C = np.zeros((M, M), dtype=np.complex128)
    for i in range(N):
        w = (a[i].real ** 2 + a[i].imag ** 2) * sv[i]
        for p in range(M):
            hp = H[p, i] * w
            for q in range(M):
                C[p, q] += hp * np.conj(H[q, i])
    for p in range(M):
        C[p, p] += sn
    Ha = H @ a
    g = np.linalg.solve(C, Ha)
    f = 0.0
    for p in range(M):
        f += (np.conj(Ha[p]) * g[p]).real
    u = np.conj(H.T) @ g
    grad = np.empty(N, dtype=np.complex128)
    for i in range(N):
        grad[i] = 2.0 * u[i] - 2.0 * sv[i] * (u[i].real ** 2 + u[i].imag ** 2) * a[i]
    return f, grad


@njit
def _project_ball_nb(x, radius):
    nrm = np.sqrt(np.sum(x.real ** 2 + x.imag ** 2))
    if nrm > radius:
        return x * (radius / nrm)
    return x.copy()


@njit
def _gain_phase_ascent_nb(H, sv, sn, a0, radius, max_iter, tol):
    a = _project_ball_nb(a0, radius)
    f, g = _gp_eval_nb(H, sv, sn, a)
    gn = np.sqrt(np.sum(g.real ** 2 + g.imag ** 2))
    step = radius / gn if gn > 0 else 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        accepted = False
        while step > 1e-16 * radius:
            trial = _project_ball_nb(a + step * g, radius)
            d = trial - a
            pred = np.sum(g.real * d.real + g.imag * d.imag)
            f_new, g_new = _gp_eval_nb(H, sv, sn, trial)
            if f_new >= f + 1e-4 * pred:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        gain = f_new - f
        a, f, g = trial, f_new, g_new
        step *= 2.0
        if gain <= tol * abs(f):
            converged = True
            break
    return a, f, it, converged


def _gp_eval_np(H, sv, sn, a):
    C = (H * (np.abs(a) ** 2 * sv)) @ H.conj().T
    C[np.diag_indices_from(C)] += sn
    Ha = H @ a
    g = np.linalg.solve(C, Ha)
    f = float(np.vdot(Ha, g).real)
    u = H.conj().T @ g
    return f, 2.0 * u - 2.0 * sv * np.abs(u) ** 2 * a


def _project_ball_np(x, radius):
    nrm = np.linalg.norm(x)
    return x * (radius / nrm) if nrm > radius else x.copy()


def _gain_phase_ascent_np(H, sv, sn, a0, radius, max_iter, tol):
    a = _project_ball_np(a0, radius)
    f, g = _gp_eval_np(H, sv, sn, a)
    gn = np.linalg.norm(g)
    step = radius / gn if gn > 0 else 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        accepted = False
        while step > 1e-16 * radius:
            trial = _project_ball_np(a + step * g, radius)
            d = trial - a
            pred = float(np.sum(g.real * d.real + g.imag * d.imag))
            f_new, g_new = _gp_eval_np(H, sv, sn, trial)
            if f_new >= f + 1e-4 * pred:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        gain = f_new - f
        a, f, g = trial, f_new, g_new
        step *= 2.0
        if gain <= tol * abs(f):
            converged = True
            break
    return a, f, it, converged


def gain_phase_objective(H, sensor_noise_vars, fc_noise_var, a):
    """Return ``(f(a), gradient)`` of the gain-and-phase objective."""
    H = np.ascontiguousarray(H, dtype=np.complex128)
    sv = np.ascontiguousarray(sensor_noise_vars, dtype=np.float64)
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if _accel.backend() == "numba":
        return _gp_eval_nb(H, sv, float(fc_noise_var), a)
    return _gp_eval_np(H, sv, float(fc_noise_var), a)


def gain_phase_ascent(H, sensor_noise_vars, fc_noise_var, a0, radius, max_iter=2000, tol=1e-12):
    """Projected (onto ``||a|| <= radius``) gradient ascent with Armijo backtracking.

    Returns ``(a, f, iterations, converged)``.
    """
    args = (
        np.ascontiguousarray(H, dtype=np.complex128),
        np.ascontiguousarray(sensor_noise_vars, dtype=np.float64),
        float(fc_noise_var),
        np.ascontiguousarray(a0, dtype=np.complex128),
        float(radius),
        int(max_iter),
        float(tol),
    )
    if _accel.backend() == "numba":
        a, f, it, conv = _gain_phase_ascent_nb(*args)
    else:
        a, f, it, conv = _gain_phase_ascent_np(*args)
    return a, float(f), int(it), bool(conv)


# ---------------------------------------------------------------------------
# greedy sensor accumulation
# ---------------------------------------------------------------------------


@njit
def _greedy_nb(G, a, K):
    N = G.shape[0]
    chosen = np.zeros(N, dtype=np.bool_)
    order = np.empty(K, dtype=np.int64)
    acc = np.zeros(N, dtype=np.complex128)
    for step in range(K):
        best, best_k = -np.inf, -1
        for k in range(N):
            if chosen[k]:
                continue
            score = G[k, k].real + 2.0 * (np.conj(a[k]) * acc[k]).real
            if score > best:
                best, best_k = score, k
        chosen[best_k] = True
        order[step] = best_k
        for k in range(N):
            acc[k] += a[best_k] * G[k, best_k]
    return order


def _greedy_np(G, a, K):
    N = G.shape[0]
    chosen = np.zeros(N, dtype=bool)
    order = np.empty(K, dtype=np.int64)
    acc = np.zeros(N, dtype=np.complex128)
    diag = G.diagonal().real
    for step in range(K):
        score = diag + 2.0 * (a.conj() * acc).real
        score[chosen] = -np.inf
        k = int(np.argmax(score))
        chosen[k] = True
        order[step] = k
        acc += a[k] * G[:, k]
    return order


def greedy_order(G, a, K):
    """Greedy pick order over the Gram matrix ``G = H^H H`` and phases ``a``.

    Each step adds the sensor maximising ``G_kk + 2 Re(conj(a_k) sum_j a_j G_kj)``
    over the already chosen ``j``; the first step therefore picks the largest
    ``G_kk``. Ties go to the lowest index.
    """
    G = np.ascontiguousarray(G, dtype=np.complex128)
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if _accel.backend() == "numba":
        return _greedy_nb(G, a, int(K))
    return _greedy_np(G, a, int(K))


# ---------------------------------------------------------------------------
# tableau simplex core
# ---------------------------------------------------------------------------
#
# T has m constraint rows followed by one objective row of reduced costs
# (negative entry => improving column); the last column is the rhs.
# `allowed` masks columns that may enter. Pivot rule is Bland's: lowest
# eligible entering index, ratio-test ties to the lowest basic index.

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITERLIMIT = 2


@njit
def _pivot_nb(T, r, c):
    m1, n1 = T.shape
    piv = T[r, c]
    for j in range(n1):
        T[r, j] /= piv
    cols = np.empty(n1, dtype=np.int64)
    nc = 0
    for j in range(n1):
        if T[r, j] != 0.0:
            cols[nc] = j
            nc += 1
    for i in range(m1):
        if i == r:
            continue
        f = T[i, c]
        if f == 0.0:
            continue
        for jj in range(nc):
            j = cols[jj]
            T[i, j] -= f * T[r, j]
        T[i, c] = 0.0


@njit
def _simplex_nb(T, basis, allowed, max_iter, eps):
    m = T.shape[0] - 1
    n = T.shape[1] - 1
    it = 0
    while it < max_iter:
        c = -1
        for j in range(n):
            if allowed[j] and T[m, j] < -eps:
                c = j
                break
        if c < 0:
            return STATUS_OPTIMAL, it
        best = np.inf
        for i in range(m):
            if T[i, c] > eps:
                ratio = T[i, n] / T[i, c]
                if ratio < best:
                    best = ratio
        if best == np.inf:
            return STATUS_UNBOUNDED, it
        r = -1
        for i in range(m):
            if T[i, c] > eps and T[i, n] / T[i, c] <= best + 1e-12:
                if r < 0 or basis[i] < basis[r]:
                    r = i
        _pivot_nb(T, r, c)
        basis[r] = c
        it += 1
    return STATUS_ITERLIMIT, it


def _pivot_np(T, r, c):
    T[r] /= T[r, c]
    rows = np.flatnonzero(T[:, c])
    rows = rows[rows != r]
    if rows.size == 0:
        return
    cols = np.flatnonzero(T[r])
    T[np.ix_(rows, cols)] -= np.outer(T[rows, c], T[r, cols])
    T[rows, c] = 0.0


def _simplex_np(T, basis, allowed, max_iter, eps):
    m = T.shape[0] - 1
    n = T.shape[1] - 1
    it = 0
    while it < max_iter:
        cand = np.flatnonzero(allowed & (T[m, :n] < -eps))
        if cand.size == 0:
            return STATUS_OPTIMAL, it
        c = int(cand[0])
        col = T[:m, c]
        pos = np.flatnonzero(col > eps)
        if pos.size == 0:
            return STATUS_UNBOUNDED, it
        ratios = T[pos, n] / col[pos]
        best = ratios.min()
        tied = pos[ratios <= best + 1e-12]
        r = int(tied[np.argmin(basis[tied])])
        _pivot_np(T, r, c)
        basis[r] = c
        it += 1
    return STATUS_ITERLIMIT, it


def pivot(T, r, c):
    """In-place Gauss-Jordan pivot of tableau ``T`` on entry ``(r, c)``."""
    if _accel.backend() == "numba":
        _pivot_nb(T, int(r), int(c))
    else:
        _pivot_np(T, int(r), int(c))


def simplex_iterate(T, basis, allowed, max_iter=100_000, eps=1e-9):
    """Run Bland-rule simplex pivots on ``T`` in place; returns ``(status, pivots)``."""
    allowed = np.ascontiguousarray(allowed, dtype=np.bool_)
    if _accel.backend() == "numba":
        status, it = _simplex_nb(T, basis, allowed, int(max_iter), float(eps))
    else:
        status, it = _simplex_np(T, basis, allowed, int(max_iter), float(eps))
    return int(status), int(it)
