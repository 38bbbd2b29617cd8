"""Dense two-phase tableau simplex (Bland's rule) for small dense LPs.

Solves ``max c^T x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0`` and
returns primal values together with the dual multipliers read off the final
reduced costs, so callers can check strong duality directly.
"""

from dataclasses import dataclass

import numpy as np

from psfwsn import kernels

__all__ = ["LpResult", "LpError", "InfeasibleLP", "UnboundedLP", "solve_lp"]


class LpError(RuntimeError):
    pass


class InfeasibleLP(LpError):
    pass


class UnboundedLP(LpError):
    pass


@dataclass
class LpResult:
    x: np.ndarray
    objective: float
    dual_ub: np.ndarray
    dual_eq: np.ndarray
    pivots: int

    def dual_objective(self, b_ub=None, b_eq=None):
        val = 0.0
        if b_ub is not None and len(b_ub):
            val += float(np.dot(self.dual_ub, b_ub))
        if b_eq is not None and len(b_eq):
            val += float(np.dot(self.dual_eq, b_eq))
        return val


def _as2d(A, n):
    if A is None:
        return np.zeros((0, n))
    A = np.asarray(A, dtype=float)
    return A.reshape(-1, n)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_pivots=200_000, eps=1e-9, feas_tol=1e-8):
    """Maximise ``c^T x`` over ``{A_ub x <= b_ub, A_eq x = b_eq, x >= 0}``.

    Raises
    ------
    InfeasibleLP
        Phase one cannot drive the artificial variables to zero.
    UnboundedLP
        An improving column has no positive entry.
    LpError
        The pivot limit was reached.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub, A_eq = _as2d(A_ub, n), _as2d(A_eq, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m1, m2 = A_ub.shape[0], A_eq.shape[0]
    if b_ub.size != m1 or b_eq.size != m2:
        raise ValueError("constraint matrix and rhs sizes disagree")
    m = m1 + m2

    c_scale = max(1.0, float(np.abs(c).max())) if n else 1.0
    cs = c / c_scale

    flip_ub = b_ub < 0
    flip_eq = b_eq < 0
    sign = np.concatenate([np.where(flip_ub, -1.0, 1.0), np.where(flip_eq, -1.0, 1.0)])
    needs_art = np.concatenate([flip_ub, np.ones(m2, dtype=bool)])
    n_art = int(needs_art.sum())

    # columns: originals | slack or surplus per ub row | artificials | rhs
    ncol = n + m1 + n_art
    T = np.zeros((m + 1, ncol + 1))
    T[:m1, :n] = A_ub
    T[m1:m, :n] = A_eq
    T[:m1, n:n + m1] = np.eye(m1)
    T[:m, ncol] = np.concatenate([b_ub, b_eq])
    T[:m] *= sign[:, None]
    art_rows = np.flatnonzero(needs_art)
    art_cols = n + m1 + np.arange(n_art)
    T[art_rows, art_cols] = 1.0
    basis = np.empty(m, dtype=np.int64)
    basis[:m1] = n + np.arange(m1)
    basis[art_rows] = art_cols
    # the column holding B^-1 e_i for each row, for reading duals at the end
    ident_col = basis.copy()

    pivots = 0
    is_art = np.zeros(ncol, dtype=bool)
    is_art[art_cols] = True
    if n_art:
        T[m, :] = 0.0
        T[m, :] -= T[art_rows].sum(axis=0)
        T[m, art_cols] = 0.0
        status, it = kernels.simplex_iterate(T, basis, np.ones(ncol, dtype=bool), max_pivots, eps)
        pivots += it
        if status == kernels.STATUS_ITERLIMIT:
            raise LpError("pivot limit reached in phase one")
        if T[m, ncol] < -feas_tol * max(1.0, np.abs(T[:m, ncol]).max()):
            raise InfeasibleLP(f"phase one residual {-T[m, ncol]:.3e}")
        keep = np.ones(m, dtype=bool)
        for r in np.flatnonzero(is_art[basis]):
            row = np.abs(T[r, :ncol])
            row[is_art] = 0.0
            j = int(np.argmax(row))
            if row[j] > eps:
                kernels.pivot(T, r, j)
                basis[r] = j
                pivots += 1
            else:
                keep[r] = False  # redundant equality
        if not keep.all():
            T = np.vstack([T[:m][keep], T[m:]])
            basis = basis[keep]
            dropped = np.flatnonzero(~keep)
        else:
            dropped = np.zeros(0, dtype=np.int64)
    else:
        dropped = np.zeros(0, dtype=np.int64)

    mk = T.shape[0] - 1
    c_ext = np.zeros(ncol)
    c_ext[:n] = cs
    T[mk, :] = 0.0
    T[mk, :ncol] = -c_ext
    cb = c_ext[basis]
    T[mk, :] += cb @ T[:mk, :]
    status, it = kernels.simplex_iterate(T, basis, ~is_art, max_pivots, eps)
    pivots += it
    if status == kernels.STATUS_UNBOUNDED:
        raise UnboundedLP("objective is unbounded above")
    if status == kernels.STATUS_ITERLIMIT:
        raise LpError("pivot limit reached in phase two")

    x_ext = np.zeros(ncol)
    x_ext[basis] = T[:mk, ncol]
    x = x_ext[:n]
    y = T[mk, ident_col] * sign * c_scale
    if dropped.size:
        y[dropped] = 0.0
    return LpResult(
        x=x.copy(),
        objective=float(c @ x),
        dual_ub=y[:m1].copy(),
        dual_eq=y[m1:].copy(),
        pivots=pivots,
    )
