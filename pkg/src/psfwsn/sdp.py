"""Unit-modulus quadratic maximisation through its semidefinite relaxation.

``max a^H B a  s.t. |a_i| = 1`` is relaxed to

    max  Re tr(B A)   s.t.  diag(A) = 1,  A >= 0

with dual ``min 1^T y  s.t.  Z = Diag(y) - B >= 0``. The relaxation is
solved by a feasible primal-dual interior-point method (HKM direction,
Mehrotra predictor-corrector) that works directly on complex Hermitian
data, or on the equivalent real ``2N x 2N`` embedding. A feasible rank-one
point is then recovered by randomised rounding.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from psfwsn import kernels
from psfwsn.rng import substream

__all__ = [
    "RealSdpData",
    "SdpSolution",
    "build_real_sdp",
    "complex_from_real",
    "solve_diag_sdp",
    "extract_rank_one",
    "optimize_phases_sdp",
    "phase_normalize",
    "DEFAULT_TOL",
    "DEFAULT_ROUNDS",
]

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-7
DEFAULT_ROUNDS = 100


@dataclass
class RealSdpData:
    """Real form of the relaxation.

    ``C = [[B_r, -B_i], [B_i, B_r]]`` (symmetric); a complex feasible ``A``
    maps to ``X = [[A_r, -A_i], [A_i, A_r]]`` with ``tr(C X) = 2 Re tr(B A)``.
    """

    C: np.ndarray
    n: int

    def embed(self, A):
        Ar, Ai = A.real, A.imag
        return np.block([[Ar, -Ai], [Ai, Ar]])


@dataclass
class SdpSolution:
    A_opt: np.ndarray
    objective: float
    duality_gap: float
    iterations: int
    converged: bool = True
    dual: np.ndarray = field(default=None, repr=False)

    @property
    def dual_objective(self):
        return float(np.sum(self.dual)) if self.dual is not None else np.nan

    @property
    def relative_gap(self):
        return self.duality_gap / max(1.0, abs(self.objective))


def build_real_sdp(B):
    """Real symmetric ``2N x 2N`` objective data for Hermitian ``B``."""
    B = np.asarray(B, dtype=np.complex128)
    Br, Bi = B.real, B.imag
    return RealSdpData(C=np.block([[Br, -Bi], [Bi, Br]]), n=B.shape[0])


def complex_from_real(X, n=None):
    """Map a real ``2N x 2N`` matrix back to ``A_r + j A_i``.

    The two diagonal blocks and the two off-diagonal blocks are averaged, so
    any unstructured real solution is first projected onto the embedding.
    """
    X = np.asarray(X, dtype=float)
    if n is None:
        n = X.shape[0] // 2
    Ar = 0.5 * (X[:n, :n] + X[n:, n:])
    Ai = 0.5 * (X[n:, :n] - X[:n, n:])
    return Ar + 1j * Ai


def _herm(A):
    return 0.5 * (A + A.conj().T)


def _max_step(X, dX):
    """Largest ``t <= 1`` keeping ``X + t dX`` positive semidefinite (``X`` PD)."""
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        lam = sla.eigh(-dX, X, eigvals_only=True, check_finite=False)
    else:
        Li = sla.solve_triangular(L, np.eye(X.shape[0]), lower=True, check_finite=False)
        lam = np.linalg.eigvalsh(_herm(Li @ (-dX) @ Li.conj().T))
    top = float(lam[-1])
    return 1.0 if top <= 1.0 else 1.0 / top


def _max_step_diag(Z, dy):
    return _max_step(Z, np.diag(dy).astype(Z.dtype))


def _maxcut_ipm(C, tol, max_iter):
    """Feasible primal-dual IPM for ``max <C, X> s.t. diag(X) = 1, X >= 0``.

    ``C`` is real symmetric or complex Hermitian; the iterates share its
    dtype. Returns ``(X, y, gap, iterations, converged)``.
    """
    n = C.shape[0]
    dtype = C.dtype
    scale = max(1.0, float(np.abs(C).max()))
    Cs = C / scale
    X = np.eye(n, dtype=dtype)
    y = 1.1 * np.abs(Cs).sum(axis=1) + 1.0
    Z = np.diag(y).astype(dtype) - Cs
    ones = np.ones(n)
    converged = False
    it = 0
    best = None
    for it in range(1, max_iter + 1):
        primal = float(np.real(np.vdot(Cs, X)))
        dual = float(y.sum())
        gap = dual - primal
        best = (X, y, gap)
        if gap <= tol * max(1.0, abs(primal)):
            converged = True
            it -= 1
            break
        mu = gap / n
        Zi = np.linalg.inv(Z)
        Zi = _herm(Zi)
        Mschur = np.real(Zi * X.conj())
        try:
            cf = sla.cho_factor(Mschur, lower=True, check_finite=False)
            schur_solve = lambda r: sla.cho_solve(cf, r, check_finite=False)  # noqa: E731
        except np.linalg.LinAlgError:
            lu = sla.lu_factor(Mschur, check_finite=False)
            schur_solve = lambda r: sla.lu_solve(lu, r, check_finite=False)  # noqa: E731
        zdiag = np.real(np.diag(Zi))

        # predictor (affine scaling, target mu = 0)
        dy = schur_solve(-ones)
        dX = _herm(-X - (Zi * dy[None, :]) @ X)
        ap = min(1.0, 0.98 * _max_step(X, dX))
        ad = min(1.0, 0.98 * _max_step_diag(Z, dy))
        mu_aff = float(np.real(np.vdot(Z + np.diag(ad * dy), X + ap * dX))) / n
        sigma = min(1.0, (mu_aff / mu) ** 3)

        # corrector with second-order term
        corr = (Zi * dy[None, :]) @ dX
        rhs = sigma * mu * zdiag - ones - np.real(np.diag(corr))
        dy = schur_solve(rhs)
        dX = _herm(sigma * mu * Zi - X - (Zi * dy[None, :]) @ X - corr)
        ap = min(1.0, 0.98 * _max_step(X, dX))
        ad = min(1.0, 0.98 * _max_step_diag(Z, dy))
        X = _herm(X + ap * dX)
        y = y + ad * dy
        Z = np.diag(y).astype(dtype) - Cs
        # keep diag(X) exactly feasible against rounding drift
        d = np.sqrt(np.real(np.diag(X)))
        X = X / np.outer(d, d)
    else:
        primal = float(np.real(np.vdot(Cs, X)))
        gap = float(y.sum()) - primal
        converged = gap <= tol * max(1.0, abs(primal))
        best = (X, y, gap)
    X, y, gap = best
    return X, y * scale, gap * scale, it, converged


def solve_diag_sdp(B, tol=DEFAULT_TOL, max_iter=100, form="complex"):
    """Solve the unit-diagonal relaxation of ``max a^H B a``.

    Parameters
    ----------
    B : (N, N) complex ndarray
        Hermitian PSD kernel.
    tol : float
        Target relative duality gap ``(dual - primal) / max(1, |primal|)``.
    form : {"complex", "real"}
        Iterate on the Hermitian problem, or on its real ``2N x 2N``
        embedding (same optimum; slower, kept as a cross-check).

    Returns
    -------
    SdpSolution
        ``objective = Re tr(B A*)`` is an upper bound on ``max a^H B a``
        over unit-modulus ``a`` (up to the reported gap). If the iteration
        cap is hit, the last feasible iterate is returned with
        ``converged=False``.
    """
    B = np.asarray(B, dtype=np.complex128)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("B must be square")
    if not tol > 0:
        raise ValueError("tol must be positive")
    B = _herm(B)
    n = B.shape[0]
    if form == "complex":
        X, y, gap, it, conv = _maxcut_ipm(B, tol, max_iter)
        A = _herm(X)
        dual = y
    elif form == "real":
        data = build_real_sdp(B)
        # tr(C X) = 2 Re tr(B A), so halve the objective to stay on the complex scale
        X, y, gap, it, conv = _maxcut_ipm(0.5 * data.C, tol, max_iter)
        A = complex_from_real(X, n)
        dual = y[:n] + y[n:]
    else:
        raise ValueError(f"unknown form {form!r}")
    np.fill_diagonal(A, 1.0)
    objective = float(np.real(np.vdot(B, A)))
    if not conv:
        log.warning("SDP stopped after %d iterations, gap %.3e", it, gap)
    return SdpSolution(A_opt=A, objective=objective, duality_gap=max(float(gap), 0.0),
                       iterations=it, converged=conv, dual=dual)


def phase_normalize(a):
    """Rotate ``a`` so its largest-magnitude entry is real positive."""
    a = np.asarray(a, dtype=np.complex128)
    k = int(np.argmax(np.abs(a)))
    if abs(a[k]) == 0:
        return a.copy()
    return a * (abs(a[k]) / a[k])


def _unit(z):
    mag = np.abs(z)
    out = np.ones_like(z, dtype=np.complex128)
    nz = mag > 0
    out[nz] = z[nz] / mag[nz]
    return out


def extract_rank_one(sol, B, rng=None, n_rounds=DEFAULT_ROUNDS):
    """Randomised rounding of a relaxed solution to a unit-modulus vector.

    Factor ``A* = C^H C`` (Hermitian eigendecomposition, spectrum clamped at
    zero), diagonalise ``C B C^H = U diag U^H``, and for each round draw
    ``r_i = exp(j w_i)`` with ``w_i`` uniform on [0, 2pi), form
    ``C^H U r`` and keep its phases. The round with the largest ``a^H B a``
    wins; ties go to the earliest round. Rounds are drawn row by row from a
    single stream, so the first ``k`` rounds are identical for every
    ``n_rounds >= k``.
    """
    A = sol.A_opt if isinstance(sol, SdpSolution) else np.asarray(sol)
    B = np.asarray(B, dtype=np.complex128)
    n = A.shape[0]
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    if rng is None:
        rng = substream(0, "rounding")
    lam, V = np.linalg.eigh(_herm(A))
    lam = np.maximum(lam, 0.0)
    C = np.sqrt(lam)[:, None] * V.conj().T
    Bt = _herm(C @ B @ C.conj().T)
    _, U = np.linalg.eigh(Bt)
    omega = rng.uniform(0.0, 2.0 * np.pi, size=(n_rounds, n))
    R = np.exp(1j * omega)
    cand = _unit((R @ U.T) @ C.conj())
    vals = kernels.quad_forms(cand, B)
    k = int(np.argmax(vals))
    return cand[k]


@dataclass
class PhaseResult:
    """Rounded phase vector plus the relaxation certificate it came from."""

    a: np.ndarray
    objective: float
    relaxation: SdpSolution
    n_rounds: int

    @property
    def bound_gap(self):
        return self.relaxation.objective - self.objective


def optimize_phases_sdp(B, rng=None, n_rounds=DEFAULT_ROUNDS, tol=DEFAULT_TOL, full=False):
    """Solve the relaxation and round it; returns the phase vector
    (or a :class:`PhaseResult` with ``full=True``)."""
    sol = solve_diag_sdp(B, tol=tol)
    a = phase_normalize(extract_rank_one(sol, B, rng=rng, n_rounds=n_rounds))
    if not full:
        return a
    obj = float(kernels.quad_forms(a[None, :], B)[0])
    return PhaseResult(a=a, objective=obj, relaxation=sol, n_rounds=n_rounds)
