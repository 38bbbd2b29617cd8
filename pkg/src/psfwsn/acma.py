"""Closed-form phase vectors from the analytic constant modulus construction.

Given the top-``m`` eigenvectors ``U_m`` of the kernel ``B``, look for
``w`` such that every entry of ``U_m w`` has unit modulus. Writing
``|(U_m w)_i|^2 = (conj(u_i) kron u_i) . (conj(w) kron w)`` with ``u_i`` the
``i``-th row of ``U_m`` turns this into a null-space problem for

    P = [ conj(u_i) kron u_i , -1 ]_{i=1..N}          (N x (m^2 + 1))

whose approximate null vector is unstacked into an ``m x m`` matrix; the
dominant eigenvector of its Hermitian part gives ``w``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from psfwsn import kernels
from psfwsn.estimator import estimate_variance

__all__ = ["AcmaConfig", "AcmaResult", "acma_phases", "acma_best_m", "top_eigvecs", "admissible_m"]

log = logging.getLogger(__name__)

DEFAULT_M = 2
# below this size a dense eigendecomposition is cheaper than iterating
_DENSE_EIG_MAX = 48


@dataclass(frozen=True)
class AcmaConfig:
    m: int = DEFAULT_M

    def __post_init__(self):
        if int(self.m) < 1:
            raise ValueError("subspace dimension m must be >= 1")

    def check(self, n_sensors, rank=None):
        if not n_sensors > self.m ** 2:
            raise ValueError(f"ACMA needs N > m^2 (N={n_sensors}, m={self.m})")
        if rank is not None and self.m > rank:
            raise ValueError(f"m={self.m} exceeds rank(B)={rank}")


@dataclass
class AcmaResult:
    a: np.ndarray
    m: int
    objective: float
    zero_entries: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    repeated_dominant: bool = False


def _normalize_columns(V):
    """Make the largest-magnitude entry of each column real positive."""
    idx = np.argmax(np.abs(V), axis=0)
    piv = V[idx, np.arange(V.shape[1])]
    return V * (np.abs(piv) / np.where(piv == 0, 1.0, piv))[None, :]


def top_eigvecs(B, m, tol=1e-12, max_iter=500):
    """Eigenpairs for the ``m`` largest eigenvalues of Hermitian ``B``, descending.

    Small matrices use a dense decomposition; larger ones use block subspace
    iteration with Rayleigh-Ritz, which costs ``O(N^2)`` per sweep and
    converges in one sweep whenever ``rank(B)`` fits in the block.
    """
    B = np.asarray(B, dtype=np.complex128)
    N = B.shape[0]
    if m > N:
        raise ValueError("m exceeds the matrix size")
    if N <= _DENSE_EIG_MAX:
        lam, V = np.linalg.eigh(B)
        return lam[::-1][:m], _normalize_columns(V[:, ::-1][:, :m])
    p = min(N, 2 * m + 8)
    # deterministic start: the p heaviest columns of B
    start = np.sort(np.argsort(-np.linalg.norm(B, axis=0), kind="stable")[:p])
    Q, _ = np.linalg.qr(B[:, start])
    lam_prev = None
    for _ in range(max_iter):
        Y = B @ Q
        T = Q.conj().T @ Y
        lam, S = np.linalg.eigh(0.5 * (T + T.conj().T))
        lam, S = lam[::-1], S[:, ::-1]
        Q = Q @ S
        resid = np.linalg.norm(Y @ S[:, :m] - Q[:, :m] * lam[:m], axis=0)
        scale = max(abs(lam[0]), np.finfo(float).tiny)
        if np.all(resid <= tol * scale * np.sqrt(N)):
            break
        if lam_prev is not None and np.allclose(lam[:m], lam_prev, rtol=0, atol=tol * scale) and np.all(resid <= 1e-8 * scale):
            break
        lam_prev = lam[:m]
        Q, _ = np.linalg.qr(Y @ S)
    return lam[:m], _normalize_columns(Q[:, :m])


def admissible_m(N, M=None, rank=None):
    """Subspace dimensions ``m`` with ``N > m^2`` (and ``m <= M``, ``m <= rank``)."""
    upper = N
    if M is not None:
        upper = min(upper, M)
    if rank is not None:
        upper = min(upper, rank)
    return [m for m in range(1, upper + 1) if N > m * m]


def _kron_rows(U):
    # row i: conj(u_i) kron u_i, with u_i the i-th row of U (length m)
    N, m = U.shape
    return (U.conj()[:, :, None] * U[:, None, :]).reshape(N, m * m)


def acma_phases(B, m=DEFAULT_M, full=False):
    """Unit-modulus phase vector from the ACMA construction in ``span(U_m)``.

    Entries of ``U_m w`` that vanish exactly get phase 1 and are listed in
    ``AcmaResult.zero_entries`` (``full=True``).
    """
    B = np.asarray(B, dtype=np.complex128)
    N = B.shape[0]
    AcmaConfig(m).check(N)
    _, Um = top_eigvecs(B, m)
    P = np.hstack([_kron_rows(Um), -np.ones((N, 1))])
    # smallest right singular vector; P is tall and thin, so this is O(N m^4)
    _, _, Vh = np.linalg.svd(P, full_matrices=False)
    q = Vh[-1].conj()
    if abs(q[-1]) > 0:
        q = q * (abs(q[-1]) / q[-1])
    Qt = q[: m * m].reshape(m, m).T
    Hq = Qt + Qt.conj().T
    lam, W = np.linalg.eigh(Hq)
    order = np.argsort(-np.abs(lam), kind="stable")
    repeated = m > 1 and np.isclose(abs(lam[order[0]]), abs(lam[order[1]]), rtol=1e-10, atol=0)
    w = _normalize_columns(W[:, order[:1]])[:, 0]
    a_hat = Um @ w
    zero = np.flatnonzero(a_hat == 0)
    if zero.size:
        log.warning("ACMA: %d entries of U_m w are exactly zero; set to phase 0", zero.size)
    mag = np.abs(a_hat)
    a = np.where(mag > 0, a_hat / np.where(mag > 0, mag, 1.0), 1.0 + 0j)
    if not full:
        return a
    obj = float(kernels.quad_forms(a[None, :], B)[0])
    return AcmaResult(a=a, m=m, objective=obj, zero_entries=zero, repeated_dominant=bool(repeated))


def acma_best_m(B, M, N=None, full=False):
    """Try every admissible ``m <= M`` and keep the lowest-variance vector.

    Ties resolve to the smaller ``m``.
    """
    B = np.asarray(B, dtype=np.complex128)
    if N is None:
        N = B.shape[0]
    ms = admissible_m(N, M)
    if not ms:
        raise ValueError(f"no admissible subspace dimension for N={N}")
    best = None
    for m in ms:
        res = acma_phases(B, m, full=True)
        var = estimate_variance(res.a, B)
        if best is None or var < best[0]:
            best = (var, res)
    return best[1] if full else best[1].a
