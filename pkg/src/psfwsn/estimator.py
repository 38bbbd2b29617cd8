"""ML estimate of the common parameter, its variance, and the eigenvalue bound."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "UnestimableError",
    "EstimateReport",
    "quadratic_kernel",
    "ml_estimate",
    "estimate_variance",
    "variance_lower_bound",
    "estimate_report",
    "DEGENERACY_TOL",
]

# a^H B a below this fraction of tr(B) counts as "no signal reaches the FC"
DEGENERACY_TOL = 1e-14


class UnestimableError(ValueError):
    """The phase vector leaves (numerically) no signal energy at the FC."""


@dataclass
class EstimateReport:
    estimate: complex
    variance: float
    lower_bound: float

    def to_dict(self):
        return {
            "estimate_re": float(np.real(self.estimate)),
            "estimate_im": float(np.imag(self.estimate)),
            "variance": float(self.variance),
            "lower_bound": float(self.lower_bound),
        }


def hermitian_part(A):
    return 0.5 * (A + A.conj().T)


def quadratic_kernel(H, sensor_noise_vars, fc_noise_var):
    """``B = H^H (H V H^H + sn I)^-1 H`` for diagonal ``V``.

    With ``M <= N`` the ``M x M`` covariance is Cholesky-factored; with
    ``N < M`` the equivalent ``N x N`` push-through form
    ``(H^H H V + sn I)^-1 H^H H`` is solved instead.
    """
    H = np.asarray(H, dtype=np.complex128)
    sv = np.asarray(sensor_noise_vars, dtype=float)
    M, N = H.shape
    if sv.shape != (N,):
        raise ValueError("sensor_noise_vars must have one entry per sensor")
    if not fc_noise_var > 0:
        raise ValueError("fc_noise_var must be strictly positive")
    if np.any(sv < 0):
        raise ValueError("sensor noise variances must be non-negative")
    if N < M:
        G = H.conj().T @ H
        B = np.linalg.solve(G * sv[None, :] + fc_noise_var * np.eye(N), G)
    else:
        C = (H * sv) @ H.conj().T + fc_noise_var * np.eye(M)
        cf = sla.cho_factor(C, lower=True)
        B = H.conj().T @ sla.cho_solve(cf, H)
    return hermitian_part(B)


def _noise_solve(H, sensor_noise_vars, fc_noise_var, rhs):
    M = H.shape[0]
    C = (H * np.asarray(sensor_noise_vars, dtype=float)) @ H.conj().T + fc_noise_var * np.eye(M)
    return sla.cho_solve(sla.cho_factor(C, lower=True), rhs)


def ml_estimate(y, H, sensor_noise_vars, fc_noise_var, a):
    """ML estimate ``a^H H^H W y / a^H H^H W H a`` with ``W = (H V H^H + sn I)^-1``.

    ``y`` may be a :class:`~psfwsn.network.ReceivedSignal` or a raw array; a
    ``draws x M`` batch returns one estimate per row.
    """
    samples = getattr(y, "samples", y)
    samples = np.asarray(samples, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    a = np.asarray(a, dtype=np.complex128)
    Ha = H @ a
    W_Ha = _noise_solve(H, sensor_noise_vars, fc_noise_var, Ha)
    den = float(np.vdot(Ha, W_Ha).real)
    W_H = _noise_solve(H, sensor_noise_vars, fc_noise_var, H)
    trace_B = float(np.sum(H.conj() * W_H).real)
    if den <= DEGENERACY_TOL * trace_B:
        raise UnestimableError(f"a^H B a = {den:.3e} is degenerate")
    # W is Hermitian, so (W Ha)^H y equals a^H H^H W y
    return (samples @ W_Ha.conj()) / den


def _quad(a, B):
    a = np.asarray(a, dtype=np.complex128)
    return float(np.vdot(a, np.asarray(B) @ a).real)


def estimate_variance(a, B):
    """Variance ``1 / (a^H B a)`` of the ML estimate under phase vector ``a``."""
    q = _quad(a, B)
    if q <= DEGENERACY_TOL * float(np.trace(B).real):
        raise UnestimableError(f"a^H B a = {q:.3e} is degenerate")
    return 1.0 / q


def variance_lower_bound(B, N=None):
    """``1 / (N lambda_max(B))``; ``inf`` when ``B`` has no positive eigenvalue.

    Holds for every unit-modulus ``a`` but is generally not attainable, since
    the top eigenvector almost never has constant-modulus entries.
    """
    B = np.asarray(B)
    if N is None:
        N = B.shape[0]
    lam = float(np.linalg.eigvalsh(B)[-1])
    if lam <= 0:
        return np.inf
    return 1.0 / (N * lam)


def estimate_report(y, H, sensor_noise_vars, fc_noise_var, a, B=None):
    if B is None:
        B = quadratic_kernel(H, sensor_noise_vars, fc_noise_var)
    est = ml_estimate(y, H, sensor_noise_vars, fc_noise_var, a)
    return EstimateReport(
        estimate=complex(est) if np.ndim(est) == 0 else est,
        variance=estimate_variance(a, B),
        lower_bound=variance_lower_bound(B, len(a)),
    )
