"""Closed-form large-N and large-M variance expressions for the path-loss model.

All functions take a :class:`~psfwsn.network.SensorScenario` and use its
per-sensor draws (sample-average forms). ``uniform_inverse_moments`` gives the
matching population moments when distances are uniform and ``alpha = 1``.
"""

import math

import numpy as np

__all__ = [
    "large_n_lower_bound",
    "single_antenna_upper_bound",
    "bound_ratio",
    "inverse_distance_dispersion",
    "large_m_variance",
    "uniform_inverse_moments",
    "population_bound_ratio",
]


def _terms(scenario):
    g2 = scenario.distances ** (-2.0 * scenario.path_loss_exp)
    g1 = scenario.distances ** (-scenario.path_loss_exp)
    noise = float(np.sum(scenario.sensor_noise_vars * g2) + scenario.fc_noise_var)
    return g1, g2, noise


def large_n_lower_bound(scenario):
    """``(sum sv_i / d_i^2a + sn) / (N sum 1 / d_i^2a)``."""
    _, g2, noise = _terms(scenario)
    return noise / (scenario.n_sensors * float(g2.sum()))


def single_antenna_upper_bound(scenario):
    """``(sum sv_i / d_i^2a + sn) / (sum 1 / d_i^a)^2``: the variance reached with
    one FC antenna and conjugate phases."""
    g1, _, noise = _terms(scenario)
    return noise / float(g1.sum()) ** 2


def bound_ratio(scenario):
    """Lower over upper bound, ``(sum 1/d^a)^2 / (N sum 1/d^2a)``; lies in (0, 1]."""
    g1, g2, _ = _terms(scenario)
    return float(g1.sum()) ** 2 / (scenario.n_sensors * float(g2.sum()))


def inverse_distance_dispersion(scenario):
    """Sample ``Var{1/d^a} / E{1/d^2a}`` (population-style, ``ddof=0``).

    Equals ``1 - bound_ratio(scenario)`` identically.
    """
    g1, g2, _ = _terms(scenario)
    return float(np.var(g1) / np.mean(g2))


def large_m_variance(scenario, M=None):
    """Large-M limit ``1 / (M sum_i 1 / (d_i^2a sn + M sv_i))``, the same for every phase vector."""
    if M is None:
        M = scenario.n_antennas
    d2a = scenario.distances ** (2.0 * scenario.path_loss_exp)
    return 1.0 / (M * float(np.sum(1.0 / (d2a * scenario.fc_noise_var + M * scenario.sensor_noise_vars))))


def uniform_inverse_moments(lo, hi):
    """``(E{1/d}, E{1/d^2})`` for ``d ~ U[lo, hi]``."""
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    if lo == hi:
        return 1.0 / lo, 1.0 / lo ** 2
    return math.log(hi / lo) / (hi - lo), 1.0 / (lo * hi)


def population_bound_ratio(lo, hi):
    """Population value of the bound ratio for ``d ~ U[lo, hi]``, ``alpha = 1``."""
    m1, m2 = uniform_inverse_moments(lo, hi)
    return m1 * m1 / m2
