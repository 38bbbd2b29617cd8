import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psfwsn import asymptotics as asy
from psfwsn.estimator import estimate_variance, quadratic_kernel
from psfwsn.network import SensorScenario, generate_channel
from psfwsn.rng import substream


def scen(d, sv=0.05, sn=0.1, alpha=1.0, M=4):
    d = np.atleast_1d(np.asarray(d, dtype=float))
    return SensorScenario(n_sensors=d.size, n_antennas=M, distances=d, sensor_noise_vars=sv,
                          fc_noise_var=sn, path_loss_exp=alpha)


def test_homogeneous_lower_bound():
    sc = scen(np.ones(7), sv=0.2, sn=0.3, alpha=2.3)
    assert asy.large_n_lower_bound(sc) == pytest.approx((7 * 0.2 + 0.3) / 49, rel=1e-14)


def test_noiseless_sensors_limit():
    d = np.array([3.0, 5.0, 9.0])
    # the scenario needs positive variances; a tiny value stands in for zero
    sc = scen(d, sv=1e-300, sn=0.1)
    assert asy.large_n_lower_bound(sc) == pytest.approx(0.1 / (3 * np.sum(d ** -2.0)), rel=1e-12)
    assert asy.large_m_variance(sc, 8) == pytest.approx(0.1 / 8 / np.sum(d ** -2.0), rel=1e-12)


def test_single_sensor_bounds_equal():
    sc = scen([4.0])
    assert asy.single_antenna_upper_bound(sc) == pytest.approx(asy.large_n_lower_bound(sc), rel=1e-14)


def test_equal_distances_ratio_one():
    sc = scen(np.full(9, 11.5))
    assert asy.bound_ratio(sc) == pytest.approx(1.0, rel=1e-14)
    assert asy.single_antenna_upper_bound(sc) == pytest.approx(asy.large_n_lower_bound(sc), rel=1e-14)


def test_two_sensor_ratio_hand_value():
    sc = scen([1.0, 10.0])
    assert asy.bound_ratio(sc) == pytest.approx(1.1 ** 2 / (2 * 1.01), rel=1e-14)


@given(st.lists(st.floats(0.5, 50), min_size=1, max_size=30), st.floats(0, 3))
def test_ratio_properties(d, alpha):
    sc = scen(d, alpha=alpha)
    r = asy.bound_ratio(sc)
    assert 0 < r <= 1 + 1e-12
    assert asy.large_n_lower_bound(sc) <= asy.single_antenna_upper_bound(sc) * (1 + 1e-12)
    assert asy.inverse_distance_dispersion(sc) == pytest.approx(1 - r, abs=1e-12)


def test_ratio_one_only_for_equal_distances():
    assert asy.bound_ratio(scen([3.0, 3.0 + 1e-3])) < 1


def test_saturation_regime():
    sv = np.array([0.01, 0.02, 0.05])
    sc = scen([1.0, 2.0, 3.0], sv=sv, sn=1e-9)
    assert asy.large_m_variance(sc, 10_000) == pytest.approx(1 / np.sum(1 / sv), rel=1e-3)


@pytest.mark.parametrize("seed", range(3))
def test_single_antenna_simulation_matches_formula(seed):
    rng = substream(seed, "asy")
    sc = SensorScenario.from_dict({"n_sensors": 12, "n_antennas": 1, "fc_noise_var": 0.1,
                                   "distances": {"dist": "uniform", "lo": 3, "hi": 20},
                                   "sensor_noise_vars": {"dist": "uniform", "lo": 0.01, "hi": 0.1}}, rng=rng)
    H = generate_channel(sc, rng)
    B = quadratic_kernel(H, sc.sensor_noise_vars, sc.fc_noise_var)
    a = np.exp(-1j * np.angle(H[0]))
    assert estimate_variance(a, B) == pytest.approx(asy.single_antenna_upper_bound(sc), rel=1e-10)


def test_uniform_moments_against_quadrature():
    from scipy.integrate import quad
    m1 = quad(lambda x: 1 / x, 3, 20)[0] / 17
    m2 = quad(lambda x: 1 / x ** 2, 3, 20)[0] / 17
    got = asy.uniform_inverse_moments(3, 20)
    assert got[0] == pytest.approx(m1, rel=1e-12) and got[1] == pytest.approx(m2, rel=1e-12)
    assert asy.population_bound_ratio(3, 20) == pytest.approx(m1 * m1 / m2, rel=1e-12)
    assert asy.uniform_inverse_moments(2, 2) == (0.5, 0.25)
    with pytest.raises(ValueError):
        asy.uniform_inverse_moments(0, 1)
