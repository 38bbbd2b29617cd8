import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psfwsn.network import (
    SensorScenario,
    complex_normal,
    generate_channel,
    generate_received,
    resolve_values,
)
from psfwsn.rng import substream


def make(N=4, M=3, **kw):
    base = dict(n_sensors=N, n_antennas=M, distances=np.linspace(3, 20, N),
                sensor_noise_vars=np.full(N, 0.05), fc_noise_var=0.1, seed=5)
    base.update(kw)
    return SensorScenario(**base)


def test_unit_distance_gives_unit_modulus():
    sc = make(distances=1.0, path_loss_exp=1.7)
    assert np.allclose(np.abs(generate_channel(sc)), 1.0, atol=1e-15)


def test_zero_exponent_gives_unit_modulus():
    sc = make(path_loss_exp=0.0)
    assert np.allclose(np.abs(generate_channel(sc)), 1.0, atol=1e-15)


def test_column_norm_and_phase_uniformity():
    sc = make(N=1, M=2048, distances=[2.0], sensor_noise_vars=[0.1])
    H = generate_channel(sc)
    assert np.vdot(H[:, 0], H[:, 0]).real / 2048 == pytest.approx(0.25, rel=1e-12)
    assert abs(np.mean(H[:, 0] / np.abs(H[:, 0]))) < 0.1


@given(st.integers(1, 6), st.integers(1, 6), st.floats(0.0, 3.0), st.integers(0, 2**32))
def test_column_norm_law(N, M, alpha, seed):
    rng = np.random.default_rng(seed)
    sc = make(N=N, M=M, distances=rng.uniform(1, 20, N), sensor_noise_vars=np.ones(N), path_loss_exp=alpha)
    H = generate_channel(sc, rng)
    np.testing.assert_allclose(np.sum(np.abs(H) ** 2, axis=0), M * sc.distances ** (-2 * alpha), rtol=1e-12)


def test_same_seed_same_draws():
    sc = make()
    H1, H2 = generate_channel(sc), generate_channel(sc)
    assert np.array_equal(H1, H2)
    a = np.exp(1j * np.arange(4))
    y1 = generate_received(0.3 + 0.1j, H1, a, sc).samples
    y2 = generate_received(0.3 + 0.1j, H2, a, sc).samples
    assert np.array_equal(y1, y2)


def test_noise_free_received():
    sc = make()
    H = generate_channel(sc)
    a = np.exp(1j * np.arange(4))
    y = generate_received(1.5 - 2j, H, a, sc, noise_free=True).samples
    np.testing.assert_allclose(y, H @ a * (1.5 - 2j), rtol=0, atol=1e-14)


def test_single_link_passthrough():
    sc = make(N=1, M=1, distances=[1.0], sensor_noise_vars=[1.0], path_loss_exp=0.0)
    rng = substream(0, "t")
    H = generate_channel(sc, rng)
    y = generate_received(1 + 0j, H, np.ones(1), sc, noise_free=True).samples
    assert abs(abs(y[0]) - 1) < 1e-15 and y[0] == H[0, 0]


def test_zero_theta_is_zero_mean():
    sc = make(N=3, M=2)
    H = generate_channel(sc)
    a = np.ones(3, dtype=complex)
    y = generate_received(0.0, H, a, sc, rng=substream(1, "zm"), size=10_000).samples
    V = np.diag(sc.sensor_noise_vars)
    # standard error of the mean vector's norm
    se = np.sqrt((np.trace(H @ V @ H.conj().T).real + 2 * sc.fc_noise_var) / 10_000)
    assert np.linalg.norm(y.mean(axis=0)) < 4 * se


def test_noise_covariance():
    sc = make(N=3, M=2)
    H = generate_channel(sc)
    a = np.exp(1j * np.array([0.3, 1.0, -2.0]))
    y = generate_received(0.0, H, a, sc, rng=substream(2, "cov"), size=10_000).samples
    C = y.T @ y.conj() / y.shape[0]
    D = np.diag(a)
    target = H @ D @ np.diag(sc.sensor_noise_vars) @ D.conj().T @ H.conj().T + sc.fc_noise_var * np.eye(2)
    assert np.linalg.norm(C - target) / np.linalg.norm(target) < 0.05


def test_complex_normal_split():
    z = complex_normal(np.random.default_rng(0), 2.0, 200_000)
    assert np.var(z.real) == pytest.approx(1.0, rel=0.02)
    assert np.var(z.imag) == pytest.approx(1.0, rel=0.02)


@pytest.mark.parametrize("bad", [
    dict(distances=[1, 2, 0, 4]),
    dict(sensor_noise_vars=[1, -1, 1, 1]),
    dict(fc_noise_var=0.0),
    dict(path_loss_exp=-1.0),
    dict(n_sensors=0, distances=[], sensor_noise_vars=[]),
    dict(distances=[1, 2]),
])
def test_validation(bad):
    with pytest.raises(ValueError):
        make(**bad)


def test_explicit_channel_shape_checked():
    with pytest.raises(ValueError):
        make(channel=np.ones((2, 2)))


def test_resolve_values_forms():
    rng = np.random.default_rng(0)
    assert np.array_equal(resolve_values(2.0, 3, rng), [2.0, 2.0, 2.0])
    v = resolve_values({"dist": "uniform", "lo": 3, "hi": 20}, 100, rng)
    assert v.min() >= 3 and v.max() <= 20
    with pytest.raises(ValueError):
        resolve_values({"dist": "normal", "lo": 0, "hi": 1}, 3, rng)
    with pytest.raises(ValueError):
        resolve_values([1, 2], 3, rng)


def test_dict_round_trip(tmp_path):
    H = np.arange(12).reshape(3, 4) * (1 + 0.5j)
    sc = make(channel=H)
    path = tmp_path / "s.json"
    sc.save(path)
    json.loads(path.read_text())
    back = SensorScenario.load(path)
    assert np.array_equal(back.distances, sc.distances)
    assert np.array_equal(back.channel, H)
    assert back.fc_noise_var == sc.fc_noise_var and back.seed == sc.seed


def test_from_dict_distributions_reproducible():
    cfg = {"n_sensors": 6, "n_antennas": 2, "fc_noise_var": 0.1, "seed": 9,
           "distances": {"dist": "uniform", "lo": 3, "hi": 20},
           "sensor_noise_vars": {"dist": "uniform", "lo": 0.01, "hi": 0.1}}
    a, b = SensorScenario.from_dict(cfg), SensorScenario.from_dict(cfg)
    assert np.array_equal(a.distances, b.distances)
    assert np.array_equal(a.sensor_noise_vars, b.sensor_noise_vars)
