"""The numba and numpy kernel paths must agree."""

import numpy as np
import pytest

from psfwsn import _accel, kernels
from psfwsn.baselines import brute_force_phases
from psfwsn.lp import solve_lp

from conftest import random_psd

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def both(fn):
    out = []
    for name in ("numba", "numpy"):
        prev = _accel.set_backend(name)
        try:
            out.append(fn())
        finally:
            _accel.set_backend(prev)
    return out


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _accel.set_backend("cuda")


def test_quad_forms_agree(rng):
    B = random_psd(rng, 7)
    A = np.exp(1j * rng.uniform(0, 6.3, (50, 7)))
    x, y = both(lambda: kernels.quad_forms(A, B))
    np.testing.assert_allclose(x, y, rtol=1e-12)
    np.testing.assert_allclose(x, np.einsum("ki,ij,kj->k", A.conj(), B, A).real, rtol=1e-12)


def test_quad_forms_small_batch_uses_loop(rng):
    B = random_psd(rng, 4)
    A = np.exp(1j * rng.uniform(0, 6.3, (3, 4)))
    x, y = both(lambda: kernels.quad_forms(A, B))
    np.testing.assert_allclose(x, y, rtol=1e-12)
    np.testing.assert_allclose(kernels._quad_forms_nb(A, B), y, rtol=1e-12)


def test_grid_search_agrees(rng):
    B = random_psd(rng, 4)
    (v1, i1), (v2, i2) = both(lambda: kernels.grid_search(B, 16))
    assert v1 == pytest.approx(v2, rel=1e-12)
    assert np.array_equal(i1, i2)


def test_gain_phase_agrees(rng):
    H = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    sv = rng.uniform(0.01, 0.1, 5)
    a0 = np.exp(1j * rng.uniform(0, 6.3, 5))
    (f1, g1), (f2, g2) = both(lambda: kernels.gain_phase_objective(H, sv, 0.1, a0))
    assert f1 == pytest.approx(f2, rel=1e-12)
    np.testing.assert_allclose(g1, g2, rtol=1e-10, atol=1e-12)
    r1, r2 = both(lambda: kernels.gain_phase_ascent(H, sv, 0.1, a0, np.sqrt(5)))
    assert r1[1] == pytest.approx(r2[1], rel=1e-9)


def test_greedy_agrees(rng):
    H = rng.normal(size=(4, 12)) + 1j * rng.normal(size=(4, 12))
    a = np.exp(1j * rng.uniform(0, 6.3, 12))
    G = H.conj().T @ H
    x, y = both(lambda: kernels.greedy_order(G, a, 5))
    assert np.array_equal(np.sort(x), np.sort(y))


def test_simplex_agrees(rng):
    n, m = 8, 6
    A = rng.normal(size=(m, n))
    b = rng.uniform(0.5, 2, m)
    c = rng.normal(size=n)
    A = np.vstack([A, np.eye(n)])
    b = np.r_[b, np.ones(n)]
    r1, r2 = both(lambda: solve_lp(c, A, b, np.ones((1, n)), [3.0]))
    assert r1.objective == pytest.approx(r2.objective, abs=1e-10)
    np.testing.assert_allclose(r1.x, r2.x, atol=1e-9)


def test_brute_force_backend_independent(rng):
    B = random_psd(rng, 3)
    a1, a2 = both(lambda: brute_force_phases(B, 32))
    np.testing.assert_allclose(a1, a2)
