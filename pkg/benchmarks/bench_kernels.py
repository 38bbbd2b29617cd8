"""Numba vs pure-numpy timings for the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is warmed up once per backend (so JIT compilation is excluded)
and then timed ``repeat`` times; the median is reported together with the
numba speedup. Results must agree between backends, which is checked too.
"""

import argparse
import time

import numpy as np

from psfwsn import _accel, kernels
from psfwsn.lp import solve_lp
from psfwsn.selection import build_selection_lp, selection_kernel


def _median(fn, repeat):
    fn()
    out = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return float(np.median(out))


def cases(rng):
    N = 5
    G = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    B5 = G @ G.conj().T
    H = rng.normal(size=(4, 30)) + 1j * rng.normal(size=(4, 30))
    sv = rng.uniform(0.01, 0.1, 30)
    a0 = np.exp(1j * rng.uniform(0, 2 * np.pi, 30))
    A = np.exp(1j * rng.uniform(0, 2 * np.pi, (20_000, 30)))
    B30 = H.conj().T @ H
    H20 = rng.normal(size=(4, 20)) + 1j * rng.normal(size=(4, 20))
    lp = build_selection_lp(selection_kernel(H20, a0[:20]), 5)[:5]
    Hbig = rng.normal(size=(4, 400)) + 1j * rng.normal(size=(4, 400))
    Gbig = Hbig.conj().T @ Hbig
    abig = np.exp(1j * rng.uniform(0, 2 * np.pi, 400))
    return {
        "quad_forms 20000x30 (BLAS either way)": lambda: kernels.quad_forms(A, B30),
        "quad_forms 50x8": lambda: kernels.quad_forms(A[:50, :8], B30[:8, :8]),
        "grid_search N=5 L=24": lambda: kernels.grid_search(B5, 24),
        "gain_phase_ascent N=30": lambda: kernels.gain_phase_ascent(H, sv, 0.1, a0, np.sqrt(30)),
        "greedy_order N=400 K=50": lambda: kernels.greedy_order(Gbig, abig, 50),
        "selection LP N=20 K=5": lambda: solve_lp(*lp),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rows = []
    for name, fn in cases(np.random.default_rng(0)).items():
        t = {}
        res = {}
        for be in ("numba", "numpy"):
            prev = _accel.set_backend(be)
            try:
                t[be] = _median(fn, args.repeat)
                res[be] = fn()
            finally:
                _accel.set_backend(prev)
        rows.append((name, t["numba"], t["numpy"], t["numpy"] / t["numba"]))
    w = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{w}}  {'numba [s]':>10}  {'numpy [s]':>10}  {'speedup':>8}")
    for name, tn, tp, sp in rows:
        print(f"{name:<{w}}  {tn:10.4g}  {tp:10.4g}  {sp:8.2f}x")


if __name__ == "__main__":
    main()
