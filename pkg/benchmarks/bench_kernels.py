"""Time the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each kernel runs on the workload it sees in practice (the (4, 3) coherent
state evolved to t = 0.071).  The first numba call is reported separately
as compile/cache-load time; timings are the best of ``--repeat`` runs.
Both backends are checked to agree before timing.
"""
import argparse
import json
import time

import numpy as np

from kerrchord.core import CHORD_AXES, CoherentParams, GridSpec
from kerrchord.kernels import NUMBA_AVAILABLE, backend_module
from kerrchord.quantum import chord_grid_exact, coherent_fock, kerr_propagate, _chord_gamma


def workloads():
    state = kerr_propagate(coherent_fock(CoherentParams()), 0.071)
    rng = np.random.default_rng(7)
    xi = rng.uniform(-4, 4, size=(2000, 2))
    gamma = _chord_gamma(xi[:, 0], xi[:, 1], 1.0)
    y = np.linspace(-15, 15, 200_000)
    field = chord_grid_exact(state, GridSpec.square(-4, 4, 512, CHORD_AXES))
    re, im = field.values.real, field.values.imag
    return {
        "displacement_expectation (2000 chords)": lambda m: m.displacement_expectation(state.coeffs, gamma),
        "hermite_series (200k points)": lambda m: m.hermite_series(state.coeffs, y),
        "hermite_basis (52 x 20k)": lambda m: m.hermite_basis(state.truncation, y[::10]),
        "marching_segments (512^2)": lambda m: m.marching_segments(re),
        "segment_intersections (512^2)": lambda m: _intersect(m, re, im),
    }


def _intersect(m, re, im):
    a, ca, _ = m.marching_segments(re)
    b, cb, _ = m.marching_segments(im)
    return m.segment_intersections(a, ca, b, cb, re.shape)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-10, atol=1e-13)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    if not NUMBA_AVAILABLE:
        raise SystemExit("numba backend unavailable (unset KERRCHORD_DISABLE_NUMBA to compare)")
    nb, npy = backend_module("numba"), backend_module("numpy")
    rows = []
    print(f"{'kernel':40s} {'first numba':>12s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, fn in workloads().items():
        t0 = time.perf_counter()
        ref = fn(nb)
        first = time.perf_counter() - t0
        if not _same(ref, fn(npy)):
            raise SystemExit(f"{name}: backends disagree")
        t_nb = best_of(lambda: fn(nb), args.repeat)
        t_np = best_of(lambda: fn(npy), max(1, args.repeat // 2))
        rows.append({"kernel": name, "first_call_s": first, "numba_s": t_nb, "numpy_s": t_np,
                     "speedup": t_np / t_nb})
        print(f"{name:40s} {first:12.4f} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
