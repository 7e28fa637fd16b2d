"""Compare the numba kernels with their numpy twins.

Element kernels are timed in-process (``*_nb`` against ``*_np``).  The
transport solve is timed end to end in two subprocesses, one with
``ABPLAB_DISABLE_NUMBA=1``, because the simplex kernel has no separate numpy
implementation: without numba the same code runs interpreted.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]
"""
import argparse
import os
import subprocess
import sys
import textwrap
import time

import numpy as np

from abplab import _accel, kernels


def best_of(fn, repeat):
    fn()  # warm-up (and numba compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def element_cases(scale, rng):
    m = 400 * scale
    C = rng.random((m, m))
    phi = rng.random(m)
    n_tri = 120 * scale
    X = rng.random((n_tri, 2))
    D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    n = 200_000 * scale
    src = rng.integers(0, n, 4 * n)
    dst = (src + 1 + rng.integers(0, n - 1, 4 * n)) % n
    w = rng.random(4 * n)
    mass = rng.random(n) + 0.5
    u = rng.random(n)
    return {
        f"min_plus {m}x{m}": (lambda f: f(C, phi), kernels.min_plus_nb, kernels.min_plus_np),
        f"row_argmin_band {m}x{m}": (lambda f: f(C, 1e-3), kernels.row_argmin_band_nb, kernels.row_argmin_band_np),
        f"triangle_violations n={n_tri}": (lambda f: f(D, 0.0, 50), kernels.triangle_violations_nb,
                                          kernels.triangle_violations_np),
        f"graph_laplacian n={n}": (lambda f: f(u, src, dst, w, mass), kernels.graph_laplacian_nb,
                                   kernels.graph_laplacian_np),
    }


SOLVE = textwrap.dedent("""
    import time, numpy as np
    from abplab.mmspace import build_model_space
    from abplab.transport import ProbMeasure, solve_w2
    s = build_model_space({{"model": "interval", "a": 0, "b": 1, "n": {n}}})
    x = s.coords[:, 0]
    mu = ProbMeasure.from_density(s, 1 + 0.5 * np.sin(6 * x))
    nu = ProbMeasure.from_density(s, 1 + 0.5 * np.cos(9 * x))
    solve_w2(mu, nu)
    t0 = time.perf_counter()
    for _ in range({repeat}):
        solve_w2(mu, nu)
    print((time.perf_counter() - t0) / {repeat})
""")


def solve_time(n, repeat, disable):
    env = dict(os.environ, ABPLAB_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", SOLVE.format(n=n, repeat=repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)
    if not _accel.USE_NUMBA:
        sys.exit("numba is disabled or missing; nothing to compare")
    rng = np.random.default_rng(0)
    scale = 1 if args.quick else 2
    print(f"{'kernel':36s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'ratio':>7s}")
    for name, (call, nb, npy) in element_cases(scale, rng).items():
        t_nb = best_of(lambda: call(nb), args.repeat)
        t_np = best_of(lambda: call(npy), args.repeat)
        print(f"{name:36s} {1e3 * t_nb:11.2f} {1e3 * t_np:11.2f} {t_np / t_nb:7.1f}")
    n = 201 if args.quick else 401
    reps = 1 if args.quick else 2
    t_nb = solve_time(n, reps, disable=False)
    t_np = solve_time(n, reps, disable=True)
    print(f"{'solve_w2 interval n=' + str(n):36s} {1e3 * t_nb:11.2f} {1e3 * t_np:11.2f} {t_np / t_nb:7.1f}")


if __name__ == "__main__":
    main()
