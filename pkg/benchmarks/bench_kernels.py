"""Compare the compiled kernels with the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Each row
reports the median wall time per call for both backends and the speedup.
"""
from __future__ import annotations

import argparse
import importlib
import statistics
import time

import numpy as np


def _time(fn, repeat):
    fn()  # warm-up
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def _spd(rng, n):
    G = rng.standard_normal((n, n))
    return G @ G.T + n * np.eye(n)


def kernel_cases(rng):
    for n in (3, 6, 10):
        M = _spd(rng, n)
        K1, K2 = _spd(rng, n), rng.standard_normal((n, n))
        m = n
        Amat = rng.standard_normal((m, n * (n + 1) // 2))
        X, S = _spd(rng, n), _spd(rng, n)
        yield f"jacobi_eigh n={n}", lambda k, M=M: k.jacobi_eigh(M)
        yield f"sym_kron n={n}", lambda k, a=K1, b=K2: k.sym_kron(a, b)
        yield f"aho_jacobian n={n}", lambda k, A=Amat, X=X, S=S: k.aho_jacobian(A, X, S)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeat", type=int, default=50)
    p.add_argument("--no-e2e", action="store_true", help="skip the end-to-end identification run")
    args = p.parse_args(argv)

    py = importlib.import_module("parasdo._kernels_py")
    try:
        cy = importlib.import_module("parasdo._kernels")
    except ImportError:
        cy = None
        print("compiled extension not built; only the Python kernels are timed")

    rng = np.random.default_rng(0)
    print(f"{'case':<24}{'python [us]':>14}{'compiled [us]':>16}{'speedup':>10}")
    for name, fn in kernel_cases(rng):
        tp = _time(lambda: fn(py), args.repeat)
        tc = _time(lambda: fn(cy), args.repeat) if cy else float("nan")
        print(f"{name:<24}{tp * 1e6:>14.1f}{tc * 1e6:>16.1f}{tp / tc:>10.2f}")

    if args.no_e2e or cy is None:
        return
    # end to end: swap the backend used by the solver modules
    from parasdo import centralpath, symlin
    from parasdo.fixtures import elliptope_instance
    from parasdo.partition import find_mu_breve

    inst = elliptope_instance()
    res = {}
    for label, mod in (("python", py), ("compiled", cy)):
        centralpath.kernels = mod
        symlin.kernels = mod
        res[label] = _time(lambda: find_mu_breve(inst, 0.0), max(3, args.repeat // 10))
    centralpath.kernels = symlin.kernels = cy
    print(f"{'find_mu_breve eps=0':<24}{res['python'] * 1e3:>11.1f} ms{res['compiled'] * 1e3:>13.1f} ms"
          f"{res['python'] / res['compiled']:>10.2f}")


if __name__ == "__main__":
    main()
