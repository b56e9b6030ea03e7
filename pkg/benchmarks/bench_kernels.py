"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each backend is loaded directly, so both run in one process.
"""
import argparse
import importlib
import timeit

import numpy as np

from lcplan import _pykernels
from lcplan.fitting import DEFAULT_CONFIG

SIZES = np.array([5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 100, 250, 500, 1000], dtype=np.float64)


def _fit_case(rng, replicates):
    ns = np.repeat(SIZES, replicates)
    ys = 0.92 - 0.6 * ns ** -0.8 + rng.normal(0, 0.01, ns.size)
    c = DEFAULT_CONFIG
    args = (ns, np.clip(ys, 0, 1), c.initial_guess, c.lower, c.upper,
            c.max_iterations, c.gradient_tolerance, c.step_tolerance)
    return lambda k: k.fit_power_law(*args)


def _auc_case(rng, size):
    s = rng.integers(0, size // 4, size).astype(np.float64)
    lab = rng.integers(0, 2, size).astype(np.int64)
    order = np.argsort(s, kind="stable")
    s, lab = s[order], lab[order]
    return lambda k: k.mann_whitney_twice_u(s, lab)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    try:
        compiled = importlib.import_module("lcplan._ckernels")
    except ImportError:
        compiled = None
        print("compiled kernels not built; timing the Python backend only")

    rng = np.random.default_rng(0)
    cases = [
        ("fit_power_law, 14 points", _fit_case(rng, 1), 200),
        ("fit_power_law, 140 points", _fit_case(rng, 10), 200),
        ("mann_whitney, 1e3 scores", _auc_case(rng, 1_000), 200),
        ("mann_whitney, 1e6 scores", _auc_case(rng, 1_000_000), 3),
    ]
    print(f"{'case':<28}{'python (us)':>14}{'compiled (us)':>16}{'speedup':>10}")
    for name, call, number in cases:
        t_py = min(timeit.repeat(lambda: call(_pykernels), number=number, repeat=args.repeat)) / number
        if compiled is None:
            print(f"{name:<28}{t_py * 1e6:>14.1f}{'-':>16}{'-':>10}")
            continue
        assert call(compiled) == call(_pykernels), f"backends disagree on {name}"
        t_c = min(timeit.repeat(lambda: call(compiled), number=number, repeat=args.repeat)) / number
        print(f"{name:<28}{t_py * 1e6:>14.1f}{t_c * 1e6:>16.1f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
