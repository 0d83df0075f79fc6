"""Compare the numba-compiled kernels against their numpy fallbacks.

Both implementations live side by side in ``nsparam._kernels`` so they can
be timed in one process.  The best of ``--repeat`` runs is reported after a
warm-up call that absorbs JIT compilation.  With ``--estimators`` the four
estimators are also timed end to end in child processes, once per backend
(the backend is chosen by ``NSPARAM_DISABLE_NUMBA`` at import time).

Usage::

    python benchmarks/bench_kernels.py [--size N] [--repeat R] [--estimators]
"""

import argparse
import os
import subprocess
import sys
import textwrap
import time

import numpy as np

from nsparam import _kernels
from nsparam._accel import HAVE_NUMBA


def best_time(fn, args, repeat):
    fn(*args)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(size, rng):
    y = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    J = min(100, (size - 2) // 2)
    n = np.arange(size, dtype=float)
    freqs = np.linspace(-np.pi, np.pi, 512)
    return [
        ("aacf", _kernels.aacf_numba, _kernels.aacf_numpy, (y, J, J, size - 1 - J)),
        ("dtft", _kernels.dtft_numba, _kernels.dtft_numpy, (y, n, freqs)),
        ("bessel_series", _kernels.bessel_series_numba, _kernels.bessel_series_numpy, (7, 9.5)),
        ("bessel_downward", _kernels.bessel_downward_numba, _kernels.bessel_downward_numpy, (40, 45.0)),
    ]


ESTIMATOR_SCRIPT = textwrap.dedent("""
    import time
    from nsparam.cli_io import load_fixture
    from nsparam.estimators import EstimationConfig, estimate
    from nsparam.models import synthesize
    cases = [("transient", "exponential", 256, 0, 6), ("vowel", "am", 2048, 0, 4),
             ("fricative", "fm", 8192, 4096, 7), ("ecg", "exp_am", 498, 249, 4)]
    for name, kind, n, center, order in cases:
        sig = synthesize(load_fixture(name), n, center)
        if kind == "fm":
            sig = sig.with_samples(sig.samples.real)
        cfg = EstimationConfig(model_order=order)
        estimate(kind, sig, cfg)
        t0 = time.perf_counter()
        estimate(kind, sig, cfg)
        print(kind, time.perf_counter() - t0)
""")


def estimator_times(disable):
    env = dict(os.environ, NSPARAM_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", ESTIMATOR_SCRIPT], env=env, check=True,
                         capture_output=True, text=True).stdout
    return {k: float(v) for k, v in (line.split() for line in out.splitlines())}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=4096, help="record length for aacf and dtft")
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--estimators", action="store_true", help="also time whole estimators")
    args = parser.parse_args(argv)

    if not HAVE_NUMBA:
        print("numba is not installed; both columns time the same loop code")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<16} {'numba [ms]':>11} {'numpy [ms]':>11} {'speed-up':>9} {'max |diff|':>11}")
    for name, fast, slow, call_args in kernel_cases(args.size, rng):
        diff = float(np.max(np.abs(np.asarray(fast(*call_args)) - np.asarray(slow(*call_args)))))
        t_fast = best_time(fast, call_args, args.repeat)
        t_slow = best_time(slow, call_args, args.repeat)
        print(f"{name:<16} {1e3 * t_fast:11.3f} {1e3 * t_slow:11.3f} "
              f"{t_slow / t_fast:9.2f} {diff:11.2e}")

    if args.estimators:
        jit, plain = estimator_times(False), estimator_times(True)
        print()
        print(f"{'estimator':<16} {'numba [s]':>11} {'numpy [s]':>11} {'speed-up':>9}")
        for kind in jit:
            print(f"{kind:<16} {jit[kind]:11.3f} {plain[kind]:11.3f} {plain[kind] / jit[kind]:9.2f}")


if __name__ == "__main__":
    main()
