"""Timing comparison of the two survival-curve kernel backends.

The ensemble Monte-Carlo evaluator spends essentially all of its time
turning batches of +-1 segment coefficients into survival curves, so
that kernel exists twice: a Cython extension and a pure-numpy fallback
with the identical contract.  This script feeds both the same random
coefficient batches over the standard flat-band model, reports wall
times and the speedup, and cross-checks that the outputs agree to
rounding.  It finishes with one end-to-end ensemble run through
whichever backend the installed package actually selected.

Run it from anywhere after installing the package:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --realizations 200 2000 20000 --repeats 7
"""
import argparse
import time

import numpy as np

from kickctl import BACKEND, EnsembleSpec, build_flat_band, run_ensemble
from kickctl._kernels import _ckernels, _pykernels
from kickctl.analytic import _cos_table


def timed(fn, repeats):
    """Smallest wall time over several runs; one warm-up call first."""
    fn()
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="time the Cython and numpy survival kernels on identical input")
    parser.add_argument("--realizations", type=int, nargs="+",
                        default=[100, 1000, 10000],
                        help="batch sizes to time (default: 100 1000 10000)")
    parser.add_argument("--steps", type=int, default=50,
                        help="segments per realization (default: 50)")
    parser.add_argument("--modes", type=int, default=201,
                        help="continuum modes in the test model (default: 201)")
    parser.add_argument("--dt", type=float, default=0.2,
                        help="segment length (default: 0.2)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of this many runs (default: 5)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for the random coefficient rows (default: 0)")
    args = parser.parse_args(argv)

    model = build_flat_band(args.modes, 20.0, 0.02)
    table = _cos_table(model, args.dt, args.steps)
    rng = np.random.default_rng(args.seed)

    print(f"selected backend at import time: {BACKEND}")
    print(f"model: {args.modes} flat-band modes, dt={args.dt}, "
          f"{args.steps} steps per curve, best of {args.repeats}")
    print()
    header = f"{'realizations':>12}  {'numpy':>10}  {'cython':>10}  {'speedup':>8}  {'max gap':>9}"
    print(header)
    print("-" * len(header))

    for n_r in args.realizations:
        lam = np.where(rng.random((n_r, args.steps)) < 0.5, -1.0, 1.0)
        t_py = timed(lambda: _pykernels.sign_survival_curves(table, lam), args.repeats)
        if _ckernels is None:
            print(f"{n_r:>12}  {t_py:>9.4f}s  {'absent':>10}  {'-':>8}  {'-':>9}")
            continue
        t_c = timed(lambda: _ckernels.sign_survival_curves(table, lam), args.repeats)
        gap = np.abs(_pykernels.sign_survival_curves(table, lam)
                     - _ckernels.sign_survival_curves(table, lam)).max()
        print(f"{n_r:>12}  {t_py:>9.4f}s  {t_c:>9.4f}s  {t_py / t_c:>7.1f}x  {gap:>9.1e}")

    if _ckernels is None:
        print("\nextension not built; rebuild without KICKCTL_NO_EXT to compare")

    n_big = max(args.realizations)
    spec = EnsembleSpec(n_realizations=n_big, dt=args.dt, n_steps=args.steps,
                        p_kick=0.5, seed=args.seed)
    t0 = time.perf_counter()
    report = run_ensemble(model, spec)
    t_total = time.perf_counter() - t0
    print(f"\nend-to-end ensemble ({n_big} realizations, {BACKEND} backend): "
          f"{t_total:.3f}s, z = {report.z_score:+.2f}")


if __name__ == "__main__":
    main()
