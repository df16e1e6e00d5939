"""Compare the compiled and NumPy SMO backends on the surrogate SVM problem.

Reports wall time per solve and checks that both backends reach the same
dual objective and decision values.

    python benchmarks/bench_smo.py --n 500 1000 2000 --kernel rbf
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from respclass import _backend
from respclass.learners.models import KernelSpec
from respclass.learners.svm import train_respsvm
from respclass.surrogate import to_surrogate
from respclass.synthetic import ScenarioSpec, generate


def _time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[250, 500, 1000])
    ap.add_argument("--kernel", choices=["linear", "rbf"], default="rbf")
    ap.add_argument("--scenario", choices=["linear", "spherical"], default="spherical")
    ap.add_argument("--C", type=float, default=10.0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if "cython" not in _backend.BACKENDS:
        print("compiled backend not built; only the NumPy fallback is available")
    kernel = KernelSpec(args.kernel, 0.5)
    print(f"{'n':>6} {'backend':>8} {'seconds':>9} {'iters':>8} {'dual':>14} {'speedup':>8}")
    for n in args.n:
        ds, _ = generate(ScenarioSpec(args.scenario, 2, n, args.seed))
        ex = to_surrogate(ds, 0.5)
        grid = np.random.default_rng(args.seed).normal(size=(200, 2))
        results = {}
        for name in _backend.BACKENDS:
            secs, model = _time(lambda: train_respsvm(ex, kernel, args.C, backend=name), args.repeat)
            results[name] = (secs, model)
        base = results["python"][0]
        for name, (secs, m) in results.items():
            print(f"{n:>6} {name:>8} {secs:>9.4f} {m.n_iter:>8d} {m.dual_objective:>14.6f} {base / secs:>7.1f}x")
        if len(results) == 2:
            a, b = results["python"][1], results["cython"][1]
            rel = abs(a.dual_objective - b.dual_objective) / max(1.0, abs(a.dual_objective))
            agree = np.mean(np.sign(a.score(grid)) == np.sign(b.score(grid)))
            print(f"{'':>6} dual rel. diff {rel:.2e}, sign agreement on grid {agree:.3f}")


if __name__ == "__main__":
    main()
