"""Compare the compiled and pure-Python numerical kernels.

Run from the repository root after building the extension::

    python benchmarks/bench_kernels.py [--repeat 3] [--json]

Each workload calls a kernel module directly, so both backends do identical
work regardless of which one ``gtcorr`` selected at import.
"""

from __future__ import annotations

import argparse
import importlib
import json
import sys
import timeit

import numpy as np

from gtcorr import _pykernels


def _workloads(k):
    xs = np.linspace(0.05, 14.0, 200)
    offsets = np.arange(1001) * 0.01  # the default constant-fit grid
    probs = (np.arange(1, 2001) - 0.5) / 2000

    def cdf():
        for x in xs:
            k.rice_cdf(float(x), 3.0, 1.5)

    def quantile():
        for q in probs[::20]:
            k.rice_quantile(2.0, 1.0, float(q))

    def qq_series():
        out = np.empty(probs.size)
        k.rice_quantiles_into(2.0, 1.0, probs, out)

    def fit_grid():
        # the exact-impact targets for the mean and the median
        for v in offsets:
            k.rice_mean_quad(float(v), 1.0)
            k.rice_quantile(float(v), 1.0, 0.5)

    return {
        "rice_cdf x200": cdf,
        "rice_quantile x100": quantile,
        "rice_quantiles (Q-Q, 2000 pts)": qq_series,
        "fit grid (1001 offsets x2)": fit_grid,
    }


def _best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3, help="best of N runs (default 3)")
    ap.add_argument("--json", action="store_true", help="print machine-readable results")
    args = ap.parse_args(argv)

    try:
        compiled = importlib.import_module("gtcorr._kernels")
    except ImportError:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1

    py_work, c_work = _workloads(_pykernels), _workloads(compiled)
    rows = []
    for name in py_work:
        t_py = _best(py_work[name], args.repeat)
        t_c = _best(c_work[name], args.repeat)
        rows.append({"workload": name, "python_s": t_py, "cython_s": t_c, "speedup": t_py / t_c})

    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    width = max(len(r["workload"]) for r in rows)
    print(f"{'workload'.ljust(width)}  {'python':>10}  {'cython':>10}  {'speedup':>8}")
    for r in rows:
        print(
            f"{r['workload'].ljust(width)}  {r['python_s'] * 1e3:8.1f}ms  {r['cython_s'] * 1e3:8.2f}ms"
            f"  {r['speedup']:7.1f}x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
