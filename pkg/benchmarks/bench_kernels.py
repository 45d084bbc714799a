"""Compare the compiled and pure-Python simplex kernels on the same workloads.

    python benchmarks/bench_kernels.py [--repeat 3]

Each row reports median wall time per backend, the speedup, and whether the
two backends returned the same objective values.
"""

from __future__ import annotations

import argparse
import statistics
import time

from sparsecommit import _backend
from sparsecommit.game import maximin_model
from sparsecommit.generators import gen_random_zero_sum
from sparsecommit.lp import lp_solve
from sparsecommit.mip import mip_solve
from sparsecommit.sparse import DEFAULT_CONFIG, build_basic_milp


def _maximin(size, seeds):
    models = [maximin_model(gen_random_zero_sum(size, size, s).a) for s in seeds]
    return lambda backend: [lp_solve(m, backend=backend).objective_value for m in models]


def _basic_milp(size, k, seeds):
    models = [build_basic_milp(gen_random_zero_sum(size, size, s), k) for s in seeds]
    return lambda backend: [mip_solve(m, DEFAULT_CONFIG, backend=backend).objective_value for m in models]


WORKLOADS = {
    "maximin LP 30x30 (x10)": _maximin(30, range(10)),
    "maximin LP 80x80 (x3)": _maximin(80, range(3)),
    "k-sparse MILP 15x15 k=3 (x3)": _basic_milp(15, 3, range(3)),
    "k-sparse MILP 30x30 k=4 (x2)": _basic_milp(30, 4, range(2)),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if "compiled" not in _backend.AVAILABLE:
        raise SystemExit("compiled kernel is not built; reinstall with a C compiler and Cython available")
    print(f"{'workload':34s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}  agree")
    for name, run in WORKLOADS.items():
        times = {}
        values = {}
        for backend in ("python", "compiled"):
            samples = []
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                values[backend] = run(backend)
                samples.append(time.perf_counter() - t0)
            times[backend] = statistics.median(samples)
        agree = all(abs(a - b) <= 1e-7 * (1 + abs(a)) for a, b in zip(values["python"], values["compiled"]))
        print(f"{name:34s} {times['python']:10.3f} {times['compiled']:11.3f} "
              f"{times['python'] / times['compiled']:7.1f}x  {'yes' if agree else 'NO'}")


if __name__ == "__main__":
    main()
