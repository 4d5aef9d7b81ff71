#!/usr/bin/env python3
"""Benchmark the compiled density-matrix kernels against the NumPy fallback.

Times the three hot operations (single-qubit unitary, idle relax/dephase
channel, two-qubit unitary) across register sizes, plus one end-to-end
parity scan per backend.

Usage: python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import math
import time

import numpy as np

from ghzsim.kernels import _numpy_backend

try:
    from ghzsim.kernels import _core
except ImportError:
    _core = None


def _best_of(repeats, fn):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels(repeats: int) -> None:
    backends = [("numpy", _numpy_backend)] + ([("cython", _core)] if _core else [])
    rng = np.random.default_rng(1)
    u2 = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    u4 = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]

    print(f"{'op':<16}{'n':>3}", *(f"{name:>12}" for name, _ in backends), sep="")
    if _core:
        print(f"{'':19}{'':>12}{'(speedup)':>12}")
    for n in (4, 6, 8, 9, 10):
        dim = 1 << n
        base = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        base = np.ascontiguousarray(base @ base.conj().T / dim)
        rows = {
            "unitary_1q": lambda b, r: b.apply_unitary_1q(r, n, n // 2, u2),
            "relax_dephase": lambda b, r: b.apply_relax_dephase_1q(
                r, n, n // 2, 0.01, 0.99
            ),
            "unitary_2q": lambda b, r: b.apply_unitary_2q(r, n, 0, n - 1, u4),
            "depolarize_1q": lambda b, r: b.apply_depolarize_1q(r, n, n // 2, 0.01),
        }
        for op, fn in rows.items():
            times = []
            for _, backend in backends:
                rho = base.copy()
                times.append(_best_of(repeats, lambda: fn(backend, rho)))
            cells = "".join(f"{t * 1e6:>10.1f}us" for t in times)
            speedup = f"{times[0] / times[-1]:>10.1f}x" if len(times) == 2 else ""
            print(f"{op:<16}{n:>3}{cells}{speedup}")


def bench_end_to_end(repeats: int) -> None:
    import os
    import subprocess
    import sys

    code = (
        "import time; import numpy as np; import ghzsim as g;"
        "graph = g.bundled_graph();"
        "chain = g.find_chain(graph, 7);"
        "noise = g.NoiseModel(t2_us=48.34);"
        "plan = g.ExperimentPlan(graph=graph, chain=chain,"
        " delays_ns=tuple(np.linspace(0, 13000, 5)), noise=noise,"
        " delay_realization='continuous');"
        "start = time.perf_counter();"
        "g.run_delay_sweep(plan);"
        "print(f'{time.perf_counter() - start:.3f}')"
    )
    print("\nend-to-end 7-qubit sweep (5 delays, 29 angles):")
    for name, env_value in (("numpy", "1"), ("cython", "")):
        if name == "cython" and _core is None:
            continue
        env = dict(os.environ)
        if env_value:
            env["GHZSIM_PURE"] = env_value
        else:
            env.pop("GHZSIM_PURE", None)
        best = min(
            float(subprocess.run(
                [sys.executable, "-c", code], env=env, capture_output=True, text=True,
                check=True,
            ).stdout)
            for _ in range(max(1, repeats // 2))
        )
        print(f"  {name:<8} {best:.3f}s")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if _core is None:
        print("compiled kernels not available; timing the NumPy fallback only\n")
    bench_kernels(args.repeats)
    bench_end_to_end(args.repeats)
