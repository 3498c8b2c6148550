"""Kernel backend comparison: numba-jitted versus pure-numpy.

Times the three hot operations on split re/im arrays and a full Heisenberg
advance loop, then prints per-kick rates side by side. Run as

    python3 benchmarks/bench_kernels.py --N 10 --kicks 20
"""

from __future__ import annotations

import argparse
import math
import statistics
import time

import numpy as np

from floquet_otoc.backends import backend_name, get_backend, has_numba
from floquet_otoc.evolution import ChainParams, EvolutionState
from floquet_otoc.otoc import ObservableFamily, ObservableSpec, make_observables
from floquet_otoc.schedules import QuenchProtocol

PROTOCOL = QuenchProtocol.linear(h_x0=1.0, h_z0=1.0, gamma=0.1)


def time_call(fn, repeats: int) -> float:
    """Median wall time of fn() over repeats, after one warmup call."""
    fn()
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def kernel_benches(backend: str, N: int, repeats: int) -> dict[str, float]:
    kern = get_backend(backend)
    dim = 1 << N
    rng = np.random.default_rng(0)
    wr = rng.standard_normal((dim, dim))
    wi = rng.standard_normal((dim, dim))
    pr = np.cos(rng.random(dim))
    pi = np.sin(rng.random(dim))
    masks = np.array([1 << (N - 1), 1 << (N - 2)], dtype=np.int64)
    coss = np.cos(np.array([0.4, 0.3]))
    sins = np.sin(np.array([0.4, 0.3]))
    lo, span = N - 2, 2
    return {
        "scale_two_sided": time_call(
            lambda: kern.scale_two_sided(wr, wi, pr, pi, pr, -pi), repeats
        ),
        "rotate_rows_batch": time_call(
            lambda: kern.rotate_rows_batch(wr, wi, lo, span, masks, coss, sins),
            repeats,
        ),
        "rotate_cols": time_call(
            lambda: kern.rotate_cols(wr, wi, masks, coss, sins), repeats
        ),
    }


def advance_bench(backend: str, N: int, kicks: int) -> float:
    params = ChainParams(N=N, J=1.0, tau=math.pi / 4)
    W0, _ = make_observables(ObservableSpec(ObservableFamily.BLOCK_X), N)
    state = EvolutionState(params, PROTOCOL, W0, backend=backend)
    state.advance()  # warm the jit cache before timing
    t0 = time.perf_counter()
    for _ in range(kicks):
        state.advance()
    return (time.perf_counter() - t0) / kicks


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=10, help="chain length (default: 10)")
    ap.add_argument("--kicks", type=int, default=20, help="advance loop length")
    ap.add_argument("--repeats", type=int, default=7, help="kernel timing repeats")
    args = ap.parse_args()

    backends = ["numpy"]
    if has_numba():
        backends.append("numba")
    else:
        print("numba not importable; timing the numpy fallback only")

    rows: list[tuple[str, dict[str, float], float]] = []
    for name in backends:
        resolved = backend_name(name)
        kernels = kernel_benches(resolved, args.N, args.repeats)
        per_kick = advance_bench(resolved, args.N, args.kicks)
        rows.append((resolved, kernels, per_kick))

    ops = list(rows[0][1]) + ["advance/kick"]
    print(f"\nN={args.N} (dim {1 << args.N}), median of {args.repeats}\n")
    header = f"{'op':<20}" + "".join(f"{name:>14}" for name, _, _ in rows)
    if len(rows) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for op in ops:
        vals = [
            per_kick if op == "advance/kick" else kernels[op]
            for _, kernels, per_kick in rows
        ]
        line = f"{op:<20}" + "".join(f"{v * 1e3:>12.3f}ms" for v in vals)
        if len(vals) == 2:
            line += f"{vals[0] / vals[1]:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
