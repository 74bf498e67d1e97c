"""Compare the numba and numpy paths of the numeric hot loops.

Run with ``python benchmarks/bench_kernels.py``. Setting
``MAGINT_DISABLE_NUMBA=1`` disables the numba path entirely; the script then
reports the numpy timings only.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from magint.diffop import classical_limit
from magint.systems import builtin, specialize, value_bindings
from magint.verify._kernels import USE_NUMBA
from magint.verify.classical import compile_flow, hamilton_source, initial_state, integrate
from magint.verify.numeric import jet_space


def best_of(fn, repeat):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_pairs(order, points, repeat):
    S = jet_space(order)
    rng = np.random.default_rng(0)
    a = rng.normal(size=(points, S.m)) + 1j * rng.normal(size=(points, S.m))
    b = rng.normal(size=(points, S.m)) + 1j * rng.normal(size=(points, S.m))
    rows = []
    for kernel in ("mul", "left"):
        f = getattr(S.pairs, kernel)
        t_np = best_of(lambda: f(a, b, use_numba=False), repeat)
        t_nb = best_of(lambda: f(a, b, use_numba=True), repeat) if USE_NUMBA else None
        if t_nb is not None:
            assert np.allclose(f(a, b, use_numba=True), f(a, b, use_numba=False))
        rows.append((f"PairTable.{kernel} order {order}, {points} points", t_np, t_nb))
    return rows


def bench_flow(t_end, step, repeat):
    s = builtin("constant-B-landau")
    sp = specialize(s, value_bindings(s, {"b": 1}))
    h = classical_limit(sp.H).to_nf()
    src = hamilton_source(h, {"H": h})
    y0 = initial_state(0, False)
    flows = {False: compile_flow(src, use_numba=False)}
    if USE_NUMBA:
        flows[True] = compile_flow(src, use_numba=True)
    t_np = best_of(lambda: integrate(flows[False], y0, step, t_end, 1), repeat)
    t_nb = best_of(lambda: integrate(flows[True], y0, step, t_end, 1), repeat) if USE_NUMBA else None
    return [(f"RK4 flow, {int(round(t_end / step))} steps", t_np, t_nb)]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--t-end", type=float, default=20.0)
    args = p.parse_args(argv)
    rows = []
    for order in (2, 4):
        rows += bench_pairs(order, args.points, args.repeat)
    rows += bench_flow(args.t_end, 0.01, max(1, args.repeat // 2))
    print(f"{'kernel':<40} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}")
    for name, t_np, t_nb in rows:
        nb = f"{1e3 * t_nb:12.3f}" if t_nb is not None else f"{'-':>12}"
        sp = f"{t_np / t_nb:9.1f}" if t_nb else f"{'-':>9}"
        print(f"{name:<40} {1e3 * t_np:12.3f} {nb} {sp}")


if __name__ == "__main__":
    main()
