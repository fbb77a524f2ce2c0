#!/usr/bin/env python3
"""Benchmark the compiled evolution kernel against the pure-Python fallback.

Usage: python benchmarks/bench_kernel.py [--size 128] [--repeats 200]
"""

import argparse
import time

import numpy as np


def best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    import clickmask._kernel as kernel
    from clickmask._kernel import reference
    try:
        from clickmask._kernel import _speedup
    except ImportError:
        print("compiled kernel not built; run `pip install -e .` first")
        return 1

    rng = np.random.default_rng(0)
    n = args.size
    phi = np.ascontiguousarray(rng.uniform(-1.5, 1.5, (n, n)))
    g = np.ascontiguousarray(rng.uniform(0.5, 1.0, (n, n)))
    call = (phi, g, 0.2, -0.1, 0.7, 1.5)

    fp = reference.step_forces(*call)
    fc = _speedup.step_forces(*call)
    diff = np.abs(fp - fc).max()
    print(f"force-field agreement: max |diff| = {diff:.3e}")
    assert diff < 1e-12, "kernels disagree"

    t_py = best_of(reference.step_forces, call, args.repeats)
    t_cy = best_of(_speedup.step_forces, call, args.repeats)
    print(f"step_forces {n}x{n}:")
    print(f"  python   {t_py * 1e3:8.3f} ms")
    print(f"  compiled {t_cy * 1e3:8.3f} ms")
    print(f"  speedup  {t_py / t_cy:8.2f}x")

    # the same comparison inside a full click-to-mask evolution
    from clickmask.image import GrayImage
    from clickmask.levelset import EvolutionParams, evolve

    img = np.full((n, n), 0.2)
    yy, xx = np.mgrid[0:n, 0:n]
    img[(yy - n // 2) ** 2 + (xx - n // 2) ** 2 <= 16] = 0.9
    img = np.clip(img + rng.normal(0, 0.05, (n, n)), 0, 1)
    roi = GrayImage(img)
    params = EvolutionParams()

    timings = {}
    masks = {}
    for name, impl in (("python", reference), ("compiled", _speedup)):
        kernel.step_forces = impl.step_forces
        started = time.perf_counter()
        res = evolve(roi, params)
        timings[name] = time.perf_counter() - started
        masks[name] = (res.phi.phi < 0).copy()
    kernel.step_forces = _speedup.step_forces

    same = (masks["python"] == masks["compiled"]).all()
    print(f"full evolution on a {n}x{n} phantom (masks identical: {same}):")
    print(f"  python   {timings['python'] * 1e3:8.1f} ms")
    print(f"  compiled {timings['compiled'] * 1e3:8.1f} ms")
    print(f"  speedup  {timings['python'] / timings['compiled']:8.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
