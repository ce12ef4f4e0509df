"""Benchmark the jitted per-mode kernels against their numpy fallbacks.

Times the three hot kernels over the array sizes a study actually touches
(stepped bands of a few hundred modes up to full recovery bands), then a
small end-to-end integrator loop under the active backend.

Run:  python benchmarks/bench_kernels.py
The active backend follows STOCHWAVE_NO_NUMBA (unset -> numba if present).
"""

import time

import numpy as np

from stochwave import _kernels
from stochwave import make_grid, method_spec, preset_problem, run, sample_path

SIZES = (256, 1024, 4096, 65536, 524288)
REPS = 200


def _time(fn, *args):
    fn(*args)  # warm-up / compile
    best = float("inf")
    for _ in range(5):
        start = time.perf_counter()
        for _ in range(REPS):
            fn(*args)
        best = min(best, (time.perf_counter() - start) / REPS)
    return best


def bench_kernels():
    pairs = [
        ("propagate", _kernels.propagate, _kernels.propagate_numpy, 0),
        ("propagate_noisy", _kernels.propagate_noisy, _kernels.propagate_noisy_numpy, 1),
        ("weighted_norm_sq", _kernels.weighted_norm_sq, _kernels.weighted_norm_sq_numpy, 2),
    ]
    print(f"active backend: {_kernels.backend_name()}")
    print(f"{'kernel':<18}{'size':>8}{'numpy':>12}{'active':>12}{'speedup':>9}")
    rng = np.random.default_rng(0)
    for size in SIZES:
        u = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        a = np.cos(np.linspace(0, 9, size))
        b = np.sin(np.linspace(0, 9, size)) + 1.5
        for name, active, fallback, shape in pairs:
            if shape == 0:
                args = (u, v, a, b, -b, a)
            elif shape == 1:
                args = (u, v, z, 0.37, a, b, -b, a)
            else:
                args = (u, v, a * a, b * b)
            t_np = _time(fallback, *args)
            t_act = _time(active, *args)
            print(f"{name:<18}{size:>8}{t_np * 1e6:>10.1f}us{t_act * 1e6:>10.1f}us"
                  f"{t_np / t_act:>8.2f}x")


def bench_end_to_end():
    grid = make_grid(1, 128, 2.0)
    _, _, problem = preset_problem(2, gamma=0.5, seed=0)
    spec = method_spec("hr_lri", 2**-9, 0.25)
    lattice = sample_path(0, 0, 0.25, 2**-9)
    run(spec, grid, problem, lattice)  # warm caches
    start = time.perf_counter()
    result = run(spec, grid, problem, lattice)
    elapsed = time.perf_counter() - start
    per_step = 1e6 * result.wall_time / result.steps
    print(f"\nend-to-end: N=128 alpha=2, {result.steps} steps "
          f"in {elapsed * 1e3:.1f}ms ({per_step:.1f}us/step, "
          f"backend {_kernels.backend_name()})")


if __name__ == "__main__":
    bench_kernels()
    bench_end_to_end()
