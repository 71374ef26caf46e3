#!/usr/bin/env python3
"""Benchmark the jitted kernels against the pure-numpy fallback.

Times the three hot operations of the library: single-point logits, a
single-class input gradient, and one full-batch cross-entropy gradient
(the training step). Run:

    python benchmarks/bench_kernels.py [--repeats 2000] [--batch 400]
"""

import argparse
import time

import numpy as np

from minperturb import _kernels_numpy
from minperturb.models import MLP

try:
    from minperturb import _kernels_numba
    HAVE_NUMBA = True
except ImportError:
    _kernels_numba = None
    HAVE_NUMBA = False


def time_call(fn, repeats):
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def bench(layer_sizes, repeats, batch):
    model = MLP(layer_sizes, "tanh", seed=7)
    flat, sizes, act = model.flat, model._sizes, model._act_id
    rng = np.random.default_rng(0)
    x = rng.normal(size=layer_sizes[0])
    xs = rng.normal(size=(batch, layer_sizes[0]))
    ys = rng.integers(0, layer_sizes[-1], size=batch).astype(np.int64)

    cases = {
        "logits(single)": lambda impl: (lambda: impl.forward_logits(flat, sizes, x, act)),
        "grad(single,k=0)": lambda impl: (lambda: impl.input_gradient(flat, sizes, x, 0, act)),
        f"ce_grad(batch={batch})": lambda impl: (lambda: impl.ce_loss_and_grad(flat, sizes, xs, ys, act, 0.0)),
    }

    print(f"\nmodel {layer_sizes}  ({repeats} repeats)")
    print(f"{'kernel':24s} {'numpy':>12s} {'numba':>12s} {'speedup':>9s}")
    for name, make in cases.items():
        reps = repeats if "batch" not in name else max(repeats // 20, 10)
        t_np = time_call(make(_kernels_numpy), reps)
        if HAVE_NUMBA:
            fn = make(_kernels_numba)
            fn()  # compile outside the timer
            t_nb = time_call(fn, reps)
            print(f"{name:24s} {t_np * 1e6:10.2f}us {t_nb * 1e6:10.2f}us {t_np / t_nb:8.1f}x")
        else:
            print(f"{name:24s} {t_np * 1e6:10.2f}us {'n/a':>12s} {'n/a':>9s}")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=2000)
    parser.add_argument("--batch", type=int, default=400)
    args = parser.parse_args()
    if not HAVE_NUMBA:
        print("numba unavailable: showing the numpy fallback only")
    for layers in ((2, 16, 3), (2, 8, 2), (20, 64, 10)):
        bench(layers, args.repeats, args.batch)


if __name__ == "__main__":
    main()
