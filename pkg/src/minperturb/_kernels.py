"""Kernel selection: numba-jitted hot path with a pure-numpy fallback.

Per-sample operations (forward pass, input gradients) dominate attack
runtime and run 5-8x faster under numba at desk-scale widths, so they use
the jitted kernels whenever numba imports cleanly. Batch operations
(batched logits, the full-batch cross-entropy gradient) stay on the
vectorized numpy implementation unconditionally: BLAS matmuls beat scalar
loops at batch size regardless of jitting (see benchmarks/bench_kernels.py).
A convenient side effect is that training trajectories are bit-identical
across both paths.

Setting MINPERTURB_NO_NUMBA=1 (before first import) forces the numpy
fallback for everything. The implementations agree to floating-point
roundoff (not bitwise: summation orders differ).
"""

import os

from . import _kernels_numpy

NUMBA_ENV_FLAG = "MINPERTURB_NO_NUMBA"

try:
    import numba  # noqa: F401
    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and os.environ.get(NUMBA_ENV_FLAG, "") not in ("1", "true", "yes")

if USE_NUMBA:
    from . import _kernels_numba
    forward_logits = _kernels_numba.forward_logits
    input_gradient = _kernels_numba.input_gradient
    all_input_gradients = _kernels_numba.all_input_gradients
else:
    forward_logits = _kernels_numpy.forward_logits
    input_gradient = _kernels_numpy.input_gradient
    all_input_gradients = _kernels_numpy.all_input_gradients

batch_logits = _kernels_numpy.batch_logits
ce_loss_and_grad = _kernels_numpy.ce_loss_and_grad
