"""
Same-padded 2D convolution (cross-correlation) with its adjoints, via im2col windows.

Shapes: inputs (n, c_in, h, w), kernels (c_out, c_in, κ, κ) with κ odd and padding (κ−1)/2.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from isoflow.diffeo.base import Array


def _windows(x: Array, kernel_size: int) -> Array:
    pad = kernel_size // 2
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    return sliding_window_view(padded, (kernel_size, kernel_size), axis=(2, 3))


def conv2d(x: Array, kernel: Array) -> Array:
    """Same-padded cross-correlation: y[n,o] = Σ_c x[n,c] ⋆ K[o,c]."""
    return np.einsum("nchwij,ocij->nohw", _windows(x, kernel.shape[-1]), kernel, optimize=True)


def conv2d_input_grad(grad_out: Array, kernel: Array) -> Array:
    """Adjoint of ``conv2d`` in its input: correlation with the flipped, transposed kernel."""
    flipped = np.ascontiguousarray(kernel[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
    return conv2d(grad_out, flipped)


def conv2d_kernel_grad(x: Array, grad_out: Array, kernel_size: int) -> Array:
    """Gradient of Σ grad_out ⊙ conv2d(x, K) with respect to K."""
    return np.einsum("nchwij,nohw->ocij", _windows(x, kernel_size), grad_out, optimize=True)
