"""Matrix Fourier transforms that return samples of continuous integrals.

The kernels are built from absolute node coordinates, so arbitrary (offset,
non-uniform, differently spaced) input and output grids are handled with no
index-shift conventions.  Quadrature is the trapezoid rule on the input grid.
"""
import numpy as np

from .core import trapezoid_weights


def kernel(nodes, weights, freqs, sign, hbar):
    """``K[j, k] = weights[j] * exp(sign * i * nodes[j] * freqs[k] / hbar)``."""
    phase = np.multiply.outer(np.asarray(nodes, float), np.asarray(freqs, float))
    return np.asarray(weights, float)[:, None] * np.exp((sign / hbar) * 1j * phase)


def uniform_nodes(half_width, n):
    nodes = np.linspace(-half_width, half_width, n)
    return nodes, trapezoid_weights(n, nodes[1] - nodes[0])


def real_left_matmul(a, w):
    """``a @ w`` for complex ``a`` and real ``w`` without promoting ``w`` to complex."""
    return (a.real @ w) + 1j * (a.imag @ w)


def real_right_matmul(w, b):
    return (w @ b.real) + 1j * (w @ b.imag)
