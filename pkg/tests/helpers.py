"""Shared test utilities: random smooth inputs with controlled excitation rank."""

import numpy as np

from singlerange.signals import SampledSignal


def max_rel(a, b):
    """Max elementwise deviation relative to the larger series magnitude."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(np.abs(a).max(), np.abs(b).max(), np.finfo(float).tiny)
    return np.abs(a - b).max() / scale


def random_basis(rng):
    """Random orthonormal 3x3 basis (columns)."""
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    return q


def smooth_signal(rng, ts, steps, dim=3, scale=1.0, n_modes=3):
    """Band-limited random velocity confined to a `dim`-dimensional subspace.

    Returns (signal, basis) where the first `dim` columns of `basis` span
    the excited subspace and the remaining columns span the kernel of the
    resulting regression/Gramian.
    """
    t = ts * np.arange(steps + 1)
    omega0 = 2.0 * np.pi / (steps * ts)
    coords = np.zeros((len(t), dim))
    for d in range(dim):
        for m in range(1, n_modes + 1):
            a, b = rng.normal(size=2)
            coords[:, d] += a * np.cos(m * omega0 * t) + b * np.sin(m * omega0 * t)
    basis = random_basis(rng)
    samples = scale * coords @ basis[:, :dim].T
    return SampledSignal(ts, samples), basis
