"""Fourier differentiation on the uniform periodic grid theta_j = 2 pi j / n."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def grid(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


def _wavenumbers(n: int, order: int) -> np.ndarray:
    k = np.fft.rfftfreq(n, 1.0 / n)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        # the Nyquist mode has no consistent odd derivative on a real grid
        mult[-1] = 0.0
    return mult


def diff(values, order: int = 1) -> np.ndarray:
    """Spectral derivative of periodic samples."""
    v = np.asarray(values, dtype=float)
    n = v.size
    return np.fft.irfft(_wavenumbers(n, order) * np.fft.rfft(v), n)


@lru_cache(maxsize=32)
def _diff_matrix(n: int, order: int) -> np.ndarray:
    return np.stack([diff(col, order) for col in np.eye(n)], axis=1)


def diff_matrix(n: int, order: int = 1) -> np.ndarray:
    """Dense n x n matrix D with D @ v == diff(v, order)."""
    return _diff_matrix(n, order).copy()


def finite_diff(values, order: int = 1) -> np.ndarray:
    """Second-order central differences; a debugging alternative to :func:`diff`."""
    v = np.asarray(values, dtype=float)
    h = 2.0 * np.pi / v.size
    if order == 1:
        return (np.roll(v, -1) - np.roll(v, 1)) / (2 * h)
    if order == 2:
        return (np.roll(v, -1) - 2 * v + np.roll(v, 1)) / (h * h)
    raise ValueError("finite_diff supports order 1 or 2")


def even_part(values) -> np.ndarray:
    """Antipodal symmetrisation v_j <- (v_j + v_{j+n/2}) / 2."""
    v = np.asarray(values, dtype=float)
    return 0.5 * (v + np.roll(v, -(v.size // 2)))


def mollify(values, bandwidth: float) -> np.ndarray:
    """Circular Gaussian smoothing: Fourier mode k is damped by e^{-k^2 bw^2 / 2}."""
    v = np.asarray(values, dtype=float)
    n = v.size
    k = np.fft.rfftfreq(n, 1.0 / n)
    return np.fft.irfft(np.exp(-0.5 * (k * bandwidth) ** 2) * np.fft.rfft(v), n)
