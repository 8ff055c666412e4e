"""Low-pass Fourier smoothing of observed curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import Dataset, DesignGrid, FourierTemplate


@dataclass(frozen=True, eq=False)
class SmoothedCurves:
    """Empirical Fourier coefficients ``c_hat[j, lam + k]`` for ``|k| <= lam``."""

    coeffs: np.ndarray
    lam: int
    grid: Optional[DesignGrid] = None

    def __post_init__(self):
        c = np.array(np.atleast_2d(self.coeffs), dtype=complex)
        if c.shape[1] != 2 * self.lam + 1:
            raise ValueError(f"expected {2 * self.lam + 1} coefficients per curve, got {c.shape[1]}")
        if self.grid is not None and not 2 * self.lam < self.grid.n:
            raise ValueError(f"cutoff {self.lam} must be < n/2 = {self.grid.n / 2}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def J(self) -> int:
        return self.coeffs.shape[0]

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.lam, self.lam + 1)

    def curve(self, j: int) -> FourierTemplate:
        return FourierTemplate(self.coeffs[j])


def dft_coeffs(data, lam: int) -> SmoothedCurves:
    """``c_hat[j, k] = (1/n) sum_{l=1..n} Y_j(l) exp(-i 2 pi k l / n)`` for ``|k| <= lam``.

    Accepts a :class:`Dataset` or a ``(J, n)`` array. Computed with an FFT.
    """
    if isinstance(data, Dataset):
        y, grid = data.y, data.grid
    else:
        y = np.atleast_2d(np.asarray(data, dtype=float))
        grid = DesignGrid(y.shape[1])
    n = grid.n
    lam = int(lam)
    if lam < 0 or not 2 * lam < n:
        raise ValueError(f"cutoff must satisfy 0 <= lam < n/2 (n={n}), got {lam}")
    # samples start at l = 1, numpy's DFT at index 0 (t = 0 == t = 1)
    F = np.fft.fft(np.roll(y, 1, axis=1), axis=1) / n
    idx = np.arange(-lam, lam + 1) % n
    return SmoothedCurves(F[:, idx], lam, grid)


def dft_coeffs_direct(y, lam: int) -> np.ndarray:
    """The defining sum, O(J n lam). Reference for tests."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    n = y.shape[1]
    l = np.arange(1, n + 1)
    k = np.arange(-lam, lam + 1)
    E = np.exp(-2j * np.pi * np.outer(l, k) / n)
    return y @ E / n


def smoothed_eval(curves: SmoothedCurves, j: int, t):
    """Value of the smoothed curve ``j`` (0-based) at ``t``."""
    t_arr = np.asarray(t, dtype=float)
    phase = np.exp(2j * np.pi * np.multiply.outer(t_arr, curves.frequencies))
    vals = (phase @ curves.coeffs[j]).real
    return float(vals) if t_arr.ndim == 0 else vals


def variance_V(lam: int, n: int) -> float:
    if lam < 0 or n < 1:
        raise ValueError("need lam >= 0 and n >= 1")
    return (2 * lam + 1) / n


def bias_B(lam: int, n: int, s: float) -> float:
    """``(2 lam + 1)/n + lam^(-2s)``."""
    if lam < 1:
        raise ValueError("bias term needs lam >= 1")
    if not s > 0:
        raise ValueError("smoothness s must be > 0")
    return variance_V(lam, n) + float(lam) ** (-2.0 * s)
