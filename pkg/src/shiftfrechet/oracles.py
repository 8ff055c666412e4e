"""
Reference computations that avoid the Fourier shortcuts used by the main
code path: time-domain quadrature of the criteria, finite differences, and
exhaustive grid search over the zero-sum set for two or three curves.
"""

from __future__ import annotations

import numpy as np

from .model import FourierTemplate, eval_template
from .smoothing import SmoothedCurves, smoothed_eval


def criterion_M_quadrature(curves: SmoothedCurves, theta, points: int | None = None) -> float:
    """Trapezoid rule on the aligned smoothed curves (exact for trig polynomials
    when ``points > 2 lam``)."""
    theta = np.asarray(theta, dtype=float)
    m = points or 16 * (curves.lam + 1)
    t = np.arange(m) / m
    F = np.stack([smoothed_eval(curves, j, t + theta[j]) for j in range(curves.J)])
    return float(np.sum((F - F.mean(axis=0)) ** 2) / (m * curves.J))


def criterion_D_quadrature(template: FourierTemplate, theta, theta_star, points: int | None = None) -> float:
    theta = np.asarray(theta, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    m = points or 16 * (template.K + 1)
    t = np.arange(m) / m
    F = np.stack([eval_template(template, t - ts + th) for th, ts in zip(theta, theta_star)])
    return float(np.mean(np.sum((F - F.mean(axis=0)) ** 2, axis=1)) / m)


def finite_difference_grad(fun, theta, h: float = 1e-6) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    g = np.empty_like(theta)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        g[j] = (fun(theta + e) - fun(theta - e)) / (2 * h)
    return g


def _mean_sq_modulus(c, ks, thetas):
    """``sum_k |abar_k|^2`` for a batch of shift vectors (rows of ``thetas``)."""
    ph = np.exp(2j * np.pi * thetas[:, :, None] * ks[None, None, :])
    abar = (ph * c[None]).mean(axis=1)
    return np.sum(np.abs(abar) ** 2, axis=1)


def grid_search_theta0(curves: SmoothedCurves, resolution: float = 2e-4):
    """Exhaustive minimization over ``{sum theta = 0} cap [-1/2, 1/2]^J`` for J = 2, 3.

    Uses ``M = 1/J sum |c|^2 - sum_k |abar_k|^2``. Returns ``(theta, value)``.
    """
    c = curves.coeffs
    ks = curves.frequencies.astype(float)
    J = c.shape[0]
    energy = float(np.sum(np.abs(c) ** 2)) / J
    m = int(round(1.0 / resolution))
    axis = -0.5 + np.arange(m + 1) / m
    if J == 2:
        thetas = np.stack([axis, -axis], axis=1)
        vals = energy - _mean_sq_modulus(c, ks, thetas)
        i = int(np.argmin(vals))
        return thetas[i], float(vals[i])
    if J != 3:
        raise ValueError("grid search is only provided for J = 2 or 3")
    if m % 2:
        raise ValueError("resolution must divide 1/2")
    # grid index i <-> i/m - 1/2, so -a-b sits at index 3m/2 - i - j
    E = np.exp(2j * np.pi * np.outer(axis, ks))
    best_val, best = np.inf, None
    for i in range(m + 1):
        j = np.arange(m + 1)
        p = 3 * m // 2 - i - j
        ok = (p >= 0) & (p <= m)
        j, p = j[ok], p[ok]
        abar = (c[0] * E[i] + c[1] * E[j] + c[2] * E[p]) / 3.0
        vals = energy - np.sum(np.abs(abar) ** 2, axis=1)
        q = int(np.argmin(vals))
        if vals[q] < best_val:
            best_val, best = float(vals[q]), np.array([axis[i], axis[j[q]], axis[p[q]]])
    return best, best_val
