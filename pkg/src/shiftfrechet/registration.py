"""
Shift estimation by minimizing the Procrustean criterion

    M(theta) = 1/J sum_j || f_j(. + theta_j) - 1/J sum_j' f_j'(. + theta_j') ||^2

over the zero-sum set, and reconstruction of the Frechet mean.

In Fourier form, with ``d_jk = c_jk exp(i 2 pi k theta_j)`` and
``abar_k = mean_j d_jk``, ``M = 1/J sum_jk |d_jk - abar_k|^2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import FourierTemplate, ShiftVector, l2_distance_sq, shift_template
from .smoothing import SmoothedCurves
from .synth import make_rng

log = logging.getLogger(__name__)

CONSTRAINTS = ("theta0", "theta1")


@dataclass(frozen=True)
class OptimizerOptions:
    grid_points_per_shift: int = 64
    max_iters: int = 500
    grad_tol: float = 1e-8
    step_shrink: float = 0.5
    multistarts: int = 5
    seed: int = 0
    init_sweeps: int = 2
    armijo: float = 1e-4
    constraint: str = "theta0"

    def __post_init__(self):
        for name in ("grid_points_per_shift", "max_iters", "multistarts"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.init_sweeps < 0:
            raise ValueError("init_sweeps must be >= 0")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be > 0")
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must be in (0, 1)")
        if self.constraint not in CONSTRAINTS:
            raise ValueError(f"constraint must be one of {CONSTRAINTS}")

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerOptions":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown optimizer option(s): {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True, eq=False)
class RegistrationResult:
    theta_hat: ShiftVector
    frechet_mean: FourierTemplate
    criterion_value: float
    iterations: int
    converged: bool
    multistart_values: list = field(default_factory=list)
    history: list = field(default_factory=list)
    grad_norm: float = float("nan")

    def to_dict(self) -> dict:
        fm = self.frechet_mean
        return {
            "theta_hat": self.theta_hat.values.tolist(),
            "frechet_mean": {"K": fm.K, "re": fm.coeffs.real.tolist(), "im": fm.coeffs.imag.tolist()},
            "criterion_value": self.criterion_value,
            "iterations": self.iterations,
            "converged": self.converged,
            "grad_norm": self.grad_norm,
            "multistart_values": list(self.multistart_values),
        }


# ---------------------------------------------------------------------------
# criterion

def _unpack(curves):
    if isinstance(curves, SmoothedCurves):
        return curves.coeffs, curves.frequencies.astype(float)
    c = np.atleast_2d(np.asarray(curves, dtype=complex))
    lam = (c.shape[1] - 1) // 2
    return c, np.arange(-lam, lam + 1, dtype=float)


def _theta(theta, J):
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != J:
        raise ValueError(f"shift vector has length {theta.size}, expected {J}")
    return theta


def criterion_M(curves, theta) -> float:
    c, ks = _unpack(curves)
    return kernels.criterion_grad(c, ks, _theta(theta, c.shape[0]))[0]


def grad_M(curves, theta) -> np.ndarray:
    c, ks = _unpack(curves)
    return kernels.criterion_grad(c, ks, _theta(theta, c.shape[0]))[1]


def aligned_mean(curves, theta) -> np.ndarray:
    """``abar_k(theta)``: coefficients of the mean of the aligned curves."""
    c, ks = _unpack(curves)
    theta = _theta(theta, c.shape[0])
    return (c * np.exp(2j * np.pi * np.outer(theta, ks))).mean(axis=0)


def frechet_mean(curves, theta) -> FourierTemplate:
    return FourierTemplate(aligned_mean(curves, theta))


# ---------------------------------------------------------------------------
# constraint sets

def project_theta0(theta: np.ndarray) -> np.ndarray:
    theta = theta - theta.mean()
    for _ in range(50):
        if np.all(np.abs(theta) <= 0.5):
            break
        theta = np.clip(theta, -0.5, 0.5)
        theta = theta - theta.mean()
    return theta


def project_theta1(theta: np.ndarray) -> np.ndarray:
    theta = np.clip(theta, -0.5, 0.5)
    theta[0] = 0.0
    return theta


def _projections(constraint):
    if constraint == "theta0":
        return project_theta0, lambda g: g - g.mean()
    def tangent1(g):
        g = g.copy()
        g[0] = 0.0
        return g
    return project_theta1, tangent1


# ---------------------------------------------------------------------------
# optimizer

def _procrustes_init(c, ks, theta, opts, project):
    G = opts.grid_points_per_shift
    candidates = -0.5 + np.arange(G) / G
    for _ in range(opts.init_sweeps):
        abar = (c * np.exp(2j * np.pi * np.outer(theta, ks))).mean(axis=0)
        theta = project(kernels.align_sweep(c, ks, abar, candidates, theta))
    return theta


def _descend(c, ks, theta, opts, project, tangent):
    """Projected gradient descent with Barzilai-Borwein trial steps and
    Armijo backtracking. Returns ``(theta, value, grad_norm, iters, history)``."""
    J = c.shape[0]
    energy = float(np.sum(np.abs(c) ** 2)) / J
    # rounding floor of M: below this, decreases cannot be resolved
    slack = 64 * np.finfo(float).eps * max(energy, 1e-300)
    curvature = 2 * (2 * np.pi) ** 2 * float(np.sum(ks**2 * np.mean(np.abs(c) ** 2, axis=0))) / J
    step = 1.0 / curvature if curvature > 0 else 1.0

    value, g = kernels.criterion_grad(c, ks, theta)
    pg = tangent(g)
    history = [value]
    it = 0
    while it < opts.max_iters and np.linalg.norm(pg) > opts.grad_tol:
        s = step
        for _ in range(60):
            trial = project(theta - s * pg)
            tv, tg = kernels.criterion_grad(c, ks, trial)
            if tv <= value - opts.armijo * float(pg @ (theta - trial)) + slack:
                break
            s *= opts.step_shrink
        else:
            log.debug("line search failed at iteration %d, |pg|=%.3e", it, np.linalg.norm(pg))
            break
        it += 1
        tpg = tangent(tg)
        dx, dg = trial - theta, tpg - pg
        curv = float(dx @ dg)
        step = float(dx @ dx) / curv if curv > 0 else 2 * s
        theta, value, pg = trial, tv, tpg
        history.append(value)
    return theta, value, float(np.linalg.norm(pg)), it, history


def estimate_shifts(curves, opts: OptimizerOptions | None = None) -> RegistrationResult:
    """Minimize the criterion over the zero-sum set (or the reference-curve
    set when ``opts.constraint == "theta1"``).

    Every start (the zero vector, then random ones) is refined by a Procrustes
    alignment pass and projected gradient descent. The best local optimum
    wins; near-ties go to the smallest norm.
    """
    opts = opts or OptimizerOptions()
    c, ks = _unpack(curves)
    J = c.shape[0]
    if J < 2:
        raise ValueError("need at least two curves to register")
    project, tangent = _projections(opts.constraint)

    rng = make_rng(opts.seed)
    starts = [np.zeros(J)]
    starts += [rng.uniform(-0.25, 0.25, J) for _ in range(opts.multistarts - 1)]

    runs = []
    for start in starts:
        theta = _procrustes_init(c, ks, project(start), opts, project)
        runs.append(_descend(c, ks, theta, opts, project, tangent))

    values = [r[1] for r in runs]
    energy = float(np.sum(np.abs(c) ** 2)) / J
    tol = 1e-12 * max(energy, 1.0)
    best_val = min(values)
    near = [r for r in runs if r[1] <= best_val + tol]
    theta, _, gnorm, iters, history = min(near, key=lambda r: float(r[0] @ r[0]))

    value = criterion_M(curves, theta)
    return RegistrationResult(
        theta_hat=ShiftVector(theta, centered=opts.constraint == "theta0"),
        frechet_mean=frechet_mean(curves, theta),
        criterion_value=value,
        iterations=iters,
        converged=gnorm <= opts.grad_tol,
        multistart_values=values,
        history=history,
        grad_norm=gnorm,
    )


# ---------------------------------------------------------------------------
# noiseless oracle and identifiability

def criterion_D(template: FourierTemplate, theta, theta_star) -> float:
    """Noiseless criterion ``sum_k |c_k|^2 (1 - |mean_j exp(i2pi k (theta_j - theta*_j))|^2)``."""
    theta = np.asarray(theta, dtype=float).ravel()
    theta_star = np.asarray(theta_star, dtype=float).ravel()
    if theta.size != theta_star.size:
        raise ValueError("theta and theta_star differ in length")
    k = template.frequencies
    m = np.exp(2j * np.pi * np.outer(k, theta - theta_star)).mean(axis=1)
    return float(np.sum(np.abs(template.coeffs) ** 2 * (1.0 - np.abs(m) ** 2)))


def prop41_constant(template: FourierTemplate, rho: float) -> float:
    """``2 |c_1|^2 * 2 pi^2 cos(8 pi rho)``."""
    return 2 * abs(template.coeff(1)) ** 2 * 2 * np.pi**2 * np.cos(8 * np.pi * rho)


def prop41_gap(template: FourierTemplate, rho: float, theta, theta_star) -> tuple[float, float]:
    """Both sides of the quadratic lower bound on ``D`` around the centered truth.

    Returns ``(D(theta) - D(theta*_0), C(f, rho) / J * |theta - theta*_0|^2)``.
    """
    if not 0 < rho < 1 / 16:
        raise ValueError(f"rho must lie in (0, 1/16), got {rho}")
    theta = np.asarray(theta, dtype=float).ravel()
    theta_star = np.asarray(theta_star, dtype=float).ravel()
    if theta.size != theta_star.size:
        raise ValueError("theta and theta_star differ in length")
    if abs(theta.sum()) > 1e-10:
        raise ValueError("theta must sum to zero")
    if np.any(np.abs(theta) > rho) or np.any(np.abs(theta_star) > rho):
        raise ValueError(f"all shifts must lie in [-{rho}, {rho}]")
    target = theta_star - theta_star.mean()
    lhs = criterion_D(template, theta, theta_star) - criterion_D(template, target, theta_star)
    rhs = prop41_constant(template, rho) * float(np.sum((theta - target) ** 2)) / theta.size
    return lhs, rhs


# ---------------------------------------------------------------------------
# error metrics

def shift_error(theta_hat, truth, mode: str = "centered") -> float:
    """``1/J |theta_hat - target|^2`` with target the truth (``raw``) or the
    centered truth (``centered``)."""
    th = np.asarray(theta_hat, dtype=float).ravel()
    tr = np.asarray(truth, dtype=float).ravel()
    if th.size != tr.size:
        raise ValueError("length mismatch")
    if mode == "centered":
        tr = tr - tr.mean()
    elif mode != "raw":
        raise ValueError(f"mode must be 'raw' or 'centered', got {mode!r}")
    return float(np.sum((th - tr) ** 2)) / th.size


def pattern_error(f_hat: FourierTemplate, template: FourierTemplate, theta_bar_star: float = 0.0) -> float:
    """``|f_hat - f(. - theta_bar_star)|^2_{L2}``."""
    return l2_distance_sq(f_hat, shift_template(template, theta_bar_star))
