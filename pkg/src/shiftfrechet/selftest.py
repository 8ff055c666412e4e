"""Fast randomized property checks, runnable without pytest."""

from __future__ import annotations

import numpy as np

from .bounds import BoundInputs, fisher_info, sup_derivative, van_trees_shift_bound
from .model import FourierTemplate, ShiftDensitySpec, paper_template, shift_template
from .oracles import (
    criterion_D_quadrature,
    criterion_M_quadrature,
    finite_difference_grad,
    grid_search_theta0,
)
from .registration import (
    criterion_D,
    criterion_M,
    estimate_shifts,
    grad_M,
    prop41_gap,
)
from .smoothing import SmoothedCurves, dft_coeffs
from .synth import make_rng, simulate


def random_curves(rng, J, lam) -> SmoothedCurves:
    pos = rng.normal(size=(J, lam)) + 1j * rng.normal(size=(J, lam))
    c0 = rng.normal(size=(J, 1))
    return SmoothedCurves(np.hstack([np.conj(pos[:, ::-1]), c0, pos]), lam)


def random_theta0_pair(rng, J, rho):
    """``(theta, theta_star)`` with ``theta`` centered and all entries in ``[-rho, rho]``."""
    theta_star = rng.uniform(-rho, rho, J)
    theta = rng.uniform(-rho, rho, J)
    theta -= theta.mean()
    peak = np.max(np.abs(theta))
    if peak > rho:
        theta *= (rho / peak) * (1 - 1e-12)
    return theta, theta_star


def _check_gradient(rng):
    worst = 0.0
    for _ in range(20):
        cv = random_curves(rng, int(rng.integers(2, 12)), int(rng.integers(1, 8)))
        th = rng.uniform(-0.5, 0.5, cv.J)
        g = grad_M(cv, th)
        fd = finite_difference_grad(lambda x: criterion_M(cv, x), th)
        worst = max(worst, np.max(np.abs(g - fd) / np.maximum(np.abs(fd), 1e-3)))
    return worst < 1e-5, f"max rel err {worst:.2e}"


def _check_quadrature(rng):
    worst = 0.0
    f = paper_template()
    for _ in range(20):
        cv = random_curves(rng, int(rng.integers(2, 8)), int(rng.integers(1, 8)))
        th = rng.uniform(-0.5, 0.5, cv.J)
        a, b = criterion_M(cv, th), criterion_M_quadrature(cv, th)
        worst = max(worst, abs(a - b) / abs(b))
        th, ts = rng.uniform(-0.3, 0.3, 5), rng.uniform(-0.3, 0.3, 5)
        a, b = criterion_D(f, th, ts), criterion_D_quadrature(f, th, ts)
        worst = max(worst, abs(a - b) / abs(b))
    return worst < 1e-8, f"max rel err {worst:.2e}"


def _check_prop41(rng):
    f = paper_template()
    margin = np.inf
    for _ in range(200):
        J = int(rng.choice([2, 5, 20]))
        lhs, rhs = prop41_gap(f, 0.05, *random_theta0_pair(rng, J, 0.05))
        margin = min(margin, lhs - rhs)
    return margin >= 0, f"min lhs-rhs {margin:.3e}"


def _check_shift_group(rng):
    f = paper_template()
    a, b = rng.uniform(-1, 1, 2)
    lhs = shift_template(shift_template(f, a), b).coeffs
    rhs = shift_template(f, a + b).coeffs
    err = float(np.max(np.abs(lhs - rhs)))
    return err < 1e-12, f"max coeff err {err:.1e}"


def _check_recovery(rng):
    ds = simulate("SIM", 512, 10, int(rng.integers(1 << 30)), sigma=0.0, density="uniform:0.1")
    res = estimate_shifts(dft_coeffs(ds, 7))
    target = ds.truth.shifts.values - ds.truth.shifts.mean
    err = float(np.mean((res.theta_hat.values - target) ** 2))
    return err <= 1e-8, f"shift error {err:.1e}"


def _check_grid_oracle(rng):
    ds = simulate("SIM", 64, 2, int(rng.integers(1 << 30)), sigma=0.1, density="uniform:0.2")
    cv = dft_coeffs(ds, 7)
    _, best = grid_search_theta0(cv)
    val = estimate_shifts(cv).criterion_value
    return val <= best + 1e-6, f"estimate {val:.6e} vs grid {best:.6e}"


def _check_bounds(rng):
    f = paper_template()
    I1 = fisher_info(ShiftDensitySpec("raised-cosine", 0.1))
    I2 = fisher_info(ShiftDensitySpec("raised-cosine", 0.2))
    sup = sup_derivative(f)
    b = [van_trees_shift_bound(BoundInputs(n, 2.0, sup, I2)) for n in 2 ** np.arange(5, 13)]
    ok = abs(I1 / I2 - 4) < 1e-6 and all(x > y for x, y in zip(b, b[1:]))
    return ok, f"I ratio {I1 / I2:.9f}"


CHECKS = {
    "gradient vs finite differences": _check_gradient,
    "criteria vs quadrature": _check_quadrature,
    "quadratic lower bound on D": _check_prop41,
    "shift group action": _check_shift_group,
    "noiseless recovery": _check_recovery,
    "grid-search oracle (J=2)": _check_grid_oracle,
    "bound monotonicity and Fisher scaling": _check_bounds,
}


def run(seed: int = 0, echo=print) -> bool:
    rng = make_rng(seed)
    ok_all = True
    for name, check in CHECKS.items():
        ok, detail = check(rng)
        ok_all &= bool(ok)
        echo(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok_all
