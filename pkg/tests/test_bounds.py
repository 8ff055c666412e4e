import inspect

import numpy as np
import pytest
from scipy import integrate, optimize

from shiftfrechet import bounds
from shiftfrechet.bounds import (
    BoundInputs,
    fisher_info,
    shift_bound_for,
    sup_derivative,
    van_trees_shift_bound,
    van_trees_sim_bound,
)
from shiftfrechet.model import FourierTemplate, ShiftDensitySpec, paper_template

RC = ShiftDensitySpec("raised-cosine", 0.2)


def dense_sup(points):
    t = np.arange(points) / points
    return np.max(np.abs(18 * np.pi * np.cos(2 * np.pi * t) - 16 * np.pi * np.sin(8 * np.pi * t)))


def trapezoid_fisher(rho, points=10**6):
    # independent of the package: closed-form density, numeric derivative-free integrand
    x = np.linspace(-rho * (1 - 1e-8), rho * (1 - 1e-8), points)
    g = np.cos(np.pi * x / (2 * rho)) ** 2 / rho
    dg = -np.pi / (2 * rho**2) * np.sin(np.pi * x / rho)
    return integrate.trapezoid(dg**2 / g, x)


class TestSupDerivative:
    def test_constant(self):
        assert sup_derivative(FourierTemplate.constant(3.0)) == 0.0

    def test_cosine(self):
        f = FourierTemplate.from_dict({1: 0.5, -1: 0.5})
        assert sup_derivative(f) == pytest.approx(2 * np.pi, rel=1e-12)

    def test_paper_template(self):
        # a plain grid max is off by O(h^2): ~2e-6 relative at 2^12 points, so
        # the grid pair certifying 1e-6 is 2^15 vs 2^18
        coarse, fine = dense_sup(2**15), dense_sup(2**18)
        assert abs(coarse - fine) <= 1e-6 * fine
        assert sup_derivative(paper_template()) == pytest.approx(fine, rel=1e-6)

    def test_paper_template_stationary_point(self):
        # |f'| peaks where f'' vanishes; bracket the root around the grid argmax
        d2 = lambda t: -36 * np.pi**2 * np.sin(2 * np.pi * t) - 128 * np.pi**2 * np.cos(8 * np.pi * t)
        m = 2**15
        t = np.arange(m) / m
        t0 = t[np.argmax(np.abs(18 * np.pi * np.cos(2 * np.pi * t) - 16 * np.pi * np.sin(8 * np.pi * t)))]
        root = optimize.brentq(d2, t0 - 2 / m, t0 + 2 / m, xtol=1e-15)
        exact = abs(18 * np.pi * np.cos(2 * np.pi * root) - 16 * np.pi * np.sin(8 * np.pi * root))
        assert sup_derivative(paper_template()) == pytest.approx(exact, rel=1e-10)


class TestFisher:
    def test_against_trapezoid(self):
        assert fisher_info(RC) == pytest.approx(trapezoid_fisher(0.2), rel=1e-4)

    def test_scaling(self):
        ratio = fisher_info(ShiftDensitySpec("raised-cosine", 0.1)) / fisher_info(RC)
        assert ratio == pytest.approx(4.0, abs=1e-6)

    def test_uniform_rejected(self):
        with pytest.raises(ValueError, match="Fisher information undefined"):
            fisher_info(ShiftDensitySpec("uniform", 0.2))


class TestVanTrees:
    def test_examples(self):
        assert van_trees_shift_bound(BoundInputs(100, 1.0, 1.0, 0.0)) == pytest.approx(0.01)
        assert van_trees_shift_bound(BoundInputs(100, 1.0, 1.0, 100.0)) == pytest.approx(0.005)

    def test_n_comparison(self):
        b512 = shift_bound_for(paper_template(), RC, 512, 2.0)
        b1024 = shift_bound_for(paper_template(), RC, 1024, 2.0)
        assert 0.5 < b1024 / b512 < 1

    def test_sigma_zero(self):
        assert van_trees_shift_bound(BoundInputs(10, 0.0, 2.0, 5.0)) == 0.0

    def test_sim_bound(self):
        inp = BoundInputs(64, 2.0, 3.0, 10.0)
        assert van_trees_sim_bound(inp, 9.0) == van_trees_shift_bound(inp)
        assert van_trees_sim_bound(BoundInputs(1, 1.0, 1.0, 0.0), 1.0) == 1.0
        base = BoundInputs(50, 1.5, 1.0, 0.0)
        assert van_trees_sim_bound(base, 4.0) == pytest.approx(van_trees_sim_bound(base, 2.0) / 2)
        for bad in (0.0, -1.0):
            with pytest.raises(ValueError):
                van_trees_sim_bound(base, bad)

    def test_monotonicity(self):
        def b(**kw):
            d = dict(n=256, sigma=2.0, sup_deriv=100.0, fisher_g=250.0)
            d.update(kw)
            return van_trees_shift_bound(BoundInputs(**d))
        assert b(n=512) < b(n=256)
        assert b(sigma=3.0) > b(sigma=2.0)
        assert b(fisher_g=300.0) < b()
        assert b(sup_deriv=120.0) < b()

    def test_limit(self):
        vals = [van_trees_shift_bound(BoundInputs(n, 2.0, 100.0, 250.0)) for n in 10.0 ** np.arange(2, 14, 2)]
        assert vals[-1] < 1e-15 and all(x > y for x, y in zip(vals, vals[1:]))

    def test_no_J_parameter(self):
        for fn in (van_trees_shift_bound, van_trees_sim_bound, shift_bound_for):
            assert "J" not in inspect.signature(fn).parameters
        assert "J" not in {f for f in BoundInputs.__dataclass_fields__}

    @pytest.mark.parametrize("kw", [
        {"n": 0}, {"sigma": -1.0}, {"sup_deriv": 0.0}, {"fisher_g": np.inf}, {"fisher_g": -1.0},
        {"mode": "other"},
    ])
    def test_input_validation(self, kw):
        d = dict(n=10, sigma=1.0, sup_deriv=1.0, fisher_g=1.0)
        d.update(kw)
        with pytest.raises(ValueError):
            BoundInputs(**d)

    def test_stationary_mode_carries_gamma(self):
        inp = BoundInputs(10, 1.0, 1.0, 1.0, mode="stationary", gamma=12.3)
        assert van_trees_shift_bound(inp) == van_trees_shift_bound(BoundInputs(10, 1.0, 1.0, 1.0))


def test_module_has_no_J_anywhere():
    src = inspect.getsource(bounds)
    assert "def " in src and ", J" not in src and "(J" not in src
