import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from shiftfrechet.model import (
    DesignGrid,
    FourierTemplate,
    ShiftDensitySpec,
    ShiftVector,
    default_psi,
    eval_template,
    l2_distance_sq,
    paper_template,
    shift_template,
)

from .conftest import random_template

COS = FourierTemplate.from_dict({1: 0.5, -1: 0.5})


def test_grid_points():
    g = DesignGrid(8)
    assert np.allclose(g.points, np.arange(1, 9) / 8)
    assert np.all(np.diff(g.points) > 0)
    assert g.points[0] > 0 and g.points[-1] == 1.0


@pytest.mark.parametrize("n", [0, 2, 2.5])
def test_grid_rejects_small(n):
    with pytest.raises(ValueError):
        DesignGrid(n)


def test_eval_examples():
    assert eval_template(FourierTemplate.constant(1.0), 0.37) == 1.0
    assert eval_template(paper_template(), 0.0) == pytest.approx(2.0, abs=1e-14)
    assert eval_template(COS, 0.25) == pytest.approx(0.0, abs=1e-15)


def test_paper_template_matches_closed_form():
    t = np.linspace(0, 1, 101)
    assert np.allclose(paper_template()(t), 9 * np.sin(2 * np.pi * t) + 2 * np.cos(8 * np.pi * t),
                       atol=1e-13)


@given(st.floats(-5, 5))
def test_eval_periodic(t):
    f = paper_template()
    assert eval_template(f, t) == pytest.approx(eval_template(f, t + 1), abs=1e-12)


def test_l2_distance_examples():
    f = paper_template()
    assert l2_distance_sq(f, f) == 0
    assert l2_distance_sq(f, FourierTemplate.zero()) == pytest.approx(42.5)
    a = FourierTemplate.from_dict({1: 1, -1: 1})
    b = FourierTemplate.from_dict({1: 1, -1: 1, 2: 1j, -2: -1j})
    assert l2_distance_sq(a, b) == pytest.approx(2.0)
    assert l2_distance_sq(a, b) == l2_distance_sq(b, a)


def test_shift_examples():
    f = paper_template()
    assert np.array_equal(shift_template(f, 0.0).coeffs, f.coeffs)
    s = shift_template(FourierTemplate.from_dict({1: 1, -1: 1}), 0.5)
    assert s.coeff(1) == pytest.approx(-1) and s.coeff(-1) == pytest.approx(-1)
    back = shift_template(shift_template(f, 0.137), -0.137)
    assert np.allclose(back.coeffs, f.coeffs, atol=1e-14)


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_shift_group_action(a, b):
    f = paper_template()
    lhs = shift_template(shift_template(f, a), b).coeffs
    assert np.max(np.abs(lhs - shift_template(f, a + b).coeffs)) < 1e-12


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.floats(-0.5, 0.5))
def test_shift_is_translation_and_isometry(seed, theta):
    f = random_template(np.random.default_rng(seed))
    t = np.linspace(0, 1, 37)
    g = shift_template(f, theta)
    assert np.allclose(g(t), f(t - theta), atol=1e-12)
    assert g.norm_sq() == pytest.approx(f.norm_sq(), rel=1e-13)
    assert np.allclose(g.coeffs, np.conj(g.coeffs[::-1]))


def test_parseval_against_trapezoid(rng):
    for _ in range(20):
        f = random_template(rng)
        m = 8 * f.max_freq
        t = np.arange(m) / m
        quad = np.mean(f(t) ** 2)
        assert quad == pytest.approx(f.norm_sq(), rel=1e-8)


def test_hermitian_enforced():
    with pytest.raises(ValueError):
        FourierTemplate(np.array([1.0, 0.0, 2.0]))
    with pytest.raises(ValueError):
        FourierTemplate(np.array([1.0, 0.0]))


def test_max_freq_and_padding():
    f = FourierTemplate(np.array([0, 1, 0, 1, 0], dtype=complex))
    assert f.K == 2 and f.max_freq == 1
    assert paper_template().max_freq == 4
    assert paper_template().padded(2).size == 5


def test_derivative_and_sobolev():
    f = COS
    assert np.allclose(f.derivative()(np.array([0.25])), -2 * np.pi)
    # (1 + 1) * (0.25 + 0.25)
    assert f.sobolev_norm_sq(1) == pytest.approx(1.0)
    assert f.in_sobolev_ball(1, A=1.5)
    assert not f.in_sobolev_ball(1, A=1.0)


def test_default_psi_unit_norm():
    assert default_psi().norm_sq() == pytest.approx(1.0, abs=1e-14)


class TestShiftVector:
    def test_centered_check(self):
        ShiftVector([0.1, -0.1], centered=True)
        with pytest.raises(ValueError):
            ShiftVector([0.1, 0.1], centered=True)

    def test_range_and_length(self):
        with pytest.raises(ValueError):
            ShiftVector([0.6])
        with pytest.raises(ValueError):
            ShiftVector([])

    def test_projections(self):
        v = ShiftVector([0.2, 0.1, 0.0])
        assert np.allclose(v.to_theta0().values, [0.1, 0.0, -0.1])
        assert v.to_theta0().centered
        assert np.allclose(v.to_theta1().values, [0.0, -0.1, -0.2])
        assert np.asarray(v).shape == (3,)


class TestDensity:
    def test_raised_cosine_normalized(self):
        d = ShiftDensitySpec("raised-cosine", 0.2)
        val, _ = integrate.quad(lambda x: float(d.pdf(x)), -0.2, 0.2, epsabs=0, epsrel=1e-13)
        assert val == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("kind", ["uniform", "raised-cosine"])
    def test_cdf_is_integral_of_pdf(self, kind):
        d = ShiftDensitySpec(kind, 0.15)
        for x in (-0.15, -0.07, 0.0, 0.05, 0.15):
            val, _ = integrate.quad(lambda s: float(d.pdf(s)), -0.15, x, epsabs=1e-13)
            assert float(d.cdf(x)) == pytest.approx(val, abs=1e-10)
        u = np.linspace(0, 1, 11)
        assert np.allclose(d.cdf(d.ppf(u)), u, atol=1e-12)

    def test_derivative_matches_fd(self):
        d = ShiftDensitySpec("raised-cosine", 0.2)
        x = np.linspace(-0.19, 0.19, 9)
        fd = (d.pdf(x + 1e-7) - d.pdf(x - 1e-7)) / 2e-7
        assert np.allclose(d.dpdf(x), fd, rtol=1e-6, atol=1e-6)

    @pytest.mark.parametrize("width", [0.5, 0.7, -0.1])
    def test_rejects_bad_support(self, width):
        with pytest.raises(ValueError):
            ShiftDensitySpec("uniform", width)

    def test_parse(self):
        d = ShiftDensitySpec.parse("raised-cosine:0.2")
        assert d.kind == "raised-cosine" and d.half_width == 0.2
        with pytest.raises(ValueError):
            ShiftDensitySpec.parse("gaussian:0.2")
