"""
Core value types: design grids, periodic templates stored as Fourier
coefficients, shift vectors, datasets and shift densities.

Every periodic function on [0, 1) is represented by its coefficients
``c_k`` for ``k = -K..K`` so that shifting, smoothing and the registration
criterion are all diagonal operations and off-grid evaluation is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

HERMITIAN_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DesignGrid:
    """Equispaced design ``t_l = l/n`` for ``l = 1..n``."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"grid size must be an integer >= 3, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def points(self) -> np.ndarray:
        return np.arange(1, self.n + 1, dtype=float) / self.n


@dataclass(frozen=True, eq=False)
class FourierTemplate:
    """Real periodic function given by coefficients on frequencies ``-K..K``.

    ``coeffs[K + k]`` holds ``c_k``. Hermitian symmetry is checked on
    construction and then enforced exactly.
    """

    coeffs: np.ndarray
    sobolev_radius: Optional[float] = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coefficient vector must be 1-D with odd length 2K+1")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
        if np.max(np.abs(c - np.conj(c[::-1]))) > HERMITIAN_TOL * scale:
            raise ValueError("coefficients are not Hermitian (c_{-k} != conj(c_k))")
        c = 0.5 * (c + np.conj(c[::-1]))
        object.__setattr__(self, "coeffs", _frozen(c))

    # construction helpers

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, complex], **kw) -> "FourierTemplate":
        if not coeffs:
            return cls.zero()
        K = max(abs(int(k)) for k in coeffs)
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, v in coeffs.items():
            c[K + int(k)] = v
        return cls(c, **kw)

    @classmethod
    def zero(cls) -> "FourierTemplate":
        return cls(np.zeros(1, dtype=complex))

    @classmethod
    def constant(cls, value: float) -> "FourierTemplate":
        return cls(np.array([value], dtype=complex))

    # views

    @property
    def K(self) -> int:
        """Storage bandwidth (may exceed ``max_freq`` if high coefficients are 0)."""
        return (self.coeffs.size - 1) // 2

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    @property
    def max_freq(self) -> int:
        nz = np.nonzero(self.coeffs)[0]
        if nz.size == 0:
            return 0
        return int(np.max(np.abs(nz - self.K)))

    def coeff(self, k: int) -> complex:
        if abs(k) > self.K:
            return 0j
        return complex(self.coeffs[self.K + k])

    def as_dict(self) -> dict[int, complex]:
        return {int(k): complex(v) for k, v in zip(self.frequencies, self.coeffs) if v != 0}

    def padded(self, K: int) -> np.ndarray:
        """Coefficients on ``-K..K`` (zero padded or truncated)."""
        out = np.zeros(2 * K + 1, dtype=complex)
        m = min(K, self.K)
        out[K - m:K + m + 1] = self.coeffs[self.K - m:self.K + m + 1]
        return out

    def truncated(self, K: int) -> "FourierTemplate":
        return FourierTemplate(self.padded(K), self.sobolev_radius)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def derivative(self) -> "FourierTemplate":
        return FourierTemplate(2j * np.pi * self.frequencies * self.coeffs)

    def sobolev_norm_sq(self, s: float) -> float:
        k = self.frequencies.astype(float)
        return float(np.sum((1.0 + k**2) ** s * np.abs(self.coeffs) ** 2))

    def in_sobolev_ball(self, s: float, A: Optional[float] = None) -> bool:
        A = self.sobolev_radius if A is None else A
        if A is None:
            raise ValueError("no Sobolev radius given")
        return self.sobolev_norm_sq(s) < A

    def __call__(self, t):
        return eval_template(self, t)

    def __add__(self, other: "FourierTemplate") -> "FourierTemplate":
        K = max(self.K, other.K)
        return FourierTemplate(self.padded(K) + other.padded(K))

    def __mul__(self, scalar: float) -> "FourierTemplate":
        return FourierTemplate(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"FourierTemplate(max_freq={self.max_freq}, coeffs={self.as_dict()})"


def paper_template() -> FourierTemplate:
    """f(t) = 9 sin(2 pi t) + 2 cos(8 pi t)."""
    return FourierTemplate.from_dict({1: -4.5j, -1: 4.5j, 4: 1.0, -4: 1.0})


def default_psi() -> FourierTemplate:
    """sqrt(2/3) (1 + cos 2 pi t): positive, smooth, unit L2 norm."""
    a = np.sqrt(2.0 / 3.0)
    return FourierTemplate.from_dict({0: a, 1: a / 2, -1: a / 2})


TEMPLATES = {"paper": paper_template}


def template_by_name(name: str) -> FourierTemplate:
    try:
        return TEMPLATES[name]()
    except KeyError:
        raise ValueError(f"unknown template {name!r}; known: {sorted(TEMPLATES)}") from None


def eval_template(template: FourierTemplate, t) -> Any:
    """Evaluate ``sum_k Re(c_k exp(i 2 pi k t))`` exactly at arbitrary ``t``."""
    t_arr = np.asarray(t, dtype=float)
    k = template.frequencies
    phase = np.exp(2j * np.pi * np.multiply.outer(t_arr, k))
    vals = (phase @ template.coeffs).real
    return float(vals) if t_arr.ndim == 0 else vals


def l2_distance_sq(a: FourierTemplate, b: FourierTemplate) -> float:
    K = max(a.K, b.K)
    return float(np.sum(np.abs(a.padded(K) - b.padded(K)) ** 2))


def shift_template(template: FourierTemplate, theta: float) -> FourierTemplate:
    """Return ``t -> f(t - theta)``: rotate ``c_k`` by ``exp(-i 2 pi k theta)``."""
    k = template.frequencies
    return FourierTemplate(template.coeffs * np.exp(-2j * np.pi * k * theta),
                           template.sobolev_radius)


@dataclass(frozen=True, eq=False)
class ShiftVector:
    """J real shifts, in units of the period.

    ``centered=True`` asserts membership in the zero-sum set.
    """

    values: np.ndarray
    centered: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 1:
            raise ValueError("a shift vector needs at least one entry")
        if not np.all(np.isfinite(v)):
            raise ValueError("shifts must be finite")
        if np.any(np.abs(v) > 0.5 + 1e-12):
            raise ValueError("shifts must lie in [-1/2, 1/2]")
        if self.centered and abs(v.sum()) > 1e-12 * max(1, v.size):
            raise ValueError(f"centered shift vector sums to {v.sum():.3e}, not 0")
        object.__setattr__(self, "values", _frozen(v))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.values.size

    @property
    def J(self) -> int:
        return self.values.size

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    def to_theta0(self) -> "ShiftVector":
        """Project onto the zero-sum set: ``theta - mean(theta)``."""
        return ShiftVector(self.values - self.values.mean(), centered=True)

    def to_theta1(self) -> "ShiftVector":
        """Reference-curve normalization: ``theta - theta_1``."""
        return ShiftVector(self.values - self.values[0])

    def __repr__(self):
        return f"ShiftVector({np.array2string(self.values, precision=4)}, centered={self.centered})"


@dataclass(frozen=True)
class ShiftDensitySpec:
    """Density of the random shifts, supported on ``[-half_width, half_width]``.

    ``raised-cosine`` is ``(1/r) cos^2(pi x / (2 r))``; it is C^1 and vanishes
    at the support boundary, so its Fisher information is finite.
    """

    kind: str
    half_width: float

    KINDS = ("uniform", "raised-cosine")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown density kind {self.kind!r}; use one of {self.KINDS}")
        r = float(self.half_width)
        if not r < 0.5:
            raise ValueError(f"support half-width must be < 1/2, got {r}")
        if r < 0 or (r == 0 and self.kind != "uniform"):
            raise ValueError(f"support half-width must be positive, got {r}")
        object.__setattr__(self, "half_width", r)

    @classmethod
    def parse(cls, text: str) -> "ShiftDensitySpec":
        """Parse ``"kind:half_width"``, e.g. ``"raised-cosine:0.2"``."""
        kind, sep, width = text.partition(":")
        if not sep:
            raise ValueError(f"density must look like 'kind:half_width', got {text!r}")
        return cls(kind.strip(), float(width))

    def __str__(self):
        return f"{self.kind}:{self.half_width:g}"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        r = self.half_width
        inside = np.abs(x) <= r
        if self.kind == "uniform":
            return np.where(inside, 1.0 / (2 * r), 0.0)
        return np.where(inside, np.cos(np.pi * x / (2 * r)) ** 2 / r, 0.0)

    def dpdf(self, x):
        x = np.asarray(x, dtype=float)
        r = self.half_width
        if self.kind == "uniform":
            return np.zeros_like(x)
        inside = np.abs(x) <= r
        return np.where(inside, -np.pi / (2 * r * r) * np.sin(np.pi * x / r), 0.0)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), -self.half_width, self.half_width)
        r = self.half_width
        if self.kind == "uniform":
            return (x + r) / (2 * r)
        return (x + r) / (2 * r) + np.sin(np.pi * x / r) / (2 * np.pi)

    def ppf(self, u):
        """Inverse CDF; bisection for the raised cosine (the CDF is monotone)."""
        u = np.asarray(u, dtype=float)
        r = self.half_width
        if self.kind == "uniform":
            return (2 * u - 1) * r
        lo = np.full_like(u, -r)
        hi = np.full_like(u, r)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class Truth:
    """Ground truth behind a synthetic dataset."""

    shifts: ShiftVector
    template: FourierTemplate
    sigma: float
    processes: Optional[list] = None
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Dataset:
    """J x n observation matrix on an equispaced grid."""

    y: np.ndarray
    grid: DesignGrid
    truth: Optional[Truth] = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 2 or y.shape[1] != self.grid.n:
            raise ValueError(f"observations must be J x {self.grid.n}, got {y.shape}")
        if self.truth is not None and self.truth.shifts.J != y.shape[0]:
            raise ValueError("truth shifts do not match number of curves")
        object.__setattr__(self, "y", _frozen(y))

    @property
    def J(self) -> int:
        return self.y.shape[0]

    @property
    def n(self) -> int:
        return self.grid.n
