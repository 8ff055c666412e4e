"""
Seeded generation of shifts, perturbation processes and datasets for the
randomly shifted curves model

    Y_j(l) = f(l/n - theta_j) + Z_j(l/n - theta_j) + sigma * eps_j(l).

Random streams come from a counter-based generator (Philox) keyed by
``(seed, *key)`` so that curve ``j`` always sees the same draws whatever the
total number of curves.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .model import (
    Dataset,
    DesignGrid,
    FourierTemplate,
    ShiftDensitySpec,
    ShiftVector,
    Truth,
    default_psi,
    eval_template,
    template_by_name,
)

log = logging.getLogger(__name__)

SCENARIOS = ("SIM", "stationary", "nonstationary")

# stream tags
_SHIFTS, _PROCESS, _NOISE = 1, 2, 3


def make_rng(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Deterministic 63-bit child seed of ``seed`` for the given key path."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


# ---------------------------------------------------------------------------
# shifts

def sample_shifts(J: int, density: ShiftDensitySpec, seed: int) -> ShiftVector:
    """J i.i.d. shifts from ``density`` by inverse-CDF sampling."""
    if J < 1:
        raise ValueError("J must be >= 1")
    if density.half_width == 0:
        return ShiftVector(np.zeros(J))
    u = make_rng(seed).random(J)
    return ShiftVector(density.ppf(u))


# ---------------------------------------------------------------------------
# perturbation processes

@dataclass(frozen=True)
class StationaryCovSpec:
    """R(t) = s^2 cosh(phi (t - 1/2)) / cosh(phi / 2) on [0, 1]."""

    varsigma: float
    phi: float

    def __post_init__(self):
        if self.varsigma < 0:
            raise ValueError("varsigma must be >= 0")
        if not self.phi > 0:
            raise ValueError("phi must be > 0")

    def cov(self, t):
        t = np.asarray(t, dtype=float)
        return self.varsigma**2 * np.cosh(self.phi * (t - 0.5)) / np.cosh(self.phi / 2)

    def spectral_mass(self, K: int) -> np.ndarray:
        """``r_k = int_0^1 R(t) exp(-i 2 pi k t) dt`` for ``k = 0..K``."""
        return self.varsigma**2 * _unit_spectral_mass(float(self.phi), int(K))

    @property
    def gamma(self) -> float:
        """``int_0^1 |R(t)| dt``."""
        return float(self.varsigma**2 * 2 * np.tanh(self.phi / 2) / self.phi)


@lru_cache(maxsize=64)
def _unit_spectral_mass(phi: float, K: int) -> np.ndarray:
    # Gauss-Legendre on [0, 1]; R is analytic there and R(t) = R(1-t) kills
    # the sine part. The node count resolves cos(2 pi K t) with a wide margin.
    m = 2 * K + 200
    x, w = np.polynomial.legendre.leggauss(m)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    R = np.cosh(phi * (t - 0.5)) / np.cosh(phi / 2)
    k = np.arange(K + 1)
    r = np.cos(2 * np.pi * np.outer(k, t)) @ (w * R)
    r.setflags(write=False)
    return r


@dataclass(frozen=True)
class NonstationarySpec:
    """Z(t) = alpha * psi(t) with alpha ~ N(0, varsigma^2)."""

    varsigma: float
    psi: FourierTemplate = field(default_factory=default_psi)

    def __post_init__(self):
        if self.varsigma < 0:
            raise ValueError("varsigma must be >= 0")
        norm = np.sqrt(self.psi.norm_sq())
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"psi must have unit L2 norm, got {norm:.10f}")
        # the default profile touches 0 at t = 1/2, so only nonnegativity is enforced
        tt = np.linspace(0, 1, 64 * max(1, self.psi.max_freq) + 1)
        if np.min(eval_template(self.psi, tt)) < -1e-12:
            raise ValueError("psi must be nonnegative")


@dataclass(frozen=True, eq=False)
class ProcessRealization:
    """One sample path of Z, as a random Fourier series."""

    kind: str
    series: FourierTemplate
    meta: dict = field(default_factory=dict)

    @property
    def coeffs(self) -> np.ndarray:
        return self.series.coeffs

    def __call__(self, t):
        return eval_template(self.series, t)


def zero_process() -> ProcessRealization:
    return ProcessRealization("zero", FourierTemplate.zero())


def sample_stationary_process(spec: StationaryCovSpec, K: int, seed: int) -> ProcessRealization:
    """Spectral synthesis ``Z(t) = sum_{|k|<=K} a_k xi_k exp(i 2 pi k t)``.

    ``a_k^2 = max(r_k, 0)`` and ``xi_k`` are standard complex Gaussians paired
    Hermitian-wise (``xi_0`` real). Draws are consumed in order of increasing
    ``|k|``, so a realization with a larger ``K`` extends one with a smaller
    ``K`` under the same seed.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    r = spec.spectral_mass(K)
    total = r[0] + 2 * r[1:].sum()
    clipped = -(np.minimum(r[0], 0) + 2 * np.minimum(r[1:], 0).sum())
    if clipped > 0:
        log.info("clipped negative spectral mass %.3e (%.2e of total)", clipped, clipped / total)
    a = np.sqrt(np.maximum(r, 0.0))
    z = make_rng(seed).standard_normal(2 * K + 1)
    pos = a[1:] * (z[1::2] + 1j * z[2::2]) / np.sqrt(2.0)
    c = np.concatenate([np.conj(pos[::-1]), [a[0] * z[0]], pos])
    meta = {"clipped_mass": float(max(clipped, 0.0)), "K": int(K)}
    return ProcessRealization("stationary", FourierTemplate(c), meta)


def sample_nonstationary_process(spec: NonstationarySpec, seed: int) -> ProcessRealization:
    alpha = spec.varsigma * make_rng(seed).standard_normal()
    return ProcessRealization("nonstationary", spec.psi * alpha, {"alpha": float(alpha)})


# ---------------------------------------------------------------------------
# datasets

def sample_on_grid(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Evaluate rows of coefficients (frequencies ``-K..K``) at ``l/n, l = 1..n``.

    Exact for any K: frequencies beyond n/2 are folded onto their alias bin
    before the inverse DFT.
    """
    coeffs = np.atleast_2d(coeffs)
    K = (coeffs.shape[1] - 1) // 2
    idx = np.arange(-K, K + 1) % n
    buf = np.zeros((coeffs.shape[0], n), dtype=complex)
    if K < (n + 1) // 2:
        buf[:, idx] = coeffs
    else:
        np.add.at(buf, (slice(None), idx), coeffs)
    vals = n * np.fft.ifft(buf, axis=1)
    # position p holds t = p/n; the design starts at l = 1
    return np.roll(vals.real, -1, axis=1)


def generate_dataset(
    template: FourierTemplate,
    shifts: ShiftVector,
    processes: Optional[Sequence[ProcessRealization]],
    sigma: float,
    grid: DesignGrid,
    seed: int,
) -> Dataset:
    shifts = shifts if isinstance(shifts, ShiftVector) else ShiftVector(shifts)
    J, n = shifts.J, grid.n
    if processes is None:
        processes = [zero_process()] * J
    if len(processes) != J:
        raise ValueError(f"need {J} process realizations, got {len(processes)}")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")

    K = max([template.K] + [p.series.K for p in processes])
    k = np.arange(-K, K + 1)
    rows = np.empty((J, 2 * K + 1), dtype=complex)
    base = template.padded(K)
    for j, (theta, proc) in enumerate(zip(shifts.values, processes)):
        rows[j] = (base + proc.series.padded(K)) * np.exp(-2j * np.pi * k * theta)
    y = sample_on_grid(rows, n)
    if sigma > 0:
        eps = np.stack([make_rng(seed, j).standard_normal(n) for j in range(J)])
        y = y + sigma * eps
    truth = Truth(shifts=shifts, template=template, sigma=float(sigma),
                  processes=list(processes), seed=int(seed))
    return Dataset(y, grid, truth)


def simulate(
    scenario: str,
    n: int,
    J: int,
    seed: int,
    *,
    template: FourierTemplate | str = "paper",
    sigma: float = 2.0,
    varsigma: float = 4.0,
    phi: float = 4.0,
    density: ShiftDensitySpec | str = "uniform:0.2",
    K: Optional[int] = None,
    psi: Optional[FourierTemplate] = None,
) -> Dataset:
    """Draw one dataset for a named scenario.

    The shift and noise streams depend only on ``seed`` (not on the scenario
    or ``n``), so datasets for different scenarios or grid sizes built from
    one seed share their shifts.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; use one of {SCENARIOS}")
    if isinstance(template, str):
        template = template_by_name(template)
    if isinstance(density, str):
        density = ShiftDensitySpec.parse(density)
    grid = DesignGrid(n)
    K = n // 2 if K is None else int(K)

    shifts = sample_shifts(J, density, derive_seed(seed, _SHIFTS))
    if scenario == "SIM":
        processes = None
    elif scenario == "stationary":
        spec = StationaryCovSpec(varsigma, phi)
        processes = [sample_stationary_process(spec, K, derive_seed(seed, _PROCESS, j))
                     for j in range(J)]
    else:
        spec = NonstationarySpec(varsigma, psi if psi is not None else default_psi())
        processes = [sample_nonstationary_process(spec, derive_seed(seed, _PROCESS, j))
                     for j in range(J)]
    ds = generate_dataset(template, shifts, processes, sigma, grid, derive_seed(seed, _NOISE))
    ds.truth.meta.update({
        "scenario": scenario, "sigma": float(sigma), "varsigma": float(varsigma),
        "phi": float(phi), "density": str(density), "K": K, "seed": int(seed),
    })
    return ds


# ---------------------------------------------------------------------------
# persistence

def _template_to_json(t: FourierTemplate) -> dict:
    return {"K": t.K, "re": t.coeffs.real.tolist(), "im": t.coeffs.imag.tolist()}


def _template_from_json(d: dict) -> FourierTemplate:
    return FourierTemplate(np.asarray(d["re"]) + 1j * np.asarray(d["im"]))


def write_dataset(ds: Dataset, prefix: str | Path) -> tuple[Path, Path]:
    """Write ``<prefix>.csv`` (header ``j,t_1..t_n``) and ``<prefix>.json``."""
    prefix = Path(prefix)
    csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")
    try:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j"] + [f"t_{l}" for l in range(1, ds.n + 1)])
            for j, row in enumerate(ds.y, start=1):
                w.writerow([j] + [repr(float(v)) for v in row])
        side = {"n": ds.n, "J": ds.J}
        if ds.truth is not None:
            tr = ds.truth
            side.update({
                "shifts": tr.shifts.values.tolist(),
                "sigma": tr.sigma,
                "seed": tr.seed,
                "template": _template_to_json(tr.template),
                "spec": tr.meta,
            })
        json_path.write_text(json.dumps(side, indent=2, sort_keys=True))
    except OSError as exc:
        raise OSError(f"cannot write dataset to {prefix}: {exc}") from exc
    return csv_path, json_path


def read_dataset(path: str | Path) -> Dataset:
    """Read a dataset CSV; a sibling ``.json`` sidecar restores the truth record."""
    path = Path(path)
    csv_path = path if path.suffix == ".csv" else path.with_suffix(".csv")
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "j":
        raise ValueError(f"{csv_path}: missing 'j,t_1..t_n' header")
    n = len(rows[0]) - 1
    y = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float).reshape(-1, n)
    truth = None
    side = csv_path.with_suffix(".json")
    if side.exists():
        d = json.loads(side.read_text())
        if "shifts" in d:
            truth = Truth(shifts=ShiftVector(d["shifts"]), template=_template_from_json(d["template"]),
                          sigma=d["sigma"], seed=d.get("seed"), meta=d.get("spec", {}))
    return Dataset(y, DesignGrid(n), truth)
