"""
Monte Carlo experiments over a grid of (n, J) cells, with CSV and SVG output.

Seeding: cell ``(n, J, rep)`` of a scenario gets
``derive_seed(master, scenario_index, n, J, rep)``, so every cell draws fresh
shifts, perturbations and noise. With ``paired=True`` the seed is
``derive_seed(master, J, rep)`` instead: the n=512 and n=1024 cells of one
repetition then share their shifts and perturbations, and the scenarios share
shift and noise streams (common random numbers).
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .bounds import shift_bound_for
from .model import ShiftDensitySpec, template_by_name
from .registration import OptimizerOptions, estimate_shifts, pattern_error, shift_error
from .smoothing import dft_coeffs
from .synth import SCENARIOS, derive_seed, simulate

log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "SHIFTFRECHET_OUTPUT_DIR"

_SCENARIO_DEFAULTS = {
    "SIM": {"sigma": 2.0},
    "stationary": {"sigma": 8.0, "varsigma": 4.0, "phi": 4.0},
    "nonstationary": {"sigma": 8.0, "varsigma": 4.0},
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "SIM"
    template: str = "paper"
    sigma: Optional[float] = None
    varsigma: float = 4.0
    phi: float = 4.0
    density: str = "uniform:0.2"
    lam: int = 7
    n_list: tuple = (512, 1024)
    J_list: tuple = (20, 40, 60, 80, 100)
    repetitions: int = 20
    seed: int = 2011
    optimizer: dict = field(default_factory=dict)
    output_dir: Optional[str] = None
    K: Optional[int] = None
    paired: bool = False

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        template_by_name(self.template)
        ShiftDensitySpec.parse(self.density)
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "J_list", tuple(int(j) for j in self.J_list))
        if self.sigma is None:
            object.__setattr__(self, "sigma", _SCENARIO_DEFAULTS[self.scenario]["sigma"])
        if not self.n_list or not self.J_list:
            raise ValueError("n_list and J_list must be non-empty")
        if min(self.n_list) < 3:
            raise ValueError("every n must be >= 3")
        if not 2 * self.lam < min(self.n_list):
            raise ValueError(f"lam={self.lam} must be < min(n_list)/2")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if min(self.J_list) < 2:
            raise ValueError("every J must be >= 2")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        OptimizerOptions.from_dict(self.optimizer)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_list"], d["J_list"] = list(self.n_list), list(self.J_list)
        return d

    def cells(self):
        for n in self.n_list:
            for J in self.J_list:
                for rep in range(self.repetitions):
                    yield n, J, rep


@dataclass(frozen=True)
class ErrorRecord:
    scenario: str
    n: int
    J: int
    rep: int
    seed: int
    shift_err: float
    pattern_err: float
    criterion: float
    converged: bool
    ms: Optional[float] = None

    def sort_key(self):
        return (self.scenario, self.n, self.J, self.rep)


def cell_seed(master: int, scenario: str, n: int, J: int, rep: int, paired: bool = False) -> int:
    if paired:
        return derive_seed(master, J, rep)
    return derive_seed(master, SCENARIOS.index(scenario), n, J, rep)


def run_cell(config: ExperimentConfig, n: int, J: int, rep: int) -> ErrorRecord:
    start = time.perf_counter()
    seed = cell_seed(config.seed, config.scenario, n, J, rep, config.paired)
    ds = simulate(config.scenario, n, J, seed, template=config.template, sigma=config.sigma,
                  varsigma=config.varsigma, phi=config.phi, density=config.density, K=config.K)
    opts = OptimizerOptions.from_dict({"seed": derive_seed(seed, 4), **config.optimizer})
    res = estimate_shifts(dft_coeffs(ds, config.lam), opts)
    truth = ds.truth
    rec = ErrorRecord(
        scenario=config.scenario, n=n, J=J, rep=rep, seed=seed,
        shift_err=shift_error(res.theta_hat, truth.shifts, "centered"),
        pattern_err=pattern_error(res.frechet_mean, truth.template, truth.shifts.mean),
        criterion=res.criterion_value,
        converged=res.converged,
        ms=round((time.perf_counter() - start) * 1e3, 3),
    )
    if not res.converged:
        log.warning("cell n=%d J=%d rep=%d did not converge (|grad|=%.2e)", n, J, rep, res.grad_norm)
    return rec


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[ErrorRecord]:
    """Run every (n, J, rep) cell; records come back sorted by cell."""
    jobs = [(config, n, J, rep) for n, J, rep in config.cells()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_cell_args, jobs, chunksize=4))
    else:
        records = [run_cell(*job) for job in jobs]
    return sorted(records, key=ErrorRecord.sort_key)


# ---------------------------------------------------------------------------
# summaries

METRICS = ("shift_err", "pattern_err", "criterion")


@dataclass(frozen=True)
class BoxStats:
    count: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "BoxStats":
        v = np.sort(np.asarray(values, dtype=float))
        if v.size == 0:
            raise ValueError("cannot summarize an empty group")
        # numpy's default "linear" quantile convention (type 7)
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        return cls(int(v.size), float(v[0]), float(q1), float(med), float(q3), float(v[-1]),
                   float(np.mean(v)))


@dataclass(frozen=True)
class CellSummary:
    scenario: str
    n: int
    J: int
    stats: dict

    def __getitem__(self, metric: str) -> BoxStats:
        return self.stats[metric]


def summarize(records: Iterable[ErrorRecord]) -> list[CellSummary]:
    """Boxplot statistics per (scenario, n, J); quartiles by linear interpolation."""
    groups: dict[tuple, list[ErrorRecord]] = {}
    for r in records:
        groups.setdefault((r.scenario, r.n, r.J), []).append(r)
    if not groups:
        raise ValueError("no records to summarize")
    out = []
    for key in sorted(groups):
        recs = groups[key]
        stats = {m: BoxStats.of([getattr(r, m) for r in recs]) for m in METRICS}
        out.append(CellSummary(*key, stats))
    return out


# ---------------------------------------------------------------------------
# CSV

RECORD_HEADER = ["scenario", "n", "J", "rep", "seed", "shift_err", "pattern_err",
                 "criterion", "converged", "ms"]
SUMMARY_HEADER = ["scenario", "n", "J", "metric", "count", "min", "q1", "median", "q3",
                  "max", "mean"]


def _fmt(x) -> str:
    return repr(float(x))


def emit_csv(rows, path: str | Path, include_timing: bool = True) -> Path:
    """Write records (or summaries) as CSV.

    Floats use the shortest round-trip representation. With
    ``include_timing=False`` the wall-clock ``ms`` column is left empty so
    that reruns produce byte-identical files.
    """
    path = Path(path)
    rows = list(rows)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            if rows and isinstance(rows[0], CellSummary):
                w.writerow(SUMMARY_HEADER)
                for s in rows:
                    for m in METRICS:
                        b = s.stats[m]
                        w.writerow([s.scenario, s.n, s.J, m, b.count] +
                                   [_fmt(getattr(b, a)) for a in ("min", "q1", "median", "q3", "max", "mean")])
                return path
            w.writerow(RECORD_HEADER)
            for r in rows:
                ms = "" if (r.ms is None or not include_timing) else _fmt(r.ms)
                w.writerow([r.scenario, r.n, r.J, r.rep, r.seed, _fmt(r.shift_err),
                            _fmt(r.pattern_err), _fmt(r.criterion),
                            "true" if r.converged else "false", ms])
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc
    return path


def read_records_csv(path: str | Path) -> list[ErrorRecord]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header != RECORD_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        out = []
        for row in rd:
            sc, n, J, rep, seed, se, pe, cr, conv, ms = row
            out.append(ErrorRecord(sc, int(n), int(J), int(rep), int(seed), float(se),
                                   float(pe), float(cr), conv == "true",
                                   float(ms) if ms else None))
    return out


# ---------------------------------------------------------------------------
# SVG boxplots

SERIES_COLORS = {512: "#999999", 1024: "#000000"}
_FALLBACK_COLORS = ["#4477aa", "#cc6677", "#228833", "#ccbb44", "#66ccee"]

METRIC_LABELS = {
    "shift_err": "1/J |theta_hat - theta*_0|^2",
    "pattern_err": "|f_hat - f_0|^2",
    "criterion": "criterion value",
}


def _series_color(n: int, order: int) -> str:
    return SERIES_COLORS.get(n, _FALLBACK_COLORS[order % len(_FALLBACK_COLORS)])


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.floor(lo / step) * step
    ticks, t = [], start
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def boxplot_svg(summaries: Sequence[CellSummary], metric: str, title: str = "",
                reference: Optional[dict] = None, width: int = 720, height: int = 420) -> str:
    """SVG with one box per (n, J) cell: J on the x axis, one series per n.

    ``reference`` optionally maps ``n`` to a horizontal reference level
    (e.g. a lower bound) drawn as a dashed line in the series color.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; use one of {METRICS}")
    if not summaries:
        raise ValueError("need at least one cell summary")
    ns = sorted({s.n for s in summaries})
    Js = sorted({s.J for s in summaries})
    colors = {n: _series_color(n, i) for i, n in enumerate(ns)}

    ml, mr, mt, mb = 80, 20, 50, 90
    pw, ph = width - ml - mr, height - mt - mb
    lo = 0.0
    hi = max(s[metric].max for s in summaries)
    if reference:
        hi = max(hi, max(reference.values()))
    ticks = _nice_ticks(lo, hi * 1.05 if hi > 0 else 1.0)
    top = ticks[-1]

    def Y(v):
        return mt + ph * (1 - (v - lo) / (top - lo))

    slot = pw / len(Js)
    box_w = min(28.0, 0.8 * slot / len(ns))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{escape(title or METRIC_LABELS[metric])}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for t in ticks:
        y = Y(t)
        parts.append(f'<line x1="{ml - 4}" y1="{y:.2f}" x2="{ml}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 7}" y="{y + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    parts.append(f'<text x="18" y="{mt + ph / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {mt + ph / 2})">{escape(METRIC_LABELS[metric])}</text>')

    for xi, J in enumerate(Js):
        cx = ml + slot * (xi + 0.5)
        parts.append(f'<text x="{cx:.2f}" y="{mt + ph + 18}" text-anchor="middle">{J}</text>')
        for si, n in enumerate(ns):
            cell = next((s for s in summaries if s.n == n and s.J == J), None)
            if cell is None:
                continue
            b = cell[metric]
            x0 = cx + (si - len(ns) / 2) * box_w * 1.15
            xm = x0 + box_w / 2
            col = colors[n]
            parts.append(
                f'<g class="box" data-n="{n}" data-J="{J}" stroke="{col}" fill="none">'
                f'<line x1="{xm:.2f}" y1="{Y(b.max):.2f}" x2="{xm:.2f}" y2="{Y(b.q3):.2f}"/>'
                f'<line x1="{xm:.2f}" y1="{Y(b.q1):.2f}" x2="{xm:.2f}" y2="{Y(b.min):.2f}"/>'
                f'<line x1="{x0 + box_w * .25:.2f}" y1="{Y(b.max):.2f}" x2="{x0 + box_w * .75:.2f}" y2="{Y(b.max):.2f}"/>'
                f'<line x1="{x0 + box_w * .25:.2f}" y1="{Y(b.min):.2f}" x2="{x0 + box_w * .75:.2f}" y2="{Y(b.min):.2f}"/>'
                f'<rect x="{x0:.2f}" y="{Y(b.q3):.2f}" width="{box_w:.2f}" '
                f'height="{max(Y(b.q1) - Y(b.q3), 0.5):.2f}" fill="{col}" fill-opacity="0.25"/>'
                f'<line x1="{x0:.2f}" y1="{Y(b.median):.2f}" x2="{x0 + box_w:.2f}" y2="{Y(b.median):.2f}" stroke-width="2"/>'
                f'</g>')
    parts.append(f'<text x="{ml + pw / 2}" y="{mt + ph + 38}" text-anchor="middle">J (number of curves)</text>')

    if reference:
        for n, v in sorted(reference.items()):
            col = colors.get(n, "#555555")
            parts.append(f'<line class="reference" x1="{ml}" y1="{Y(v):.2f}" x2="{ml + pw}" y2="{Y(v):.2f}" '
                         f'stroke="{col}" stroke-dasharray="6 4"/>')

    ly = height - 28
    lx = ml
    for n in ns:
        parts.append(f'<rect x="{lx}" y="{ly - 9}" width="12" height="10" fill="{colors[n]}"/>')
        parts.append(f'<text x="{lx + 16}" y="{ly}">n = {n}</text>')
        lx += 90
    note = "boxes: quartiles, bar: median, whiskers: min/max"
    if reference:
        note += "; dashed: van Trees bound (raised-cosine prior, same support)"
    parts.append(f'<text x="{lx + 10}" y="{ly}" fill="#333333">{escape(note)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_boxplot_svg(summaries, metric: str, path: str | Path, **kw) -> Path:
    path = Path(path)
    svg = boxplot_svg(summaries, metric, **kw)
    try:
        path.write_text(svg)
    except OSError as exc:
        raise OSError(f"cannot write SVG {path}: {exc}") from exc
    return path


# ---------------------------------------------------------------------------
# full pipeline

def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "shiftfrechet-out"))


def reference_bounds(config: ExperimentConfig) -> dict:
    """Van Trees bound per n, with the uniform prior replaced by the raised
    cosine on the same support (the uniform prior has no Fisher information)."""
    width = ShiftDensitySpec.parse(config.density).half_width
    if width <= 0:
        return {}
    dens = ShiftDensitySpec("raised-cosine", width)
    f = template_by_name(config.template)
    return {n: shift_bound_for(f, dens, n, config.sigma) for n in config.n_list}


def run_and_write(config: ExperimentConfig, out_dir: str | Path | None = None,
                  workers: int = 1) -> dict:
    """Run an experiment and write records, summaries, bounds and SVGs."""
    out = Path(out_dir or config.output_dir or default_output_dir())
    out.mkdir(parents=True, exist_ok=True)
    records = run_experiment(config, workers=workers)
    summaries = summarize(records)
    stem = config.scenario.lower()
    paths = {
        "records": emit_csv(records, out / f"{stem}_records.csv", include_timing=False),
        "timings": _emit_timings(records, out / f"{stem}_timings.csv"),
        "summary": emit_csv(summaries, out / f"{stem}_summary.csv"),
    }
    bounds = reference_bounds(config) if config.sigma > 0 else {}
    if bounds:
        with open(out / f"{stem}_bounds.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["n", "sigma", "prior", "van_trees_bound"])
            width = ShiftDensitySpec.parse(config.density).half_width
            for n, v in sorted(bounds.items()):
                w.writerow([n, _fmt(config.sigma), f"raised-cosine:{width:g}", _fmt(v)])
        paths["bounds"] = out / f"{stem}_bounds.csv"
    paths["svg_shift"] = emit_boxplot_svg(
        summaries, "shift_err", out / f"{stem}_shift_err.svg",
        title=f"{config.scenario}: shift error", reference=bounds or None)
    paths["svg_pattern"] = emit_boxplot_svg(
        summaries, "pattern_err", out / f"{stem}_pattern_err.svg",
        title=f"{config.scenario}: mean pattern error")
    (out / f"{stem}_config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True))
    return {"records": records, "summaries": summaries, "paths": paths}


def _emit_timings(records, path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["scenario", "n", "J", "rep", "ms"])
        for r in records:
            w.writerow([r.scenario, r.n, r.J, r.rep, "" if r.ms is None else _fmt(r.ms)])
    return path
