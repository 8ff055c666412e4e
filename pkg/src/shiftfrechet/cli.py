"""Command line interface: ``shiftfrechet {simulate,estimate,bound,experiment,selftest}``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bounds import BoundInputs, fisher_info, sup_derivative, van_trees_shift_bound
from .harness import ExperimentConfig, default_output_dir, run_and_write
from .model import ShiftDensitySpec, template_by_name
from .registration import OptimizerOptions, estimate_shifts, pattern_error, shift_error
from .smoothing import dft_coeffs
from .synth import SCENARIOS, read_dataset, simulate, write_dataset

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shiftfrechet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="write a synthetic dataset (CSV + JSON sidecar)")
    s.add_argument("--scenario", choices=SCENARIOS, default="SIM")
    s.add_argument("--n", type=int, default=512)
    s.add_argument("--J", type=int, default=20)
    s.add_argument("--sigma", type=float, default=2.0)
    s.add_argument("--varsigma", type=float, default=4.0)
    s.add_argument("--phi", type=float, default=4.0)
    s.add_argument("--density", default="uniform:0.2")
    s.add_argument("--template", default="paper")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output prefix (writes PREFIX.csv and PREFIX.json)")

    e = sub.add_parser("estimate", help="estimate shifts and mean pattern of a dataset")
    e.add_argument("--data", required=True, help="dataset CSV")
    e.add_argument("--lam", type=int, default=7)
    e.add_argument("--multistarts", type=int, default=5)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--constraint", choices=("theta0", "theta1"), default="theta0")
    e.add_argument("--out", help="result JSON (default: stdout)")

    b = sub.add_parser("bound", help="print the van Trees lower bound for the shifts")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--sigma", type=float, required=True)
    b.add_argument("--density", default="raised-cosine:0.2")
    b.add_argument("--template", default="paper")
    b.add_argument("--mode", choices=("SIM", "stationary"), default="SIM")

    x = sub.add_parser("experiment", help="run a Monte Carlo experiment from a JSON config")
    x.add_argument("--config", required=True)
    x.add_argument("--out", help=f"output directory (default: config output_dir, "
                                 f"then ${'SHIFTFRECHET_OUTPUT_DIR'}, then ./shiftfrechet-out)")
    x.add_argument("--workers", type=int, default=1)

    t = sub.add_parser("selftest", help="run the randomized property checks")
    t.add_argument("--seed", type=int, default=0)
    return p


def _simulate(a) -> int:
    ds = simulate(a.scenario, a.n, a.J, a.seed, template=a.template, sigma=a.sigma,
                  varsigma=a.varsigma, phi=a.phi, density=a.density)
    csv_path, json_path = write_dataset(ds, a.out)
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def _estimate(a) -> int:
    ds = read_dataset(a.data)
    opts = OptimizerOptions(multistarts=a.multistarts, seed=a.seed, constraint=a.constraint)
    res = estimate_shifts(dft_coeffs(ds, a.lam), opts)
    out = res.to_dict()
    if ds.truth is not None:
        out["shift_err_centered"] = shift_error(res.theta_hat, ds.truth.shifts, "centered")
        out["pattern_err_centered"] = pattern_error(res.frechet_mean, ds.truth.template,
                                                    ds.truth.shifts.mean)
    text = json.dumps(out, indent=2)
    if a.out:
        Path(a.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _bound(a) -> int:
    dens = ShiftDensitySpec.parse(a.density)
    inputs = BoundInputs(n=a.n, sigma=a.sigma, sup_deriv=sup_derivative(template_by_name(a.template)),
                         fisher_g=fisher_info(dens), mode=a.mode)
    print(repr(van_trees_shift_bound(inputs)))
    return EXIT_OK


def _experiment(a) -> int:
    cfg = ExperimentConfig.load(a.config)
    out = a.out or cfg.output_dir or default_output_dir()
    result = run_and_write(cfg, out, workers=a.workers)
    for name, path in result["paths"].items():
        print(f"{name}: {path}")
    bad = sum(not r.converged for r in result["records"])
    if bad:
        print(f"warning: {bad} cell(s) did not converge", file=sys.stderr)
    return EXIT_OK


def _selftest(a) -> int:
    from .selftest import run

    return EXIT_OK if run(a.seed) else EXIT_RUNTIME


COMMANDS = {"simulate": _simulate, "estimate": _estimate, "bound": _bound,
            "experiment": _experiment, "selftest": _selftest}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError, ArithmeticError, KeyError, json.JSONDecodeError) as exc:
        print(f"shiftfrechet {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
