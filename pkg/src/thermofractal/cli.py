"""Command-line front end emitting CSV/JSON artifacts for plotting.

Subcommands: pressure, transition, spectrum, rate, ldp, map-info, gap.
Grids use the shell-friendly a:b:step syntax; map specs are JSON.
Exit codes: 0 ok, 2 usage/domain, 3 numerical, 4 budget.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import BudgetError, DomainError, NumericalError
from .ldp import compare_rate
from .maps import SkewProductSpec, map_from_json, map_to_json
from .multifractal import (entropy_spectrum, hausdorff_spectrum,
                           rate_function, tau_check, tau_hat)
from .pressure import (left_slope_at_transition, pressure_curve,
                       skew_pressure)
from .transfer import gap_certificate

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_BUDGET = 4


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


@dataclasses.dataclass
class RunManifest:
    map_spec: dict
    command: str
    params: dict
    output: str
    seed: int = 0                 # reserved; everything here is deterministic
    tool_version: str = __version__

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True,
                          separators=(",", ":"))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def write_csv(path, manifest, header, rows):
    with open(path, "w") as fh:
        fh.write(f"# manifest_hash={manifest.hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_summary(path, manifest, payload):
    payload = dict(payload)
    payload["manifest"] = json.loads(manifest.to_json())
    payload["manifest_hash"] = manifest.hash
    payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def parse_range(text):
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise DomainError(f"range must be a:b:step, got {text!r}") from exc
    return a, b, step


def parse_map_arg(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"--map is not valid JSON: {exc}") from exc
    return map_from_json(obj)


def _curve_from_args(spec, args):
    t_min, t_max, step = parse_range(args.t)
    return pressure_curve(spec, t_min, t_max, step, args.N, args.method)


def cmd_map_info(args):
    spec = parse_map_arg(args.map)
    if isinstance(spec, SkewProductSpec):
        info = {
            "kind": "skew_product",
            "base_degree": spec.base.degree,
            "total_degree": spec.total_degree,
            "entropy_base": spec.entropy_base,
            "constant_fiber": spec.constant_fiber,
            "spec": map_to_json(spec),
        }
    else:
        info = {
            "kind": "circle_map",
            "family": spec.family_tag,
            "degree": spec.degree,
            "branch_intervals": [list(iv) for iv in spec.branch_intervals],
            "indifferent_points": list(spec.indifferent_points),
            "smoothness_class": spec.smoothness_class,
            "spec": map_to_json(spec),
        }
    json.dump(info, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_pressure(args):
    spec = parse_map_arg(args.map)
    manifest = RunManifest(map_to_json(spec), "pressure",
                           {"t": args.t, "N": args.N, "method": args.method},
                           args.out)
    curve = _curve_from_args(spec, args)
    rows = zip(curve.t_grid, curve.P_values, curve.lambda_c, curve.sigma2,
               curve.convergence_flags)
    write_csv(args.out + "_pressure.csv", manifest,
              ["t", "P", "lambda_c", "sigma2", "converged"], rows)
    summary = {
        "t0": curve.t0_estimate,
        "plateau": curve.plateau,
        "N": curve.N_used,
        "method": curve.method,
        "invariant_violations": curve.check_invariants(),
    }
    if curve.t0_estimate is not None:
        summary["kink_classifier"] = left_slope_at_transition(curve).classifier
    write_summary(args.out + "_summary.json", manifest, summary)
    return 0


def cmd_transition(args):
    spec = parse_map_arg(args.map)
    curve = _curve_from_args(spec, args)
    if curve.t0_estimate is None:
        raise DomainError("no transition detected on the computed range")
    diag = left_slope_at_transition(curve)
    json.dump({"t0": curve.t0_estimate, "plateau": curve.plateau,
               "kink_classifier": diag.classifier,
               "left_slopes": list(diag.slopes)},
              sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_gap(args):
    spec = parse_map_arg(args.map)
    manifest = RunManifest(map_to_json(spec), "gap",
                           {"t": args.t, "N": args.N, "method": args.method,
                            "k": args.k}, args.out)
    curve = _curve_from_args(spec, args)
    rows = []
    for t in curve.t_grid:
        try:
            d = gap_certificate(curve, float(t), args.k)
        except DomainError:
            continue
        rows.append((t, d.rho_estimate, d.ess_bound, d.certified))
    write_csv(args.out + "_gap.csv", manifest,
              ["t", "rho_estimate", "ess_bound", "certified"], rows)
    return 0


def cmd_rate(args):
    spec = parse_map_arg(args.map)
    manifest = RunManifest(map_to_json(spec), "rate",
                           {"t": args.t, "N": args.N, "method": args.method},
                           args.out)
    curve = _curve_from_args(spec, args)
    rate = rate_function(curve)
    write_csv(args.out + "_rate.csv", manifest, ["s", "I"],
              zip(rate.s_grid, rate.I_values))
    write_summary(args.out + "_rate_summary.json", manifest, {
        "lambda_min": rate.lambda_min, "lambda_max": rate.lambda_max,
        "lambda_mu0": rate.lambda_mu0, "t0": rate.t0,
        "degenerate": rate.degenerate,
    })
    return 0


def cmd_spectrum(args):
    spec = parse_map_arg(args.map)
    manifest = RunManifest(map_to_json(spec), "spectrum",
                           {"t": args.t, "N": args.N, "method": args.method,
                            "entropy": args.entropy,
                            "hausdorff": args.hausdorff}, args.out)
    curve = _curve_from_args(spec, args)
    rate = rate_function(curve)
    write_csv(args.out + "_rate.csv", manifest, ["s", "I"],
              zip(rate.s_grid, rate.I_values))
    a_grid = np.linspace(max(1e-6, 0.001 * rate.lambda_max),
                         rate.lambda_max, 201)
    write_csv(args.out + "_tau.csv", manifest, ["a", "tau_hat", "tau_check"],
              ((a, tau_hat(rate, a), tau_check(rate, a)) for a in a_grid))
    queries = []
    for text in args.entropy or []:
        a, b = (float(v) for v in text.split(","))
        r = entropy_spectrum(rate, a, b)
        queries.append({"kind": "entropy", "interval": [a, b],
                        "value": r.value, "selection_point": r.selection_point,
                        "formula_branch": r.formula_branch})
    for text in args.hausdorff or []:
        u, v = (float(x) for x in text.split(","))
        r = hausdorff_spectrum(rate, u, v)
        queries.append({"kind": "hausdorff", "interval": [u, v],
                        "value": r.value, "selection_point": r.selection_point,
                        "formula_branch": r.formula_branch})
    write_summary(args.out + "_spectrum.json", manifest, {
        "queries": queries, "lambda_min": rate.lambda_min,
        "lambda_max": rate.lambda_max, "t0": rate.t0,
    })
    return 0


def cmd_ldp(args):
    spec = parse_map_arg(args.map)
    if isinstance(spec, SkewProductSpec):
        raise DomainError("ldp runs on circle maps")
    n_list = [int(v) for v in args.n_list.split(",")]
    a, b = (float(v) for v in args.interval.split(","))
    manifest = RunManifest(map_to_json(spec), "ldp",
                           {"t": args.t, "N": args.N, "method": args.method,
                            "n_list": n_list, "interval": [a, b]}, args.out)
    curve = _curve_from_args(spec, args)
    rate = rate_function(curve)
    report = compare_rate(spec, n_list, (a, b), rate)
    rows = [(r.n, a, b, r.empirical, r.legendre, r.gap) for r in report.rows]
    write_csv(args.out + "_ldp.csv", manifest,
              ["n", "a", "b", "empirical_rate", "legendre_rate", "gap"], rows)
    write_summary(args.out + "_ldp_summary.json", manifest, {
        "extrapolated": report.extrapolated,
        "legendre": report.legendre,
        "extrapolated_gap": report.extrapolated_gap,
        "control_case": report.control_case,
        "observed_ranges": {str(r.n): list(r.observed_range)
                            for r in report.rows},
    })
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="thermofractal",
        description="Pressure, phase transitions and multifractal spectra "
                    "for intermittent circle maps")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--map", required=True, help="map spec as JSON")
        p.add_argument("--t", default="-3:2:0.02",
                       help="t grid as a:b:step (default -3:2:0.02)")
        p.add_argument("--N", type=int, default=4096)
        p.add_argument("--method", default="collocation",
                       choices=["collocation", "ulam"])
        if needs_out:
            p.add_argument("--out", default="thermofractal_run",
                           help="output file prefix")

    p = sub.add_parser("map-info", help="describe a map spec")
    p.add_argument("--map", required=True)
    p.set_defaults(func=cmd_map_info)

    p = sub.add_parser("pressure", help="pressure curve CSV + summary")
    common(p)
    p.set_defaults(func=cmd_pressure)

    p = sub.add_parser("transition", help="transition parameter and classifier")
    common(p, needs_out=False)
    p.set_defaults(func=cmd_transition)

    p = sub.add_parser("gap", help="spectral-gap certificates along the grid")
    common(p)
    p.add_argument("--k", type=int, default=1, help="smoothness index")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("rate", help="Legendre rate function CSV")
    common(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("spectrum", help="rate, tau curves and spectrum queries")
    common(p)
    p.add_argument("--entropy", action="append", metavar="a,b",
                   help="entropy spectrum query interval (repeatable)")
    p.add_argument("--hausdorff", action="append", metavar="u,v",
                   help="dimension spectrum query interval (repeatable)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("ldp", help="empirical vs Legendre rate comparison")
    common(p)
    p.add_argument("--n-list", default="12,16,20")
    p.add_argument("--interval", required=True, metavar="a,b")
    p.set_defaults(func=cmd_ldp)

    return parser


def thread_cap() -> int:
    """Parallelism cap from THERMO_THREADS (>= 1; unset means 1).

    Every kernel here runs serially, so any positive cap is honored;
    the value is validated so misconfiguration fails fast.
    """
    raw = os.environ.get("THERMO_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise DomainError(f"THERMO_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise DomainError(f"THERMO_THREADS must be >= 1, got {cap}")
    return cap


def main(argv=None):
    parser = build_parser()
    try:
        thread_cap()
        args = parser.parse_args(argv)
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
