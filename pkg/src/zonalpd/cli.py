"""Command-line driver: ``zonalpd <command> [options]``.

Exit codes
  0  success (polya: strictly positive definite)
  1  numerical failure (quadrature, bracketing, resolution, ...)
  2  argument or input-file error
  3  polya: positive definite, strictness not established
  4  polya: hypotheses violated or inconclusive
  5  interp: interpolation problem not poised
  6  an expectation flag failed (scan --expect-positive, roots deviation)

Results are printed only on exit codes 0, 3 and 4.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conjecture_lab as lab
from . import io
from . import polya
from . import sphere
from . import truncated_power as tp
from .errors import DomainError, ParameterError, PoisednessError, ZonalPDError

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2
EXIT_PD = 3
EXIT_NOT_PD = 4
EXIT_POISED = 5
EXIT_EXPECT = 6

ROOT_TOLERANCE = 1e-4


class UsageError(Exception):
    """Bad flags or unreadable input; maps to exit code 2."""


class ExpectationFailed(Exception):
    """An --expect style check did not hold; maps to exit code 6."""


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    output_format: str = "json"

    def validate(self) -> None:
        for key, value in self.params.items():
            if key.endswith("tol") and value is not None and not value > 0:
                raise UsageError(f"--{key.replace('_', '-')} must be positive")
        for path in self.inputs:
            if path is not None and not Path(path).is_file():
                raise UsageError(f"input file not found: {path}")
        for path in self.outputs:
            if path is not None:
                parent = Path(path).resolve().parent
                if not parent.is_dir():
                    raise UsageError(f"output directory does not exist: {parent}")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _check_threads() -> None:
    raw = os.environ.get("ZONALPD_THREADS")
    if raw is None:
        return
    try:
        ok = int(raw) >= 1
    except ValueError:
        ok = False
    if not ok:
        raise UsageError(f"ZONALPD_THREADS must be a positive integer, got {raw!r}")


# --------------------------------------------------------------------------
# kernels from flags


def _kernel_from_args(args, lam: int):
    """A built-in kernel object, or None for csv: sources."""
    spec = args.kernel
    if spec.startswith("csv:"):
        return None
    if spec == "trunc-power":
        delta = args.delta if args.delta is not None else lam + 1
        return polya.make_kernel(spec, t=args.t, delta=delta)
    if spec in ("cos-bump", "wendland"):
        power = args.power if args.power is not None else lam + 3
        return polya.make_kernel(spec, t=args.t, power=power)
    if spec == "power-series":
        if not args.coeffs:
            raise UsageError("power-series kernel needs --coeffs")
        return polya.make_kernel(spec, coeffs=args.coeffs)
    raise UsageError(f"unknown kernel {spec!r}")


def _kernel_record(args, kernel) -> dict:
    if kernel is None:
        return {"name": "csv", "path": args.kernel[4:]}
    return {"name": kernel.name, **kernel.params}


def _sampled_from_csv(path: str, points: int, smoothness: int) -> polya.SampledZonalFunction:
    try:
        data = io.read_csv(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read kernel samples: {exc}") from exc
    if data.shape[1] == 1:
        values = data[:, 0]
        theta = np.linspace(0.0, math.pi, values.size)
    elif data.shape[1] == 2:
        theta, values = data[:, 0], data[:, 1]
    else:
        raise UsageError("kernel CSV must have one column (values) or two (theta, value)")
    try:
        return polya.SampledZonalFunction(theta, values, smoothness, {}, f"csv:{path}")
    except ParameterError as exc:
        raise UsageError(f"kernel CSV: {exc}") from exc


def _sampled(args, lam: int):
    kernel = _kernel_from_args(args, lam)
    if kernel is None:
        return _sampled_from_csv(args.kernel[4:], args.points, args.smoothness), None
    return polya.SampledZonalFunction.from_kernel(kernel, args.points), kernel


def io_payload(payload: dict) -> dict:
    """The payload as it will be serialised (schema field included)."""
    return json.loads(io.dumps(payload))


# --------------------------------------------------------------------------
# commands


def cmd_eval(args) -> int:
    if args.h_delta is not None:
        if args.u is None:
            raise UsageError("--h-delta needs --u")
        values = [tp.h_delta_eval(args.h_delta, u, args.order) for u in args.u]
    else:
        if args.lam is None or args.n is None or args.t is None:
            raise UsageError("eval needs --lambda, --n and --t (or --h-delta and --u)")
        delta = args.delta if args.delta is not None else args.lam + 1
        values = []
        for t in args.t:
            if args.normalized:
                values.append(tp.g_normalized(args.lam, delta, args.n, t, method=args.method))
            elif args.lam == 0 and delta == 1 and args.n > 0 and args.method == "auto":
                values.append(tp.f_lambda0(args.n, t))
            else:
                values.append(tp.f_eval(args.lam, delta, args.n, t, method=args.method))
    _emit("".join(io.fmt(v) + "\n" for v in values), args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    if args.search:
        report = lab.find_negativity_witness(args.lam, args.delta, args.n_max, args.t_points)
        payload = report.to_dict()
        io.validate(io_payload(payload), "witness_report")
        ok = not report.found
    else:
        report = lab.scan_positivity(args.lam, args.delta, args.n_max, args.t_points,
                                     n_min=args.n_min, floor=args.floor)
        payload = report.to_dict()
        io.validate(io_payload(payload), "scan_report")
        ok = report.all_positive
    if args.expect_positive and not ok:
        if args.out is not None:
            _emit(io.dumps(payload), args.out)
        raise ExpectationFailed("positivity expectation failed")
    _emit(io.dumps(payload), args.out)
    return EXIT_OK


def cmd_roots(args) -> int:
    certs = lab.reproduce_roots(args.name or None)
    worst = max(c.deviation for c in certs)
    if worst > ROOT_TOLERANCE:
        raise ExpectationFailed(f"root deviation {worst:.3e} exceeds {ROOT_TOLERANCE}")
    if args.json:
        text = io.dumps({"certificates": [c.to_dict() for c in certs]})
    else:
        lines = ["name,root,reference,deviation,residual,bracket_lo,bracket_hi"]
        for c in certs:
            nums = [c.root, c.reference_value, c.deviation, c.residual, *c.bracket]
            lines.append(",".join([c.name] + [io.fmt(x) for x in nums]))
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


POLYA_EXIT = {"strictly_positive_definite": EXIT_OK, "positive_definite": EXIT_PD}


def _polya_verdict(args, lam: int):
    g, kernel = _sampled(args, lam)
    verdict = polya.check_criterion(g, lam, n_max=args.n_max)
    payload = verdict.to_dict()
    payload["kernel"] = _kernel_record(args, kernel)
    return verdict, payload


def cmd_polya(args) -> int:
    verdict, payload = _polya_verdict(args, args.lam)
    io.validate(io_payload(payload), "polya_verdict")
    _emit(io.dumps(payload), args.out)
    return POLYA_EXIT.get(verdict.classification, EXIT_NOT_PD)


def _read_points(path: str) -> sphere.SpherePointSet:
    try:
        return sphere.read_points(path)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read points: {exc}") from exc


def cmd_interp(args) -> int:
    points = _read_points(args.points_file)
    try:
        values = io.read_csv(args.values).ravel()
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read values: {exc}") from exc
    if values.size != len(points):
        raise UsageError(f"{values.size} values for {len(points)} points")
    # checking on a higher-dimensional sphere is sufficient for odd d
    lam = math.ceil((points.d - 2) / 2)
    if args.kernel.startswith("csv:"):
        raise UsageError("interp needs a built-in kernel")
    kernel = _kernel_from_args(args, lam)
    if not args.force:
        verdict, _ = _polya_verdict(args, lam)
        if verdict.classification != "strictly_positive_definite":
            raise PoisednessError(
                f"kernel not certified strictly positive definite on S^{points.d - 1} "
                f"({verdict.classification}); use --force to override")
    result = sphere.interpolate(points, values, kernel)
    report = {"d": points.d, "points": len(points), "kernel": _kernel_record(args, kernel),
              "status": result.status, "min_eigenvalue": result.min_eigenvalue,
              "residual": result.residual, "forced": bool(args.force)}
    io.validate(io_payload(report), "interp_report")
    io.write_csv(args.weights_out, ["weight"], result.weights)
    _emit(io.dumps(report), args.report)
    return EXIT_OK


def cmd_random_points(args) -> int:
    pts = sphere.random_points(args.d, args.count, args.seed)
    sphere.write_points(args.out, pts)
    return EXIT_OK


def cmd_curves(args) -> int:
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    rows = lab.small_n_curves(args.lam, t_points=args.t_points, out_dir=args.out_dir)
    lines = ["lam,n,min_value,argmin,positive"]
    for r in rows:
        lines.append(f"{r.lam},{r.n},{io.fmt(r.min_value)},{io.fmt(r.argmin)},{int(r.positive)}")
    _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


def cmd_overlap(args) -> int:
    table = lab.overlap_check_d8(args.n_max)
    io.write_csv(args.out, ["n", "sin_t_star_lower_bound", "u_star_over_n", "overlap"],
                 [(r.n, r.sin_t_star_lower_bound, r.u_star_over_n, int(r.overlap)) for r in table.rows],
                 comments=[f"u_star = {io.fmt(table.u_star)}", f"first_overlap = {table.first_overlap}",
                           f"persists = {table.persists}"])
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return value


def _add_kernel_flags(p, default_kernel="trunc-power"):
    p.add_argument("--kernel", default=default_kernel,
                   help="trunc-power, cos-bump, wendland, power-series or csv:PATH")
    p.add_argument("--t", type=float, default=2.0, help="support radius of the built-in kernels")
    p.add_argument("--delta", type=float, help="truncated-power exponent (default lambda + 1)")
    p.add_argument("--power", type=int, help="cos-bump / wendland power (default lambda + 3)")
    p.add_argument("--coeffs", type=float, nargs="+", help="power-series coefficients in cos(theta)")
    p.add_argument("--points", type=_positive_int, default=polya.DEFAULT_POINTS,
                   help="samples on [0, pi]")
    p.add_argument("--smoothness", type=_nonneg_int, default=0, help="claimed smoothness of CSV samples")
    p.add_argument("--n-max", type=_nonneg_int, default=polya.DEFAULT_N_MAX,
                   help="coefficients computed for the consistency check")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zonalpd", description="Positive definite zonal kernels on spheres.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate F, G or h_delta")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--delta", type=float, help="exponent (default lambda + 1)")
    p.add_argument("--n", type=_nonneg_int)
    p.add_argument("--t", type=float, nargs="+")
    p.add_argument("--normalized", action="store_true", help="print G = F^{delta+1} / C_n(1)")
    p.add_argument("--method", choices=["auto", "exact", "quadrature"], default="auto")
    p.add_argument("--h-delta", type=float)
    p.add_argument("--u", type=float, nargs="+")
    p.add_argument("--order", type=_nonneg_int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scan", help="positivity scan over n and t")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--n-max", type=_nonneg_int, required=True)
    p.add_argument("--n-min", type=_nonneg_int, default=0)
    p.add_argument("--t-points", type=_positive_int, default=2048)
    p.add_argument("--floor", type=float, default=lab.T_FLOOR)
    p.add_argument("--expect-positive", action="store_true")
    p.add_argument("--search", action="store_true", help="stop at the first negative value instead")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("roots", help="reproduce the named root constants")
    p.add_argument("--name", action="append", choices=list(lab.ROOT_TARGETS))
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("polya", help="check the convexity criterion for a kernel")
    p.add_argument("--lambda", dest="lam", type=_nonneg_int, required=True)
    _add_kernel_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_polya)

    p = sub.add_parser("interp", help="kernel interpolation on the sphere")
    p.add_argument("--points-file", required=True, help="CSV or JSON unit vectors")
    p.add_argument("--values", required=True, help="CSV with one value per point")
    _add_kernel_flags(p)
    p.add_argument("--force", action="store_true", help="skip the strict positive definiteness check")
    p.add_argument("--weights-out", default="weights.csv")
    p.add_argument("--report", default="interp_report.json")
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("random-points", help="seeded uniform points on S^{d-1}")
    p.add_argument("--d", type=_positive_int, required=True)
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_random_points)

    p = sub.add_parser("curves", help="write F_n^lambda curves for the small-n cases")
    p.add_argument("--lambda", dest="lam", type=int, choices=sorted(lab.SMALL_N_CASES), required=True)
    p.add_argument("--t-points", type=_positive_int, default=2048)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("overlap", help="write the d = 8 overlap table")
    p.add_argument("--n-max", type=_positive_int, default=500)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_overlap)
    return parser


def _config(args) -> RunConfig:
    skip = {"func", "command", "out", "points_file", "values", "weights_out", "report", "out_dir"}
    params = {k: v for k, v in vars(args).items() if k not in skip}
    inputs = [getattr(args, "points_file", None), getattr(args, "values", None)]
    kernel = getattr(args, "kernel", "")
    if kernel.startswith("csv:"):
        inputs.append(kernel[4:])
    outputs = [getattr(args, k, None) for k in ("out", "weights_out", "report")]
    fmt = "json" if args.command in ("scan", "polya") or getattr(args, "json", False) else "csv"
    return RunConfig(args.command, params, inputs, outputs, fmt)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_threads()
        _config(args).validate()
        return args.func(args)
    except UsageError as exc:
        print(f"zonalpd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PoisednessError as exc:
        print(f"zonalpd: not poised: {exc}", file=sys.stderr)
        return EXIT_POISED
    except ExpectationFailed as exc:
        print(f"zonalpd: {exc}", file=sys.stderr)
        return EXIT_EXPECT
    except (ParameterError, DomainError) as exc:
        print(f"zonalpd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ZonalPDError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"zonalpd: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
