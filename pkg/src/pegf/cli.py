"""Command-line front end: ``pegf <subcommand> [flags]``.

Every subcommand writes CSV (or JSON with ``--format json``) to stdout.
Exit status is 0 on success, 1 on a domain error (the point is outside the
support, an integral diverges, the curve has no consistent root, ...) and 2
on a usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence, TextIO

import numpy as np

from . import catalog, egf_core, inference, reconstruct
from .errors import PegfError
from .samples import parse_sample_lines, write_sample

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _num(x) -> str:
    return repr(float(x) + 0.0)


def _dist(text: str) -> catalog.Distribution:
    try:
        return catalog.parse_spec(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _order(text: str) -> float:
    try:
        return egf_core.SOrder(float(text)).value
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _bandwidth(text: str) -> str | float:
    if text == "silverman":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bandwidth must be 'silverman' or a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return value


def _branch(text: str) -> str | float:
    try:
        return reconstruct.parse_branch(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pegf", description="Past entropy generating functions of lifetime distributions.")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="PEGF at one (s, t)")
    p.add_argument("--dist", type=_dist, required=True)
    p.add_argument("--s", type=_order, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--force-quadrature", action="store_true")

    p = sub.add_parser("curve", help="tabulate the PEGF as an EgfCurve CSV")
    p.add_argument("--dist", type=_dist, required=True)
    p.add_argument("--s", type=_order, required=True)
    p.add_argument("--t-min", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--points", type=_positive_int, required=True)
    p.add_argument("--spacing", choices=("linear", "geometric"), default="linear")

    p = sub.add_parser("entropy", help="past entropy at t")
    p.add_argument("--dist", type=_dist, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--via-rhr", action="store_true")

    p = sub.add_parser("reconstruct", help="recover lambda and F from an EgfCurve CSV")
    p.add_argument("--input", required=True, help="curve file, or - for stdin")
    p.add_argument("--branch", type=_branch, default="larger")
    p.add_argument("--tangent-tol", type=float, default=1e-6)

    p = sub.add_parser("estimate", help="plug-in PEGF from a sample file")
    p.add_argument("--input", required=True, help="sample file, or - for stdin")
    p.add_argument("--s", type=_order, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--method", choices=("moment", "quadrature"), default="moment")
    p.add_argument("--bandwidth", type=_bandwidth, default="silverman")
    p.add_argument("--boundary", choices=("reflect", "none"), default="reflect")

    p = sub.add_parser("gof", help="bootstrap goodness-of-fit test for the power distribution")
    p.add_argument("--input", required=True, help="sample file, or - for stdin")
    p.add_argument("--s", type=_order, default=2.0)
    p.add_argument("--q-lo", type=float, default=0.2)
    p.add_argument("--q-hi", type=float, default=0.9)
    p.add_argument("--grid", type=int, default=15)
    p.add_argument("--boot", type=int, default=499)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--rescale", action="store_true", help="divide by the sample maximum first (changes the null family)")
    p.add_argument("--method", choices=("moment", "quadrature"), default="moment")
    p.add_argument("--bandwidth", type=_bandwidth, default="silverman")
    p.add_argument("--summary", action="store_true", help="append a human-readable summary as # comments")

    p = sub.add_parser("sample", help="seeded draws, one per line")
    p.add_argument("--dist", type=_dist, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    return parser


def _emit_pairs(pairs: list[tuple[str, float]], fmt: str, out: TextIO) -> None:
    if fmt == "json":
        out.write(json.dumps({k: float(v) + 0.0 for k, v in pairs}) + "\n")
    else:
        for key, value in pairs:
            out.write(f"{key},{_num(value)}\n")


def _open_input(path: str, stdin: TextIO):
    if path == "-":
        return stdin, False
    return open(path), True


def _read_lines(path: str, stdin: TextIO) -> list[str]:
    fh, close = _open_input(path, stdin)
    try:
        return fh.readlines()
    finally:
        if close:
            fh.close()


def _cmd_eval(args, quad, stdin, out):
    value = None
    if not args.force_quadrature:
        try:
            value = catalog.closed_form_pegf(args.dist, args.s, args.t)
        except NotImplementedError:
            value = None
    if value is None:
        value = egf_core.pegf(args.dist, args.s, args.t, quad)
    _emit_pairs([("pegf", value)], args.format, out)


def _cmd_curve(args, quad, stdin, out):
    if not args.t_min < args.t_max:
        raise UsageError("--t-min must be below --t-max")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    if args.spacing == "geometric":
        if args.t_min <= 0:
            raise UsageError("geometric spacing needs --t-min > 0")
        grid = np.geomspace(args.t_min, args.t_max, args.points)
    else:
        grid = np.linspace(args.t_min, args.t_max, args.points)
    curve = egf_core.pegf_curve(args.dist, args.s, grid, quad)
    if args.format == "json":
        out.write(
            json.dumps(
                {
                    "s": curve.s,
                    "support_high": curve.support_high if math.isfinite(curve.support_high) else "inf",
                    "source": curve.source,
                    "t": curve.t_grid.tolist(),
                    "value": curve.values.tolist(),
                }
            )
            + "\n"
        )
    else:
        curve.write_csv(out)


def _cmd_entropy(args, quad, stdin, out):
    fn = egf_core.past_entropy_via_rhr if args.via_rhr else egf_core.past_entropy
    _emit_pairs([("past_entropy", fn(args.dist, args.t, quad))], args.format, out)


def _cmd_reconstruct(args, quad, stdin, out):
    cfg = reconstruct.RootSolveConfig(init_branch=args.branch, tangent_tol=args.tangent_tol)
    curve = egf_core.parse_curve(_read_lines(args.input, stdin))
    result = reconstruct.reconstruct_cdf(curve, cfg)
    if args.format == "json":
        out.write(
            json.dumps(
                {
                    "t": result.t_grid.tolist(),
                    "lambda": result.lam.tolist(),
                    "cdf": result.cdf.tolist(),
                    "max_eq8_residual": result.max_eq8_residual,
                }
            )
            + "\n"
        )
    else:
        result.write_csv(out)


def _estimator(args) -> inference.EstimatorConfig:
    return inference.EstimatorConfig(
        method=args.method, bandwidth=args.bandwidth, boundary=getattr(args, "boundary", "reflect")
    )


def _cmd_estimate(args, quad, stdin, out):
    cfg = _estimator(args)
    data = parse_sample_lines(_read_lines(args.input, stdin), origin=args.input)
    pairs = [
        ("pegf_estimate", inference.pegf_estimate(data, args.s, args.t, cfg)),
        ("reversed_hazard_estimate", inference.reversed_hazard_estimate(data, args.t, cfg)),
    ]
    _emit_pairs(pairs, args.format, out)


def _cmd_gof(args, quad, stdin, out):
    if not args.s > 1:
        raise UsageError("the power test needs --s > 1")
    if not 0 < args.q_lo < args.q_hi < 1:
        raise UsageError("need 0 < --q-lo < --q-hi < 1")
    if args.grid < 5:
        raise UsageError("--grid must be at least 5")
    if args.boot < 99:
        raise UsageError("--boot must be at least 99")
    cfg = _estimator(args)
    data = parse_sample_lines(_read_lines(args.input, stdin), origin=args.input)
    if args.rescale:
        data = data.rescaled_to_unit()
    report = inference.power_gof_test(
        data,
        s=args.s,
        q_lo=args.q_lo,
        q_hi=args.q_hi,
        m=args.grid,
        n_boot=args.boot,
        seed=args.seed,
        cfg=cfg,
        workers=args.workers,
    )
    if args.format == "json":
        out.write(json.dumps(report.to_dict()) + "\n")
    else:
        out.write(report.csv_header() + "\n")
        out.write(report.csv_row() + "\n")
    if args.summary:
        for line in report.summary().splitlines():
            out.write(f"# {line}\n")


def _cmd_sample(args, quad, stdin, out):
    data = catalog.sample(args.dist, args.n, args.seed)
    if args.format == "json":
        out.write(json.dumps({"origin": data.origin, "values": data.values.tolist()}) + "\n")
    else:
        write_sample(data, out)


_COMMANDS = {
    "eval": _cmd_eval,
    "curve": _cmd_curve,
    "entropy": _cmd_entropy,
    "reconstruct": _cmd_reconstruct,
    "estimate": _cmd_estimate,
    "gof": _cmd_gof,
    "sample": _cmd_sample,
}


def run(
    argv: Sequence[str] | None = None,
    stdin: TextIO | None = None,
    stdout: TextIO | None = None,
    stderr: TextIO | None = None,
) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        quad = egf_core.QuadratureConfig.from_env()
    except UsageError as err:
        stderr.write(f"usage error: {err}\n")
        return EXIT_USAGE
    except ValueError as err:
        stderr.write(f"usage error: {err}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args, quad, stdin, stdout)
    except UsageError as err:
        stderr.write(f"usage error: {err}\n")
        return EXIT_USAGE
    except PegfError as err:
        stderr.write(f"error: {type(err).__name__}: {err}\n")
        return EXIT_DOMAIN
    except OSError as err:
        stderr.write(f"error: {err}\n")
        return EXIT_DOMAIN
    except ValueError as err:
        stderr.write(f"usage error: {err}\n")
        return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
