"""Command-line interface: ``qdiffeq <command> [options]``.

Exit codes: 0 success, 1 oracle or residual mismatch, 2 parse error,
3 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import __version__
from .classify import is_regular_singular, newton_polygon, polygon_json, render_ascii, render_svg
from .errors import InvalidConfiguration, ParseError, QDiffError, SeriesError
from .fixtures import fixture_names, get_fixture, load_fixture_file, run_fixture
from .frobenius import DEFAULT_MAX_SHIFT, render_prefactor, solve
from .numctx import NumericContext, format_fraction, parse_complex
from .expr import parse_expr
from .operator import normal_form, parse
from .serialize import basis_to_json, context_from_json, residual_report, solution_from_json
from .special import q_character, q_log, theta
from .verify import apply_operator, growth_classify

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_PARSE = 2
EXIT_CONFIG = 3


def _context(args) -> NumericContext:
    try:
        return NumericContext(args.q, args.precision, args.tol, args.truncation)
    except ParseError as exc:
        raise InvalidConfiguration(f"bad --q value: {exc}") from None


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _dumps(data) -> str:
    return json.dumps(_finite(data), indent=2, default=_json_default, allow_nan=False)


def _finite(x):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def _json_default(x):
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return str(x)


def _residual_tol(ctx: NumericContext) -> float:
    return 1e-8 if not ctx.high_precision else max(10 * ctx.tol, 1e-25)


# -- commands ------------------------------------------------------------

def cmd_classify(args) -> int:
    ctx = _context(args)
    op = parse(args.operator, ctx)
    report = is_regular_singular(op)
    if args.json:
        _emit(args, _dumps({
            "operator": str(op),
            "regular_singular": report.regular,
            "valuations": [_fmt_val(v) for v in report.valuations],
            "offending": [{"index": i, "valuation": _fmt_val(v), "reason": r} for i, v, r in report.offending],
        }))
    else:
        lines = [f"operator: {op}", report.describe(),
                 "valuations: " + ", ".join(f"a_{i}: {_fmt_val(v)}" for i, v in enumerate(report.valuations))]
        _emit(args, "\n".join(lines))
    return EXIT_OK


def _fmt_val(v):
    return "inf" if v == math.inf else format_fraction(Fraction(v))


def cmd_polygon(args) -> int:
    ctx = _context(args)
    op = parse(args.operator, ctx)
    poly = newton_polygon(op)
    fmt = "json" if args.json else (args.format or "ascii")
    if fmt == "json":
        _emit(args, _dumps(polygon_json(poly)))
    elif fmt == "svg":
        _emit(args, render_svg(poly))
    elif fmt == "ascii":
        _emit(args, render_ascii(poly))
    else:
        raise InvalidConfiguration(f"unknown polygon format {fmt!r}")
    return EXIT_OK


def _series_preview(ctx, series, count: int) -> str:
    parts = []
    for idx, c in series.items():
        if len(parts) >= count:
            break
        e = series.exponent(idx)
        mono = "" if e == 0 else ("z" if e == 1 else f"z^({format_fraction(e)})" if e.denominator != 1 else f"z^{e}")
        parts.append(f"({ctx.nstr(c, 10)})" + (f"*{mono}" if mono else ""))
    if series.is_exact:
        tail = ""
    else:
        tail = f" + O(z^{format_fraction(Fraction(series.truncation_exponent()))})"
    return (" + ".join(parts) or "0") + tail


def cmd_solve(args) -> int:
    ctx = _context(args)
    op = parse(args.operator, ctx)
    basis = solve(op, args.truncation, args.max_shift)
    rendered = [render_prefactor(ctx, s) for s in basis]
    fmt = "json" if args.json else (args.format or "text")
    if fmt == "json":
        _emit(args, _dumps(basis_to_json(basis, rendered)))
    elif fmt == "csv":
        rows = ["solution,log_power,exponent,re,im"]
        for k, sol in enumerate(basis):
            for a, series in sol.strata():
                for idx, c in series.items():
                    c = complex(c)
                    rows.append(f"{k},{a},{format_fraction(series.exponent(idx))},{c.real!r},{c.imag!r}")
        _emit(args, "\n".join(rows))
    elif fmt == "text":
        lines = [f"operator: {op}", f"{len(basis)} solutions (order {op.order})"]
        for k, sol in enumerate(basis):
            lines.append(f"[{k}] {rendered[k]}")
            for a, series in sol.strata():
                name = "F" if a == sol.log_power and not sol.tail else f"F_{a}"
                lines.append(f"    {name} = {_series_preview(ctx, series, args.show)}")
        diag = basis.diagnostics
        if diag.get("zero_roots_skipped"):
            lines.append(f"note: {diag['zero_roots_skipped']} zero characteristic root(s) skipped")
        if diag.get("overflow_truncated"):
            lines.append("note: some series were truncated early to stay within double range")
        _emit(args, "\n".join(lines))
    else:
        raise InvalidConfiguration(f"unknown solve format {fmt!r}")
    return EXIT_OK


def verify_reports(op, solutions) -> list:
    reports = []
    for k, sol in enumerate(solutions):
        res = apply_operator(op, sol)
        try:
            g = growth_classify(sol.series, op.ctx.q)
            growth = {"class": g.kind, "estimate": g.estimate}
        except SeriesError as exc:
            growth = {"class": "undetermined", "estimate": None, "reason": str(exc)}
        reports.append(residual_report(k, res, growth))
    return reports


def cmd_verify(args) -> int:
    if args.solutions:
        with open(args.solutions) as fh:
            data = json.load(fh)
        ctx = context_from_json(data["context"]) if "context" in data and not args.q_given else _context(args)
        text = args.operator or data.get("operator")
        if not text:
            raise InvalidConfiguration("no operator given and none stored in the solutions file")
        op = parse(text, ctx)
        solutions = [solution_from_json(ctx, s) for s in data["solutions"]]
    else:
        if not args.operator:
            raise InvalidConfiguration("verify needs an operator or --solutions FILE")
        ctx = _context(args)
        op = parse(args.operator, ctx)
        solutions = list(solve(op, args.truncation, args.max_shift))
    reports = verify_reports(op, solutions)
    ok = all(r["residual_relative"] <= _residual_tol(ctx) for r in reports)
    if args.json or args.format == "json":
        _emit(args, _dumps(reports))
    else:
        lines = [f"operator: {op}"]
        for r in reports:
            g = r["growth"]
            est = "" if g["estimate"] is None else f" ({g['estimate']:.4g})"
            lines.append(f"[{r['solution_index']}] residual {r['residual_max_abs']:.3e} "
                         f"(relative {r['residual_relative']:.3e}) up to z^{r['guaranteed_order']}; "
                         f"growth {g['class']}{est}")
        lines.append("PASS" if ok else "FAIL")
        _emit(args, "\n".join(lines))
    return EXIT_OK if ok else EXIT_MISMATCH


def _constant(text: str, ctx: NumericContext):
    """A complex literal, or a constant expression such as ``q^(1/2)`` or ``-2*q``."""
    try:
        return parse_complex(text, ctx)
    except ParseError as first:
        try:
            nf = normal_form(ctx, parse_expr(text))
        except ParseError:
            raise first from None
        if any(key != (0, 0) for key in nf):
            raise ParseError("expected a constant (no z or S)", 0, text)
        return ctx.num(nf.get((0, 0), 0))


def cmd_eval(args) -> int:
    ctx = _context(args)
    if args.z is None:
        raise InvalidConfiguration("eval needs --z")
    z = _constant(args.z, ctx)
    if args.function == "theta":
        value = theta(ctx, z)
    elif args.function == "lq":
        value = q_log(ctx, z)
    else:
        if args.lam is None:
            raise InvalidConfiguration("eval eq needs --lambda")
        value = q_character(ctx, z, _constant(args.lam, ctx))
    if args.json:
        c = complex(value)
        _emit(args, _dumps({"function": args.function, "z": args.z, "re": c.real, "im": c.imag,
                            "value": ctx.nstr(value)}))
    else:
        _emit(args, ctx.nstr(value))
    return EXIT_OK


def cmd_examples(args) -> int:
    if args.action == "list":
        if args.json:
            _emit(args, _dumps([{"name": n, "operator": get_fixture(n).operator_text(),
                                 "provenance": get_fixture(n).provenance} for n in fixture_names()]))
        else:
            width = max(len(n) for n in fixture_names())
            _emit(args, "\n".join(f"{n.ljust(width)}  {get_fixture(n).operator_text()}\n"
                                  f"{' ' * width}  ({get_fixture(n).provenance})" for n in fixture_names()))
        return EXIT_OK
    fixtures = []
    if args.file:
        fixtures.append(load_fixture_file(args.file))
    if args.all:
        fixtures.extend(get_fixture(n) for n in fixture_names())
    for name in args.names:
        try:
            fixtures.append(get_fixture(name))
        except KeyError as exc:
            raise InvalidConfiguration(str(exc.args[0])) from None
    if not fixtures:
        raise InvalidConfiguration("examples run needs NAME, --all or --file")
    fixtures.sort(key=lambda f: f.name)
    ctx = _context(args)
    N = args.truncation if args.truncation_given else None
    results = [run_fixture(f, ctx, N, args.max_shift) for f in fixtures]
    if args.json:
        _emit(args, _dumps([r.as_dict() for r in results]))
    else:
        lines = []
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"{status} {r.name}: max deviation {r.max_deviation:.3e} ({r.elapsed:.2f} s)")
            if r.error:
                lines.append(f"    error: {r.error}")
            for c in r.checks:
                if not c.passed or args.verbose:
                    lines.append(f"    {'ok ' if c.passed else 'BAD'} {c.description}: "
                                 f"{c.deviation:.3e} (tolerance {c.tolerance:.1e})")
        _emit(args, "\n".join(lines))
    return EXIT_OK if all(r.passed for r in results) else EXIT_MISMATCH


# -- parser --------------------------------------------------------------

class _Given(argparse.Action):
    """Store the value and remember that the flag was given explicitly."""

    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        setattr(namespace, f"{self.dest}_given", True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", default="2", action=_Given,
                        help="shift parameter, e.g. 2, 3/2, 1+i, polar(2,pi/7); |q| > 1")
    common.add_argument("--precision", type=int, default=50,
                        help="decimal digits; 16 or fewer selects double mode (default 50)")
    common.add_argument("--tol", type=float, default=None, help="comparison tolerance")
    common.add_argument("--truncation", type=int, default=30, action=_Given,
                        help="number of series coefficients (default 30)")
    common.add_argument("--max-shift", type=int, default=DEFAULT_MAX_SHIFT,
                        help="largest q-power gap searched between characteristic roots")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--format", default=None, help="output format (ascii|svg|json, text|json|csv)")
    common.add_argument("--out", default=None, help="write output to this file")
    common.set_defaults(q_given=False, truncation_given=False)

    parser = argparse.ArgumentParser(prog="qdiffeq", description="Local solutions of linear q-difference equations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="regular or irregular singular at z = 0")
    p.add_argument("operator")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("polygon", parents=[common], help="Newton polygon at z = 0")
    p.add_argument("operator")
    p.set_defaults(func=cmd_polygon)

    p = sub.add_parser("solve", parents=[common], help="formal solution basis at z = 0")
    p.add_argument("operator")
    p.add_argument("--show", type=int, default=6, help="coefficients shown per series in text mode")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="residual and growth report")
    p.add_argument("operator", nargs="?")
    p.add_argument("--solutions", help="JSON file written by `solve --json`")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", parents=[common], help="evaluate theta, the q-logarithm or a q-character")
    p.add_argument("function", choices=["theta", "lq", "eq"])
    p.add_argument("--z", required=True)
    p.add_argument("--lambda", dest="lam", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("examples", parents=[common], help="built-in fixtures and their oracles")
    p.add_argument("action", choices=["list", "run"])
    p.add_argument("names", nargs="*")
    p.add_argument("--all", action="store_true")
    p.add_argument("--file", default=None, help="JSON fixture {name, operator, params, oracle}")
    p.add_argument("--verbose", "-v", action="store_true", help="show every check")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        print(exc.pointer(), file=sys.stderr)
        return EXIT_PARSE
    except InvalidConfiguration as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QDiffError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
