"""Command line interface.

Exit status: 0 success, 1 a verified criterion failed, 2 usage or domain
error, 3 numerical failure.  Errors go to stderr as one line of JSON with
a ``code`` field.
"""

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import criteria, figures, storage
from .cauchy_solver import SolverParams, solve
from .errors import MissingTable, TetraError, UsageError
from .fixpoint import principal_fixed_point, validate_base
from .koenigs import KoenigsContext, chi, chi_inverse
from .special_functions import iterate, sexp, slog


@dataclass(frozen=True)
class RunConfig:
    base: float
    solver: SolverParams
    table_path: Optional[Path] = None
    output_format: str = "json"
    precision_digits: int = 17

    def __post_init__(self):
        if not 6 <= self.precision_digits <= 17:
            raise UsageError("precision_digits must lie in [6, 17]")
        if self.output_format not in ("json", "csv"):
            raise UsageError("output_format must be 'json' or 'csv'")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_base(token: str) -> float:
    if token.strip().lower() == "e":
        return math.e
    try:
        return float(token)
    except ValueError:
        raise UsageError(f"base must be 'e' or a decimal number, got {token!r}") from None


def parse_complex(token: str) -> complex:
    parts = token.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise UsageError(f"expected 're' or 're,im', got {token!r}")


def parse_floats(token: str, n: int):
    try:
        vals = [float(v) for v in token.split(",")]
    except ValueError:
        vals = []
    if len(vals) != n:
        raise UsageError(f"expected {n} comma separated numbers, got {token!r}")
    return vals


def _emit(obj, digits):
    print(storage.dumps(obj, digits))


def _check_writable(path: Path):
    parent = path.resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise UsageError(f"cannot write to {path}")


def _table(args):
    path = Path(args.table) if args.table else storage.default_table_path(parse_base(args.base))
    if not path.is_file():
        raise MissingTable(f"no table at {path}; run 'tetralib solve' first")
    return storage.load_table(path)


def _progress(it, update):
    print(f"sweep {it}: update {update:.3e}", file=sys.stderr, flush=True)


# -- commands ----------------------------------------------------------------


def cmd_fixpoint(args):
    fp = principal_fixed_point(validate_base(parse_base(args.base)))
    _emit({"base": fp.b, "L": fp.L, "L_conj": fp.L_conj, "c": fp.c, "residual": fp.residual}, args.digits)
    return 0


def cmd_koenigs(args):
    fp = principal_fixed_point(validate_base(parse_base(args.base)))
    ctx = KoenigsContext(fp, depth=args.depth)
    z = parse_complex(args.at)
    w = chi(ctx, z)
    out = {"z": z, "chi": w, "round_trip": abs(chi_inverse(ctx, w) - z)}
    out["schroder_residual"] = abs(chi(ctx, fp.base.exp(z)) - fp.c * w)
    _emit(out, args.digits)
    return 0


def cmd_solve(args):
    b = parse_base(args.base)
    base = validate_base(b)
    config = RunConfig(
        base=b,
        solver=SolverParams(
            n_nodes=args.nodes, height=args.height, tol=args.tol,
            max_iters=args.max_iters, damping=args.damping, tail=args.tail,
        ),
        table_path=Path(args.out) if args.out else storage.default_table_path(b),
        precision_digits=args.digits,
    )
    _check_writable(config.table_path)
    table = solve(base, config.solver, progress=None if args.quiet else _progress)
    storage.save_table(table, config.table_path)
    _emit(
        {
            "out": str(config.table_path),
            "residual": table.final_residual,
            "iterations": table.iterations,
            "update_norm": table.update_norm,
            "endpoint_gap": table.endpoint_gap,
        },
        config.precision_digits,
    )
    return 0


def cmd_sexp(args):
    table = _table(args)
    z = parse_complex(args.at)
    _emit({"z": z, "sexp": sexp(table, z)}, args.digits)
    return 0


def cmd_slog(args):
    table = _table(args)
    z = parse_complex(args.at)
    _emit({"z": z, "slog": slog(table, z)}, args.digits)
    return 0


def cmd_iterate(args):
    table = _table(args)
    z = parse_complex(args.at)
    c = parse_complex(args.c)
    _emit({"c": c, "z": z, "value": iterate(table, c, z)}, args.digits)
    return 0


def _reports(table, args):
    alpha = lambda z: slog(table, z)  # noqa: E731
    if args.perturb == "szekeres":
        alpha = criteria.szekeres(alpha)
    window = parse_floats(args.window, 4)
    k_range = [int(v) for v in parse_floats(args.k_range, 2)]
    which = ["A", "B", "C"] if args.criterion == "all" else [args.criterion]
    out = []
    for name in which:
        if name == "A":
            out.append(criteria.check_covering(
                alpha, criteria.InitialRegionH(table.fp), window, k_range,
                samples=args.samples or 500,
            ))
        else:
            check = criteria.check_criterion_B if name == "B" else criteria.check_criterion_C
            curve = criteria.curve_ell(table.fp, args.samples or 256)
            out.append(check(alpha, curve, threshold=args.threshold))
    return out


def cmd_verify(args):
    table = _table(args)
    reports = _reports(table, args)
    passed = all(r.passed for r in reports)
    if len(reports) == 1:
        doc = reports[0].to_dict()
    else:
        doc = {"criterion": "all", "passed": passed, "reports": [r.to_dict() for r in reports]}
    text = storage.dumps(doc, args.digits)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(storage.dumps({"criterion": args.criterion, "passed": passed}, args.digits))
    return 0 if passed else 1


def cmd_emit_figure(args):
    out = Path(args.out)
    _check_writable(out)
    tables = {}
    for path in args.table or []:
        t = storage.load_table(path)
        tables[storage.base_token(t.base.b)] = t

    def need(token):
        if token not in tables:
            path = storage.table_dir() / f"table_{token}.json"
            if not path.is_file():
                raise MissingTable(f"figure {args.figure} needs the base-{token} table at {path}")
            tables[token] = storage.load_table(path)
        return tables[token]

    d = args.digits
    if args.figure == "fig1":
        storage.write_csv(out, figures.FIG1_HEADER, figures.fig1_rows(need("e"), need("2")), d)
    elif args.figure == "fig3":
        t = need("e")
        storage.write_csv(out, figures.FIG3_HEADER, figures.fig3_rows(t), d)
        boundary = out.with_name(out.stem + "_boundary" + out.suffix)
        storage.write_csv(boundary, figures.FIG3_BOUNDARY_HEADER, figures.fig3_boundary_rows(t), d)
    else:
        storage.write_csv(out, figures.FIG4_HEADER, figures.fig4_rows(need("e")), d)
    return 0


# -- wiring ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tetralib", description="Tetration, super-logarithm and Abel-function criteria.")
    ap.add_argument("--digits", type=int, default=17, help="significant digits in output (6-17)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fixpoint", help="principal fixed point of exp_b")
    p.add_argument("--base", default="e")
    p.set_defaults(func=cmd_fixpoint)

    p = sub.add_parser("koenigs", help="Koenigs function at a point")
    p.add_argument("--base", default="e")
    p.add_argument("--at", required=True, help="re,im")
    p.add_argument("--depth", type=int, default=60)
    p.set_defaults(func=cmd_koenigs)

    p = sub.add_parser("solve", help="solve for sexp_b and write a table")
    p.add_argument("--base", default="e")
    p.add_argument("--nodes", type=int, default=128)
    p.add_argument("--height", type=float, default=6.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--tail", choices=["asymptotic", "constant"], default="asymptotic")
    p.add_argument("--out", help=f"table file (default ${storage.TABLE_DIR_ENV}/table_<base>.json)")
    p.add_argument("--quiet", action="store_true", help="no progress on stderr")
    p.set_defaults(func=cmd_solve)

    for name, func, extra in (
        ("sexp", cmd_sexp, False), ("slog", cmd_slog, False), ("iterate", cmd_iterate, True),
    ):
        p = sub.add_parser(name)
        p.add_argument("--table")
        p.add_argument("--base", default="e", help="locates the default table")
        p.add_argument("--at", required=True, help="re,im")
        if extra:
            p.add_argument("--c", required=True, help="iteration order, re or re,im")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="check a uniqueness criterion for slog")
    p.add_argument("--table")
    p.add_argument("--base", default="e")
    p.add_argument("--criterion", choices=["A", "B", "C", "all"], default="all")
    p.add_argument("--samples", type=int, help="curve samples (B, C; default 256) or probes (A; default 500)")
    p.add_argument("--window", default="-3,3,-3,3", help="x0,x1,y0,y1")
    p.add_argument("--k-range", default="-8,8")
    p.add_argument("--threshold", type=float, default=criteria.DEFAULT_THRESHOLD)
    p.add_argument("--perturb", choices=["none", "szekeres"], default="none")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("emit-figure", help="write plot data as CSV")
    p.add_argument("--table", action="append", help="table file; repeat for several bases")
    p.add_argument("--figure", choices=["fig1", "fig3", "fig4"], required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit_figure)
    return ap


# Options whose values may start with '-' (argparse would read "-1,2" as a flag).
_SIGNED_OPTIONS = ("--at", "--c", "--window", "--k-range")


def _attach_signed_values(argv):
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _SIGNED_OPTIONS:
            value = next(it, None)
            out.append(tok if value is None else f"{tok}={value}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_attach_signed_values(argv))
        if not 6 <= args.digits <= 17:
            raise UsageError("--digits must lie in [6, 17]")
        return args.func(args)
    except TetraError as exc:
        print(storage.dumps(exc.to_dict()), file=sys.stderr)
        return exc.exit_status
    except OSError as exc:
        print(storage.dumps({"code": "UsageError", "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
