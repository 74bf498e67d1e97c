"""Command-line front end.

Exit status is 0 when every verdict passes, 1 when a check fails and 2 on
usage or parse errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .parser import ParseError, SystemFileError, parse_system
from .systems import REALITY_MODES, UnknownSystem, available, builtin, load

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _system(name: str):
    path = Path(name)
    if name.endswith(".sys") or path.is_file():
        if not path.is_file():
            raise UsageError(f"no such file: {name}")
        return load(parse_system(path.read_text(encoding="utf-8")))
    try:
        return builtin(name)
    except UnknownSystem as exc:
        raise UsageError(str(exc).strip("'\"")) from None


def _pairs(text: str | None, what: str) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"{what} entries look like name=value, got {item!r}")
        k, v = (t.strip() for t in item.split("=", 1))
        out[k] = v
    return out


def _reality(text: str | None) -> dict:
    out = _pairs(text, "--reality")
    for k, v in out.items():
        if v not in REALITY_MODES:
            raise UsageError(f"reality of {k} must be one of {', '.join(REALITY_MODES)}")
    return out


def _values(text: str | None) -> dict:
    from fractions import Fraction
    out = {}
    for k, v in _pairs(text, "--params").items():
        try:
            out[k] = Fraction(v)
        except ValueError:
            raise UsageError(f"parameter {k} needs a rational value, got {v!r}") from None
    return out


def _settings(args):
    from .verify.suites import Settings
    try:
        return Settings(tol=args.tol, samples=args.samples, seed=args.seed, numeric=not args.no_numeric)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(report, args) -> int:
    print(report.to_text(timing=not args.no_timing))
    if args.json:
        text = report.to_json()
        if args.json == "-":
            print(text)
        else:
            Path(args.json).write_text(text + "\n", encoding="utf-8")
    return EXIT_OK if report.ok else EXIT_FAIL


# -- commands ------------------------------------------------------------------------

def cmd_list(args) -> int:
    for name in available():
        s = builtin(name)
        extra = list(s.classical_integrals)
        line = f"{name:<26} {s.frame:<12} integrals: {', '.join(s.integrals)}"
        if extra:
            line += f"; classical: {', '.join(extra)}"
        print(line)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify.suites import integrability_suite
    return _emit(integrability_suite(_system(args.system), _settings(args), classical=args.classical), args)


def cmd_algebra(args) -> int:
    from .verify.suites import algebra_report
    s = _system(args.system)
    if not s.algebra:
        raise UsageError(f"{s.name} declares no algebra relations")
    return _emit(algebra_report(s, _settings(args)), args)


def cmd_adjoint(args) -> int:
    from .verify.suites import adjoint_classify
    s = _system(args.system)
    reality = _reality(args.reality)
    unknown = set(reality) - set(s.params)
    if unknown:
        raise UsageError(f"{s.name} has no parameter {', '.join(sorted(unknown))}")
    return _emit(adjoint_classify(s, reality=reality, settings=_settings(args)), args)


def cmd_determ(args) -> int:
    from .verify.determining import branch_name, compatibility_replay
    try:
        branch = branch_name(args.branch)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    return _emit(compatibility_replay(branch), args)


def cmd_eigen(args) -> int:
    from .verify.eigen import EIGEN_SYSTEMS, eigen_suite
    s = _system(args.system)
    if s.name not in EIGEN_SYSTEMS:
        raise UsageError(f"no eigenfunction checks for {s.name}; available: {', '.join(sorted(EIGEN_SYSTEMS))}")
    return _emit(eigen_suite(s, _settings(args)), args)


def cmd_depend(args) -> int:
    from .verify.suites import dependence_check
    s = _system(args.system)
    if not s.dependence:
        raise UsageError(f"{s.name} declares no dependence relation")
    return _emit(dependence_check(s, _settings(args), _reality(args.reality), _values(args.params)), args)


def cmd_conserve(args) -> int:
    from .verify.classical import StepFailure, conservation_report
    s = _system(args.system)
    names = args.integrals.split(",") if args.integrals else None
    try:
        rep = conservation_report(s, names, _values(args.params), t_end=args.t_end, step=args.step,
                                  halvings=args.halvings, seed=args.seed)
    except (KeyError, ValueError) as exc:
        raise UsageError(exc.args[0] if exc.args else str(exc)) from None
    except StepFailure as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return _emit(rep, args)


def cmd_parse(args) -> int:
    path = Path(args.file)
    if not path.is_file():
        raise UsageError(f"no such file: {args.file}")
    try:
        sf = parse_system(path.read_bytes())
        s = load(sf)
    except SystemFileError as exc:
        for d in exc.diagnostics:
            print(f"{args.file}:{d}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{args.file}: ok ({s.name}, {len(s.integrals)} integrals, {len(s.params)} parameters)")
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="numeric tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--samples", type=int, default=100, help="numeric sample points (default 100)")
    common.add_argument("--json", metavar="PATH", help="also write the structured report ('-' for stdout)")
    common.add_argument("--no-numeric", action="store_true", help="skip the numeric oracle")
    common.add_argument("--no-timing", action="store_true", help="omit the elapsed time from text output")

    p = argparse.ArgumentParser(prog="magint", description="Exact verification of integrals of motion.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("list", help="list builtin systems")
    s.set_defaults(func=cmd_list)

    s = sub.add_parser("verify", parents=[common], help="commutators of every integral with H")
    s.add_argument("system", help="builtin name or .sys file")
    s.add_argument("--classical", action="store_true", help="also check Poisson brackets")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("algebra", parents=[common], help="integral algebra relations and closure")
    s.add_argument("system")
    s.set_defaults(func=cmd_algebra)

    s = sub.add_parser("adjoint", parents=[common], help="symmetry and pseudo-Hermiticity classification")
    s.add_argument("system")
    s.add_argument("--reality", metavar="NAME=MODE,...", help="parameter reality, e.g. b=imag,w0=real")
    s.set_defaults(func=cmd_adjoint)

    s = sub.add_parser("determ", parents=[common], help="replay of the compatibility analysis")
    s.add_argument("branch", help="common, k40 (k4=k5=0), k4 (k4!=0) or all")
    s.set_defaults(func=cmd_determ)

    s = sub.add_parser("eigen", parents=[common], help="eigenfunction residuals")
    s.add_argument("system")
    s.set_defaults(func=cmd_eigen)

    s = sub.add_parser("depend", parents=[common], help="dependence relation among integrals")
    s.add_argument("system", nargs="?", default="inverse-square-B")
    s.add_argument("--reality", metavar="NAME=MODE,...")
    s.add_argument("--params", metavar="NAME=VALUE,...", help="substitute parameter values")
    s.set_defaults(func=cmd_depend)

    s = sub.add_parser("conserve", parents=[common], help="classical conservation along trajectories")
    s.add_argument("system")
    s.add_argument("--params", metavar="NAME=VALUE,...", help="real parameter values, e.g. b=1")
    s.add_argument("--integrals", metavar="NAMES", help="comma-separated integral names (default: all)")
    s.add_argument("--t-end", type=float, default=100.0)
    s.add_argument("--step", type=float, default=0.02)
    s.add_argument("--halvings", type=int, default=2)
    s.set_defaults(func=cmd_conserve)

    s = sub.add_parser("parse", help="validate a system-definition file")
    s.add_argument("--check", dest="file", required=True, metavar="FILE")
    s.set_defaults(func=cmd_parse)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"magint: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemFileError as exc:
        for d in exc.diagnostics:
            print(f"magint: {d}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"magint: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
