"""Command-line front end.

Instance files are plain-text and sectioned; all numbers are rational
strings, so inputs are bit-exact:

    [system]
    matrix = 3/5 -4/5 0 ; 4/5 3/5 0 ; 0 0 1/2
    start = 1 0 1

    [predicates]
    P = x1 > 0
    Q = x2 >= 0

    [formula]
    ltl = P U Q

    [config]
    mode = empirical
    horizon = 10000

Commands: check (exit 0 true / 1 false / 2 inconclusive / 64+ input error),
classify, orbit.
"""

import argparse
import configparser
import dataclasses
import json
import sys

from gmpy2 import mpq

from .bounded import BigMagnitude, OracleCache, check
from .errors import (
    BoundOverflowError,
    InconclusiveError,
    InvalidInputError,
    OrbitmcError,
)
from .ltl import check_atoms_resolve, parse_formula, pretty
from .predicates import AtomicPredicate
from .spectral import ComplexPair, RationalMatrix3, ThreeReal, classify

REPORT_SCHEMA_VERSION = "1"

_MODES = ("rigorous", "interval", "empirical")
_OUTPUTS = ("text", "json")

EX_OK = 0
EX_FALSE = 1
EX_INCONCLUSIVE = 2
EX_BADINPUT = 64
EX_UNSUPPORTED = 65


@dataclasses.dataclass
class RunConfig:
    mode: str = "empirical"
    horizon: int = 10000
    baker_c: int = 3
    baker_d: int = 3
    precision_bits: int = 128
    output: str = "text"

    def __post_init__(self):
        if self.mode not in _MODES:
            raise InvalidInputError(f"mode must be one of {_MODES}")
        if self.output not in _OUTPUTS:
            raise InvalidInputError(f"output must be one of {_OUTPUTS}")
        if int(self.horizon) < 1:
            raise InvalidInputError("horizon must be at least 1")
        if int(self.baker_c) < 1 or int(self.baker_d) < 1:
            raise InvalidInputError("exponent constants must be positive")
        if int(self.precision_bits) < 32:
            raise InvalidInputError("precision_bits must be at least 32")
        self.horizon = int(self.horizon)
        self.baker_c = int(self.baker_c)
        self.baker_d = int(self.baker_d)
        self.precision_bits = int(self.precision_bits)


@dataclasses.dataclass
class Instance:
    matrix: RationalMatrix3
    start: tuple
    predicates: dict
    formula_text: str
    config: RunConfig


def _parse_rational_row(text):
    parts = text.replace(",", " ").split()
    try:
        return [mpq(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInputError(f"bad rational in {text!r}: {exc}") from exc


def load_instance(path, overrides=None) -> Instance:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # predicate names are case-sensitive
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise InvalidInputError(f"malformed instance file: {exc}") from exc

    for section in ("system", "predicates", "formula"):
        if not parser.has_section(section):
            raise InvalidInputError(f"missing [{section}] section")

    sys_sec = parser["system"]
    if "matrix" not in sys_sec or "start" not in sys_sec:
        raise InvalidInputError("[system] needs matrix and start")
    rows = [
        _parse_rational_row(row)
        for row in sys_sec["matrix"].replace("\n", ";").split(";")
        if row.strip()
    ]
    matrix = RationalMatrix3(rows)
    start = RationalMatrix3.pad_vector(_parse_rational_row(sys_sec["start"]))

    predicates = {
        name: AtomicPredicate.parse(name, text)
        for name, text in parser["predicates"].items()
    }
    if not predicates:
        raise InvalidInputError("[predicates] section is empty")

    if "ltl" not in parser["formula"]:
        raise InvalidInputError("[formula] needs an ltl entry")
    formula_text = parser["formula"]["ltl"]
    check_atoms_resolve(parse_formula(formula_text), predicates)

    options = dict(parser["config"]) if parser.has_section("config") else {}
    options.update(overrides or {})
    allowed = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(options) - allowed
    if unknown:
        raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    config = RunConfig(**options)
    return Instance(matrix, start, predicates, formula_text, config)


# ---------------------------------------------------------------------------
# reports


def _bound_value(B):
    if isinstance(B, BigMagnitude):
        return repr(B)
    return int(B)


def verdict_report(verdict_obj, instance) -> dict:
    if verdict_obj is None:
        verdict = "inconclusive"
    else:
        verdict = bool(verdict_obj.verdict)
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "formula": instance.formula_text.strip(),
        "verdict": verdict,
        "mode": instance.config.mode,
    }
    if verdict_obj is not None:
        bounds = {}
        for sub, cert in verdict_obj.bounds.items():
            entry = {"B": _bound_value(cert.B), "mode": cert.mode}
            if cert.depth is not None:
                entry["depth"] = cert.depth
            bounds[pretty(sub)] = entry
        report.update(
            {
                "regime": verdict_obj.regime,
                "rigor": verdict_obj.rigor,
                "bounds": bounds,
                "diagnostics": _plain_json(verdict_obj.diagnostics),
            }
        )
    return report


def _plain_json(value):
    if isinstance(value, dict):
        return {str(k): _plain_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_plain_json(v) for v in value]
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    return str(value)


def _print_text_report(report, out):
    print(f"formula:  {report['formula']}", file=out)
    print(f"verdict:  {report['verdict']}", file=out)
    if "regime" in report:
        print(f"regime:   {report['regime']}", file=out)
        print(f"rigor:    {report['rigor']}", file=out)
        for sub, entry in report.get("bounds", {}).items():
            print(f"bound:    {sub}  B={entry['B']}  ({entry['mode']})", file=out)
        diag = report.get("diagnostics", {})
        for key in sorted(diag):
            print(f"{key}: {diag[key]}", file=out)


# ---------------------------------------------------------------------------
# commands


def cmd_check(path, overrides=None, out=None) -> int:
    out = out or sys.stdout
    try:
        instance = load_instance(path, overrides)
    except (InvalidInputError, OrbitmcError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_BADINPUT
    try:
        verdict = check(
            instance.matrix,
            instance.start,
            instance.formula_text,
            instance.predicates,
            mode=instance.config.mode,
            horizon=instance.config.horizon,
            baker_c=instance.config.baker_c,
            baker_d=instance.config.baker_d,
        )
    except InconclusiveError as exc:
        report = verdict_report(None, instance)
        report["reason"] = str(exc)
        _emit(report, instance.config.output, out)
        return EX_INCONCLUSIVE
    except (BoundOverflowError, OrbitmcError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_UNSUPPORTED
    report = verdict_report(verdict, instance)
    _emit(report, instance.config.output, out)
    return EX_OK if verdict.verdict else EX_FALSE


def _emit(report, output, out):
    if output == "json":
        json.dump(report, out, indent=2, sort_keys=True)
        print(file=out)
    else:
        _print_text_report(report, out)


def _ball_str(ball) -> str:
    re = float(ball.re)
    im = float(ball.im)
    r = float(ball.radius)
    return f"{re:+.10f} {im:+.10f}i (+/- {r:.2e})"


def cmd_classify(path, out=None) -> int:
    out = out or sys.stdout
    try:
        instance = load_instance(path)
        cls = classify(instance.matrix)
    except OrbitmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_BADINPUT
    eps = mpq(1, 2**60)
    if isinstance(cls, ThreeReal):
        print("regime: three real eigenvalues", file=out)
        print(f"largest jordan block: {cls.jordan_case}", file=out)
        for eig in cls.eigs:
            print(f"eigenvalue: {_ball_str(eig.refine(eps))}", file=out)
    else:
        assert isinstance(cls, ComplexPair)
        if cls.rou_order is not None:
            print(f"regime: root-of-unity rotation of order {cls.rou_order}", file=out)
        else:
            print("regime: irrational rotation", file=out)
        print(f"lambda: {_ball_str(cls.lam.refine(eps))}", file=out)
        print(f"rho:    {_ball_str(cls.rho.refine(eps))}", file=out)
        print(f"gamma:  {_ball_str(cls.gamma.refine(eps))}", file=out)
    return EX_OK


def cmd_orbit(path, steps, out=None) -> int:
    out = out or sys.stdout
    if steps < 0:
        print("error: steps must be nonnegative", file=sys.stderr)
        return EX_BADINPUT
    try:
        instance = load_instance(path)
    except OrbitmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_BADINPUT
    cache = OracleCache(instance.matrix, instance.start, instance.predicates)
    names = sorted(instance.predicates)
    print("n\t" + "\t".join(["x1", "x2", "x3"] + names), file=out)
    for n in range(steps + 1):
        point = cache.point(n)
        truths = [str(cache.truth(name, n)) for name in names]
        print(
            f"{n}\t" + "\t".join(str(x) for x in point) + "\t" + "\t".join(truths),
            file=out,
        )
    return EX_OK


# ---------------------------------------------------------------------------
# argument parsing


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="orbitmc",
        description="Decide LTL formulas over polynomial predicates on "
        "orbits of rational 3x3 matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run the decision procedure")
    p_check.add_argument("file")
    p_check.add_argument("--mode", choices=_MODES)
    p_check.add_argument("--horizon", type=int)
    p_check.add_argument("--baker-c", type=int, dest="baker_c")
    p_check.add_argument("--baker-d", type=int, dest="baker_d")
    p_check.add_argument(
        "--json", action="store_true", help="emit a machine-readable report"
    )

    p_classify = sub.add_parser("classify", help="report the eigenvalue regime")
    p_classify.add_argument("file")

    p_orbit = sub.add_parser("orbit", help="print exact orbit points")
    p_orbit.add_argument("file")
    p_orbit.add_argument("--steps", type=int, default=10)

    args = parser.parse_args(argv)
    if args.command == "check":
        overrides = {}
        for key in ("mode", "horizon", "baker_c", "baker_d"):
            value = getattr(args, key)
            if value is not None:
                overrides[key] = value
        if args.json:
            overrides["output"] = "json"
        return cmd_check(args.file, overrides)
    if args.command == "classify":
        return cmd_classify(args.file)
    return cmd_orbit(args.file, args.steps)


if __name__ == "__main__":
    sys.exit(main())
