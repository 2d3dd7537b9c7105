"""Command-line front end.

Subcommands ``eval``, ``simulate``, ``compare``, ``state`` and ``diagram``.
Structured output is JSON on stdout.  Exit codes: 0 success, 2 validation
failure, 3 numerical guard (dimension cap, or a negative recovered ``|K|^2``
under ``--strict``).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .estimation import CROSSOVER_EXACT, haar_average_ratio, lu_crossover, simulate_network
from .invariants import InvariantError, diagram, evaluate, named_invariant, spec_from_json
from .network import DimensionCapError, NetworkConfig
from .states import (
    DensityMatrix,
    PureState,
    StateError,
    density_from_pure,
    haar_random_pure,
    parse_named_state,
    random_mixed,
    state_from_json,
    state_to_json,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ValidationError(Exception):
    pass


class NumericalGuard(Exception):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(args, inputs: list[str]) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "summary")}
    return {
        "command": args.command,
        "arguments": params,
        "seed": getattr(args, "seed", None),
        "inputs": {p: _digest(p) for p in inputs},
        "version": __version__,
    }


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _load_state(path: str, form: str | None):
    state = state_from_json(_load_json(path))
    if form == "mixed" and isinstance(state, PureState):
        state = density_from_pure(state)
    elif form == "pure" and isinstance(state, DensityMatrix):
        raise ValidationError("a mixed state cannot be evaluated in pure form")
    return state


def _load_spec(args, n=None):
    if args.spec:
        return spec_from_json(_load_json(args.spec)), [args.spec]
    return named_invariant(args.invariant, n), []


def _emit(obj, args):
    print(json.dumps(obj, indent=2, sort_keys=True))
    if getattr(args, "summary", False):
        print(_summary(obj), file=sys.stderr)


def _summary(obj) -> str:
    keys = ("value", "estimate", "exact", "ratio", "crossover")
    parts = [f"{k}={obj[k]:.6g}" for k in keys if isinstance(obj.get(k), (int, float))]
    return " ".join(parts) or "ok"


def cmd_eval(args):
    state = _load_state(args.state_file, args.form)
    spec, spec_inputs = _load_spec(args, state.n)
    out = evaluate(state, spec).to_json()
    out["manifest"] = _manifest(args, [args.state_file] + spec_inputs)
    _emit(out, args)


def cmd_simulate(args):
    if args.shots > 0 and args.seed is None:
        raise ValidationError("--seed is required when --shots > 0")
    state = _load_state(args.state_file, args.form)
    spec, spec_inputs = _load_spec(args, state.n)
    component = {"re": "real", "im": "imaginary"}[args.component]
    try:
        spa = args.spa == "on" if args.spa else spec.mode == "slocc"
        config = NetworkConfig(spec, use_spa=spa, component=component, shots=args.shots, seed=args.seed)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    report = simulate_network(state, config)
    out = report.to_json()
    out["mode"] = spec.mode
    out["manifest"] = _manifest(args, [args.state_file] + spec_inputs)
    if args.strict and "below_zero" in report.flags:
        raise NumericalGuard("recovered |K|^2 is negative", out)
    _emit(out, args)


def cmd_compare(args):
    if args.seed is None and not args.crossover:
        raise ValidationError("--seed is required for Monte Carlo comparisons")
    out: dict = {"comparison": args.comparison}
    if args.crossover:
        if args.comparison != "lu":
            raise ValidationError("--crossover is only defined for the lu comparison")
        out["crossover"] = lu_crossover(epsilon=args.epsilon)
        out["crossover_closed_form"] = CROSSOVER_EXACT
    else:
        if args.comparison == "lu":
            rows = [haar_average_ratio("lu", args.samples, args.epsilon, args.seed).to_json()]
        else:
            variants = ["quadratic", "literal"] if args.variant == "both" else [args.variant]
            rows = [haar_average_ratio("slocc", args.samples, args.epsilon, args.seed, v).to_json() for v in variants]
        out["rows"] = rows
        out["ratio"] = rows[0]["ratio"]
    out["manifest"] = _manifest(args, [])
    _emit(out, args)


def cmd_state(args):
    if args.kind == "named":
        if not args.name:
            raise ValidationError("named states need a name, e.g. bell or ghz(3)")
        state = parse_named_state(args.name)
    else:
        if args.seed is None:
            raise ValidationError("--seed is required for random states")
        if not args.dims:
            raise ValidationError("--dims is required for random states")
        try:
            dims = [int(x) for x in args.dims.split(",")]
        except ValueError:
            raise ValidationError(f"cannot parse --dims {args.dims!r}") from None
        state = random_mixed(dims, args.seed) if args.mixed else haar_random_pure(dims, args.seed)
    out = state_to_json(state)
    out["manifest"] = _manifest(args, [])
    _emit(out, args)


def cmd_diagram(args):
    spec, _ = _load_spec(args)
    sys.stdout.write(diagram(spec))


def _add_spec_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec", help="JSON spec file {mode, r, perms}")
    g.add_argument("--invariant", help="catalog name, e.g. two_qubit_quartic or moment(2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"invlab {__version__}")
    parser.add_argument("--summary", action="store_true", help="also print a one-line summary to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate an invariant on a state file")
    p.add_argument("state_file")
    _add_spec_args(p)
    p.add_argument("--form", choices=["pure", "mixed"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="simulate the measuring network")
    p.add_argument("state_file")
    _add_spec_args(p)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--spa", choices=["on", "off"], help="SPA stage (default: on for SLOCC invariants)")
    p.add_argument("--component", choices=["re", "im"], default="re")
    p.add_argument("--form", choices=["pure", "mixed"])
    p.add_argument("--strict", action="store_true", help="exit 3 when the recovered |K|^2 is negative")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="Haar-averaged network vs tomography budgets")
    p.add_argument("comparison", choices=["lu", "slocc"])
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--variant", choices=["quadratic", "literal", "both"], default="both")
    p.add_argument("--crossover", action="store_true", help="report the b3 boundary instead (lu only)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("state", help="write a state as JSON")
    p.add_argument("kind", choices=["named", "random"])
    p.add_argument("name", nargs="?", help="bell, product, schmidt(p), ghz(n), w(n)")
    p.add_argument("--dims", help="comma-separated party dimensions")
    p.add_argument("--seed", type=int)
    p.add_argument("--mixed", action="store_true", help="random mixed state instead of pure")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("diagram", help="DOT diagram of an invariant")
    _add_spec_args(p)
    p.set_defaults(func=cmd_diagram)
    return parser


def _error(kind: str, message: str, report: dict | None = None) -> None:
    err = {"type": kind, "message": message}
    if report is not None:
        err["report"] = report
    print(json.dumps({"error": err}, sort_keys=True))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValidationError, StateError, InvariantError, ValueError) as exc:
        _error("validation", str(exc))
        return EXIT_VALIDATION
    except (DimensionCapError, NumericalGuard) as exc:
        _error("numerical_guard", str(exc), getattr(exc, "report", None))
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
