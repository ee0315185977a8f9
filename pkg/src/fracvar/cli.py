"""Batch front-end.

Every subcommand writes its artifacts to the output directory, which is, in
order of precedence, ``--output-dir``, the ``FRACVAR_OUTPUT_DIR`` environment
variable, the ``output_dir`` key of a ``--config`` file, or the working
directory. On success one JSON line listing the artifacts goes to stdout; on
failure a JSON error object goes to stderr (and to ``error.json``).

Exit status: 0 success, 2 bad arguments or configuration, 3 numerical domain
violation, 4 solver did not converge (artifacts are still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from fracvar.euler_lagrange import residual_corrected, residual_generalized, residual_rl
from fracvar.expansion import HypothesisWarning, SmoothFunctionModel
from fracvar.grid import GridFunction, MemoryWindow
from fracvar.lagrangian import REGISTRY, get_lagrangian
from fracvar.operators import (
    DERIVATIVE_KINDS,
    SCHEMES,
    caputo_derivative,
    riesz_caputo_derivative,
    rl_derivative,
)
from fracvar.solver import ProblemSpec, solve_direct
from fracvar.weak import TestFunction, proposition_check, records_to_csv, theorem_check

ENV_OUTPUT_DIR = "FRACVAR_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_NOT_CONVERGED = 4


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# {{{ argument parsing


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _phis(text: str) -> list[str]:
    return [x.strip() for x in str(text).split("|") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracvar", description="Fractional variational calculus toolkit.")
    parser.add_argument("--config", type=Path, help="JSON file whose keys mirror the flags")
    parser.add_argument("--output-dir", type=Path, default=None)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--config", type=Path, default=argparse.SUPPRESS)
        p.add_argument("--output-dir", type=Path, default=argparse.SUPPRESS)
        p.add_argument("--alpha", type=float, required=True)

    p = sub.add_parser("deriv", help="fractional derivative of a grid function")
    common(p)
    p.add_argument("--input", type=Path, required=True, help="CSV with header t,u")
    p.add_argument("--side", choices=("left", "right"), default="left")
    p.add_argument("--kind", choices=DERIVATIVE_KINDS, default="riemann-liouville")
    p.add_argument("--scheme", choices=SCHEMES, default="stencil")

    p = sub.add_parser("residual", help="Euler-Lagrange residual of a candidate")
    common(p)
    p.add_argument("--lagrangian", choices=sorted(REGISTRY), required=True)
    p.add_argument("--input", type=Path, required=True, help="CSV with header t,u")
    p.add_argument("--formulation", choices=("rl", "corrected", "generalized"), default="corrected")
    p.add_argument("--window", type=_floats, default=None, help="a,A,B,b")
    p.add_argument("--mask", type=float, default=0.05)

    p = sub.add_parser("solve", help="direct minimization of the discretized action")
    common(p)
    p.add_argument("--lagrangian", choices=sorted(REGISTRY), required=True)
    p.add_argument("--kind", choices=DERIVATIVE_KINDS, default=None)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--left", type=float, required=True)
    p.add_argument("--right", type=float, default=None)
    p.add_argument("--window", type=_floats, default=None, help="a,A,B,b")
    p.add_argument("--gtol", type=float, default=None)
    p.add_argument("--maxiter", type=int, default=2000)

    p = sub.add_parser("prop-check", help="weak convergence of the adjoint partial sums")
    common(p)
    p.add_argument("--F", dest="F", type=_floats, default=[1.0, -4.0, 6.0, -4.0, 1.0],
                   help="ascending polynomial coefficients of F")
    p.add_argument("--N", type=_ints, default=[0, 2, 4, 8])
    p.add_argument("--phis", type=_phis, default=["t^0", "t^1", "t^2"],
                   help="'|'-separated test function ids")
    p.add_argument("--interval", type=_floats, default=[0.0, 1.0])
    p.add_argument("--n", type=int, default=4096)

    p = sub.add_parser("theorem-check", help="weak convergence of the approximated equation")
    common(p)
    p.add_argument("--lagrangian", choices=sorted(REGISTRY), required=True)
    p.add_argument("--u", type=_floats, default=[1.0], help="ascending polynomial coefficients of u")
    p.add_argument("--N", type=_ints, default=[0, 2, 4, 8])
    p.add_argument("--phis", type=_phis, default=["poly(0.0;0.0,1.0,-1.0)"],
                   help="'|'-separated test function ids")
    p.add_argument("--interval", type=_floats, default=[0.0, 1.0])
    p.add_argument("--n", type=int, default=2048)

    return parser


def _config_tokens(config: dict) -> list[str]:
    tokens = []
    for key, value in config.items():
        if key in ("command", "output_dir") or value is None:
            continue
        flag = "--" + key.replace("_", "-")
        if key in ("F", "N"):
            flag = "--" + key
        if isinstance(value, (list, tuple)):
            sep = "|" if key == "phis" else ","
            value = sep.join(repr(v) if isinstance(v, float) else str(v) for v in value)
        tokens.append(f"{flag}={value}")
    return tokens


#: Flags whose values may start with a minus sign, e.g. ``--window -0.5,0,1,1``.
_LIST_FLAGS = ("--window", "--interval", "--F", "--u")


def _glue_list_values(argv: list[str]) -> list[str]:
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _LIST_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def parse(argv: list[str]) -> tuple[argparse.Namespace, Path]:
    parser = build_parser()
    pre = _Parser(add_help=False)
    pre.add_argument("--config", type=Path, default=None)
    known, _ = pre.parse_known_args(argv)

    config: dict = {}
    if known.config is not None:
        try:
            config = json.loads(known.config.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {known.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {known.config} is not valid JSON: {exc}") from None
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")

    argv = _glue_list_values(list(argv))
    commands = set(COMMANDS)
    given = [a for a in argv if a in commands]
    command = given[0] if given else config.get("command")
    if command is None:
        raise ConfigError("no command given; expected one of " + ", ".join(sorted(commands)))
    if not given:
        argv = [str(command)] + argv

    # config values act as defaults: they come first so explicit flags win
    i = argv.index(str(command))
    argv = argv[: i + 1] + _config_tokens(config) + argv[i + 1 :]
    args = parser.parse_args(argv)

    out = getattr(args, "output_dir", None)
    if out is None:
        env = os.environ.get(ENV_OUTPUT_DIR)
        out = Path(env) if env else Path(config.get("output_dir", "."))
    return args, Path(out).resolve()


# }}}

# {{{ commands


class NotConverged(Exception):
    pass


def _read_grid(path: Path) -> GridFunction:
    try:
        text = path.resolve().read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return GridFunction.from_csv(text)


def _window(values, a: float, b: float) -> MemoryWindow:
    if values is None:
        return MemoryWindow.classical(a, b)
    if len(values) != 4:
        raise ConfigError("--window needs four numbers a,A,B,b")
    return MemoryWindow(*values)


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    path.write_text(text)
    return path


def cmd_deriv(args, out: Path) -> list[Path]:
    u = _read_grid(args.input)
    if args.kind == "riemann-liouville":
        d = rl_derivative(u, args.alpha, args.side, scheme=args.scheme)
    elif args.kind == "caputo":
        d = caputo_derivative(u, args.alpha, args.side, scheme=args.scheme)
    else:
        d = riesz_caputo_derivative(u, args.alpha, scheme=args.scheme)
    return [_write(out, "deriv.csv", d.to_csv())]


def cmd_residual(args, out: Path) -> list[Path]:
    u = _read_grid(args.input)
    w = _window(args.window, u.a, u.b)
    L, kind = get_lagrangian(args.lagrangian, args.alpha, w.B)
    if args.formulation == "generalized":
        first, second = residual_generalized(L, u, args.alpha, w, kind=kind, masked_fraction=args.mask)
        return [
            _write(out, "residual_AB.json", first.to_json()),
            _write(out, "residual_aA.json", second.to_json()),
        ]
    fn = residual_rl if args.formulation == "rl" else residual_corrected
    report = fn(L, u, args.alpha, kind=kind, window=w, masked_fraction=args.mask)
    return [_write(out, "residual.json", report.to_json())]


def cmd_solve(args, out: Path) -> list[Path]:
    w = _window(args.window, 0.0, 1.0)
    config = {
        "lagrangian": args.lagrangian,
        "kind": args.kind,
        "alpha": args.alpha,
        "window": {"a": w.a, "A": w.A, "B": w.B, "b": w.b},
        "boundary": {"left": args.left, "right": args.right},
        "n": args.n,
        "optimizer": {"gtol": args.gtol, "maxiter": args.maxiter},
    }
    spec = ProblemSpec.from_dict(config)
    result = solve_direct(spec)

    paths = [_write(out, "problem.json", spec.to_json())]
    paths += list(result.write(out, "solution"))
    if not result.converged:
        raise NotConverged(paths, result)
    return paths


def _test_functions(ids) -> list[TestFunction]:
    try:
        return [TestFunction.parse(x) for x in ids]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _interval(values) -> tuple[float, float]:
    if len(values) != 2:
        raise ConfigError("--interval needs two numbers a,b")
    return float(values[0]), float(values[1])


def cmd_prop_check(args, out: Path) -> list[Path]:
    a, b = _interval(args.interval)
    F = SmoothFunctionModel.polynomial(args.F)
    records = proposition_check(F, args.alpha, _test_functions(args.phis), args.N, a=a, b=b, n=args.n)
    return [_write(out, "proposition.csv", records_to_csv(records))]


def cmd_theorem_check(args, out: Path) -> list[Path]:
    a, b = _interval(args.interval)
    L, kind = get_lagrangian(args.lagrangian, args.alpha, b)
    if kind != "riemann-liouville":
        raise ValueError("theorem-check needs a Lagrangian in the Riemann-Liouville derivative")
    u = SmoothFunctionModel.polynomial(args.u)
    records = theorem_check(L, u, args.alpha, _test_functions(args.phis), args.N, a=a, b=b, n=args.n)
    return [_write(out, "theorem.csv", records_to_csv(records))]


COMMANDS = {
    "deriv": cmd_deriv,
    "residual": cmd_residual,
    "solve": cmd_solve,
    "prop-check": cmd_prop_check,
    "theorem-check": cmd_theorem_check,
}


# }}}


def _fail(status: int, kind: str, message: str, out: Path | None, artifacts=()) -> int:
    payload = {"status": status, "error": kind, "message": message,
               "artifacts": [str(p) for p in artifacts]}
    text = json.dumps(payload)
    print(text, file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(text + "\n")
        except OSError:
            pass
    return status


def _fallback_output_dir(argv: list[str]) -> Path | None:
    """Best-effort output directory when the arguments did not parse."""
    for i, tok in enumerate(argv):
        if tok == "--output-dir" and i + 1 < len(argv):
            return Path(argv[i + 1]).resolve()
        if tok.startswith("--output-dir="):
            return Path(tok.split("=", 1)[1]).resolve()
    env = os.environ.get(ENV_OUTPUT_DIR)
    return Path(env).resolve() if env else None


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    out = None
    try:
        args, out = parse(argv)
        out.mkdir(parents=True, exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HypothesisWarning)
            paths = COMMANDS[args.command](args, out)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc), out or _fallback_output_dir(argv))
    except NotConverged as exc:
        paths, result = exc.args
        return _fail(
            EXIT_NOT_CONVERGED, "not-converged",
            f"gradient norm {result.gradient_norm!r} after {result.iterations} iterations: "
            f"{result.message}",
            out, paths,
        )
    except (ValueError, FloatingPointError, ZeroDivisionError) as exc:
        return _fail(EXIT_DOMAIN, "domain", str(exc), out)

    print(json.dumps({"status": EXIT_OK, "artifacts": [str(p) for p in paths]}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
