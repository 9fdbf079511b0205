"""Command-line front end.

Every command reads and writes UTF-8 JSON. Exit codes:
0 success or "yes", 1 "no", 2 parse/config error, 3 size limit,
4 verification or solver failure, 5 promise violation, 6 demo check failed.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .channel import (ChannelPair, ChoiMatrix, choi_from_dict, choi_from_stinespring, choi_to_dict,
                      stinespring_to_dict, tensor_power)
from .circuit import circuit_from_dict, compile_to_channel
from .degradability import test_antidegradable, test_degradable
from .dnorm import decide_qcd, diamond_norm, repetition_bounds, theorem_parameters
from .embed import (ANTIDEGRADABLE, DEGRADABLE, antidegradable_embedding, degradable_embedding, embed,
                    embedding_from_dict, verify)
from .errors import (ChannelForgeError, CircuitError, ContractError, ShapeError, SizeLimitError,
                     SolverError)
from .library import random_circuit

EXIT_OK, EXIT_NO, EXIT_CONFIG, EXIT_SIZE, EXIT_VERIFY, EXIT_PROMISE, EXIT_DEMO = range(7)
DEFAULT_TOL = 1e-7
DEMO_TOL_MAX = 1e-2


class ConfigError(ChannelForgeError):
    pass


# --- I/O helpers ------------------------------------------------------------------

def _read_json(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError:
        raise ConfigError(f"{path}: not UTF-8") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _with_file(path, fn, *args):
    try:
        return fn(*args)
    except CircuitError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_circuit(path: str):
    return _with_file(path, circuit_from_dict, _read_json(path))


def load_channel(path: str) -> ChoiMatrix:
    """A Choi document, or a circuit document compiled on the fly."""
    doc = _read_json(path)
    if isinstance(doc, dict) and (doc.get("kind") == "choi" or "dim_in" in doc):
        return _with_file(path, choi_from_dict, doc)
    circ = _with_file(path, circuit_from_dict, doc)
    return choi_from_stinespring(compile_to_channel(circ))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, (dict, list)):
        return json.dumps(v)
    return str(v)


def render_pretty(doc, indent: int = 0) -> str:
    """Two-column key/value table; nested objects are indented sections."""
    lines = []
    pad = " " * indent
    width = max((len(str(k)) for k in doc), default=0)
    for k, v in doc.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(render_pretty(v, indent + 2))
        elif isinstance(v, list) and len(v) > 8:
            lines.append(f"{pad}{str(k).ljust(width)}  <{len(v)} entries>")
        else:
            lines.append(f"{pad}{str(k).ljust(width)}  {_fmt(v)}")
    return "\n".join(lines)


def _emit(args, doc) -> None:
    text = render_pretty(doc) if args.pretty else json.dumps(doc, sort_keys=False)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _tol(value: float) -> float:
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f"tolerance must be a positive number, got {value}")
    return value


def _thresholds(a: float, b: float) -> None:
    if not 0 <= b < a <= 2:
        raise ConfigError(f"thresholds must satisfy 0 <= b < a <= 2, got a={a}, b={b}")


# --- commands ---------------------------------------------------------------------

def cmd_compile(args) -> int:
    rep = compile_to_channel(load_circuit(args.circuit))
    doc = choi_to_dict(choi_from_stinespring(rep))
    if args.stinespring:
        doc["stinespring"] = stinespring_to_dict(rep)
    _emit(args, doc)
    return EXIT_OK


def cmd_embed(args) -> int:
    tol = _tol(args.tol)
    phi = load_circuit(args.circuit)
    try:
        result = embed(phi, args.mode)
    except ContractError as exc:
        raise ConfigError(f"{args.circuit}: {exc}") from None
    doc = result.to_dict()
    code = EXIT_OK
    if args.verify:
        report = verify(result, tol)
        doc["verification"] = report.to_dict()
        code = EXIT_OK if report.passed else EXIT_VERIFY
    _emit(args, doc)
    return code


def cmd_verify(args) -> int:
    tol = _tol(args.tol)
    doc = _read_json(args.envelope)
    result = _with_file(args.envelope, embedding_from_dict, doc)
    try:
        report = verify(result, tol)
    except (CircuitError, ShapeError) as exc:
        _emit(args, {"passed": False, "detail": str(exc)})
        return EXIT_VERIFY
    _emit(args, report.to_dict())
    return EXIT_OK if report.passed else EXIT_VERIFY


def _pair(args) -> ChannelPair:
    a = load_channel(args.first)
    b = load_channel(args.second)
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise ConfigError(f"channels have different shapes: {a.dim_in}->{a.dim_out} vs {b.dim_in}->{b.dim_out}")
    return ChannelPair(a, b)


def cmd_dnorm(args) -> int:
    tol = _tol(args.tol)
    res = diamond_norm(_pair(args), tol)
    _emit(args, res.to_dict(include_witness=args.witness))
    return EXIT_OK


def cmd_distinguish(args) -> int:
    tol = _tol(args.tol)
    _thresholds(args.a, args.b)
    if not tol < (args.a - args.b) / 2:
        raise ConfigError("tolerance must be below half the promise gap")
    pair = _pair(args)
    answer = decide_qcd(pair, args.a, args.b, tol)
    _emit(args, {"answer": answer, "a": args.a, "b": args.b})
    return {"yes": EXIT_OK, "no": EXIT_NO}.get(answer, EXIT_PROMISE)


def cmd_repeat(args) -> int:
    if args.k < 1:
        raise ConfigError("-k must be a positive integer")
    _emit(args, choi_to_dict(tensor_power(load_channel(args.channel), args.k)))
    return EXIT_OK


def cmd_params(args) -> int:
    if not 0 < args.b < args.a < 2:
        raise ConfigError(f"thresholds must satisfy 0 < b < a < 2, got a={args.a}, b={args.b}")
    k, eps = theorem_parameters(args.a, args.b)
    _emit(args, {"k": k, "epsilon": eps})
    return EXIT_OK


def _r(x: float) -> float:
    """Round for a byte-stable report."""
    return float(f"{x:.9g}")


def run_demo(seed: int, tol: float) -> tuple[dict, list]:
    """Qubit-scale walk through the reduction; returns the report and failed check names."""
    rng = np.random.default_rng(seed)
    phis = [random_circuit(rng, 1, 1, 6) for _ in range(2)]
    chans = [choi_from_stinespring(compile_to_channel(c)) for c in phis]
    checks = {}

    delta = diamond_norm(ChannelPair(*chans), tol).value
    halves = {}
    for flavor, build in ((DEGRADABLE, degradable_embedding), (ANTIDEGRADABLE, antidegradable_embedding)):
        embs = [build(c) for c in phis]
        emb_chans = [choi_from_stinespring(compile_to_channel(e.embedded)) for e in embs]
        value = diamond_norm(ChannelPair(*emb_chans), tol).value
        halves[flavor] = value
        checks[f"halving_{flavor}"] = abs(value - delta / 2) <= 2 * tol
        checks[f"mate_identity_{flavor}"] = all(verify(e, 1e-9).passed for e in embs)
        tester = test_degradable if flavor == DEGRADABLE else test_antidegradable
        checks[f"feasible_{flavor}"] = all(tester(compile_to_channel(e.embedded), tol).feasible for e in embs)

    k = 2
    rep = diamond_norm(ChannelPair(tensor_power(chans[0], k), tensor_power(chans[1], k)), tol).value
    rb = repetition_bounds(delta, k) if delta > 0 else None
    if rb is None:
        checks["repetition_bounds"] = rep <= tol
    else:
        checks["repetition_bounds"] = rb.lower - tol <= rep <= rb.upper + tol

    report = {
        "seed": seed,
        "tol": tol,
        "dnorm_phi": _r(delta),
        "dnorm_degradable": _r(halves[DEGRADABLE]),
        "dnorm_antidegradable": _r(halves[ANTIDEGRADABLE]),
        "repetition": {"k": k, "dnorm": _r(rep),
                       "lower": _r(rb.lower) if rb else 0.0, "upper": _r(rb.upper) if rb else 0.0},
        "checks": checks,
    }
    failed = [name for name, ok in checks.items() if not ok]
    report["passed"] = not failed
    return report, failed


def cmd_demo(args) -> int:
    tol = _tol(args.tol)
    if tol > DEMO_TOL_MAX:
        raise ConfigError(f"--tol must lie in (0, {DEMO_TOL_MAX}], got {tol}")
    report, failed = run_demo(args.seed, tol)
    _emit(args, report)
    if failed:
        print(f"demo check failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_DEMO
    return EXIT_OK


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable table instead of JSON")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")

    p = argparse.ArgumentParser(prog="channelforge", description="Channel embeddings and certified diamond norms.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("compile", parents=[common], help="circuit -> Choi matrix")
    s.add_argument("circuit")
    s.add_argument("--stinespring", action="store_true", help="also emit the dilation")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("embed", parents=[common], help="embed a square circuit")
    s.add_argument("circuit")
    s.add_argument("--mode", choices=[DEGRADABLE, ANTIDEGRADABLE], default=DEGRADABLE)
    s.add_argument("--verify", action="store_true", help="check the mate identity")
    s.add_argument("--tol", type=float, default=DEFAULT_TOL)
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("verify", parents=[common], help="check an embedding envelope")
    s.add_argument("envelope")
    s.add_argument("--tol", type=float, default=DEFAULT_TOL)
    s.set_defaults(func=cmd_verify)

    for name, func, hlp in (("dnorm", cmd_dnorm, "certified diamond norm of a difference"),
                            ("distinguish", cmd_distinguish, "decide the distinguishability promise problem")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("first")
        s.add_argument("second")
        s.add_argument("--tol", type=float, default=DEFAULT_TOL)
        if name == "dnorm":
            s.add_argument("--witness", action="store_true", help="include the optimal input state")
        else:
            s.add_argument("--a", type=float, required=True)
            s.add_argument("--b", type=float, required=True)
        s.set_defaults(func=func)

    s = sub.add_parser("repeat", parents=[common], help="k-fold tensor power")
    s.add_argument("channel")
    s.add_argument("-k", type=int, required=True)
    s.set_defaults(func=cmd_repeat)

    s = sub.add_parser("params", parents=[common], help="repetition count and base threshold")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--b", type=float, required=True)
    s.set_defaults(func=cmd_params)

    s = sub.add_parser("demo", parents=[common], help="end-to-end run on a random qubit pair")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=DEFAULT_TOL)
    s.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ConfigError, CircuitError, ContractError, ShapeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
