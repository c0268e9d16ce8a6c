"""Command-line interface: ``python -m einstein_core <command> ...``.

Exit status is 0 on success, 1 on a numerical failure (index too high,
inconsistent system, failed law check) and 2 on usage or input errors.
Errors are reported on stderr as ``{"error": {...}}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from . import inverses as inv
from . import laws, poisson, solvers
from .errors import (
    GenerationExhausted,
    IndexTooHigh,
    NotConsistent,
    RankAmbiguous,
    ShapeError,
    TensorFormatError,
)
from .inverses import InverseOptions
from .io import read_tensor, tensor_to_dict
from .tensor import DenseTensor, TensorShape
from .testkit import Family, trial_seed

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures through the JSON error path
        raise UsageError(message)


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--tol", type=float, default=S, help="residual tolerance")
    p.add_argument("--rank-tol", type=float, default=S, help="relative rank threshold factor")
    p.add_argument("--seed", type=int, default=S, help="random seed (unsigned 64-bit)")
    p.add_argument("--out", default=S, help="write the result here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    g = _global_flags()
    parser = _Parser(prog="einstein_core", description=__doc__.splitlines()[0], parents=[g])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mul", parents=[g], help="Einstein product A*B")
    p.add_argument("a")
    p.add_argument("b")
    for name, text in [
        ("pinv", "Moore-Penrose inverse"),
        ("core", "core inverse"),
        ("group", "group inverse"),
        ("drazin", "Drazin inverse"),
        ("index", "index and rank sequence"),
    ]:
        sub.add_parser(name, parents=[g], help=text).add_argument("a")

    p = sub.add_parser("check-law", parents=[g], help="evaluate a reverse-order law")
    p.add_argument("law", choices=[l.value for l in laws.LawId])
    p.add_argument("--a", dest="a_path")
    p.add_argument("--b", dest="b_path")
    p.add_argument("--random", type=int, dest="random", help="number of random trials")
    p.add_argument("--trials", type=int, dest="trials", help="alias of --random")
    p.add_argument("--shape", default="2,2", help="left dims of the square tensors, e.g. 2,3")
    p.add_argument("--family", choices=[f.value for f in Family if f.is_pair])

    p = sub.add_parser("solve", parents=[g], help="solve A*X=B or C*X*D=B")
    p.add_argument("--a", dest="a_path")
    p.add_argument("--c", dest="c_path")
    p.add_argument("--d", dest="d_path")
    p.add_argument("--b", dest="b_path", required=True)

    p = sub.add_parser("poisson", parents=[g], help="Neumann Poisson demo")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--rhs", help="right-hand side grid (tensor JSON)")

    p = sub.add_parser("convert", parents=[g], help="normalize tensor JSON or import a CSV grid")
    p.add_argument("input")
    return parser


def _opts(ns) -> InverseOptions:
    kw = {}
    if hasattr(ns, "rank_tol"):
        kw["rank_tol_factor"] = ns.rank_tol
    if hasattr(ns, "tol"):
        kw["residual_tol"] = ns.tol
    return InverseOptions(**kw)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _emit(ns, text: str, stdout) -> None:
    out = getattr(ns, "out", None)
    if out is None:
        stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_inverse(ns, stdout) -> int:
    a = read_tensor(ns.a)
    opts = _opts(ns)
    if ns.command == "index":
        r = inv.index(a, opts)
        _emit(ns, _dump({"index": r.k, "ranks": list(r.ranks)}), stdout)
        return EXIT_OK
    fn = {
        "pinv": inv.moore_penrose,
        "core": inv.core_inverse,
        "group": inv.group_inverse,
        "drazin": inv.drazin,
    }[ns.command]
    _emit(ns, _dump(tensor_to_dict(fn(a, opts))), stdout)
    return EXIT_OK


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"--shape expects comma-separated integers, got {text!r}") from None
    if not dims or min(dims) < 1:
        raise UsageError(f"--shape expects positive integers, got {text!r}")
    return dims


def _cmd_check_law(ns, stdout) -> int:
    opts = _opts(ns) if hasattr(ns, "tol") or hasattr(ns, "rank_tol") else None
    if opts is not None and not hasattr(ns, "tol"):
        opts = InverseOptions(rank_tol_factor=opts.rank_tol_factor, residual_tol=laws.LAW_OPTIONS.residual_tol)
    trials = ns.random if ns.random is not None else ns.trials
    if ns.a_path or ns.b_path:
        if not (ns.a_path and ns.b_path) or trials is not None:
            raise UsageError("give both --a and --b, or --random N")
        rep = laws.check_law(ns.law, read_tensor(ns.a_path), read_tensor(ns.b_path), opts)
        _emit(ns, _dump(rep.to_dict()), stdout)
        return EXIT_OK if rep.ok else EXIT_NUMERIC
    if trials is None:
        raise UsageError("check-law needs --a/--b or --random N")
    if trials < 1:
        raise UsageError("--random must be positive")
    dims = _parse_dims(ns.shape)
    shape = TensorShape(dims, dims)
    gens = laws.default_generators(ns.law, shape)
    if ns.family is not None:
        gens = [laws.GeneratorSpec(shape, Family(ns.family))]
    seed = getattr(ns, "seed", 0)
    reports = []
    for t in range(trials):
        g = gens[t % len(gens)]
        a, b = laws.generate(g.with_seed(trial_seed(seed, t)))
        reports.append(laws.check_law(ns.law, a, b, opts))
    failures = [
        dict(trial=i, **r.to_dict()) for i, r in enumerate(reports) if not r.ok
    ]
    summary = {
        "law": ns.law,
        "trials": trials,
        "seed": seed,
        "families": [g.family.value for g in gens],
        "hypotheses_true": sum(r.hypotheses_pass for r in reports),
        "implication_ok": sum(r.implication_ok for r in reports),
        "max_conclusion_residual_when_hypotheses_hold": max(
            (r.conclusion_residual for r in reports if r.hypotheses_pass), default=0.0
        ),
        "failures": failures,
    }
    if reports[0].equivalence_ok is not None:
        summary["equivalence_ok"] = sum(bool(r.equivalence_ok) for r in reports)
    text = json.dumps(summary, sort_keys=True, default=laws._json_float)
    _emit(ns, text.replace("Infinity", '"inf"') + "\n", stdout)
    return EXIT_OK if not failures else EXIT_NUMERIC


def _cmd_solve(ns, stdout) -> int:
    opts = _opts(ns)
    tol = getattr(ns, "tol", solvers.SOLVE_TOL)
    b = read_tensor(ns.b_path)
    if ns.a_path and not (ns.c_path or ns.d_path):
        out = solvers.solve_one_sided(read_tensor(ns.a_path), b, opts, tol)
    elif ns.c_path and ns.d_path and not ns.a_path:
        out = solvers.solve_two_sided(read_tensor(ns.c_path), read_tensor(ns.d_path), b, opts, tol)
    else:
        raise UsageError("solve needs --a (one-sided) or both --c and --d (two-sided)")
    _emit(ns, _dump(out.to_dict()), stdout)
    return EXIT_OK if out.solvable else EXIT_NUMERIC


def default_rhs(m: int) -> np.ndarray:
    """Zero-mean sine bump on the unit square."""
    s = np.sin(np.pi * np.linspace(0.0, 1.0, m))
    f = np.outer(s, s)
    return f - f.mean()


def _cmd_poisson(ns, stdout, stderr) -> int:
    try:
        spec = poisson.GridSpec(ns.m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    f = read_tensor(ns.rhs) if ns.rhs else default_rhs(ns.m)
    x, report = poisson.solve_poisson(spec, f, _opts(ns))
    csv = poisson.grid_to_csv(x)
    if getattr(ns, "out", None) is None:
        stdout.write(csv)
        stderr.write(report.line() + "\n")
    else:
        _emit(ns, csv, stdout)
        stdout.write(report.line() + "\n")
    return EXIT_OK if report.passed else EXIT_NUMERIC


def _read_csv_grid(path: str) -> DenseTensor:
    try:
        grid = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise TensorFormatError("$", f"unreadable CSV grid: {exc}") from None
    if not np.all(np.isfinite(grid)):
        raise TensorFormatError("$", "non-finite value in CSV grid")
    return DenseTensor(grid, TensorShape((grid.shape[0],), (grid.shape[1],)))


def _cmd_convert(ns, stdout) -> int:
    t = _read_csv_grid(ns.input) if ns.input.lower().endswith(".csv") else read_tensor(ns.input)
    _emit(ns, _dump(tensor_to_dict(t)), stdout)
    return EXIT_OK


def _error(stderr, kind: str, message: str, **extra) -> None:
    body = {"type": kind, "message": message}
    body.update(extra)
    stderr.write(json.dumps({"error": body}, sort_keys=True) + "\n")


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    """Execute one command and return its exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        ns = build_parser().parse_args(argv)
        if getattr(ns, "seed", 0) < 0 or getattr(ns, "seed", 0) >= 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if ns.command == "mul":
            from .tensor import einstein_product

            prod = einstein_product(read_tensor(ns.a), read_tensor(ns.b))
            _emit(ns, _dump(tensor_to_dict(prod)), stdout)
            return EXIT_OK
        if ns.command in ("pinv", "core", "group", "drazin", "index"):
            return _cmd_inverse(ns, stdout)
        if ns.command == "check-law":
            return _cmd_check_law(ns, stdout)
        if ns.command == "solve":
            return _cmd_solve(ns, stdout)
        if ns.command == "poisson":
            return _cmd_poisson(ns, stdout, stderr)
        return _cmd_convert(ns, stdout)
    except UsageError as exc:
        _error(stderr, "usage", str(exc))
        return EXIT_USAGE
    except TensorFormatError as exc:
        _error(stderr, "format", str(exc), field=exc.field)
        return EXIT_USAGE
    except OSError as exc:
        _error(stderr, "io", str(exc))
        return EXIT_USAGE
    except ShapeError as exc:
        _error(stderr, "shape", str(exc))
        return EXIT_USAGE
    except IndexTooHigh as exc:
        _error(stderr, "index", str(exc), index=exc.index)
        return EXIT_NUMERIC
    except (NotConsistent, RankAmbiguous, GenerationExhausted) as exc:
        _error(stderr, type(exc).__name__, str(exc))
        return EXIT_NUMERIC


def main() -> None:  # pragma: no cover
    sys.exit(run())
