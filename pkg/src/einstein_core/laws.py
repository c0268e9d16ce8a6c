"""Executable reverse-order-law statements for core inverses.

Each law is data: premises, an antecedent and a consequent, every one a
list of named conditions over a small expression vocabulary (Einstein
product, conjugate transpose, Kronecker product, core / group / Moore-Penrose
inverse, identity, zero).  :func:`check_law` evaluates all of them on a pair
of tensors and reports residuals; it never raises for a failed hypothesis or
for an inverse that does not exist.

Rank decisions inside compound expressions use a reference scale propagated
from the operands (a product's scale is the product of its factors'
scales), so a product that vanishes in exact arithmetic is recognised as
zero rather than as full-rank rounding noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import inverses as inv
from .errors import GenerationExhausted, IndexTooHigh, RankAmbiguous, ShapeError
from .inverses import InverseOptions, relative_residual
from .tensor import DenseTensor, dematricize, kron, matricize
from .testkit import Family, GeneratorSpec, generate, trial_seed

LAW_OPTIONS = InverseOptions(residual_tol=1e-8)


class LawId(str, Enum):
    T3_1 = "T3_1"
    C3_2 = "C3_2"
    P3_NORMAL = "P3_NORMAL"
    T3_3 = "T3_3"
    T3_4 = "T3_4"
    T3_5 = "T3_5"
    T3_6 = "T3_6"
    C3_10 = "C3_10"
    T3_11 = "T3_11"
    C3_12 = "C3_12"
    T4_1 = "T4_1"
    T4_2 = "T4_2"
    T4_3 = "T4_3"
    T4_4 = "T4_4"
    T_KRON = "T_KRON"
    T_UNITARY_A = "T_UNITARY_A"
    T_UNITARY_B = "T_UNITARY_B"


# ---------------------------------------------------------------------------
# expression vocabulary


class Undefined(ArithmeticError):
    """An inverse in the expression does not exist (or is not decidable)."""


class Expr:
    def __matmul__(self, other):
        return _Op("mul", (self, other))

    def __sub__(self, other):
        return _Op("sub", (self, other))

    @property
    def H(self):
        return _Op("H", (self,))

    @property
    def core(self):
        return _Op("core", (self,))

    @property
    def grp(self):
        return _Op("grp", (self,))

    @property
    def dag(self):
        return _Op("dag", (self,))


@dataclass(frozen=True, eq=False)
class _Sym(Expr):
    name: str

    def __str__(self):
        return self.name


_PREC = {"sub": 1, "mul": 2}


@dataclass(frozen=True, eq=False)
class _Op(Expr):
    op: str
    args: tuple

    def __str__(self):
        def wrap(e, prec):
            s = str(e)
            if isinstance(e, _Op) and e.op in _PREC and _PREC[e.op] < prec:
                return f"({s})"
            return s

        if self.op == "mul":
            return f"{wrap(self.args[0], 2)}*{wrap(self.args[1], 2)}"
        if self.op == "sub":
            return f"{self.args[0]} - {wrap(self.args[1], 2)}"
        if self.op == "kron":
            return f"({self.args[0]} (x) {self.args[1]})"
        sup = {"H": "*", "core": "^core", "grp": "^#", "dag": "^+"}[self.op]
        inner = str(self.args[0])
        if isinstance(self.args[0], _Op) and self.args[0].op != "kron":
            inner = f"({inner})"
        return f"{inner}{sup}"


def _kron(a: Expr, b: Expr) -> Expr:
    return _Op("kron", (a, b))


A, B, I, O = _Sym("A"), _Sym("B"), _Sym("I"), _Sym("O")


@dataclass
class _Val:
    t: DenseTensor
    scale: float


class LawContext:
    """Evaluates expressions over concrete A, B with memoisation."""

    def __init__(self, a: DenseTensor, b: DenseTensor, opts: InverseOptions):
        self.opts = opts
        self._leaves = {"A": a, "B": b}
        self._memo: dict[str, _Val] = {}

    def _leaf(self, name: str, like: _Val | None) -> _Val:
        if name in self._leaves:
            t = self._leaves[name]
            return _Val(t, float(np.linalg.norm(t.data.ravel())))
        raise KeyError(name)

    def value(self, e: Expr) -> _Val:
        key = str(e)
        if key in self._memo:
            return self._memo[key]
        v = self._eval(e)
        self._memo[key] = v
        return v

    def _eval(self, e: Expr) -> _Val:
        if isinstance(e, _Sym):
            if e.name in ("I", "O"):
                raise ValueError("I and O are only valid inside a sum or as an equality side")
            return self._leaf(e.name, None)
        op, args = e.op, e.args
        if op == "sub":
            x = self._fill(args[0], args[1])
            y = self._fill(args[1], args[0])
            return _Val(x.t - y.t, x.scale + y.scale)
        if op == "mul":
            x, y = self.value(args[0]), self.value(args[1])
            return _Val(x.t @ y.t, x.scale * y.scale)
        if op == "kron":
            x, y = self.value(args[0]), self.value(args[1])
            return _Val(kron(x.t, y.t), x.scale * y.scale)
        x = self.value(args[0])
        if op == "H":
            return _Val(x.t.H, x.scale)
        o = self.opts.with_scale(x.scale)
        try:
            if op == "core":
                t = inv.core_inverse(x.t, o)
            elif op == "grp":
                t = inv.group_inverse(x.t, o)
            elif op == "dag":
                t = inv.moore_penrose(x.t, o)
            else:  # pragma: no cover
                raise ValueError(op)
        except (IndexTooHigh, RankAmbiguous) as exc:
            raise Undefined(f"{e}: {exc}") from exc
        return _Val(t, float(np.linalg.norm(t.data.ravel())))

    def _fill(self, e: Expr, other: Expr) -> _Val:
        """Value of ``e``, resolving I / O against the shape of ``other``."""
        if isinstance(e, _Sym) and e.name in ("I", "O"):
            ref = self.value(other).t
            if e.name == "I":
                eye = np.eye(ref.shape.rows, dtype=np.complex128)
                return _Val(dematricize(eye, ref.shape), math.sqrt(ref.shape.rows))
            return _Val(ref * 0.0, 0.0)
        return self.value(e)

    # -- primitive judgements ------------------------------------------------

    def equal(self, lhs: Expr, rhs: Expr) -> float:
        x = self._fill(lhs, rhs)
        y = self._fill(rhs, lhs)
        if x.t.shape != y.t.shape:
            raise ShapeError(f"{lhs} and {rhs} have different shapes")
        diff = np.linalg.norm((x.t.data - y.t.data).ravel())
        return float(diff / (1.0 + max(x.scale, y.scale)))

    def range_in(self, sub: Expr, sup: Expr) -> float:
        """Residual of R(sub) within R(sup): ||P_sup X - X|| scaled."""
        x, y = self.value(sub), self.value(sup)
        m, v = matricize(y.t), matricize(x.t)
        o = self.opts.with_scale(y.scale)
        p = matricize(inv.moore_penrose(y.t, o))
        diff = np.linalg.norm(m @ (p @ v) - v)
        return float(diff / (1.0 + x.scale))

    def index_one(self, e: Expr) -> float:
        x = self.value(e)
        try:
            k = inv.index(x.t, self.opts.with_scale(x.scale)).k
        except RankAmbiguous:
            return math.inf
        return float(k - 1)


# ---------------------------------------------------------------------------
# conditions


@dataclass(frozen=True)
class Condition:
    name: str
    evaluate: Callable[[LawContext], float]


def Eq(lhs: Expr, rhs: Expr) -> Condition:
    return Condition(f"{lhs} = {rhs}", lambda c: c.equal(lhs, rhs))


def Commute(x: Expr, y: Expr) -> Condition:
    return Condition(f"{x} commutes with {y}", lambda c: c.equal(x @ y, y @ x))


def RangeIn(sub: Expr, sup: Expr) -> Condition:
    return Condition(f"R({sub}) in R({sup})", lambda c: c.range_in(sub, sup))


def RangeEq(x: Expr, y: Expr) -> Condition:
    return Condition(
        f"R({x}) = R({y})", lambda c: max(c.range_in(x, y), c.range_in(y, x))
    )


def Core(x: Expr) -> Condition:
    # residual is ind(x) - 1, so it is 0 exactly for core tensors
    return Condition(f"ind({x}) = 1", lambda c: c.index_one(x))


def EP(x: Expr) -> Condition:
    return Condition(f"{x} is EP", lambda c: c.equal(x @ x.dag, x.dag @ x))


def Unitary(x: Expr) -> Condition:
    return Condition(
        f"{x} is unitary", lambda c: max(c.equal(x @ x.H, I), c.equal(x.H @ x, I))
    )


def Member(x: Expr, of: Expr, classes: Sequence[int]) -> Condition:
    """x lies in of{classes} (equations as in verify_inverse_class)."""
    eqs = {
        1: lambda: (of @ x @ of, of),
        2: lambda: (x @ of @ x, x),
        3: lambda: ((of @ x).H, of @ x),
        4: lambda: ((x @ of).H, x @ of),
        5: lambda: (x @ of, of @ x),
        6: lambda: (x @ of @ of, of),
        7: lambda: (of @ x @ x, x),
    }
    pairs = [eqs[k]() for k in classes]
    label = ",".join(map(str, classes))
    return Condition(
        f"{x} in ({of}){{{label}}}", lambda c: max(c.equal(l, r) for l, r in pairs)
    )


@dataclass(frozen=True)
class Law:
    id: LawId
    title: str
    premises: tuple[Condition, ...]
    antecedent: tuple[Condition, ...]
    consequent: tuple[Condition, ...]
    kind: str = "implies"  # or "iff"
    # for multi-way equivalences: every named statement, antecedent first
    statements: tuple[tuple[str, tuple[Condition, ...]], ...] = ()


def _equiv(law_id, title, premises, statements) -> Law:
    first = statements[0][1]
    rest = tuple(c for _, conds in statements[1:] for c in conds)
    return Law(law_id, title, tuple(premises), first, rest, "iff", tuple(statements))


Ac, Bc, AB = A.core, B.core, A @ B
ROL = Eq(AB.core, Bc @ Ac)
ABBc = A @ B @ Bc

REGISTRY: dict[LawId, Law] = {}


def _register(law: Law) -> None:
    REGISTRY[law.id] = law


_register(Law(
    LawId.T3_1, "(AB)^core = B^core A^core when A, B commute with each other's range projectors",
    (Core(A), Core(B), Core(AB)),
    (Eq(A @ B @ Bc, B @ Bc @ A), Eq(B @ A @ Ac, A @ Ac @ B)),
    (ROL,),
))
_register(Law(
    LawId.C3_2, "(AB)^core = B^core A^core for AB = BA and A*B = BA*",
    (Core(A), Core(B)),
    (Eq(A @ B, B @ A), Eq(A.H @ B, B @ A.H)),
    (ROL,),
))
_register(Law(
    LawId.P3_NORMAL, "normal core tensors commute with their core inverse",
    (Core(A),),
    (Eq(A @ A.H, A.H @ A),),
    (Eq(A @ Ac, Ac @ A),),
))
_register(_equiv(
    LawId.T3_3, "range / annihilation criterion for the reverse-order law",
    (Core(A), Core(B), Core(AB)),
    (
        ("conditions", (
            RangeIn(A @ Bc, Bc @ Ac),
            Eq(B.H @ A.grp @ (I - (ABBc @ Ac).H) @ A, O),
        )),
        ("reverse-order law", (ROL,)),
    ),
))
_register(Law(
    LawId.T3_4, "necessary conditions of the reverse-order law",
    (Core(A), Core(B)),
    (Core(AB), ROL),
    (RangeIn(A @ B, B @ A), Member(B @ Bc @ Ac, ABBc, (3, 6))),
))
_register(Law(
    LawId.T3_5, "A^2 = BA implies the reverse-order law",
    (Core(A), Core(B)),
    (Eq(A @ A, B @ A),),
    (Core(AB), ROL, Core(ABBc), Eq(ABBc.core, B @ Bc @ Ac)),
))
_register(_equiv(
    LawId.T3_6, "range chain plus commuting projectors, under R(A*B) = R(BA*)",
    (Core(A), Core(B), Core(AB), RangeEq(A.H @ B, B @ A.H)),
    (
        ("reverse-order law", (ROL,)),
        ("range chain and commuting projectors", (
            RangeIn(Bc @ A, A @ B),
            RangeIn(A @ B, B @ A),
            Commute(A @ Ac, B @ Bc),
        )),
    ),
))
_register(Law(
    LawId.C3_10, "(ABB^core)^core = BB^core A^core under R(A*B) = R(BA*)",
    (Core(A), Core(B), RangeEq(A.H @ B, B @ A.H)),
    (Core(AB), ROL),
    (Eq(ABBc.core, B @ Bc @ Ac), Eq(B @ Bc @ Ac, (B @ Bc).core @ Ac)),
))
_register(Law(
    LawId.T3_11, "EP A with R(A) in R(AB): ((A^core)* B)^core = B^core A*",
    (Core(A), Core(B)),
    (RangeIn(A, AB), EP(A), Core(AB), ROL),
    (Eq((Ac.H @ B).core, Bc @ A.H),),
))
_register(Law(
    LawId.C3_12, "EP A, R(A) in R(AB), R(B*) in R(B*A*): (ABB^core)^core = BB^core A^core",
    (Core(A), Core(B)),
    (RangeIn(A, AB), RangeIn(B.H, B.H @ A.H), EP(A), Core(AB), ROL),
    (Eq(ABBc.core, B @ Bc @ Ac),),
))
_register(_equiv(
    LawId.T4_1, "mixed-type law (AB)^core = (AB)^# = B^core (ABB^core)^core",
    (Core(B), Core(AB), Core(ABBc)),
    (
        ("a", (Eq(AB.core, AB.grp), Eq(AB.grp, Bc @ ABBc.core))),
        ("b", (Commute(Bc @ ABBc.core, AB),)),
        ("c", (
            Eq(Bc @ B @ A @ B, AB),
            Eq(AB, B @ Bc @ A @ B),
            Eq(B @ A @ ABBc.core, ABBc.core @ A @ B),
        )),
        ("d", (Eq(ABBc.core, B @ AB.grp),)),
    ),
))
_register(_equiv(
    LawId.T4_2, "A^core = B (AB)^#",
    (Core(A), Core(B)),
    (
        ("a", (Eq(Ac, B @ AB.grp),)),
        ("b", (Eq(Ac @ A @ B, B @ A @ Ac), RangeIn(A, AB))),
        ("c", (Eq(AB.grp, AB.core), ROL, RangeIn(A, B))),
    ),
))
_register(_equiv(
    LawId.T4_3, "A^core = B (AB)^core iff R(A) in R(BAB)",
    (Core(A),),
    (
        ("a", (Eq(Ac, B @ AB.core),)),
        ("b", (RangeIn(A, B @ A @ B),)),
    ),
))
_register(_equiv(
    LawId.T4_4, "(AB)^# = B^core A^core and (BA)^# = A^core B^core",
    (Core(A), Core(B)),
    (
        ("a", (Eq(AB.grp, Bc @ Ac), Eq((B @ A).grp, Ac @ Bc))),
        ("b", (
            Eq(Ac @ A @ B, B @ A @ Ac),
            Eq(Bc @ B @ A, A @ B @ Bc),
            Eq(A @ Bc @ Ac, Bc @ Ac @ A),
        )),
    ),
))
_register(Law(
    LawId.T_KRON, "core inverse of a Kronecker product",
    (Core(A), Core(B)),
    (),
    (Eq(_kron(A, B).core, _kron(Ac, Bc)),),
))
_register(Law(
    LawId.T_UNITARY_B, "B unitary with R(B* A^core) in R(A^core): (AB)^core = B* A^core",
    (Core(A), Core(B), Core(AB)),
    (Unitary(B), RangeIn(B.H @ Ac, Ac)),
    (Eq(AB.core, B.H @ Ac),),
))
_register(Law(
    LawId.T_UNITARY_A, "A unitary with R(A) in R(B): (AB)^core = B^core A*",
    (Core(A), Core(B), Core(AB)),
    (Unitary(A), RangeIn(A, B)),
    (Eq(AB.core, Bc @ A.H),),
))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ConditionResult:
    name: str
    residual: float
    passed: bool
    premise: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": _json_float(self.residual),
            "pass": self.passed,
            "premise": self.premise,
        }


@dataclass(frozen=True)
class LawReport:
    """Outcome of evaluating one law on one pair.

    ``hypotheses`` lists premises followed by the antecedent.
    ``implication_ok`` is ``not all(hypotheses pass) or conclusion_pass``.
    For equivalences, ``equivalence_ok`` additionally requires every
    statement to have the same truth value whenever the premises hold.
    """

    law: LawId
    hypotheses: tuple[ConditionResult, ...]
    conclusions: tuple[ConditionResult, ...]
    conclusion_residual: float
    conclusion_pass: bool
    implication_ok: bool
    equivalence_ok: bool | None = None
    statements: dict = field(default_factory=dict)

    @property
    def hypotheses_pass(self) -> bool:
        return all(h.passed for h in self.hypotheses)

    @property
    def premises_pass(self) -> bool:
        return all(h.passed for h in self.hypotheses if h.premise)

    @property
    def ok(self) -> bool:
        return self.implication_ok and self.equivalence_ok is not False

    def to_dict(self) -> dict:
        out = {
            "law": self.law.value,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "conclusions": [c.to_dict() for c in self.conclusions],
            "conclusion_residual": _json_float(self.conclusion_residual),
            "conclusion_pass": self.conclusion_pass,
            "implication_ok": self.implication_ok,
        }
        if self.equivalence_ok is not None:
            out["equivalence_ok"] = self.equivalence_ok
            out["statements"] = dict(self.statements)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _json_float(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "nan")


def _run(cond: Condition, ctx: LawContext, premise: bool = False) -> ConditionResult:
    try:
        r = cond.evaluate(ctx)
    except Undefined:
        r = math.inf
    if math.isnan(r):
        r = math.inf
    return ConditionResult(cond.name, r, r <= ctx.opts.residual_tol, premise)


def check_law(
    law: LawId | str,
    a: DenseTensor,
    b: DenseTensor,
    opts: InverseOptions | None = None,
) -> LawReport:
    """Evaluate ``law`` on (a, b) and report every residual."""
    law = LawId(law)
    opts = LAW_OPTIONS if opts is None else opts
    spec = REGISTRY[law]
    if not (a.is_square and b.is_square):
        raise ShapeError(f"laws need square tensors, got {a.shape} and {b.shape}")
    if law is not LawId.T_KRON and a.shape != b.shape:
        raise ShapeError(f"{law.value} needs equal shapes, got {a.shape} and {b.shape}")
    ctx = LawContext(a, b, opts)
    prem = tuple(_run(c, ctx, premise=True) for c in spec.premises)
    ante = tuple(_run(c, ctx) for c in spec.antecedent)
    cons = tuple(_run(c, ctx) for c in spec.consequent)
    hyps = prem + ante
    concl_res = max((c.residual for c in cons), default=0.0)
    concl_pass = all(c.passed for c in cons)
    hyp_pass = all(h.passed for h in hyps)
    implication_ok = (not hyp_pass) or concl_pass
    equivalence_ok = None
    statements = {}
    if spec.kind == "iff":
        by_name = {c.name: c for c in ante + cons}
        for name, conds in spec.statements:
            statements[name] = all(by_name[c.name].passed for c in conds)
        premises_ok = all(p.passed for p in prem)
        equivalence_ok = (not premises_ok) or len(set(statements.values())) == 1
    return LawReport(
        law, hyps, cons, concl_res, concl_pass, implication_ok, equivalence_ok, statements
    )


# ---------------------------------------------------------------------------
# falsification search


def default_generators(law: LawId | str, shape) -> list[GeneratorSpec]:
    """Generator families whose instances satisfy the law's hypotheses.

    For equivalences the list also contains a generic family on which the
    statements typically fail together.
    """
    law = LawId(law)
    F = Family
    g = lambda fam, **kw: GeneratorSpec(shape, fam, **kw)
    table = {
        LawId.T3_1: [g(F.RANGE_COMMUTING_PAIR), g(F.NORMAL_COMMUTING_PAIR)],
        LawId.C3_2: [g(F.COMMUTING_POLY_PAIR), g(F.NORMAL_COMMUTING_PAIR)],
        LawId.P3_NORMAL: [g(F.NORMAL_COMMUTING_PAIR)],
        LawId.T3_3: [g(F.RANGE_COMMUTING_PAIR), g(F.NORMAL_COMMUTING_PAIR), g(F.INDEX1_PAIR)],
        LawId.T3_4: [g(F.RANGE_COMMUTING_PAIR), g(F.NORMAL_COMMUTING_PAIR)],
        LawId.T3_5: [g(F.SQUARE_CONDITION)],
        LawId.T3_6: [g(F.NORMAL_COMMUTING_PAIR), g(F.COMMUTING_POLY_PAIR), g(F.STABLE_CORANGE_PAIR)],
        LawId.C3_10: [g(F.NORMAL_COMMUTING_PAIR), g(F.COMMUTING_POLY_PAIR)],
        LawId.T3_11: [g(F.NORMAL_COMMUTING_PAIR, support="a_in_b")],
        LawId.C3_12: [g(F.NORMAL_COMMUTING_PAIR, support="equal")],
        LawId.T4_1: [g(F.NORMAL_COMMUTING_PAIR), g(F.INDEX1_PAIR)],
        LawId.T4_2: [g(F.NORMAL_COMMUTING_PAIR, support="a_in_b"), g(F.INDEX1_PAIR)],
        LawId.T4_3: [g(F.INVARIANT_RANGE_PAIR), g(F.NORMAL_COMMUTING_PAIR, support="a_in_b"), g(F.INDEX1_PAIR)],
        LawId.T4_4: [g(F.NORMAL_COMMUTING_PAIR), g(F.INDEX1_PAIR)],
        LawId.T_KRON: [g(F.INDEX1_PAIR)],
        LawId.T_UNITARY_B: [g(F.UNITARY_INVARIANT_PAIR)],
        LawId.T_UNITARY_A: [g(F.UNITARY_INVERTIBLE_PAIR)],
    }
    return table[law]


def run_trials(
    law: LawId | str,
    gen: GeneratorSpec,
    trials: int,
    opts: InverseOptions | None = None,
) -> list[LawReport]:
    """Evaluate ``law`` on ``trials`` pairs drawn with per-trial seeds."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not gen.family.is_pair:
        raise ValueError(f"{gen.family.value} does not generate pairs")
    out = []
    for t in range(trials):
        a, b = generate(gen.with_seed(trial_seed(gen.seed, t)))
        out.append(check_law(law, a, b, opts))
    return out


def counterexample_search(
    law: LawId | str,
    gen: GeneratorSpec,
    trials: int,
    opts: InverseOptions | None = None,
) -> list[LawReport]:
    """Reports, in trial order, that violate the law's implication(s)."""
    return [r for r in run_trials(law, gen, trials, opts) if not r.ok]
