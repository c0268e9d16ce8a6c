"""Acceptance criteria 1-8.

Each test appends one line to the acceptance summary printed at the end of
the pytest run, then asserts.
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_tensor
from einstein_core import inverses as inv
from einstein_core.laws import LawId, counterexample_search, default_generators, run_trials
from einstein_core.poisson import PoissonSolver
from einstein_core.solvers import kron_lift, solve_one_sided, solve_two_sided, unvectorize, vectorize
from einstein_core.tensor import TensorShape, kron, matricize
from einstein_core.testkit import (
    Family,
    GeneratorSpec,
    Xoshiro256,
    dense_lstsq,
    example_section3,
    generate,
    oracle_core_by_range_basis,
    oracle_core_equations,
    oracle_naive_einstein,
    trial_seed,
)

pytestmark = pytest.mark.acceptance

SHAPES = [
    TensorShape((2,), (2,)),
    TensorShape((3,), (3,)),
    TensorShape((2, 2), (2, 2)),
    TensorShape((2, 3), (2, 3)),
    TensorShape((3, 3), (3, 3)),
]


def record(num, ok, msg):
    ACCEPTANCE_LINES.append((num, bool(ok), msg))
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {msg}")


def test_criterion_1_worked_example():
    t0 = time.perf_counter()
    ex = example_section3()
    a, b = ex["A"], ex["B"]

    bc = inv.core_inverse(b)
    b_res = max(oracle_core_equations(b, bc))
    b_diag = float(np.max(np.abs(matricize(bc) - np.diag([1, 0, 1, 1, 1, 1]))))
    printed_b_res = max(oracle_core_equations(b, ex["B_core_printed"]))

    ac = inv.core_inverse(a)
    a_res = max(oracle_core_equations(a, ac))
    diff = np.abs(ac.data - ex["A_core_printed"].data)
    mismatched = [tuple(int(v) + 1 for v in ix) for ix in np.argwhere(diff > 1e-10)]
    elapsed = time.perf_counter() - t0

    for ix in mismatched:  # per-entry report; empty when every printed entry matches
        print(f"  A^core entry {ix}: computed {ac.data[tuple(i - 1 for i in ix)].real:+.6g}, "
              f"printed {ex['A_core_printed'].data[tuple(i - 1 for i in ix)].real:+.6g}")
    ok = (
        b_res <= 1e-10
        and b_diag <= 1e-10
        and printed_b_res > 1e-10
        and a_res <= 1e-10
        and not mismatched
        and elapsed < 1.0
    )
    record(1, ok, f"B^core oracle {b_res:.1e}, |B^core - diag| {b_diag:.1e}, printed B^core oracle "
                  f"{printed_b_res:.2f} (fails as expected), A^core oracle {a_res:.1e}, "
                  f"A^core entries matching print {36 - len(mismatched)}/36, {elapsed:.3f}s (<1s)")
    assert ok


def test_criterion_2_core_definition():
    t0 = time.perf_counter()
    worst_eq = worst_alt = 0.0
    for t in range(200):
        shape = SHAPES[t % len(SHAPES)]
        a = generate(GeneratorSpec(shape, Family.INDEX1, seed=trial_seed(2, t)))
        x = inv.core_inverse(a)
        worst_eq = max(worst_eq, *oracle_core_equations(a, x))
        # characterizations (a) {1,3,7} and (b) {2,3,6}, each pinning the tensor down
        for classes in ([1, 3, 7], [2, 3, 6]):
            worst_eq = max(worst_eq, *(c.residual for c in inv.verify_inverse_class(a, x, classes).values()))
        # independent constructions: range basis, and A^# A X for a non-minimal {1,3}-inverse X
        pinv = inv.moore_penrose(a)
        w = random_tensor(shape, trial_seed(3, t))
        x13 = pinv + (type(a)(np.eye(shape.rows).reshape(shape.dims), shape) - pinv @ a) @ w
        alts = [oracle_core_by_range_basis(a, rank=inv.numerical_rank(a)), inv.drazin(a) @ a @ x13]
        worst_alt = max(worst_alt, *(inv.relative_residual(alt, x) for alt in alts))
    elapsed = time.perf_counter() - t0
    ok = worst_eq <= 1e-10 and worst_alt <= 1e-9 and elapsed < 30
    record(2, ok, f"200 index-1 tensors: max equation residual {worst_eq:.1e} (<=1e-10), "
                  f"max disagreement with alternative constructions {worst_alt:.1e} (<=1e-9), {elapsed:.1f}s (<30s)")
    assert ok


def test_criterion_3_reverse_order_laws():
    t0 = time.perf_counter()
    shapes = [TensorShape((2, 2), (2, 2)), TensorShape((2, 3), (2, 3))]
    summary, failures, short = [], 0, []
    for n, law in enumerate(LawId):
        satisfied = 0
        worst = 0.0
        for round_ in range(10):
            for shape in shapes:
                for g in default_generators(law, shape):
                    for rep in run_trials(law, g.with_seed(trial_seed(1000 * n + round_, 3)), 10):
                        failures += not rep.ok
                        if rep.hypotheses_pass:
                            satisfied += 1
                            worst = max(worst, rep.conclusion_residual)
            if satisfied >= 200:
                break
        hits = sum(
            len(counterexample_search(law, g.with_seed(991), 20))
            for g in default_generators(law, shapes[1])
        )
        failures += hits
        if satisfied < 200:
            short.append(law.value)
        summary.append(f"{law.value}:{satisfied}")
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and not short and elapsed < 300
    record(3, ok, f"17 laws, instances satisfying hypotheses per law [{', '.join(summary)}], "
                  f"implication/equivalence failures {failures}, counterexamples 0 expected, {elapsed:.1f}s (<300s)")
    assert ok, (failures, short)


def test_criterion_4_kronecker():
    worst = 0.0
    for t in range(50):
        s1 = SHAPES[t % 3]
        s2 = SHAPES[(t + 1) % 3]
        a, b = generate(GeneratorSpec(s1, Family.INDEX1_PAIR, seed=trial_seed(4, t), shape2=s2))
        lhs = inv.core_inverse(kron(a, b))
        rhs = kron(inv.core_inverse(a), inv.core_inverse(b))
        worst = max(worst, inv.relative_residual(lhs, rhs))
    ok = worst <= 1e-8
    record(4, ok, f"50 core pairs: max residual of (A kron B)^core vs A^core kron B^core {worst:.1e} (<=1e-8)")
    assert ok


def test_criterion_5_drazin_product_rule():
    worst = 0.0
    high = 0
    for t in range(100):
        shape = SHAPES[2 + t % 2]
        a, b = generate(GeneratorSpec(shape, Family.DRAZIN_PAIR, seed=trial_seed(5, t), index=2 + t % 2))
        high += inv.index(a @ b).k > 1
        ab_d = inv.drazin(a @ b)
        worst = max(worst, inv.relative_residual(inv.drazin(b @ a), b @ ab_d @ ab_d @ a))
    ok = worst <= 1e-8 and high > 0
    record(5, ok, f"100 pairs ({high} with ind(AB) > 1): max residual of (BA)^D vs B((AB)^D)^2 A "
                  f"{worst:.1e} (<=1e-8)")
    assert ok


def test_criterion_6_solver_completeness():
    one_cert = two_cert = True
    worst_part = worst_family = 0.0
    for t in range(100):
        shape = SHAPES[t % len(SHAPES)]
        a = generate(GeneratorSpec(shape, Family.INDEX1, seed=trial_seed(6, t)))
        b = a @ random_tensor(TensorShape(shape.left_dims, (2,)), trial_seed(7, t))
        out = solve_one_sided(a, b)
        one_cert &= out.solvable
        worst_part = max(worst_part, out.residual)
        x_ls = dense_lstsq(a, b)
        worst_family = max(worst_family, inv.relative_residual(out.family_member(x_ls - out.particular), x_ls))

        s1, s2 = SHAPES[t % 3], SHAPES[(t + 2) % 3]
        c = generate(GeneratorSpec(s1, Family.INDEX1, seed=trial_seed(8, t)))
        d = generate(GeneratorSpec(s2, Family.INDEX1, seed=trial_seed(9, t)))
        b2 = c @ random_tensor(TensorShape(s1.left_dims, s2.left_dims), trial_seed(10, t)) @ d
        out2 = solve_two_sided(c, d, b2)
        two_cert &= out2.solvable
        worst_part = max(worst_part, out2.residual)
        k = matricize(kron_lift(c, d))
        x2 = np.linalg.lstsq(k, vectorize(b2).data.ravel(), rcond=None)[0]
        x2 = unvectorize(type(b2)(x2, vectorize(b2).shape), b2.shape)
        worst_family = max(worst_family, inv.relative_residual(out2.family_member(x2 - out2.particular), x2))

    rejected = 0
    for t in range(50):
        shape = SHAPES[2 + t % 3]
        rng = Xoshiro256(trial_seed(11, t))
        a = generate(GeneratorSpec(shape, Family.INDEX1, seed=trial_seed(12, t)))
        b = type(a)(rng.complex_normal(shape.dims), shape)
        if t % 2:
            out = solve_one_sided(a, b)
        else:
            d = generate(GeneratorSpec(shape, Family.INDEX1, seed=trial_seed(13, t)))
            out = solve_two_sided(a, d, b)
        rejected += not out.solvable
    ok = one_cert and two_cert and worst_part <= 1e-9 and worst_family <= 1e-8 and rejected == 50
    record(6, ok, f"100+100 consistent systems certified {one_cert and two_cert}, max particular residual "
                  f"{worst_part:.1e} (<=1e-9), max least-squares distance to family {worst_family:.1e} (<=1e-8), "
                  f"inconsistent rejected {rejected}/50")
    assert ok


def test_criterion_7_poisson():
    t0 = time.perf_counter()
    parts, ok = [], True
    for m in (8, 16):
        solver = PoissonSolver(m)
        a = solver.stencil
        idx = inv.index(a).k
        sym = a == a.H
        s = np.sin(np.pi * np.linspace(0.0, 1.0, m))
        f = np.outer(s, s) * np.outer(np.linspace(1, 2, m), np.ones(m))
        x, rep = solver.solve(f)
        ref = np.linalg.pinv(matricize(a)) @ matricize(solver.project(f))
        agree = float(np.max(np.abs(ref.ravel() - x.data.ravel())))
        ep = max(
            inv.relative_residual(solver.core, inv.moore_penrose(a)),
            inv.relative_residual(solver.core, inv.group_inverse(a)),
        )
        ok &= idx == 1 and sym and rep.residual <= 1e-8 and agree <= 1e-8 and ep <= 1e-9
        parts.append(f"m={m}: index {idx}, symmetric {sym}, residual {rep.residual:.1e}, "
                     f"pinv agreement {agree:.1e}, EP identity {ep:.1e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    record(7, ok, "; ".join(parts) + f"; {elapsed:.1f}s (<60s)")
    assert ok


def test_criterion_8_einstein_oracle():
    worst = 0.0
    for t in range(50):
        rng = Xoshiro256(trial_seed(8, t))
        left = tuple(rng.integer(1, 3) for _ in range(rng.integer(1, 2)))
        mid = tuple(rng.integer(1, 3) for _ in range(rng.integer(1, 2)))
        right = tuple(rng.integer(1, 3) for _ in range(rng.integer(1, 2)))
        a = random_tensor(TensorShape(left, mid), trial_seed(80, t))
        b = random_tensor(TensorShape(mid, right), trial_seed(81, t))
        worst = max(worst, float(np.max(np.abs((a @ b).data - oracle_naive_einstein(a, b).data))))
    ok = worst <= 1e-13
    record(8, ok, f"50 conformable pairs: max |GEMM - nested sum| {worst:.1e} (<=1e-13)")
    assert ok
