"""Seeded structured generators and brute-force oracles.

Random numbers come from xoshiro256** (Blackman and Vigna) whose 256-bit
state is filled by four successive outputs of splitmix64 applied to the
64-bit seed.  Uniform doubles take the top 53 bits of each output; standard
normals use the Box-Muller transform on pairs of uniforms.  Everything is
plain integer arithmetic, so a (spec, seed) pair reproduces the same bits on
any IEEE-754 platform.  Per-trial streams derive their seed from the base
seed and the trial counter (:func:`trial_seed`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import GenerationExhausted, ShapeError
from .tensor import DenseTensor, TensorShape, dematricize, matricize

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step; returns (new_state, output)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return x, z ^ (z >> 31)


def trial_seed(seed: int, trial: int) -> int:
    """Seed of the ``trial``-th independent stream derived from ``seed``."""
    _, out = splitmix64((seed + 0x632BE59BD9B4E019 * (trial + 1)) & _MASK)
    return out


class Xoshiro256:
    """xoshiro256** generator."""

    def __init__(self, seed: int):
        x = int(seed) & _MASK
        s = []
        for _ in range(4):
            x, out = splitmix64(x)
            s.append(out)
        if not any(s):  # pragma: no cover - splitmix64 never yields four zeros
            s[0] = 1
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        r = (s1 * 5) & _MASK
        r = ((r << 7) | (r >> 57)) & _MASK
        result = (r * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1)."""
        return np.array([(self.next_u64() >> 11) * 2.0**-53 for _ in range(n)])

    def uniform_range(self, lo: float, hi: float, n: int) -> np.ndarray:
        return lo + (hi - lo) * self.uniform(n)

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (inclusive)."""
        span = hi - lo + 1
        return lo + int(self.uniform(1)[0] * span)

    def normal(self, n: int) -> np.ndarray:
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        u1 = 1.0 - u[:m]  # (0, 1]
        rad = np.array([math.sqrt(-2.0 * math.log(v)) for v in u1])
        ang = 2.0 * math.pi * u[m:]
        z = np.concatenate([rad * np.cos(ang), rad * np.sin(ang)])
        return z[:n]

    def complex_normal(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        z = self.normal(2 * n)
        return ((z[:n] + 1j * z[n:]) / math.sqrt(2.0)).reshape(shape)


# ---------------------------------------------------------------------------
# matrix building blocks


def random_unitary(rng: Xoshiro256, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.complex_normal((n, n)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def well_conditioned(rng: Xoshiro256, n: int, lo: float = 0.5, hi: float = 2.0) -> np.ndarray:
    """U diag(s) V with singular values drawn from [lo, hi]."""
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    s = rng.uniform_range(lo, hi, n)
    return random_unitary(rng, n) @ np.diag(s) @ random_unitary(rng, n)


def _block_diag(*blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.complex128)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


def _shift(k: int) -> np.ndarray:
    return np.eye(k, k, 1, dtype=np.complex128)


def _similar(rng, core_block: np.ndarray) -> np.ndarray:
    n = core_block.shape[0]
    s = well_conditioned(rng, n)
    return s @ core_block @ np.linalg.inv(s)


def _random_support(rng, n: int, p: float = 0.3) -> np.ndarray:
    return rng.uniform(n) < p


def _nonzero_diag(rng, n: int) -> np.ndarray:
    mag = rng.uniform_range(0.5, 2.0, n)
    ph = rng.uniform_range(0.0, 2.0 * math.pi, n)
    return mag * np.exp(1j * ph)


# ---------------------------------------------------------------------------
# generator specs


class Family(str, Enum):
    GENERAL_COMPLEX = "GeneralComplex"
    INDEX1 = "Index1"
    HERMITIAN = "Hermitian"
    HERMITIAN_IDEMPOTENT = "HermitianIdempotent"
    EP = "EP"
    NORMAL = "Normal"
    UNITARY = "Unitary"
    NILPOTENT = "Nilpotent"
    INDEX_K = "IndexK"
    # pair families
    COMMUTING_POLY_PAIR = "CommutingPolyPair"
    SQUARE_CONDITION = "SquareCondition"
    INDEX1_PAIR = "Index1Pair"
    NORMAL_COMMUTING_PAIR = "NormalCommutingPair"
    RANGE_COMMUTING_PAIR = "RangeCommutingPair"
    INVARIANT_RANGE_PAIR = "InvariantRangePair"
    UNITARY_INVARIANT_PAIR = "UnitaryInvariantPair"
    UNITARY_INVERTIBLE_PAIR = "UnitaryInvertiblePair"
    DRAZIN_PAIR = "DrazinPair"
    STABLE_CORANGE_PAIR = "StableCorangePair"

    @property
    def is_pair(self) -> bool:
        return self in _PAIR_FAMILIES


_PAIR_FAMILIES = {
    Family.COMMUTING_POLY_PAIR,
    Family.SQUARE_CONDITION,
    Family.INDEX1_PAIR,
    Family.NORMAL_COMMUTING_PAIR,
    Family.RANGE_COMMUTING_PAIR,
    Family.INVARIANT_RANGE_PAIR,
    Family.UNITARY_INVARIANT_PAIR,
    Family.UNITARY_INVERTIBLE_PAIR,
    Family.DRAZIN_PAIR,
    Family.STABLE_CORANGE_PAIR,
}


@dataclass(frozen=True)
class GeneratorSpec:
    """What to generate.

    ``rank`` pins the rank of the invertible part (drawn from [1, dim-1] when
    None).  ``index`` is the nilpotency index for Nilpotent/IndexK/DrazinPair.
    ``support`` relates the supports of a NormalCommutingPair: ``"any"``,
    ``"a_in_b"`` (R(A) within R(B)) or ``"equal"``.  ``shape2`` is the shape of
    the second member of an Index1Pair (defaults to ``shape``).
    """

    shape: TensorShape
    family: Family
    seed: int = 0
    rank: int | None = None
    index: int = 2
    support: str = "any"
    shape2: TensorShape | None = None
    max_retries: int = 50

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.shape.is_square:
            raise ShapeError(f"generators produce square tensors, got {self.shape}")
        if self.shape2 is not None and not self.shape2.is_square:
            raise ShapeError(f"generators produce square tensors, got {self.shape2}")
        if self.support not in ("any", "a_in_b", "equal"):
            raise ValueError(f"unknown support relation {self.support!r}")

    def with_seed(self, seed: int) -> GeneratorSpec:
        return replace(self, seed=seed)


def _rank(rng, n: int, pinned: int | None) -> int:
    if pinned is not None:
        if not 0 <= pinned <= n:
            raise ValueError(f"rank {pinned} out of range for dimension {n}")
        return pinned
    return rng.integer(1, n - 1) if n > 1 else 1


def _index1_matrix(rng, n: int, r: int) -> np.ndarray:
    blk = _block_diag(well_conditioned(rng, r), np.zeros((n - r, n - r)))
    return _similar(rng, blk)


def _nilpotent_block(rng, size: int, k: int) -> np.ndarray:
    """Nilpotent matrix of order ``size`` with index exactly ``k``."""
    if k > size:
        raise GenerationExhausted(f"nilpotent index {k} exceeds block size {size}")
    blocks = [_shift(k)]
    left = size - k
    while left > 0:
        b = rng.integer(1, min(k, left))
        blocks.append(_shift(b))
        left -= b
    return _block_diag(*blocks)


def _hermitian_spectrum(rng, n: int, r: int) -> np.ndarray:
    lam = np.zeros(n)
    mag = rng.uniform_range(0.5, 2.0, r)
    sign = np.where(rng.uniform(r) < 0.5, -1.0, 1.0)
    lam[:r] = mag * sign
    return lam


def _eval_poly(coeffs, lam: np.ndarray) -> np.ndarray:
    out = np.zeros_like(lam)
    for c in reversed(coeffs):
        out = out * lam + c
    return out


def _single(spec: GeneratorSpec, rng: Xoshiro256) -> np.ndarray:
    n = spec.shape.rows
    fam = spec.family
    if fam is Family.GENERAL_COMPLEX:
        return rng.complex_normal((n, n))
    if fam is Family.INDEX1:
        return _index1_matrix(rng, n, _rank(rng, n, spec.rank))
    if fam is Family.HERMITIAN:
        u = random_unitary(rng, n)
        lam = _hermitian_spectrum(rng, n, _rank(rng, n, spec.rank))
        return (u * lam) @ u.conj().T
    if fam is Family.HERMITIAN_IDEMPOTENT:
        u = random_unitary(rng, n)
        r = _rank(rng, n, spec.rank)
        return u[:, :r] @ u[:, :r].conj().T
    if fam is Family.EP:
        r = _rank(rng, n, spec.rank)
        u = random_unitary(rng, n)
        return u @ _block_diag(well_conditioned(rng, r), np.zeros((n - r, n - r))) @ u.conj().T
    if fam is Family.NORMAL:
        r = _rank(rng, n, spec.rank)
        u = random_unitary(rng, n)
        d = np.concatenate([_nonzero_diag(rng, r), np.zeros(n - r)])
        return (u * d) @ u.conj().T
    if fam is Family.UNITARY:
        return random_unitary(rng, n)
    if fam is Family.NILPOTENT:
        return _similar(rng, _nilpotent_block(rng, n, spec.index))
    if fam is Family.INDEX_K:
        k = spec.index
        r = spec.rank if spec.rank is not None else (rng.integer(1, n - k) if n - k >= 1 else 0)
        if r + k > n:
            raise GenerationExhausted(f"cannot fit rank {r} plus index-{k} block in dimension {n}")
        blk = _block_diag(well_conditioned(rng, r), _nilpotent_block(rng, n - r, k))
        return _similar(rng, blk)
    raise ValueError(f"{fam.value} is a pair family")  # pragma: no cover


def _pair(spec: GeneratorSpec, rng: Xoshiro256) -> tuple[np.ndarray, np.ndarray]:
    n = spec.shape.rows
    fam = spec.family
    if fam is Family.INDEX1_PAIR:
        n2 = (spec.shape2 or spec.shape).rows
        a = _index1_matrix(rng, n, _rank(rng, n, spec.rank))
        b = _index1_matrix(rng, n2, _rank(rng, n2, spec.rank))
        return a, b
    if fam is Family.COMMUTING_POLY_PAIR:
        u = random_unitary(rng, n)
        lam = _hermitian_spectrum(rng, n, _rank(rng, n, spec.rank))
        vals = []
        for _ in range(2):
            deg = rng.integer(1, 3)
            coeffs = list(rng.uniform_range(-1.0, 1.0, deg + 1))
            if rng.uniform(1)[0] < 0.5:
                coeffs[0] = 0.0
            v = _eval_poly(coeffs, lam)
            mags = np.abs(v)
            top = mags.max()
            # keep eigenvalues either exactly zero or clearly nonzero
            if top == 0 or np.any((mags > 0) & (mags < 1e-3 * top)):
                raise _Retry
            vals.append(v)
        a = (u * vals[0]) @ u.conj().T
        b = (u * vals[1]) @ u.conj().T
        return a, b
    if fam is Family.NORMAL_COMMUTING_PAIR:
        u = random_unitary(rng, n)
        za = _random_support(rng, n)
        zb = _random_support(rng, n)
        if spec.support == "a_in_b":
            za = za | zb
        elif spec.support == "equal":
            za = zb
        a = np.where(za, 0, _nonzero_diag(rng, n))
        b = np.where(zb, 0, _nonzero_diag(rng, n))
        return (u * a) @ u.conj().T, (u * b) @ u.conj().T
    if fam is Family.RANGE_COMMUTING_PAIR:
        return _range_commuting(rng, n)
    if fam is Family.SQUARE_CONDITION:
        r = _rank(rng, n, spec.rank)
        s = well_conditioned(rng, n)
        s_inv = np.linalg.inv(s)
        c = well_conditioned(rng, r)
        a = s @ _block_diag(c, np.zeros((n - r, n - r))) @ s_inv
        comp = s @ _block_diag(np.zeros((r, r)), np.eye(n - r)) @ s_inv  # I - A A^#
        w_rank = rng.integer(0, n - r)
        w = rng.complex_normal((n, w_rank)) @ rng.complex_normal((w_rank, n))
        # B A = A^2 for every B = A + W (I - A A^#)
        return a, a + w @ comp
    if fam is Family.INVARIANT_RANGE_PAIR:
        r = _rank(rng, n, spec.rank)
        q = random_unitary(rng, n)
        a = q @ _block_diag(well_conditioned(rng, r), np.zeros((n - r, n - r)))
        a = a @ _mix_upper(rng, n, r) @ q.conj().T
        b = q @ _mix_upper(rng, n, r, invertible=True) @ q.conj().T
        return a, b
    if fam is Family.UNITARY_INVARIANT_PAIR:
        r = _rank(rng, n, spec.rank)
        q = random_unitary(rng, n)
        upper = _mix_upper(rng, n, r)
        a = q @ _block_diag(well_conditioned(rng, r), np.zeros((n - r, n - r))) @ upper @ q.conj().T
        b = q @ _block_diag(random_unitary(rng, r), random_unitary(rng, n - r)) @ q.conj().T
        return a, b
    if fam is Family.UNITARY_INVERTIBLE_PAIR:
        return random_unitary(rng, n), well_conditioned(rng, n)
    if fam is Family.DRAZIN_PAIR:
        return _drazin_pair(spec, rng, n)
    if fam is Family.STABLE_CORANGE_PAIR:
        # A index 1; B invertible with B R(A*) = R(A*), so R(A*B) = R(BA*)
        r = _rank(rng, n, spec.rank)
        a = _index1_matrix(rng, n, r)
        _, _, vh = np.linalg.svd(a)
        v = vh.conj().T
        blk = well_conditioned(rng, n)
        blk[r:, :r] = 0.0
        return a, v @ blk @ v.conj().T
    raise ValueError(f"{fam.value} is not a pair family")  # pragma: no cover


def _mix_upper(rng, n: int, r: int, invertible: bool = False) -> np.ndarray:
    """Block upper-triangular matrix in the split (r, n - r).

    With ``invertible`` False the leading block is I, so that a left factor
    diag(C, 0) keeps range span(e_1..e_r) and index 1.
    """
    m = np.zeros((n, n), dtype=np.complex128)
    if invertible:
        m[:r, :r] = well_conditioned(rng, r)
        m[r:, r:] = well_conditioned(rng, n - r)
    else:
        m[:r, :r] = np.eye(r)
        m[r:, r:] = np.eye(n - r)
    m[:r, r:] = rng.complex_normal((r, n - r))
    return m


def _range_commuting(rng, n: int):
    """A, B with A B B^core = B B^core A and B A A^core = A A^core B.

    Orthogonal splitting V1+V2+V3+V4 with R(A) = V1+V3 and R(B) = V1+V2;
    A maps V1+V2 into V1 and V3+V4 into V3, B maps V1+V3 into V1 and V2+V4
    into V2.
    """
    if n < 4:
        raise GenerationExhausted("RangeCommutingPair needs dimension >= 4")
    d = [1, 1, 1, 1]
    for _ in range(n - 4):
        d[rng.integer(0, 3)] += 1
    off = np.cumsum([0] + d)
    s = [slice(off[i], off[i + 1]) for i in range(4)]
    a = np.zeros((n, n), dtype=np.complex128)
    b = np.zeros((n, n), dtype=np.complex128)
    a[s[0], s[0]] = well_conditioned(rng, d[0])
    a[s[0], s[1]] = rng.complex_normal((d[0], d[1]))
    a[s[2], s[2]] = well_conditioned(rng, d[2])
    a[s[2], s[3]] = rng.complex_normal((d[2], d[3]))
    b[s[0], s[0]] = well_conditioned(rng, d[0])
    b[s[0], s[2]] = rng.complex_normal((d[0], d[2]))
    b[s[1], s[1]] = well_conditioned(rng, d[1])
    b[s[1], s[3]] = rng.complex_normal((d[1], d[3]))
    u = random_unitary(rng, n)
    return u @ a @ u.conj().T, u @ b @ u.conj().T


def _drazin_pair(spec, rng, n: int):
    """Pairs for the Drazin product rule, including index > 1 products.

    Half the draws share a similarity S: A = S diag(C1, N) S^-1 and
    B = S diag(C2, c0 I + c1 N) S^-1, so AB keeps the nilpotent index of N.
    The rest are an IndexK tensor times a generic one.
    """
    k = spec.index
    if rng.uniform(1)[0] < 0.5:
        r = rng.integer(0, n - k) if n - k >= 0 else 0
        nil = _nilpotent_block(rng, n - r, k)
        c0 = _nonzero_diag(rng, 1)[0]
        c1 = rng.complex_normal((1,))[0]
        blk_b = c0 * np.eye(n - r) + c1 * nil
        s = well_conditioned(rng, n)
        s_inv = np.linalg.inv(s)
        a = s @ _block_diag(well_conditioned(rng, r), nil) @ s_inv
        b = s @ _block_diag(well_conditioned(rng, r), blk_b) @ s_inv
        return a, b
    a = _single(replace(spec, family=Family.INDEX_K, rank=None), rng)
    if rng.uniform(1)[0] < 0.5:
        b = _index1_matrix(rng, n, rng.integer(1, n))
    else:
        b = rng.complex_normal((n, n))
    return a, b


class _Retry(Exception):
    pass


def generate(spec: GeneratorSpec):
    """Draw a tensor (or a pair of tensors for pair families).

    Identical ``spec`` values give bit-identical output.
    """
    rng = Xoshiro256(spec.seed)
    for _ in range(spec.max_retries):
        try:
            if spec.family.is_pair:
                a, b = _pair(spec, rng)
                return (
                    dematricize(a, spec.shape),
                    dematricize(b, spec.shape2 or spec.shape),
                )
            return dematricize(_single(spec, rng), spec.shape)
        except _Retry:
            continue
    raise GenerationExhausted(
        f"{spec.family.value} generator failed its constraints after {spec.max_retries} retries"
    )


# ---------------------------------------------------------------------------
# oracles


def oracle_naive_einstein(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Literal nested-sum Einstein product, for desk-scale checks only."""
    if a.right != b.left:
        raise ShapeError(f"contraction dimension mismatch: {a.shape} * {b.shape}")
    out = np.zeros(a.left + b.right, dtype=np.complex128)
    for i in np.ndindex(*a.left):
        for j in np.ndindex(*b.right):
            acc = 0j
            for k in np.ndindex(*a.right):
                acc += a.data[i + k] * b.data[k + j]
            out[i + j] = acc
    return DenseTensor(out, TensorShape(a.left, b.right))


def oracle_core_equations(a: DenseTensor, x: DenseTensor) -> tuple[float, float, float]:
    """Relative residuals of (AX)* = AX, X A^2 = A and A X^2 = X."""
    am = a.data.reshape(a.shape.rows, a.shape.cols)
    xm = x.data.reshape(x.shape.rows, x.shape.cols)

    def rel(p, q):
        return float(np.linalg.norm(p - q) / (1.0 + max(np.linalg.norm(p), np.linalg.norm(q))))

    ax = am @ xm
    return rel(ax.conj().T, ax), rel(xm @ am @ am, am), rel(am @ xm @ xm, xm)


def oracle_core_by_range_basis(a: DenseTensor, rank: int | None = None) -> DenseTensor:
    """Core inverse Q T^-1 Q* from an orthonormal basis Q of R(A).

    With Q from a rank-revealing QR, A = [Q Q'] [[T, S], [0, 0]] [Q Q']* and
    T = Q* A Q is invertible exactly for index-1 A.
    """
    import scipy.linalg

    m = matricize(a)
    q, r, _ = scipy.linalg.qr(m, pivoting=True)
    if rank is None:
        d = np.abs(np.diag(r))
        rank = int(np.count_nonzero(d > 1e-10 * max(d[0], 1e-300))) if d.size else 0
    q = q[:, :rank]
    t = q.conj().T @ m @ q
    x = q @ np.linalg.solve(t, q.conj().T)
    return dematricize(x, a.shape)


def dense_lstsq(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Least-squares solution of the matricized system A X = B."""
    sol, *_ = np.linalg.lstsq(matricize(a), matricize(b), rcond=None)
    return dematricize(sol, TensorShape(a.right, b.right))


def example_section3() -> dict[str, DenseTensor]:
    """The 2x3x2x3 tensors A, B of the worked reverse-order-law example.

    Entries are given slice-wise as 2x3 matrices (i, j) for each (k, l).
    ``A_core_printed``, ``B_core_printed`` and ``AB_core_printed`` are the
    tables as printed, typos included.
    """

    def build(slices) -> DenseTensor:
        t = np.zeros((2, 3, 2, 3))
        for (k, l), mat in slices.items():
            t[:, :, k - 1, l - 1] = mat
        return DenseTensor.from_array(t)

    z = [[0, 0, 0], [0, 0, 0]]
    a = {
        (1, 1): [[1, 0, 1], [0, 0, -1]],
        (1, 2): z,
        (1, 3): [[1, 0, 0], [1, 0, 0]],
        (2, 1): [[0, 0, 1], [0, 1, 0]],
        (2, 2): [[0, 0, 0], [1, 1, 0]],
        (2, 3): [[-1, 0, 0], [0, 0, 0]],
    }
    b = {
        (1, 1): [[1, 0, 0], [0, 0, 0]],
        (1, 2): z,
        (1, 3): [[0, 0, 1], [0, 0, 0]],
        (2, 1): [[0, 0, 0], [1, 0, 0]],
        (2, 2): [[0, 0, 0], [0, 1, 0]],
        (2, 3): [[0, 0, 0], [0, 0, 1]],
    }
    x = {
        (1, 1): [[0, 0, 0], [0, 0, -1]],
        (1, 2): z,
        (1, 3): [[0, 0, 1], [1, -1, 1]],
        (2, 1): [[0, 0, 1], [0, 0, 1]],
        (2, 2): [[0, 0, -1], [0, 1, -1]],
        (2, 3): [[-1, 0, 1], [1, -1, 0]],
    }
    y = dict(b)
    y[(2, 2)] = [[0, 0, 0], [-8, 1, 0]]
    d = {
        (1, 1): [[0, 0, 0], [0, 0, -1]],
        (1, 2): z,
        (1, 3): [[0, 0, 1], [9, -1, 1]],
        (2, 1): [[0, 0, 1], [0, 0, 1]],
        (2, 2): [[0, 0, -1], [-8, 1, -1]],
        (2, 3): [[-1, 0, 1], [9, -1, 0]],
    }
    return {
        "A": build(a),
        "B": build(b),
        "A_core_printed": build(x),
        "B_core_printed": build(y),
        "AB_core_printed": build(d),
    }
