"""Generalized inverses of even-order tensors.

Every routine works on the matricization, so ranks, ranges and inverses are
those of an ordinary complex matrix.  Numerical rank uses the threshold

    rank_tol_factor * max(rows, cols) * max(sigma_max, scale)

where ``scale`` is an optional reference magnitude.  Passing the norm of the
data a tensor was computed from keeps products that should vanish (e.g.
A*B with orthogonal ranges) from being read as full rank because their
rounding noise is measured against itself.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import IndexTooHigh, RankAmbiguous, ShapeError
from .tensor import DenseTensor, dematricize, matricize

__all__ = [
    "InverseOptions",
    "IndexResult",
    "EquationCheck",
    "relative_residual",
    "numerical_rank",
    "moore_penrose",
    "verify_inverse_class",
    "index",
    "drazin",
    "group_inverse",
    "core_inverse",
    "is_ep",
    "range_contains",
]

# Singular values within this factor of the rank threshold make the index
# call ambiguous.
_AMBIGUITY_BAND = 1e2


@dataclass(frozen=True)
class InverseOptions:
    rank_tol_factor: float = 1e-12
    residual_tol: float = 1e-10
    scale: float = 0.0

    def __post_init__(self):
        if not (self.rank_tol_factor > 0 and self.residual_tol > 0):
            raise ValueError("rank_tol_factor and residual_tol must be positive")
        if self.scale < 0:
            raise ValueError("scale must be non-negative")

    def with_scale(self, scale: float) -> InverseOptions:
        return replace(self, scale=float(scale))


DEFAULT = InverseOptions()


@dataclass(frozen=True)
class IndexResult:
    k: int
    ranks: tuple[int, ...]


@dataclass(frozen=True)
class EquationCheck:
    residual: float
    passed: bool


def _opts(opts):
    return DEFAULT if opts is None else opts


def _threshold(s: np.ndarray, shape, opts: InverseOptions, scale: float | None = None) -> float:
    top = s[0] if s.size else 0.0
    ref = max(top, opts.scale if scale is None else scale)
    return opts.rank_tol_factor * max(shape) * ref


def relative_residual(lhs, rhs) -> float:
    """||lhs - rhs||_F / (1 + max(||lhs||_F, ||rhs||_F)).

    Accepts tensors or arrays.
    """
    x = lhs.data if isinstance(lhs, DenseTensor) else np.asarray(lhs)
    y = rhs.data if isinstance(rhs, DenseTensor) else np.asarray(rhs)
    nx, ny = np.linalg.norm(x.ravel()), np.linalg.norm(y.ravel())
    return float(np.linalg.norm((x - y).ravel()) / (1.0 + max(nx, ny)))


def _svd(m: np.ndarray, opts: InverseOptions, scale: float | None = None):
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    r = int(np.count_nonzero(s > _threshold(s, m.shape, opts, scale)))
    return u, s, vh, r


def numerical_rank(a: DenseTensor, opts: InverseOptions | None = None) -> int:
    m = matricize(a)
    if m.size == 0:
        return 0
    return _svd(m, _opts(opts))[3]


def _pinv_matrix(m: np.ndarray, opts: InverseOptions, scale: float | None = None) -> np.ndarray:
    u, s, vh, r = _svd(m, opts, scale)
    return (vh[:r].conj().T / s[:r]) @ u[:, :r].conj().T


def moore_penrose(a: DenseTensor, opts: InverseOptions | None = None) -> DenseTensor:
    """Moore-Penrose inverse A^dagger via the SVD of the matricization."""
    return dematricize(_pinv_matrix(matricize(a), _opts(opts)), a.shape.swapped())


def _require_square(a: DenseTensor, what: str) -> None:
    if not a.is_square:
        raise ShapeError(f"{what} needs a square tensor, got {a.shape}")


def verify_inverse_class(
    a: DenseTensor,
    x: DenseTensor,
    classes: Iterable[int],
    opts: InverseOptions | None = None,
) -> dict[int, EquationCheck]:
    """Residual of each requested defining equation.

    (1) AXA = A, (2) XAX = X, (3) (AX)* = AX, (4) (XA)* = XA,
    (5) XA = AX, (6) XA^2 = A, (7) AX^2 = X.
    Equations 5-7 require square operands.
    """
    opts = _opts(opts)
    if x.shape != a.shape.swapped():
        raise ShapeError(f"candidate inverse of {a.shape} must have shape {a.shape.swapped()}, got {x.shape}")
    A, X = matricize(a), matricize(x)
    out = {}
    for c in sorted(set(classes)):
        if c in (5, 6, 7):
            _require_square(a, f"equation ({c})")
        if c == 1:
            lhs, rhs = A @ X @ A, A
        elif c == 2:
            lhs, rhs = X @ A @ X, X
        elif c == 3:
            lhs = A @ X
            rhs = lhs.conj().T
        elif c == 4:
            lhs = X @ A
            rhs = lhs.conj().T
        elif c == 5:
            lhs, rhs = X @ A, A @ X
        elif c == 6:
            lhs, rhs = X @ A @ A, A
        elif c == 7:
            lhs, rhs = A @ X @ X, X
        else:
            raise ValueError(f"unknown equation ({c}); expected 1..7")
        res = relative_residual(lhs, rhs)
        out[c] = EquationCheck(res, res <= opts.residual_tol)
    return out


def index(a: DenseTensor, opts: InverseOptions | None = None) -> IndexResult:
    """Smallest k >= 1 with rank(A^k) == rank(A^(k+1)).

    Raises RankAmbiguous when a singular value of some power falls within
    a factor of 100 of the rank threshold.
    """
    _require_square(a, "index")
    opts = _opts(opts)
    m = matricize(a)
    n = m.shape[0]
    base = max(np.linalg.norm(m, 2), opts.scale)
    ranks = []
    p = m
    for j in range(1, n + 2):
        s = np.linalg.svd(p, compute_uv=False)
        thr = _threshold(s, p.shape, opts, base**j)
        if np.any((s > thr / _AMBIGUITY_BAND) & (s <= thr * _AMBIGUITY_BAND)):
            raise RankAmbiguous(
                f"singular values of A^{j} lie near the rank threshold {thr:.3g}: "
                f"{s[(s > thr / _AMBIGUITY_BAND) & (s <= thr * _AMBIGUITY_BAND)]}"
            )
        ranks.append(int(np.count_nonzero(s > thr)))
        if j >= 2 and ranks[-1] == ranks[-2]:
            return IndexResult(j - 1, tuple(ranks))
        if ranks[-1] == 0:
            # A^j = O, so every later power has rank 0 too
            ranks.append(0)
            return IndexResult(j, tuple(ranks))
        p = p @ m
    raise AssertionError("rank sequence failed to stabilize")  # pragma: no cover


def drazin(a: DenseTensor, opts: InverseOptions | None = None) -> DenseTensor:
    """Drazin inverse A^k (A^(2k+1))^dagger A^k with k = ind(A)."""
    opts = _opts(opts)
    k = index(a, opts).k
    return _drazin_with_power(a, k, opts)


def _drazin_with_power(a: DenseTensor, k: int, opts: InverseOptions) -> DenseTensor:
    m = matricize(a)
    base = max(np.linalg.norm(m, 2), opts.scale)
    ak = np.linalg.matrix_power(m, k)
    big = np.linalg.matrix_power(m, 2 * k + 1)
    x = ak @ _pinv_matrix(big, opts, base ** (2 * k + 1)) @ ak
    return dematricize(x, a.shape)


def _range_factor(m: np.ndarray, opts: InverseOptions):
    """Full-rank factorization m = F G with F = U_r S_r and G = V_r^*."""
    u, s, vh, r = _svd(m, opts)
    return u[:, :r] * s[:r], vh[:r]


def group_inverse(a: DenseTensor, opts: InverseOptions | None = None) -> DenseTensor:
    """Group inverse A^# of an index-1 tensor.

    Uses the full-rank factorization A = F G, for which A^# = F (G F)^(-2) G;
    G F is invertible exactly when ind(A) = 1.
    """
    _require_square(a, "group inverse")
    opts = _opts(opts)
    k = index(a, opts).k
    if k > 1:
        raise IndexTooHigh(k)
    f, g = _range_factor(matricize(a), opts)
    if f.shape[1] == 0:
        return dematricize(np.zeros((a.shape.rows,) * 2, dtype=np.complex128), a.shape)
    gf_inv = np.linalg.inv(g @ f)
    return dematricize(f @ gf_inv @ gf_inv @ g, a.shape)


def core_inverse(a: DenseTensor, opts: InverseOptions | None = None) -> DenseTensor:
    """Core inverse A^# A A^dagger of an index-1 tensor."""
    opts = _opts(opts)
    g = matricize(group_inverse(a, opts))
    m = matricize(a)
    return dematricize(g @ m @ _pinv_matrix(m, opts), a.shape)


def is_ep(a: DenseTensor, opts: InverseOptions | None = None) -> bool:
    """True when A A^dagger = A^dagger A within tolerance."""
    _require_square(a, "EP test")
    opts = _opts(opts)
    m = matricize(a)
    p = _pinv_matrix(m, opts)
    return relative_residual(m @ p, p @ m) <= opts.residual_tol


def range_contains(a: DenseTensor, b: DenseTensor, opts: InverseOptions | None = None) -> bool:
    """True when R(B) is contained in R(A), i.e. A A^dagger B = B."""
    if a.left != b.left:
        raise ShapeError(f"range inclusion needs equal left dims, got {a.shape} and {b.shape}")
    opts = _opts(opts)
    m, y = matricize(a), matricize(b)
    proj = m @ (_pinv_matrix(m, opts) @ y)
    return relative_residual(proj, y) <= opts.residual_tol
