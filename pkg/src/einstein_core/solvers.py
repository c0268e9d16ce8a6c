"""Multilinear systems solved with the core inverse.

One-sided systems ``A*X = B`` with ``ind(A) = 1`` are solvable exactly when
``A A^core B = B``; every solution then has the form

    X = A^core B + (I - A^core A) Z

for an arbitrary tensor Z.  Two-sided systems ``C*X*D = B`` are solvable
exactly when ``C C^core B D^core D = B``, with general solution

    X = C^core B D^core + Z - C^core C Z D D^core.

Tensors are vectorized with the package's single row-major layout (right
index fastest).  Under that layout ``vec(C X D) = (C kron D^T) vec(X)``, which
is what :func:`kron_lift` returns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import inverses as inv
from .errors import NotConsistent, ShapeError
from .inverses import InverseOptions
from .tensor import DenseTensor, TensorShape, identity, kron, matricize, norm_fro

__all__ = [
    "SOLVE_TOL",
    "SolveOutcome",
    "solve_one_sided",
    "solve_unique_in_range",
    "solve_two_sided",
    "vectorize",
    "unvectorize",
    "kron_lift",
    "SylvesterBlocks",
    "sylvester_block_form",
]

#: Default solvability tolerance, relative to ``1 + ||B||_F``.
SOLVE_TOL = 1e-8

Projector = Union[DenseTensor, tuple]


def _scaled(diff: DenseTensor, ref: DenseTensor) -> float:
    return norm_fro(diff) / (1.0 + norm_fro(ref))


@dataclass(frozen=True)
class SolveOutcome:
    """Result of a one- or two-sided solve.

    Attributes
    ----------
    solvable : bool
        ``certificate_residual <= tol``.
    particular : DenseTensor
        ``A^core B`` (one-sided) or ``C^core B D^core`` (two-sided).
    residual : float
        ``||A X - B|| / (1 + ||B||)`` for ``X = particular``
        (``||C X D - B||`` scaled likewise for two-sided systems).
    free_projector : DenseTensor or tuple of DenseTensor
        ``I - A^core A``; for two-sided systems the pair
        ``(C^core C, D D^core)`` that defines the family map.
    certificate_residual : float
        Scaled residual of the solvability condition.
    """

    solvable: bool
    particular: DenseTensor
    residual: float
    free_projector: Projector
    certificate_residual: float
    tol: float = SOLVE_TOL

    @property
    def two_sided(self) -> bool:
        return isinstance(self.free_projector, tuple)

    def family_member(self, z: DenseTensor) -> DenseTensor:
        """The general-solution formula evaluated at the free tensor ``z``."""
        if z.shape != self.particular.shape:
            raise ShapeError(f"free tensor has shape {z.shape}, expected {self.particular.shape}")
        if self.two_sided:
            left, right = self.free_projector
            return self.particular + z - left @ z @ right
        return self.particular + self.free_projector @ z

    def to_dict(self) -> dict:
        from .io import tensor_to_dict

        return {
            "solvable": self.solvable,
            "residual": self.residual,
            "certificate_residual": self.certificate_residual,
            "tol": self.tol,
            "particular": tensor_to_dict(self.particular),
        }


def _check_square(a: DenseTensor, name: str) -> None:
    if not a.is_square:
        raise ShapeError(f"{name} must be square, got {a.shape}")


def solve_one_sided(
    a: DenseTensor,
    b: DenseTensor,
    opts: InverseOptions | None = None,
    tol: float = SOLVE_TOL,
) -> SolveOutcome:
    """Core-inverse solution of ``A*X = B``.

    Raises
    ------
    IndexTooHigh
        If ``ind(A) > 1``.
    ShapeError
        If A is not square or B's left modes differ from A's.
    """
    _check_square(a, "coefficient tensor")
    if b.left != a.left:
        raise ShapeError(f"right-hand side {b.shape} is not conformable with {a.shape}")
    ac = inv.core_inverse(a, opts)
    x = ac @ b
    cert = _scaled(a @ x - b, b)
    proj = identity(a.left) - ac @ a
    return SolveOutcome(cert <= tol, x, cert, proj, cert, tol)


def solve_unique_in_range(
    a: DenseTensor,
    b: DenseTensor,
    opts: InverseOptions | None = None,
    tol: float = SOLVE_TOL,
) -> DenseTensor:
    """The unique solution of ``A*X = B`` lying in R(A), namely ``A^core B``.

    Raises
    ------
    NotConsistent
        If B is not in R(A).
    """
    out = solve_one_sided(a, b, opts, tol)
    if not out.solvable:
        raise NotConsistent(
            f"right-hand side is not in R(A): certificate residual {out.certificate_residual:.3e}"
        )
    x = out.particular
    # X = A^core (A X) lies in R(A^core) = R(A); double-check numerically.
    check = InverseOptions(residual_tol=max(tol, 1e-10))
    if not inv.range_contains(a, x, check):  # pragma: no cover - guards roundoff only
        raise NotConsistent("computed solution left R(A)")
    return x


def solve_two_sided(
    c: DenseTensor,
    d: DenseTensor,
    b: DenseTensor,
    opts: InverseOptions | None = None,
    tol: float = SOLVE_TOL,
) -> SolveOutcome:
    """Core-inverse solution of ``C*X*D = B``.

    ``C`` is square over B's left modes and ``D`` square over B's right modes.
    """
    _check_square(c, "left coefficient")
    _check_square(d, "right coefficient")
    if b.left != c.left or b.right != d.left:
        raise ShapeError(f"right-hand side {b.shape} is not conformable with {c.shape} and {d.shape}")
    cc = inv.core_inverse(c, opts)
    dc = inv.core_inverse(d, opts)
    x = cc @ b @ dc
    cert = _scaled(c @ x @ d - b, b)
    return SolveOutcome(cert <= tol, x, cert, (cc @ c, d @ dc), cert, tol)


def vectorize(x: DenseTensor) -> DenseTensor:
    """Column tensor holding the entries of ``x`` (right index fastest)."""
    return DenseTensor(x.data, TensorShape(x.shape.dims, ()))


def unvectorize(v: DenseTensor, shape: TensorShape) -> DenseTensor:
    if v.shape.size != shape.size:
        raise ShapeError(f"cannot reshape {v.shape} into {shape}")
    return DenseTensor(v.data.reshape(shape.dims), shape)


def kron_lift(c: DenseTensor, d: DenseTensor, conjugate: bool = False) -> DenseTensor:
    """Tensor K with ``K * vec(X) == vec(C * X * D)``.

    K is ``C kron D^T``.  Passing ``conjugate=True`` gives ``C kron D^*``
    instead; the two agree for real D only, and only the transpose form
    satisfies the vec identity for complex D.
    """
    _check_square(c, "left coefficient")
    _check_square(d, "right coefficient")
    return kron(c, d.H if conjugate else d.T)


@dataclass(frozen=True)
class SylvesterBlocks:
    """Block form of ``C*X + X*D``: ``[C I] * diag(X, X) * [I; D]``.

    The stacking mode (size 2) is placed first in each stacked group.
    """

    row: DenseTensor
    col: DenseTensor
    x_shape: TensorShape

    def middle(self, x: DenseTensor) -> DenseTensor:
        if x.shape != self.x_shape:
            raise ShapeError(f"X has shape {x.shape}, expected {self.x_shape}")
        nl, nr = len(x.left), len(x.right)
        data = np.zeros((2,) + x.left + (2,) + x.right, dtype=np.complex128)
        sl = (slice(None),) * nl
        data[(0,) + sl + (0,)] = x.data
        data[(1,) + sl + (1,)] = x.data
        return DenseTensor(data, TensorShape((2,) + x.left, (2,) + x.right))

    def triple(self, x: DenseTensor) -> tuple[DenseTensor, DenseTensor, DenseTensor]:
        return self.row, self.middle(x), self.col

    def apply(self, x: DenseTensor) -> DenseTensor:
        return self.row @ self.middle(x) @ self.col


def sylvester_block_form(c: DenseTensor, d: DenseTensor) -> SylvesterBlocks:
    """Materialize the outer block tensors of the Sylvester block identity.

    ``row`` is ``[C I]`` (left modes of C, right modes ``(2,) + C.left``) and
    ``col`` is ``[I; D]`` (left modes ``(2,) + D.left``, right modes of D).
    ``apply(x)`` reproduces ``C*X + X*D``.
    """
    _check_square(c, "left coefficient")
    _check_square(d, "right coefficient")
    eye_c = identity(c.left).data
    eye_d = identity(d.left).data
    nc, nd = len(c.left), len(d.left)
    row = np.stack([c.data, eye_c], axis=nc)
    col = np.stack([eye_d, d.data], axis=0)
    return SylvesterBlocks(
        DenseTensor(row, TensorShape(c.left, (2,) + c.left)),
        DenseTensor(col, TensorShape((2,) + d.left, d.left)),
        TensorShape(c.left, d.left),
    )
