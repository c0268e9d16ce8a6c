"""Dense even-order complex tensors and the Einstein product.

A tensor in C^{I_1 x ... x I_m x J_1 x ... x J_n} carries an explicit split of
its modes into a left (row-like) group and a right (column-like) group.  All
storage is a C-ordered ``complex128`` array of shape ``left + right``, which is
the same ordering as the row index ``t1`` over the left modes and the column
index ``t2`` over the right modes with the last mode varying fastest.
Matricization is therefore a plain reshape and is exactly invertible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeError

__all__ = [
    "TensorShape",
    "DenseTensor",
    "einstein_product",
    "conj_transpose",
    "transpose",
    "kron",
    "matricize",
    "dematricize",
    "identity",
    "zero",
    "norm_fro",
    "add",
    "sub",
    "scale",
    "power",
]


def _dims(dims: Iterable[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if any(d < 1 for d in out):
        raise ShapeError(f"all dimensions must be >= 1, got {out}")
    return out


@dataclass(frozen=True)
class TensorShape:
    """Left and right mode dimensions of an even-order tensor.

    An empty ``right_dims`` models a right-hand side B in C^{N(n)}; it
    matricizes to a single column.
    """

    left_dims: tuple[int, ...]
    right_dims: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "left_dims", _dims(self.left_dims))
        object.__setattr__(self, "right_dims", _dims(self.right_dims))

    @property
    def rows(self) -> int:
        return int(np.prod(self.left_dims, dtype=np.int64))

    @property
    def cols(self) -> int:
        return int(np.prod(self.right_dims, dtype=np.int64))

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @property
    def dims(self) -> tuple[int, ...]:
        return self.left_dims + self.right_dims

    @property
    def is_square(self) -> bool:
        return self.left_dims == self.right_dims

    def swapped(self) -> TensorShape:
        return TensorShape(self.right_dims, self.left_dims)

    def __str__(self):
        left = "x".join(map(str, self.left_dims))
        right = "x".join(map(str, self.right_dims)) or "-"
        return f"({left} | {right})"


class DenseTensor:
    """Immutable dense complex tensor with a left/right mode split.

    Parameters
    ----------
    data : array_like
        Array of shape ``shape.left_dims + shape.right_dims``.  It is copied,
        converted to ``complex128`` and frozen.
    shape : TensorShape
        The mode split.

    Use :meth:`from_array` to build from an array plus the number of left
    modes.
    """

    __slots__ = ("_data", "_shape")
    __array_priority__ = 1000

    def __init__(self, data, shape: TensorShape):
        arr = np.array(data, dtype=np.complex128, copy=True)
        if arr.shape != shape.dims:
            if arr.size != shape.size:
                raise ShapeError(
                    f"entry count {arr.size} does not match shape {shape} "
                    f"({shape.size} entries)"
                )
            arr = arr.reshape(shape.dims)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor entries must be finite")
        arr.setflags(write=False)
        self._data = arr
        self._shape = shape

    @classmethod
    def from_array(cls, data, n_left: int | None = None) -> DenseTensor:
        """Wrap an n-d array; the first ``n_left`` modes form the left group.

        ``n_left`` defaults to half the order (even-order tensors).
        """
        arr = np.asarray(data)
        if n_left is None:
            if arr.ndim % 2:
                raise ShapeError("odd-order array needs an explicit n_left")
            n_left = arr.ndim // 2
        return cls(arr, TensorShape(arr.shape[:n_left], arr.shape[n_left:]))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> TensorShape:
        return self._shape

    @property
    def left(self) -> tuple[int, ...]:
        return self._shape.left_dims

    @property
    def right(self) -> tuple[int, ...]:
        return self._shape.right_dims

    @property
    def is_square(self) -> bool:
        return self._shape.is_square

    @property
    def H(self) -> DenseTensor:
        return conj_transpose(self)

    @property
    def T(self) -> DenseTensor:
        return transpose(self)

    def matrix(self) -> np.ndarray:
        return matricize(self)

    def __matmul__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return einstein_product(self, other)

    def __add__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return add(self, other)

    def __sub__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return sub(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, c):
        if isinstance(c, DenseTensor):
            return NotImplemented
        return scale(self, c)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self._shape == other._shape and np.array_equal(self._data, other._data)

    __hash__ = None

    def __repr__(self):
        return f"DenseTensor(shape={self._shape}, norm={norm_fro(self):.6g})"


def _check_same(a: DenseTensor, b: DenseTensor, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes differ, {a.shape} vs {b.shape}")


def matricize(a: DenseTensor) -> np.ndarray:
    """Return the (prod left) x (prod right) matrix of ``a`` (a copy)."""
    return a.data.reshape(a.shape.rows, a.shape.cols).copy()


def dematricize(m, shape: TensorShape) -> DenseTensor:
    """Inverse of :func:`matricize`."""
    m = np.asarray(m)
    if m.ndim == 1 and shape.cols == 1:
        m = m.reshape(-1, 1)
    if m.shape != (shape.rows, shape.cols):
        raise ShapeError(
            f"matrix of shape {m.shape} cannot be folded into {shape}; "
            f"expected ({shape.rows}, {shape.cols})"
        )
    return DenseTensor(m.reshape(shape.dims), shape)


def einstein_product(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Contract the right modes of ``a`` with the left modes of ``b``.

    Computed as a single matrix product of the matricizations.
    """
    if a.right != b.left:
        raise ShapeError(
            f"contraction dimension mismatch: {a.shape} * {b.shape} "
            f"(right dims {a.right} vs left dims {b.left})"
        )
    out = matricize(a) @ matricize(b)
    return dematricize(out, TensorShape(a.left, b.right))


def conj_transpose(a: DenseTensor) -> DenseTensor:
    """A^*: swap the left and right mode groups and conjugate."""
    return dematricize(matricize(a).conj().T, a.shape.swapped())


def transpose(a: DenseTensor) -> DenseTensor:
    """A^T: swap the left and right mode groups without conjugation."""
    return dematricize(matricize(a).T, a.shape.swapped())


def kron(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Kronecker product with concatenated mode groups.

    The result has left modes ``a.left + b.left`` and right modes
    ``a.right + b.right``, so that ``matricize(kron(a, b))`` equals
    ``np.kron(matricize(a), matricize(b))``.
    """
    la, ra, lb = len(a.left), len(a.right), len(b.left)
    outer = np.multiply.outer(a.data, b.data)
    # axes: a.left, a.right, b.left, b.right -> a.left, b.left, a.right, b.right
    a_l = list(range(la))
    a_r = list(range(la, la + ra))
    b_l = list(range(la + ra, la + ra + lb))
    b_r = list(range(la + ra + lb, outer.ndim))
    data = outer.transpose(a_l + b_l + a_r + b_r)
    return DenseTensor(data, TensorShape(a.left + b.left, a.right + b.right))


def identity(dims: Sequence[int]) -> DenseTensor:
    """Identity tensor of shape ``dims x dims``."""
    shape = TensorShape(tuple(dims), tuple(dims))
    return dematricize(np.eye(shape.rows, dtype=np.complex128), shape)


def zero(shape: TensorShape) -> DenseTensor:
    return DenseTensor(np.zeros(shape.dims, dtype=np.complex128), shape)


def norm_fro(a: DenseTensor) -> float:
    return float(np.linalg.norm(a.data.ravel()))


def add(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    _check_same(a, b, "add")
    return DenseTensor(a.data + b.data, a.shape)


def sub(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    _check_same(a, b, "sub")
    return DenseTensor(a.data - b.data, a.shape)


def scale(a: DenseTensor, c: complex) -> DenseTensor:
    return DenseTensor(a.data * c, a.shape)


def power(a: DenseTensor, k: int) -> DenseTensor:
    """A^k under the Einstein product (A^0 is the identity)."""
    if not a.is_square:
        raise ShapeError(f"power needs a square tensor, got {a.shape}")
    if k < 0:
        raise ValueError("negative powers are not defined here")
    m = np.linalg.matrix_power(matricize(a), k)
    return dematricize(m, a.shape)
