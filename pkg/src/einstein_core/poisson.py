"""2-D Poisson problem with Neumann boundary, solved through the core inverse.

The unknown grid ``u[k, l]`` (k row, l column) is an order-2 tensor and the
five-point stencil is the order-4 tensor

    A = I_m kron P + Q kron I_m + D,

with ``P = Q = tridiag(-1, 0, -1)`` and D diagonal.  With the neighbour-count
recipe D holds the number of grid neighbours of each point (2 at corners,
3 on edges, 4 inside), which makes every row sum of the matricization zero.
A is then the singular Neumann Laplacian: real symmetric, hence EP and of
index 1, with the constant grid spanning its null space.
"""

from __future__ import annotations

import io as _io
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import inverses as inv
from .errors import ShapeError
from .inverses import InverseOptions
from .tensor import DenseTensor, TensorShape, identity, kron, norm_fro

__all__ = [
    "DiagonalRecipe",
    "GridSpec",
    "PoissonReport",
    "PoissonSolver",
    "build_stencil",
    "grid_tensor",
    "project_rhs",
    "solve_poisson",
    "grid_to_csv",
]


class DiagonalRecipe(str, Enum):
    NEIGHBOR_COUNT = "neighbor_count"


@dataclass(frozen=True)
class GridSpec:
    m: int
    diagonal_recipe: DiagonalRecipe = DiagonalRecipe.NEIGHBOR_COUNT

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, (int, np.integer)) or self.m < 3:
            raise ValueError(f"grid size m must be an integer >= 3, got {self.m!r}")
        object.__setattr__(self, "diagonal_recipe", DiagonalRecipe(self.diagonal_recipe))


def _tridiag(m: int) -> np.ndarray:
    t = np.zeros((m, m))
    i = np.arange(m - 1)
    t[i, i + 1] = -1.0
    t[i + 1, i] = -1.0
    return t


def build_stencil(spec: GridSpec | int) -> DenseTensor:
    """Order-4 stencil tensor of shape ``(m, m, m, m)``."""
    if not isinstance(spec, GridSpec):
        spec = GridSpec(spec)
    m = spec.m
    sq = TensorShape((m,), (m,))
    p = DenseTensor(_tridiag(m), sq)
    eye = identity((m,))
    a = kron(eye, p) + kron(p, eye)
    # neighbour count: 4 minus one per touched boundary side
    edge = np.ones(m)
    edge[[0, -1]] = 0.0
    counts = 2.0 + edge[:, None] + edge[None, :]
    diag = np.zeros((m, m, m, m))
    k, l = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    diag[k, l, k, l] = counts
    return a + DenseTensor(diag, a.shape)


def grid_tensor(f) -> DenseTensor:
    """Wrap an ``(m, m)`` grid as a right-hand-side tensor."""
    if isinstance(f, DenseTensor):
        if len(f.left) == 2 and f.shape.cols == 1:
            return DenseTensor(f.data.reshape(f.left), TensorShape(f.left, ()))
        if len(f.left) == 1 and len(f.right) == 1:
            return DenseTensor(f.data, TensorShape(f.data.shape, ()))
        raise ShapeError(f"cannot read {f.shape} as a grid")
    arr = np.asarray(f)
    if arr.ndim != 2:
        raise ShapeError(f"grid must be two-dimensional, got shape {arr.shape}")
    return DenseTensor(arr, TensorShape(arr.shape, ()))


def _check_grid(a: DenseTensor, f: DenseTensor) -> None:
    if f.left != a.right:
        raise ShapeError(f"grid {f.left} does not match stencil {a.shape}")


def project_rhs(a: DenseTensor, f, opts: InverseOptions | None = None) -> DenseTensor:
    """Nearest consistent right-hand side ``A A^core f``."""
    f = grid_tensor(f)
    _check_grid(a, f)
    return a @ (inv.core_inverse(a, opts) @ f)


@dataclass(frozen=True)
class PoissonReport:
    m: int
    residual: float
    rhs_norm: float
    removed_norm: float

    @property
    def passed(self) -> bool:
        return self.residual <= 1e-8

    def line(self) -> str:
        rel = "<=" if self.passed else ">"
        return f"residual{rel}1e-8 ({self.residual:.3e})"


class PoissonSolver:
    """Stencil and its core inverse for one grid, shared across right-hand sides.

    Instances are immutable after construction and safe to share.
    """

    def __init__(self, spec: GridSpec | int, opts: InverseOptions | None = None):
        self.spec = spec if isinstance(spec, GridSpec) else GridSpec(spec)
        self.opts = opts
        self.stencil = build_stencil(self.spec)
        self.core = inv.core_inverse(self.stencil, opts)

    def project(self, f) -> DenseTensor:
        f = grid_tensor(f)
        _check_grid(self.stencil, f)
        return self.stencil @ (self.core @ f)

    def solve(self, f) -> tuple[DenseTensor, PoissonReport]:
        """Solve ``A*X = B`` with ``B`` the projection of ``f`` onto R(A)."""
        f = grid_tensor(f)
        b = self.project(f)
        x = self.core @ b
        res = norm_fro(self.stencil @ x - b) / (1.0 + norm_fro(b))
        report = PoissonReport(self.spec.m, res, norm_fro(b), norm_fro(f - b))
        return x, report


def solve_poisson(spec: GridSpec | int, f, opts: InverseOptions | None = None):
    """One-shot solve; see :class:`PoissonSolver` for repeated right-hand sides."""
    return PoissonSolver(spec, opts).solve(f)


def grid_to_csv(x: DenseTensor) -> str:
    """Real part of the grid as CSV: m rows, comma separated, LF endings."""
    grid = grid_tensor(x).data.real
    buf = _io.StringIO()
    for row in grid:
        buf.write(",".join(repr(float(v)) for v in row))
        buf.write("\n")
    return buf.getvalue()
