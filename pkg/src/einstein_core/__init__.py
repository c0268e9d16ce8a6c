"""Generalized inverses, core-inverse reverse-order laws and multilinear
solvers for even-order tensors under the Einstein product."""

from .errors import (
    GenerationExhausted,
    IndexTooHigh,
    NotConsistent,
    RankAmbiguous,
    ShapeError,
    TensorFormatError,
)
from .inverses import (
    InverseOptions,
    core_inverse,
    drazin,
    group_inverse,
    index,
    is_ep,
    moore_penrose,
    numerical_rank,
    range_contains,
    relative_residual,
    verify_inverse_class,
)
from .io import read_tensor, write_tensor
from .laws import LawId, LawReport, check_law, counterexample_search
from .poisson import GridSpec, PoissonSolver, build_stencil, project_rhs, solve_poisson
from .solvers import (
    SolveOutcome,
    kron_lift,
    solve_one_sided,
    solve_two_sided,
    solve_unique_in_range,
    sylvester_block_form,
)
from .tensor import (
    DenseTensor,
    TensorShape,
    conj_transpose,
    dematricize,
    einstein_product,
    identity,
    kron,
    matricize,
    zero,
)

__version__ = "0.1.0"
