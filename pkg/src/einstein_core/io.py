"""Tensor JSON reader and writer.

A tensor is stored as::

    {"left_shape": [2, 3], "right_shape": [2, 3], "re": [...], "im": [...]}

``re`` and ``im`` hold the entries in row-major order over the left modes
followed by the right modes (last right index fastest), i.e. the order of
``data.ravel()``.  ``im`` may be omitted for real tensors.  Floats are written
with Python's shortest round-trip representation, so a write/read cycle is
bit-exact.
"""

from __future__ import annotations

import json
import math
import os
from numbers import Real

import numpy as np

from .errors import TensorFormatError
from .tensor import DenseTensor, TensorShape

__all__ = ["tensor_to_dict", "tensor_from_dict", "dumps", "loads", "read_tensor", "write_tensor"]


def tensor_to_dict(t: DenseTensor, include_im: bool | None = None) -> dict:
    """JSON-ready dict; ``im`` is dropped for real tensors unless requested."""
    flat = t.data.ravel()
    out = {
        "left_shape": list(t.shape.left_dims),
        "right_shape": list(t.shape.right_dims),
        "re": [float(v) for v in flat.real],
    }
    if include_im is None:
        include_im = bool(np.any(flat.imag != 0))
    if include_im:
        out["im"] = [float(v) for v in flat.imag]
    return out


def _shape_field(obj: dict, name: str, required: bool) -> tuple[int, ...]:
    if name not in obj:
        if required:
            raise TensorFormatError(name, "missing field")
        return ()
    dims = obj[name]
    if not isinstance(dims, list):
        raise TensorFormatError(name, f"expected a list of positive integers, got {type(dims).__name__}")
    for i, d in enumerate(dims):
        if isinstance(d, bool) or not isinstance(d, int) or d < 1:
            raise TensorFormatError(f"{name}[{i}]", f"expected a positive integer, got {d!r}")
    return tuple(dims)


def _values(obj: dict, name: str, expected: int) -> np.ndarray:
    vals = obj[name]
    if not isinstance(vals, list):
        raise TensorFormatError(name, f"expected a list of numbers, got {type(vals).__name__}")
    if len(vals) != expected:
        raise TensorFormatError(name, f"expected {expected} values, got {len(vals)}")
    for i, v in enumerate(vals):
        if isinstance(v, bool) or not isinstance(v, Real):
            raise TensorFormatError(f"{name}[{i}]", f"expected a number, got {v!r}")
        if not math.isfinite(v):
            raise TensorFormatError(f"{name}[{i}]", f"non-finite value {v!r}")
    return np.asarray(vals, dtype=np.float64)


def tensor_from_dict(obj) -> DenseTensor:
    """Validate and decode a tensor dict.

    Raises
    ------
    TensorFormatError
        With ``field`` set to the offending path, e.g. ``"re"`` for a length
        mismatch or ``"im[4]"`` for a non-finite entry.
    """
    if not isinstance(obj, dict):
        raise TensorFormatError("$", f"expected an object, got {type(obj).__name__}")
    left = _shape_field(obj, "left_shape", required=True)
    right = _shape_field(obj, "right_shape", required=False)
    shape = TensorShape(left, right)
    if "re" not in obj:
        raise TensorFormatError("re", "missing field")
    re = _values(obj, "re", shape.size)
    im = _values(obj, "im", shape.size) if "im" in obj else np.zeros_like(re)
    return DenseTensor((re + 1j * im).reshape(shape.dims), shape)


def _reject_constant(name):
    raise ValueError(f"non-finite literal {name}")


def dumps(t: DenseTensor) -> str:
    return json.dumps(tensor_to_dict(t))


def loads(text: str) -> DenseTensor:
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        raise TensorFormatError("$", f"invalid JSON: {exc}") from exc
    return tensor_from_dict(obj)


def read_tensor(path: str | os.PathLike) -> DenseTensor:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def write_tensor(path: str | os.PathLike, t: DenseTensor) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(t))
        fh.write("\n")
