"""Dense float64 vector/matrix helpers.

Thin wrappers over numpy that enforce float64 storage and raise
:class:`~golsnet.errors.ShapeError` on non-conforming operands. The hot
paths in :mod:`golsnet.network` use numpy directly; these helpers are the
checked public surface.
"""

import numpy as np

from .errors import ShapeError

DTYPE = np.float64


def as_matrix(a):
    m = np.asarray(a, dtype=DTYPE)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def as_vector(a):
    v = np.asarray(a, dtype=DTYPE)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {v.shape}")
    return v


def matmul(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def dot(a, b):
    a, b = as_vector(a), as_vector(b)
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.size} vs {b.size}")
    return float(a @ b)


def axpy(alpha, x, y):
    """Return ``y + alpha * x`` as a new vector."""
    x, y = as_vector(x), as_vector(y)
    if x.shape != y.shape:
        raise ShapeError(f"length mismatch: {x.size} vs {y.size}")
    return y + float(alpha) * x


def norm(a):
    return float(np.sqrt(dot(a, a)))
