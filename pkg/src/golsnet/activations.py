"""Activation functions with exact derivatives.

Six base functions split into two classes:

* saturation: ``sigmoid``, ``tanh``, ``softsign``
* sparsity: ``relu``, ``lrelu``, ``elu``

Every kind can be affinely modified, ``scale * base(z) + offset``, which is
how e.g. ``0.5*tanh + 0.5`` or ``2*sigmoid - 1`` are expressed.

At the kinks (z = 0 for relu, lrelu, elu and softsign) the right derivative
is used.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError


class ActivationClass(enum.Enum):
    SATURATION = "saturation"
    SPARSITY = "sparsity"


BASES = ("sigmoid", "tanh", "softsign", "relu", "lrelu", "elu")

_CLASS = {
    "sigmoid": ActivationClass.SATURATION,
    "tanh": ActivationClass.SATURATION,
    "softsign": ActivationClass.SATURATION,
    "relu": ActivationClass.SPARSITY,
    "lrelu": ActivationClass.SPARSITY,
    "elu": ActivationClass.SPARSITY,
}

# Dense layers feeding these are He-initialised, everything else Xavier.
HE_BASES = frozenset({"relu", "lrelu"})

# kink locations, used by gradient checks to skip non-differentiable points
KINKED = frozenset({"relu", "lrelu", "elu", "softsign"})


@dataclass(frozen=True)
class ActivationKind:
    base: str
    scale: float = 1.0
    offset: float = 0.0
    leak: float = 0.01
    elu_alpha: float = 1.0

    def __post_init__(self):
        if self.base not in _CLASS:
            raise ValueError(f"unknown activation {self.base!r}; expected one of {BASES}")
        if self.leak < 0:
            raise ValueError("leak must be >= 0")
        if self.elu_alpha <= 0:
            raise ValueError("elu_alpha must be > 0")
        if self.scale == 0:
            raise ValueError("scale must be non-zero")

    @property
    def name(self):
        if self.scale == 1.0 and self.offset == 0.0:
            return self.base
        return f"{self.scale:g}*{self.base}{self.offset:+g}"


def activation(name, **kw):
    """Build an :class:`ActivationKind` from its config name.

    ``leaky_relu`` and ``leakyrelu`` are accepted aliases of ``lrelu``.
    """
    name = name.lower()
    name = {"leaky_relu": "lrelu", "leakyrelu": "lrelu"}.get(name, name)
    return ActivationKind(name, **kw)


def af_class(kind):
    return _CLASS[kind.base]


def _base_value(kind, z):
    b = kind.base
    if b == "sigmoid":
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    if b == "tanh":
        return np.tanh(z)
    if b == "softsign":
        return z / (1.0 + np.abs(z))
    if b == "relu":
        return np.maximum(z, 0.0)
    if b == "lrelu":
        return np.where(z > 0, z, kind.leak * z)
    # elu
    return np.where(z > 0, z, kind.elu_alpha * np.expm1(np.minimum(z, 0.0)))


def _base_derivative(kind, z):
    b = kind.base
    if b == "sigmoid":
        s = 0.5 * (1.0 + np.tanh(0.5 * z))
        return s * (1.0 - s)
    if b == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    if b == "softsign":
        q = 1.0 + np.abs(z)
        return 1.0 / (q * q)
    if b == "relu":
        return (z >= 0).astype(np.float64)
    if b == "lrelu":
        return np.where(z >= 0, 1.0, kind.leak)
    return np.where(z >= 0, 1.0, kind.elu_alpha * np.exp(np.minimum(z, 0.0)))


def forward_unchecked(kind, z):
    """Value on an array without finiteness checks (network hot path)."""
    y = _base_value(kind, z)
    if kind.scale != 1.0:
        y = kind.scale * y
    if kind.offset != 0.0:
        y = y + kind.offset
    return y


def derivative_unchecked(kind, z):
    d = _base_derivative(kind, z)
    if kind.scale != 1.0:
        d = kind.scale * d
    return d


def _check(z):
    arr = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise EvaluationError("activation input is not finite")
    return arr


def _ret(z, out):
    return float(out) if np.ndim(z) == 0 else out


def af_value(kind, z):
    """``scale * base(z) + offset`` for a scalar or array ``z``."""
    return _ret(z, forward_unchecked(kind, _check(z)))


def af_derivative(kind, z):
    return _ret(z, derivative_unchecked(kind, _check(z)))
