"""Layer graphs over a flat parameter vector.

A :class:`NetworkSpec` is an immutable description (dense, activation,
batch-norm and residual layers). All trainable scalars live in one flat
float64 vector whose layout follows the layer order:

* ``Dense(n_in, n_out)``: weight matrix ``n_in x n_out`` row-major, then the
  ``n_out`` biases (if any)
* ``BatchNorm(f)``: ``f`` gammas then ``f`` betas
* ``Residual(inner)``: the inner layers' parameters, in order

Batch-norm running statistics are not trainable and are kept outside the
parameter vector in a :class:`RunningStats` object.
"""

import enum
import functools
from dataclasses import dataclass, field

import numpy as np

from . import activations as afs
from .errors import ConsistencyError, DegenerateBatchError, ShapeError


class Mode(enum.Enum):
    TRAIN = "train"
    EVAL = "eval"


@dataclass(frozen=True)
class Dense:
    n_in: int
    n_out: int
    bias: bool = True

    def __post_init__(self):
        if self.n_in < 1 or self.n_out < 1:
            raise ShapeError("Dense widths must be >= 1")


@dataclass(frozen=True)
class Activation:
    kind: afs.ActivationKind


@dataclass(frozen=True)
class BatchNorm:
    features: int
    epsilon: float = 1e-5

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("BatchNorm epsilon must be > 0")


@dataclass(frozen=True)
class Residual:
    """``inner(x) + x``; the inner stack must preserve the width."""

    inner: tuple

    def __post_init__(self):
        object.__setattr__(self, "inner", tuple(self.inner))


def _propagate(layers, width):
    for layer in layers:
        if isinstance(layer, Dense):
            if layer.n_in != width:
                raise ShapeError(f"Dense expects {layer.n_in} inputs, got {width}")
            width = layer.n_out
        elif isinstance(layer, BatchNorm):
            if layer.features != width:
                raise ShapeError(f"BatchNorm over {layer.features} features, got {width}")
        elif isinstance(layer, Residual):
            if _propagate(layer.inner, width) != width:
                raise ShapeError("Residual inner stack must map width d to d")
        elif not isinstance(layer, Activation):
            raise TypeError(f"unknown layer {layer!r}")
    return width


@dataclass(frozen=True)
class NetworkSpec:
    input_dim: int
    layers: tuple
    output_dim: int

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        out = _propagate(self.layers, self.input_dim)
        if out != self.output_dim:
            raise ShapeError(f"last layer width {out} != output_dim {self.output_dim}")

    @property
    def n_params(self):
        return _compile(self).n_params

    @property
    def has_batchnorm(self):
        return _compile(self).n_bn > 0


def mlp(input_dim, hidden, output_dim, act, batchnorm=False, bn_epsilon=1e-5, output_activation=False):
    """Feedforward net: ``[Dense, (BatchNorm), act] * len(hidden)`` then a Dense output.

    The output layer is linear unless ``output_activation`` is set, in which
    case ``act`` is applied to it as well.
    """
    if isinstance(act, str):
        act = afs.activation(act)
    layers, w = [], input_dim
    for h in hidden:
        layers.append(Dense(w, h))
        if batchnorm:
            layers.append(BatchNorm(h, bn_epsilon))
        layers.append(Activation(act))
        w = h
    layers.append(Dense(w, output_dim))
    if output_activation:
        layers.append(Activation(act))
    return NetworkSpec(input_dim, layers, output_dim)


def residual_mlp(input_dim, width, n_blocks, output_dim, act, batchnorm=False, bn_epsilon=1e-5,
                 output_activation=False):
    """Residual MLP: a stem layer then ``n_blocks`` skip-connected blocks.

    Each block is ``Dense, (BN), act, Dense, (BN)`` with the skip added before
    the block's closing activation. With one block the net has three hidden
    dense layers.
    """
    if isinstance(act, str):
        act = afs.activation(act)
    bn = [BatchNorm(width, bn_epsilon)] if batchnorm else []
    layers = [Dense(input_dim, width), *bn, Activation(act)]
    for _ in range(n_blocks):
        inner = [Dense(width, width), *bn, Activation(act), Dense(width, width), *bn]
        layers += [Residual(inner), Activation(act)]
    layers.append(Dense(width, output_dim))
    if output_activation:
        layers.append(Activation(act))
    return NetworkSpec(input_dim, layers, output_dim)


# -- compiled plan ---------------------------------------------------------


class _DenseOp:
    def __init__(self, layer, offset):
        self.n_in, self.n_out, self.bias = layer.n_in, layer.n_out, layer.bias
        self.w0 = offset
        self.w1 = offset + self.n_in * self.n_out
        self.end = self.w1 + (self.n_out if self.bias else 0)

    def forward(self, p, x, mode, running, stats_out):
        W = p[self.w0:self.w1].reshape(self.n_in, self.n_out)
        y = x @ W
        if self.bias:
            y += p[self.w1:self.end]
        return y, x

    def backward(self, p, x, dy, g, need_dx):
        W = p[self.w0:self.w1].reshape(self.n_in, self.n_out)
        g[self.w0:self.w1] = (x.T @ dy).ravel()
        if self.bias:
            g[self.w1:self.end] = dy.sum(axis=0)
        return dy @ W.T if need_dx else None


class _ActOp:
    def __init__(self, layer, offset):
        self.kind = layer.kind
        self.end = offset

    def forward(self, p, x, mode, running, stats_out):
        return afs.forward_unchecked(self.kind, x), x

    def backward(self, p, z, dy, g, need_dx):
        return dy * afs.derivative_unchecked(self.kind, z)


class _BatchNormOp:
    def __init__(self, layer, offset, index):
        self.f, self.eps, self.index = layer.features, layer.epsilon, index
        self.g0 = offset
        self.b0 = offset + self.f
        self.end = offset + 2 * self.f

    def forward(self, p, x, mode, running, stats_out):
        gamma, beta = p[self.g0:self.b0], p[self.b0:self.end]
        if mode is Mode.TRAIN:
            if x.shape[0] < 2:
                raise DegenerateBatchError("train-mode batch norm needs a batch of >= 2 rows")
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            stats_out.append((self.index, mean, var))
        else:
            mean, var = running.mean[self.index], running.var[self.index]
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        return xhat * gamma + beta, (xhat, inv_std, mode)

    def backward(self, p, cache, dy, g, need_dx):
        xhat, inv_std, mode = cache
        gamma = p[self.g0:self.b0]
        g[self.g0:self.b0] = (dy * xhat).sum(axis=0)
        g[self.b0:self.end] = dy.sum(axis=0)
        if not need_dx:
            return None
        dxhat = dy * gamma
        if mode is Mode.EVAL:
            return dxhat * inv_std
        m = dy.shape[0]
        return (inv_std / m) * (m * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))


class _ResidualOp:
    def __init__(self, ops, end):
        self.ops = ops
        self.end = end

    def forward(self, p, x, mode, running, stats_out):
        h, caches = x, []
        for op in self.ops:
            h, c = op.forward(p, h, mode, running, stats_out)
            caches.append(c)
        return h + x, caches

    def backward(self, p, caches, dy, g, need_dx):
        d = dy
        for op, c in zip(reversed(self.ops), reversed(caches)):
            d = op.backward(p, c, d, g, True)
        return d + dy


@dataclass
class _Plan:
    ops: list
    n_params: int
    n_bn: int
    bn_features: list
    dense: list  # (op, he_init) for init_params


def _build(layers, offset, bn_features):
    ops = []
    for layer in layers:
        if isinstance(layer, Dense):
            op = _DenseOp(layer, offset)
        elif isinstance(layer, Activation):
            op = _ActOp(layer, offset)
        elif isinstance(layer, BatchNorm):
            op = _BatchNormOp(layer, offset, len(bn_features))
            bn_features.append(layer.features)
        else:
            inner, end = _build(layer.inner, offset, bn_features)
            op = _ResidualOp(inner, end)
        ops.append(op)
        offset = op.end
    return ops, offset


def _flatten(ops):
    for op in ops:
        if isinstance(op, _ResidualOp):
            yield from _flatten(op.ops)
        else:
            yield op


@functools.lru_cache(maxsize=256)
def _compile(spec):
    bn_features = []
    ops, n = _build(spec.layers, 0, bn_features)
    flat = list(_flatten(ops))
    dense = []
    for i, op in enumerate(flat):
        if not isinstance(op, _DenseOp):
            continue
        # the activation this layer feeds; the output layer borrows the last hidden one
        acts = [o for o in flat[i + 1:] if isinstance(o, _ActOp)]
        if not acts:
            acts = [o for o in reversed(flat[:i]) if isinstance(o, _ActOp)]
        he = bool(acts) and acts[0].kind.base in afs.HE_BASES
        dense.append((op, he))
    return _Plan(ops, n, len(bn_features), bn_features, dense)


# -- parameters ------------------------------------------------------------


def n_params(spec):
    return _compile(spec).n_params


def xavier_bound(fan_in, fan_out):
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_params(spec, seed):
    """Xavier-uniform / He-normal weights, zero biases, unit BN gammas.

    He-normal (variance ``2 / fan_in``) is used for dense layers that feed a
    ReLU or leaky ReLU; all other dense layers are Xavier-uniform.
    """
    plan = _compile(spec)
    rng = np.random.default_rng(seed)
    p = np.zeros(plan.n_params)
    for op, he in plan.dense:
        shape = (op.n_in, op.n_out)
        if he:
            w = rng.normal(0.0, np.sqrt(2.0 / op.n_in), size=shape)
        else:
            b = xavier_bound(op.n_in, op.n_out)
            w = rng.uniform(-b, b, size=shape)
        p[op.w0:op.w1] = w.ravel()
    for op in _flatten(plan.ops):
        if isinstance(op, _BatchNormOp):
            p[op.g0:op.b0] = 1.0
    return p


def param_layout(spec):
    """``[(name, offset, shape), ...]`` in storage order."""
    out = []
    for i, op in enumerate(_flatten(_compile(spec).ops)):
        if isinstance(op, _DenseOp):
            out.append((f"dense{i}.weight", op.w0, (op.n_in, op.n_out)))
            if op.bias:
                out.append((f"dense{i}.bias", op.w1, (op.n_out,)))
        elif isinstance(op, _BatchNormOp):
            out.append((f"bn{i}.gamma", op.g0, (op.f,)))
            out.append((f"bn{i}.beta", op.b0, (op.f,)))
    return out


def unpack(spec, params):
    """Split a flat vector into named arrays (copies)."""
    params = np.asarray(params, dtype=np.float64)
    if params.size != n_params(spec):
        raise ShapeError(f"expected {n_params(spec)} parameters, got {params.size}")
    return {name: params[off:off + int(np.prod(shape))].reshape(shape).copy()
            for name, off, shape in param_layout(spec)}


def pack(spec, arrays):
    p = np.zeros(n_params(spec))
    for name, off, shape in param_layout(spec):
        a = np.asarray(arrays[name], dtype=np.float64)
        if a.shape != tuple(shape):
            raise ShapeError(f"{name}: expected shape {shape}, got {a.shape}")
        p[off:off + a.size] = a.ravel()
    return p


# -- running statistics ----------------------------------------------------


@dataclass
class RunningStats:
    """Exponential moving averages of batch-norm means and variances."""

    mean: list = field(default_factory=list)
    var: list = field(default_factory=list)
    momentum: float = 0.1

    def update(self, cache):
        m = self.momentum
        for idx, mean, var in cache.batch_stats:
            self.mean[idx] = (1.0 - m) * self.mean[idx] + m * mean
            self.var[idx] = (1.0 - m) * self.var[idx] + m * var

    def copy(self):
        return RunningStats([a.copy() for a in self.mean], [a.copy() for a in self.var], self.momentum)


def init_running_stats(spec, momentum=0.1):
    feats = _compile(spec).bn_features
    return RunningStats([np.zeros(f) for f in feats], [np.ones(f) for f in feats], momentum)


# -- forward / backward ----------------------------------------------------


@dataclass
class ForwardCache:
    spec: NetworkSpec
    params: np.ndarray  # snapshot, for the staleness check
    mode: Mode
    entries: list
    batch_stats: list


def forward(spec, params, inputs, mode=Mode.TRAIN, running=None):
    """Evaluate the network on a batch.

    Returns ``(outputs, cache)``. Eval-mode batch norm uses ``running``
    (a fresh :func:`init_running_stats` when omitted).
    """
    plan = _compile(spec)
    mode = Mode(mode)
    p = np.asarray(params, dtype=np.float64)
    if p.ndim != 1 or p.size != plan.n_params:
        raise ShapeError(f"expected {plan.n_params} parameters, got shape {p.shape}")
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ShapeError(f"inputs must be (batch, {spec.input_dim}), got {x.shape}")
    if mode is Mode.EVAL and plan.n_bn and running is None:
        running = init_running_stats(spec)
    entries, stats = [], []
    for op in plan.ops:
        x, c = op.forward(p, x, mode, running, stats)
        entries.append(c)
    return x, ForwardCache(spec, p.copy(), mode, entries, stats)


def backward(spec, params, cache, loss_grad):
    """Exact gradient of the batch loss w.r.t. every parameter.

    ``loss_grad`` is the derivative of the scalar batch loss w.r.t. the
    network outputs, shaped like them.
    """
    if cache.spec != spec:
        raise ConsistencyError("cache was produced by a different network")
    p = np.asarray(params, dtype=np.float64)
    if p.shape != cache.params.shape or not np.array_equal(p, cache.params):
        raise ConsistencyError("stale forward cache: parameters changed since forward()")
    plan = _compile(spec)
    g = np.zeros(plan.n_params)
    d = np.asarray(loss_grad, dtype=np.float64)
    last = len(plan.ops) - 1
    for i in range(last, -1, -1):
        d = plan.ops[i].backward(p, cache.entries[i], d, g, i > 0)
    return g


def gradient_density(g):
    """Fraction of gradient entries that are non-zero."""
    g = np.asarray(g)
    if g.size == 0:
        return 0.0
    return float(np.count_nonzero(g)) / g.size
