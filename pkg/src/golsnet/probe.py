"""Loss-landscape probes: 2-D contour grids and univariate F/F' sweeps.

A contour evaluates the full-batch loss at ``x0 + a1 u1 + a2 u2`` for a grid
of ``(a1, a2)`` along two random perpendicular unit directions. A sweep
samples ``F(a)`` and ``F'(a)`` along one direction, either on the full
training set or with a fresh mini-batch at every point.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import linesearch as ls
from . import network as net
from .errors import EvaluationError, PreconditionError, ShapeError
from .loss import batch_loss


@dataclass(frozen=True)
class ContourGrid:
    u1: np.ndarray
    u2: np.ndarray
    alphas1: np.ndarray
    alphas2: np.ndarray
    values: np.ndarray  # values[i, j] at alphas1[i], alphas2[j]

    def __post_init__(self):
        if self.values.shape != (self.alphas1.size, self.alphas2.size):
            raise ShapeError("values shape does not match the grids")

    @property
    def value_range(self):
        v = self.values[np.isfinite(self.values)]
        return float(v.max() - v.min()) if v.size else math.nan

    def to_csv(self, path):
        """Matrix CSV: first row ``alpha1\\alpha2`` then the ``alphas2``; one row per ``alpha1``."""
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["alpha1\\alpha2", *(_fmt(a) for a in self.alphas2)])
            for a, row in zip(self.alphas1, self.values):
                w.writerow([_fmt(a), *(_fmt(v) for v in row)])


@dataclass(frozen=True)
class SweepResult:
    alphas: np.ndarray
    f: np.ndarray
    df: np.ndarray
    mode: str  # "full" or "dynamic(<size>)"

    def __post_init__(self):
        if not self.alphas.size == self.f.size == self.df.size:
            raise ShapeError("alphas, f and df differ in length")

    def __len__(self):
        return self.alphas.size

    def samples(self):
        return [ls.DirectionalSample(a, f, df) for a, f, df in zip(self.alphas, self.f, self.df)]

    def sign_changes(self):
        return ls.snngpp_scan(self.samples())

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["alpha", "f", "df"])
            for row in zip(self.alphas, self.f, self.df):
                w.writerow([_fmt(v) for v in row])


def _fmt(v):
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def random_orthonormal_pair(dim, seed):
    """Two perpendicular unit vectors from Gram-Schmidt on Gaussian draws."""
    if dim < 2:
        raise ShapeError("need dim >= 2 for two orthonormal directions")
    rng = np.random.default_rng(seed)
    while True:
        a, b = rng.standard_normal(dim), rng.standard_normal(dim)
        u1 = a / np.linalg.norm(a)
        v = b - (u1 @ b) * u1
        v -= (u1 @ v) * u1  # second pass tightens orthogonality
        n = np.linalg.norm(v)
        if n > 1e-8:
            return u1, v / n


def diagonal_direction(u1, u2):
    """``(u1 + u2) / ||u1 + u2||``."""
    s = np.asarray(u1) + np.asarray(u2)
    return s / np.linalg.norm(s)


def full_loss(ctx, x):
    """Full-training-set loss at ``x`` (train-mode forward, no FE counted)."""
    out, _ = net.forward(ctx.spec, x, ctx.train.inputs, net.Mode.TRAIN, ctx.running)
    value, _ = batch_loss(ctx.loss, out, ctx.train.targets)
    return value


def grid_axis(lo, hi, step):
    if not lo < hi:
        raise PreconditionError("need lo < hi")
    if not step > 0:
        raise PreconditionError("need step > 0")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def contour(ctx, x0, seed, lo=-5.0, hi=5.0, step=0.5, directions=None):
    """Full-batch loss on a Cartesian grid around ``x0``.

    ``directions`` overrides the random pair drawn from ``seed``. Cells whose
    evaluation fails hold NaN.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    u1, u2 = directions if directions is not None else random_orthonormal_pair(x0.size, seed)
    a1 = grid_axis(lo, hi, step)
    a2 = a1.copy()
    values = np.full((a1.size, a2.size), np.nan)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for i, p in enumerate(a1):
            for j, q in enumerate(a2):
                try:
                    v = full_loss(ctx, x0 + p * u1 + q * u2)
                except (EvaluationError, FloatingPointError):
                    continue
                values[i, j] = v
    return ContourGrid(u1, u2, a1, a2, values)


def sweep(ctx, x0, d, alphas):
    """``F`` and ``F'`` at each alpha; one evaluation (fresh batch when dynamic) per point."""
    alphas = np.asarray(alphas, dtype=np.float64).ravel()
    if np.any(np.diff(alphas) <= 0):
        raise PreconditionError("alphas must be strictly increasing")
    x0 = np.asarray(x0, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    f = np.full(alphas.size, np.nan)
    df = np.full(alphas.size, np.nan)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for i, a in enumerate(alphas):
            try:
                s = ls.eval_along(ctx, x0, d, a)
            except EvaluationError:
                continue
            f[i], df[i] = s.f, s.df
    mode = f"dynamic({ctx.batch_size})" if ctx.dynamic else "full"
    return SweepResult(alphas, f, df, mode)
