"""Gradient-only line searches over dynamically sub-sampled losses.

Along a direction ``d`` from ``x`` the univariate function is
``F(a) = L(x + a d)`` with directional derivative ``F'(a) = d . grad L(x + a d)``.
Under dynamic mini-batch sub-sampling every evaluation of the pair draws a
new batch, so ``F`` is point-wise discontinuous and minimisation line
searches stall on sampling-induced local minima. The searches here only
look for the sign of ``F'``: a step is located where ``F'`` changes from
negative to non-negative (zero counts as non-negative).

* :func:`gols_b` doubles from ``min_step`` until ``F' >= 0`` and then
  bisects the bracket, returning its descent-side end.
* :func:`gols_i` starts from the previous step, accepts it immediately when
  the slope there is still negative but flattened, and otherwise grows or
  shrinks by ``growth`` and accepts the first step past the sign change.
* :func:`fixed_step` is the constant learning-rate baseline.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import data as dat
from . import network as net
from .errors import EvaluationError, NoSnnGppError, PreconditionError
from .loss import batch_loss, loss_kind


class Flag(enum.Enum):
    IMMEDIATE_ACCEPT = "ImmediateAccept"
    SIGN_CHANGE = "SignChangeLocated"
    MAX_STEP = "MaxStepClamped"
    MIN_STEP = "MinStepClamped"
    BUDGET = "BudgetExhausted"


@dataclass(frozen=True)
class GolsConfig:
    min_step: float = 1e-8
    max_step: float = 1e7
    growth: float = 2.0
    immediate_accept_factor: float = 0.9
    bisection_tol: float = 1e-8
    max_evals_per_search: int = 30
    initial_step: float = 1e-3  # GOLS-I first-iteration guess, clipped to [min_step, max_step]
    accept_overshoot: bool = False  # also accept a flattened positive slope

    def __post_init__(self):
        if not 0 < self.min_step < self.max_step:
            raise ValueError("need 0 < min_step < max_step")
        if self.growth <= 1:
            raise ValueError("growth must be > 1")
        if not 0 < self.immediate_accept_factor < 1:
            raise ValueError("immediate_accept_factor must lie in (0, 1)")
        if self.bisection_tol <= 0:
            raise ValueError("bisection_tol must be > 0")
        if self.max_evals_per_search < 1:
            raise ValueError("max_evals_per_search must be >= 1")
        if not self.initial_step > 0:
            raise ValueError("initial_step must be > 0")


@dataclass(frozen=True)
class DirectionalSample:
    alpha: float
    f: float
    df: float


@dataclass(frozen=True)
class StepResult:
    alpha: float
    evals: int
    flag: Flag


@dataclass
class EvalContext:
    """Network, loss, training data and sampling state for loss/gradient pairs.

    ``batch_size=None`` evaluates the full training set every time;
    otherwise every call to :meth:`evaluate` draws a fresh batch from
    ``rng``. Each call counts one function evaluation.
    """

    spec: net.NetworkSpec
    loss: object
    train: dat.Dataset
    batch_size: int = None
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    running: net.RunningStats = None
    fe_counter: int = 0

    def __post_init__(self):
        self.loss = loss_kind(self.loss)
        if self.running is None:
            self.running = net.init_running_stats(self.spec)

    @property
    def dynamic(self):
        return self.batch_size is not None and self.batch_size < len(self.train)

    def batch(self):
        if self.batch_size is None:
            return dat.full_batch(self.train)
        return dat.sample_dynamic(self.train, self.batch_size, self.rng)

    def evaluate(self, x, update_stats=False):
        """One (loss, gradient) pair on one batch. Returns ``(value, grad, batch)``."""
        b = self.batch()
        self.fe_counter += 1
        out, cache = net.forward(self.spec, x, b.inputs, net.Mode.TRAIN, self.running)
        value, dout = batch_loss(self.loss, out, b.targets)
        g = net.backward(self.spec, x, cache, dout)
        if not (np.isfinite(value) and np.all(np.isfinite(g))):
            raise EvaluationError("non-finite loss or gradient")
        if update_stats and cache.batch_stats:
            self.running.update(cache)
        return value, g, b


def eval_along(ctx, x, d, alpha):
    """Sample ``F(alpha)`` and ``F'(alpha)`` from one batch."""
    alpha = float(alpha)
    try:
        value, g, _ = ctx.evaluate(x + alpha * d)
    except EvaluationError as exc:
        raise EvaluationError(f"evaluation failed at alpha={alpha:g}: {exc}", alpha=alpha) from exc
    except FloatingPointError as exc:
        raise EvaluationError(f"evaluation failed at alpha={alpha:g}: {exc}", alpha=alpha) from exc
    return DirectionalSample(alpha, value, float(d @ g))


def gols_b(ctx, x, d, cfg=GolsConfig(), on_bracket=None, max_evals=None):
    """Bracket by doubling from ``min_step``, then bisect on the sign of ``F'``.

    Returns the descent-side (``F' < 0``) end of the final bracket.
    ``on_bracket(lo_sample, hi_sample)`` is called with the bracket before
    every bisection step.
    """
    budget = cfg.max_evals_per_search if max_evals is None else max_evals
    alpha = cfg.min_step
    s = eval_along(ctx, x, d, alpha)
    evals = 1
    if s.df >= 0:
        return StepResult(cfg.min_step, evals, Flag.MIN_STEP)
    lo = s
    while True:
        if lo.alpha >= cfg.max_step:
            return StepResult(cfg.max_step, evals, Flag.MAX_STEP)
        if evals >= budget:
            return StepResult(lo.alpha, evals, Flag.BUDGET)
        s = eval_along(ctx, x, d, min(lo.alpha * cfg.growth, cfg.max_step))
        evals += 1
        if s.df >= 0:
            hi = s
            break
        lo = s
    while hi.alpha - lo.alpha > cfg.bisection_tol * hi.alpha:
        if evals >= budget:
            return StepResult(lo.alpha, evals, Flag.BUDGET)
        if on_bracket is not None:
            on_bracket(lo, hi)
        s = eval_along(ctx, x, d, 0.5 * (lo.alpha + hi.alpha))
        evals += 1
        if s.df < 0:
            lo = s
        else:
            hi = s
    return StepResult(lo.alpha, evals, Flag.SIGN_CHANGE)


def gols_i(ctx, x, d, alpha_init, cfg=GolsConfig(), df0=None, max_evals=None):
    """Inexact gradient-only line search.

    ``df0`` is the slope at ``alpha = 0`` (available from the gradient that
    built ``d``). When given, a negative slope at ``alpha_init`` with
    ``|F'| <= immediate_accept_factor * |df0|`` is accepted at once. Otherwise the
    step is grown (negative slope) or shrunk (non-negative slope) by
    ``growth`` and the step on the non-negative side of the first observed
    sign change is accepted, so the located point may be overshot by up to
    one growth factor.
    """
    if not cfg.min_step <= alpha_init <= cfg.max_step:
        raise PreconditionError(f"alpha_init={alpha_init:g} outside [{cfg.min_step:g}, {cfg.max_step:g}]")
    budget = cfg.max_evals_per_search if max_evals is None else max_evals
    alpha = float(alpha_init)
    s = eval_along(ctx, x, d, alpha)
    evals = 1
    if df0 is not None and (s.df < 0 or cfg.accept_overshoot):
        if abs(s.df) <= cfg.immediate_accept_factor * abs(df0):
            return StepResult(alpha, evals, Flag.IMMEDIATE_ACCEPT)
    if s.df < 0:
        while True:
            if alpha >= cfg.max_step:
                return StepResult(cfg.max_step, evals, Flag.MAX_STEP)
            if evals >= budget:
                return StepResult(alpha, evals, Flag.BUDGET)
            alpha = min(alpha * cfg.growth, cfg.max_step)
            s = eval_along(ctx, x, d, alpha)
            evals += 1
            if s.df >= 0:
                return StepResult(alpha, evals, Flag.SIGN_CHANGE)
    while True:
        if alpha <= cfg.min_step:
            return StepResult(cfg.min_step, evals, Flag.MIN_STEP)
        if evals >= budget:
            return StepResult(alpha, evals, Flag.BUDGET)
        smaller = max(alpha / cfg.growth, cfg.min_step)
        s = eval_along(ctx, x, d, smaller)
        evals += 1
        if s.df < 0:
            return StepResult(alpha, evals, Flag.SIGN_CHANGE)
        alpha = smaller


def fixed_step(alpha_const):
    if not alpha_const > 0:
        raise ValueError("fixed step must be > 0")
    return StepResult(float(alpha_const), 1, Flag.IMMEDIATE_ACCEPT)


def snngpp_scan(samples):
    """Intervals ``(a_i, a_{i+1})`` where ``F'`` goes from < 0 to >= 0.

    Positive-to-negative changes (maxima) are ignored, as are pairs with a
    missing (NaN) slope.
    """
    alphas = [s.alpha for s in samples]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise PreconditionError("samples must be sorted by strictly increasing alpha")
    out = []
    for a, b in zip(samples, samples[1:]):
        if a.df < 0 and b.df >= 0:
            out.append((a.alpha, b.alpha))
    return out


def b_epsilon_estimate(intervals):
    """Hull ``(lo, hi)`` of all observed sign-change intervals."""
    if not intervals:
        raise NoSnnGppError("no SNN-GPP intervals to bound")
    return min(i[0] for i in intervals), max(i[1] for i in intervals)
