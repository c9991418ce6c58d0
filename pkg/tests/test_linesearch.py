import numpy as np
import pytest

from golsnet import data as dat
from golsnet import linesearch as ls
from golsnet import network as net
from golsnet.errors import EvaluationError, NoSnnGppError, PreconditionError


class Quadratic:
    """Deterministic stand-in for an EvalContext: L(x) = sum((x - c)^2)."""

    def __init__(self, center, blow_up_beyond=None):
        self.center = np.asarray(center, dtype=float)
        self.blow_up_beyond = blow_up_beyond
        self.fe_counter = 0
        self.visited = []

    def evaluate(self, x, update_stats=False):
        self.fe_counter += 1
        self.visited.append(float(x[0]))
        if self.blow_up_beyond is not None and x[0] > self.blow_up_beyond:
            raise EvaluationError("overflow")
        r = x - self.center
        return float(r @ r), 2 * r, None


X0 = np.zeros(1)
D = np.ones(1)  # F'(a) = 2 (a - 2) with center 2


def test_eval_along_full_descent():
    split = dat.prepare("iris")
    spec = net.mlp(4, [5], 3, "sigmoid")
    x = net.init_params(spec, 0)
    ctx = ls.EvalContext(spec, "mse", split.train)
    _, g, _ = ctx.evaluate(x)
    s = ls.eval_along(ctx, x, -g, 0.0)
    assert s.df == pytest.approx(-(g @ g))
    assert ctx.fe_counter == 2


def test_eval_along_fd_linear_net(rng):
    split = dat.prepare("iris")
    spec = net.NetworkSpec(4, [net.Dense(4, 3)], 3)
    x = net.init_params(spec, 1)
    ctx = ls.EvalContext(spec, "mse", split.train)
    d = rng.normal(size=spec.n_params)
    a, h = 0.3, 1e-5
    s = ls.eval_along(ctx, x, d, a)
    fd = (ls.eval_along(ctx, x, d, a + h).f - ls.eval_along(ctx, x, d, a - h).f) / (2 * h)
    assert s.df == pytest.approx(fd, abs=1e-6)


def test_eval_along_dynamic_resamples():
    split = dat.prepare("iris")
    spec = net.mlp(4, [5], 3, "tanh")
    x = net.init_params(spec, 0)
    ctx = ls.EvalContext(spec, "mse", split.train, 8, np.random.default_rng(0))
    d = -ctx.evaluate(x)[1]
    vals = {ls.eval_along(ctx, x, d, 0.1).f for _ in range(5)}
    assert len(vals) > 1


def test_eval_along_error_carries_alpha():
    q = Quadratic([2.0], blow_up_beyond=5)
    with pytest.raises(EvaluationError) as info:
        ls.eval_along(q, X0, D, 8.0)
    assert info.value.alpha == 8.0


def test_gols_b_quadratic():
    q = Quadratic([2.0])
    cfg = ls.GolsConfig(min_step=0.01, max_evals_per_search=100)
    brackets = []
    r = ls.gols_b(q, X0, D, cfg, on_bracket=lambda lo, hi: brackets.append((lo.alpha, hi.alpha)))
    assert q.visited[:9] == pytest.approx([0.01 * 2**k for k in range(9)])
    assert brackets[0] == pytest.approx((1.28, 2.56))
    assert r.flag is ls.Flag.SIGN_CHANGE
    assert r.alpha == pytest.approx(2.0, rel=1e-7) and r.alpha < 2.0
    for lo, hi in brackets:
        assert lo < 2.0 <= hi


def test_gols_b_min_step():
    q = Quadratic([-1.0])
    r = ls.gols_b(q, X0, D)
    assert r.flag is ls.Flag.MIN_STEP and r.alpha == 1e-8 and r.evals == 1


def test_gols_b_max_step():
    q = Quadratic([1e9])
    cfg = ls.GolsConfig(min_step=1.0, max_step=1e3, max_evals_per_search=100)
    r = ls.gols_b(q, X0, D, cfg)
    assert r.flag is ls.Flag.MAX_STEP and r.alpha == 1e3


def test_gols_b_budget():
    q = Quadratic([2.0])
    r = ls.gols_b(q, X0, D, ls.GolsConfig(min_step=0.01, max_evals_per_search=5))
    assert r.flag is ls.Flag.BUDGET and r.evals == 5 and r.alpha == pytest.approx(0.16)


def test_gols_i_shrink():
    q = Quadratic([2.0])
    r = ls.gols_i(q, X0, D, 4.0)
    assert q.visited == [4.0, 2.0, 1.0]
    assert r == ls.StepResult(2.0, 3, ls.Flag.SIGN_CHANGE)


def test_gols_i_grow():
    q = Quadratic([2.0])
    r = ls.gols_i(q, X0, D, 0.25)
    assert r == ls.StepResult(2.0, 4, ls.Flag.SIGN_CHANGE)


def test_gols_i_immediate_accept():
    q = Quadratic([2.0])
    # F'(0) = -4, F'(1.5) = -1: flattened enough
    r = ls.gols_i(q, X0, D, 1.5, df0=-4.0)
    assert r == ls.StepResult(1.5, 1, ls.Flag.IMMEDIATE_ACCEPT)
    # F'(0.1) = -3.8 is not flattened: keep growing
    r = ls.gols_i(Quadratic([2.0]), X0, D, 0.1, df0=-4.0)
    assert r.flag is ls.Flag.SIGN_CHANGE


def test_gols_i_overshoot_accept_switch():
    # F'(2.5) = +1 <= 0.9 * 4, so a small overshoot is accepted only when enabled
    on = ls.gols_i(Quadratic([2.0]), X0, D, 2.5, ls.GolsConfig(accept_overshoot=True), df0=-4.0)
    off = ls.gols_i(Quadratic([2.0]), X0, D, 2.5, ls.GolsConfig(accept_overshoot=False), df0=-4.0)
    assert on == ls.StepResult(2.5, 1, ls.Flag.IMMEDIATE_ACCEPT)
    assert off.flag is ls.Flag.SIGN_CHANGE and off.alpha == 2.5 and off.evals == 2


def test_gols_i_clamps():
    r = ls.gols_i(Quadratic([-1.0]), X0, D, 1e-7)
    assert r.flag is ls.Flag.MIN_STEP and r.alpha == 1e-8
    r = ls.gols_i(Quadratic([1e9]), X0, D, 1.0, ls.GolsConfig(max_step=64.0))
    assert r.flag is ls.Flag.MAX_STEP and r.alpha == 64.0
    r = ls.gols_i(Quadratic([1e9]), X0, D, 1.0, ls.GolsConfig(max_evals_per_search=3))
    assert r.flag is ls.Flag.BUDGET and r.evals == 3


def test_gols_i_precondition():
    with pytest.raises(PreconditionError):
        ls.gols_i(Quadratic([2.0]), X0, D, 1e9)


def test_result_invariants_random_quadratics(rng):
    cfg = ls.GolsConfig(min_step=1e-3, max_step=1e3, max_evals_per_search=40)
    for _ in range(50):
        c = rng.uniform(-5, 50)
        for r in (ls.gols_b(Quadratic([c]), X0, D, cfg),
                  ls.gols_i(Quadratic([c]), X0, D, rng.uniform(1e-3, 1e3), cfg, df0=-2 * c)):
            assert cfg.min_step <= r.alpha <= cfg.max_step and r.evals >= 1


def test_fixed_step():
    assert ls.fixed_step(0.05) == ls.StepResult(0.05, 1, ls.Flag.IMMEDIATE_ACCEPT)
    assert ls.fixed_step(0.1).alpha == 0.1 and ls.fixed_step(0.001).evals == 1
    with pytest.raises(ValueError):
        ls.fixed_step(0)


def S(a, df):
    return ls.DirectionalSample(a, 0.0, df)


def test_snngpp_scan():
    assert ls.snngpp_scan([S(0, -1), S(1, -0.5), S(2, 0.5)]) == [(1, 2)]
    samples = [S(0, -1), S(1, 1), S(2, -1), S(3, 1)]
    assert ls.snngpp_scan(samples) == [(0, 1), (2, 3)]
    # maxima and zero handling
    assert ls.snngpp_scan([S(0, 1), S(1, -1)]) == []
    assert ls.snngpp_scan([S(0, -1), S(1, 0.0)]) == [(0, 1)]
    assert ls.snngpp_scan([]) == []
    with pytest.raises(PreconditionError):
        ls.snngpp_scan([S(1, -1), S(0, 1)])


def test_b_epsilon():
    assert ls.b_epsilon_estimate([(0.5, 0.6), (1.0, 1.2)]) == (0.5, 1.2)
    with pytest.raises(NoSnnGppError):
        ls.b_epsilon_estimate([])


def test_gols_config_validation():
    for kw in ({"min_step": 0}, {"min_step": 2, "max_step": 1}, {"growth": 1.0},
               {"immediate_accept_factor": 1.0}, {"bisection_tol": 0}, {"max_evals_per_search": 0}):
        with pytest.raises(ValueError):
            ls.GolsConfig(**kw)


def _dynamic_ctx(seed):
    split = dat.prepare("iris")
    spec = net.mlp(4, [5], 3, "tanh")
    return spec, ls.EvalContext(spec, "mse", split.train, 16, np.random.default_rng(seed))


def test_reproducible_dynamic():
    res = []
    for _ in range(2):
        spec, ctx = _dynamic_ctx(4)
        x = net.init_params(spec, 0)
        _, g, _ = ctx.evaluate(x)
        res.append((ls.gols_b(ctx, x, -g), ls.gols_i(ctx, x, -g, 0.01, df0=-(g @ g)), ctx.fe_counter))
    assert res[0] == res[1]


def test_fe_counter_matches_evals():
    spec, ctx = _dynamic_ctx(0)
    x = net.init_params(spec, 0)
    _, g, _ = ctx.evaluate(x)
    r = ls.gols_b(ctx, x, -g)
    assert ctx.fe_counter == 1 + r.evals
