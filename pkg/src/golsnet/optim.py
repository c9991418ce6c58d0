"""Search directions and the training loop.

One iteration:

1. draw ``g`` at the current point on a fresh batch (1 FE),
2. turn it into a search direction (``-g`` or the Adagrad-scaled ``-g``),
3. let the step policy pick ``alpha`` (its evaluations are counted on top),
4. update ``x <- x + alpha * d``.

Cumulative FEs therefore grow by ``1 + evals`` per iteration for the line
searches and by exactly 1 for a fixed step. Validation/test metrics are
computed on the full splits and are not counted as FEs.
"""

import csv
import dataclasses
import hashlib
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import data as dat
from . import linesearch as ls
from . import network as net
from .errors import EvaluationError
from .loss import LossKind, batch_loss, classification_error, loss_kind

# -- directions ------------------------------------------------------------


@dataclass
class DirectionState:
    kind: str = "sgd"
    accumulated: np.ndarray = None
    adagrad_eps: float = 1e-8

    def __post_init__(self):
        self.kind = self.kind.lower()
        if self.kind not in ("sgd", "adagrad"):
            raise ValueError(f"unknown direction {self.kind!r}")


def direction(state, g):
    """``-g`` for SGD; Adagrad accumulates ``g**2`` and returns ``-g / sqrt(acc + eps)``."""
    g = np.asarray(g, dtype=np.float64)
    if state.kind == "sgd":
        return -g
    if state.accumulated is None:
        state.accumulated = np.zeros_like(g)
    state.accumulated += g * g
    return -g / np.sqrt(state.accumulated + state.adagrad_eps)


# -- configuration ---------------------------------------------------------


@dataclass(frozen=True)
class Budget:
    kind: str  # "iterations" | "function_evaluations"
    n: int

    def __post_init__(self):
        if self.kind not in ("iterations", "function_evaluations"):
            raise ValueError(f"unknown budget kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("budget must be >= 1")


def iterations(n):
    return Budget("iterations", n)


def function_evaluations(n):
    return Budget("function_evaluations", n)


def parse_step_policy(text):
    """``'gols-i'``, ``'gols-b'`` or ``'fixed:<alpha>'`` -> ``(name, alpha | None)``."""
    t = str(text).strip().lower()
    if t in ("gols-i", "gols-b"):
        return t, None
    if t.startswith("fixed:"):
        value = float(t.split(":", 1)[1])
        if not value > 0:
            raise ValueError("fixed step must be > 0")
        return "fixed", value
    raise ValueError(f"unknown step policy {text!r}; use gols-i, gols-b or fixed:<alpha>")


@dataclass(frozen=True)
class TrainConfig:
    spec: net.NetworkSpec
    data: dat.SplitDataset
    loss: LossKind = LossKind.MSE
    direction: str = "sgd"
    step: str = "gols-i"
    gols: ls.GolsConfig = ls.GolsConfig()
    batch_size: int = 32  # None -> full batch
    budget: Budget = Budget("iterations", 3000)
    seed: int = 0
    metrics_every: int = 1
    adagrad_eps: float = 1e-8
    bn_momentum: float = 0.1
    tag: dict = field(default_factory=dict, compare=False)

    def describe(self):
        """Primitive-valued summary used for the log metadata and digest."""
        return {
            "spec": repr(self.spec),
            "dataset": self.data.train.name.split("/")[0],
            "loss": loss_kind(self.loss).value,
            "direction": self.direction,
            "step": self.step,
            "gols": dataclasses.asdict(self.gols),
            "batch_size": self.batch_size,
            "budget": dataclasses.asdict(self.budget),
            "seed": self.seed,
            "metrics_every": self.metrics_every,
            "adagrad_eps": self.adagrad_eps,
            "bn_momentum": self.bn_momentum,
        }


def seed_streams(seed):
    """Split a root seed into (init seed, sampler generator, probe generator)."""
    init_ss, sampler_ss, probe_ss = np.random.SeedSequence(seed).spawn(3)
    return (int(init_ss.generate_state(1)[0]),
            np.random.default_rng(sampler_ss),
            np.random.default_rng(probe_ss))


# -- log -------------------------------------------------------------------

COLUMNS = ("iteration", "fes", "train_loss", "val_loss", "test_loss", "train_error",
           "test_error", "step", "step_evals", "flag", "grad_density")
METRICS = ("train_loss", "val_loss", "test_loss", "train_error", "test_error")


@dataclass
class TrainLog:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    error: str = None
    params: np.ndarray = None

    def __len__(self):
        return len(self.rows)

    @property
    def completed(self):
        return self.error is None

    def column(self, name):
        i = COLUMNS.index(name)
        if name == "flag":
            return [r[i] for r in self.rows]
        return np.array([r[i] for r in self.rows], dtype=np.float64)

    def final(self, name):
        """Last non-missing value of a metric column."""
        col = self.column(name)
        ok = col[~np.isnan(col)]
        return float(ok[-1]) if ok.size else math.nan

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(COLUMNS)
            for r in self.rows:
                w.writerow([v if isinstance(v, (int, str)) else repr(float(v)) for v in r])

    def sidecar(self):
        return {"meta": self.meta, "initial": self.initial, "error": self.error, "columns": list(COLUMNS)}

    def write(self, csv_path, json_path=None):
        self.to_csv(csv_path)
        json_path = json_path or str(csv_path).rsplit(".", 1)[0] + ".json"
        with open(json_path, "w") as f:
            json.dump(self.sidecar(), f, indent=2, sort_keys=True)


def read_log(csv_path, json_path=None):
    rows = []
    with open(csv_path, newline="") as f:
        r = csv.reader(f)
        header = next(r)
        if tuple(header) != COLUMNS:
            raise ValueError(f"{csv_path}: unexpected columns {header}")
        for rec in r:
            rows.append([int(rec[0]), int(rec[1]), *map(float, rec[2:8]), int(rec[8]), rec[9], float(rec[10])])
    log = TrainLog(rows)
    json_path = json_path or str(csv_path).rsplit(".", 1)[0] + ".json"
    try:
        with open(json_path) as f:
            side = json.load(f)
        log.meta, log.initial, log.error = side["meta"], side["initial"], side["error"]
    except FileNotFoundError:
        pass
    return log


# -- training --------------------------------------------------------------


def evaluate_metrics(spec, params, split, loss, running):
    """Full-split eval-mode losses and errors."""
    out = {}
    for part, key in ((split.train, "train"), (split.validation, "val"), (split.test, "test")):
        pred, _ = net.forward(spec, params, part.inputs, net.Mode.EVAL, running)
        out[f"{key}_loss"], _ = batch_loss(loss, pred, part.targets)
        if key != "val":
            out[f"{key}_error"] = classification_error(pred, part.targets)
    return out


def _digest(desc):
    return hashlib.sha256(json.dumps(desc, sort_keys=True).encode()).hexdigest()[:16]


def train(cfg):
    """Run one training job; deterministic in ``cfg`` (including its seed)."""
    policy, fixed_alpha = parse_step_policy(cfg.step)
    init_seed, sampler_rng, _ = seed_streams(cfg.seed)
    x = net.init_params(cfg.spec, init_seed)
    running = net.init_running_stats(cfg.spec, cfg.bn_momentum)
    ctx = ls.EvalContext(cfg.spec, cfg.loss, cfg.data.train, cfg.batch_size, sampler_rng, running)
    state = DirectionState(cfg.direction, adagrad_eps=cfg.adagrad_eps)
    desc = cfg.describe()
    log = TrainLog(meta={"seed": cfg.seed, "config_digest": _digest(desc), "config": desc, **cfg.tag})
    gols = cfg.gols
    alpha_prev = min(max(gols.initial_step, gols.min_step), gols.max_step)
    budget = cfg.budget
    nan = math.nan

    def metrics():
        return evaluate_metrics(cfg.spec, x, cfg.data, ctx.loss, running)

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        log.initial = metrics()
        n = 0
        try:
            while True:
                if budget.kind == "iterations":
                    if n >= budget.n:
                        break
                    cap = gols.max_evals_per_search
                else:
                    need = 1 if policy == "fixed" else 2
                    if ctx.fe_counter + need > budget.n:
                        break
                    cap = min(gols.max_evals_per_search, budget.n - ctx.fe_counter - 1)
                _, g, _ = ctx.evaluate(x, update_stats=True)
                d = direction(state, g)
                if policy == "fixed":
                    step = ls.fixed_step(fixed_alpha)
                    spent = 0
                elif policy == "gols-i":
                    step = ls.gols_i(ctx, x, d, alpha_prev, gols, df0=float(d @ g), max_evals=cap)
                    alpha_prev = step.alpha
                    spent = step.evals
                else:
                    step = ls.gols_b(ctx, x, d, gols, max_evals=cap)
                    spent = step.evals
                x = x + step.alpha * d
                n += 1
                if n % cfg.metrics_every == 0 or (budget.kind == "iterations" and n == budget.n):
                    m = metrics()
                else:
                    m = dict.fromkeys(METRICS, nan)
                log.rows.append([n, ctx.fe_counter, *(m[k] for k in METRICS), step.alpha,
                                 step.evals, step.flag.value, net.gradient_density(g)])
        except (EvaluationError, FloatingPointError) as exc:
            log.error = f"iteration {n + 1}: {exc}"
        if log.rows and math.isnan(log.rows[-1][2]):
            try:
                m = metrics()
                log.rows[-1][2:7] = [m[k] for k in METRICS]
            except EvaluationError:
                pass
    log.params = x
    return log


# -- repeated runs ---------------------------------------------------------


@dataclass
class MultiRunResult:
    logs: list
    aggregate: dict  # column -> {"mean": array, "median": array}

    @property
    def completed(self):
        return [lg for lg in self.logs if lg.completed]


def aggregate(logs):
    """Per-iteration mean and median of the numeric columns over completed runs."""
    done = [lg for lg in logs if lg.completed and len(lg)]
    if not done:
        return {}
    n = max(len(lg) for lg in done)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for col in COLUMNS:
            if col == "flag":
                continue
            stack = np.full((len(done), n), np.nan)
            for i, lg in enumerate(done):
                stack[i, :len(lg)] = lg.column(col)
            out[col] = {"mean": np.nanmean(stack, axis=0), "median": np.nanmedian(stack, axis=0)}
    return out


def multi_run(cfg, seeds, jobs=1):
    """Independent runs of ``cfg`` for each seed plus their aggregate."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    cfgs = [dataclasses.replace(cfg, seed=s) for s in seeds]
    if jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            logs = list(pool.map(train, cfgs))
    else:
        logs = [train(c) for c in cfgs]
    return MultiRunResult(logs, aggregate(logs))
