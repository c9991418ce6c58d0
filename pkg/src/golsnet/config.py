"""YAML experiment configs and the bundled presets.

A config describes a grid of runs: every (dataset, activation, seed) cell
becomes one :class:`golsnet.optim.TrainConfig`. Unknown keys are errors.
Annotated example (all keys except ``datasets`` and ``network.hidden``
have defaults)::

    name: inv2
    datasets: [iris, glass]          # bundled names, or {path, inputs, classes}
    split_seed: 0                    # 2:1:1 shuffle
    network:
      hidden: [2D]                   # widths; "2D", "D/2" scale with the input size
      activations: [sigmoid, relu]   # or "all"
      batchnorm: false
      residual: false                # hidden [w, w, w, ...]: stem + (n-1)/2 skip blocks
      output_activation: false       # apply the activation after the output layer too
    loss: mse                        # mse | crossentropy (alias bce)
    direction: sgd                   # sgd | adagrad
    step: gols-i                     # gols-i | gols-b | fixed:<alpha>
    gols: {max_evals_per_search: 30} # any GolsConfig field
    batch_size: 32                   # integer, or M for full batch
    budget: {iterations: 3000}       # or {function_evaluations: 40000}
    seeds: 10                        # count (0..n-1) or explicit list
    metrics_every: 1
    adagrad_eps: 1.0e-8
    bn_momentum: 0.1
    probe:                           # used by `golsnet probe`
      lo: -5.0
      hi: 5.0
      step: 0.5
      sweep_lo: 0.0
      sweep_hi: 10.0
      sweep_points: 201
      sweep_batch: 32
"""

import dataclasses
import math
import re
from dataclasses import dataclass, field
from importlib import resources

import yaml

from . import data as dat
from . import linesearch as ls
from . import network as net
from . import optim
from .activations import BASES
from .errors import ConfigError
from .loss import loss_kind

PRESETS = ("inv1", "inv2", "inv3", "inv4", "inv5", "inv6")
FULL_SCALE = ("inv7", "inv8", "inv9")

_TOP = {"name", "description", "datasets", "split_seed", "network", "loss", "direction", "step",
        "gols", "batch_size", "budget", "seeds", "metrics_every", "adagrad_eps", "bn_momentum",
        "probe", "full_scale"}
_NETWORK = {"hidden", "activations", "batchnorm", "residual", "output_activation", "bn_epsilon"}
_PROBE = {"lo", "hi", "step", "sweep_lo", "sweep_hi", "sweep_points", "sweep_batch"}
_DATASET = {"name", "path", "inputs", "classes"}


@dataclass(frozen=True)
class DatasetRef:
    name: str
    path: str = None  # None -> bundled
    inputs: int = None
    classes: int = None

    def load(self):
        if self.path is None:
            return dat.load_bundled(self.name)
        return dat.load_csv(self.path, self.inputs, self.classes, name=self.name)

    def echo(self):
        if self.path is None:
            return self.name
        return {"name": self.name, "path": self.path, "inputs": self.inputs, "classes": self.classes}


@dataclass(frozen=True)
class ProbeSettings:
    lo: float = -5.0
    hi: float = 5.0
    step: float = 0.5
    sweep_lo: float = 0.0
    sweep_hi: float = 10.0
    sweep_points: int = 201
    sweep_batch: int = 32


@dataclass(frozen=True)
class RunConfig:
    datasets: tuple
    hidden: tuple
    activations: tuple = BASES
    name: str = "run"
    description: str = ""
    split_seed: int = 0
    batchnorm: bool = False
    residual: bool = False
    output_activation: bool = False
    bn_epsilon: float = 1e-5
    loss: str = "mse"
    direction: str = "sgd"
    step: str = "gols-i"
    gols: ls.GolsConfig = ls.GolsConfig()
    batch_size: object = 32  # int or "M"
    budget: optim.Budget = optim.Budget("iterations", 3000)
    seeds: tuple = tuple(range(10))
    metrics_every: int = 1
    adagrad_eps: float = 1e-8
    bn_momentum: float = 0.1
    probe: ProbeSettings = ProbeSettings()
    full_scale: bool = False

    def echo(self):
        """Plain-data form that :func:`parse` maps back to an equal config."""
        return {
            "name": self.name,
            "description": self.description,
            "datasets": [d.echo() for d in self.datasets],
            "split_seed": self.split_seed,
            "network": {"hidden": list(self.hidden), "activations": list(self.activations),
                        "batchnorm": self.batchnorm, "residual": self.residual,
                        "output_activation": self.output_activation, "bn_epsilon": self.bn_epsilon},
            "loss": self.loss,
            "direction": self.direction,
            "step": self.step,
            "gols": dataclasses.asdict(self.gols),
            "batch_size": self.batch_size,
            "budget": {self.budget.kind: self.budget.n},
            "seeds": list(self.seeds),
            "metrics_every": self.metrics_every,
            "adagrad_eps": self.adagrad_eps,
            "bn_momentum": self.bn_momentum,
            "probe": dataclasses.asdict(self.probe),
            "full_scale": self.full_scale,
        }


# -- parsing ---------------------------------------------------------------


def _check_keys(section, allowed, where):
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(section).__name__}")
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(map(str, unknown))}")


def _typed(value, kind, where):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    return value


_WIDTH = re.compile(r"^\s*(\d*\.?\d*)\s*D\s*(?:/\s*(\d+))?\s*$")


def resolve_width(expr, input_dim):
    """``8`` -> 8, ``'2D'`` -> 2*D, ``'D/2'`` -> ceil(D/2)."""
    if isinstance(expr, int) and not isinstance(expr, bool):
        if expr < 1:
            raise ConfigError(f"hidden width must be >= 1, got {expr}")
        return expr
    m = _WIDTH.match(str(expr))
    if not m:
        raise ConfigError(f"bad hidden width {expr!r}; use an integer, 'kD' or 'D/k'")
    k = float(m.group(1)) if m.group(1) else 1.0
    div = int(m.group(2)) if m.group(2) else 1
    return max(1, math.ceil(k * input_dim / div))


def _dataset(entry, where):
    if isinstance(entry, str):
        if entry not in dat.BUNDLED:
            raise ConfigError(f"{where}: unknown bundled dataset {entry!r}; available {sorted(dat.BUNDLED)}")
        return DatasetRef(entry)
    _check_keys(entry, _DATASET, where)
    for k in ("path", "inputs", "classes"):
        if k not in entry:
            raise ConfigError(f"{where}: missing {k!r}")
    path = _typed(entry["path"], str, f"{where}.path")
    name = _typed(entry.get("name", path.rsplit("/", 1)[-1].rsplit(".", 1)[0]), str, f"{where}.name")
    return DatasetRef(name, path, _typed(entry["inputs"], int, f"{where}.inputs"),
                      _typed(entry["classes"], int, f"{where}.classes"))


def parse(doc):
    """Validate a config mapping (already loaded from YAML) into a :class:`RunConfig`."""
    if doc is None:
        raise ConfigError("empty config")
    _check_keys(doc, _TOP, "config")
    kw = {}
    if "datasets" not in doc:
        raise ConfigError("config: missing 'datasets'")
    ds = doc["datasets"]
    if isinstance(ds, (str, dict)):
        ds = [ds]
    if not ds:
        raise ConfigError("datasets: need at least one dataset")
    kw["datasets"] = tuple(_dataset(e, f"datasets[{i}]") for i, e in enumerate(ds))

    nw = doc.get("network")
    if nw is None:
        raise ConfigError("config: missing 'network'")
    _check_keys(nw, _NETWORK, "network")
    if "hidden" not in nw:
        raise ConfigError("network: missing 'hidden'")
    hidden = nw["hidden"]
    if not isinstance(hidden, list):
        raise ConfigError("network.hidden: expected a list of widths")
    for h in hidden:
        resolve_width(h, 4)
    kw["hidden"] = tuple(hidden)
    acts = nw.get("activations", "all")
    if acts == "all":
        acts = list(BASES)
    if isinstance(acts, str):
        acts = [acts]
    for a in acts:
        if a not in BASES:
            raise ConfigError(f"network.activations: unknown activation {a!r}; choose from {list(BASES)}")
    kw["activations"] = tuple(acts)
    for key in ("batchnorm", "residual", "output_activation"):
        if key in nw:
            kw[key] = _typed(nw[key], bool, f"network.{key}")
    if "bn_epsilon" in nw:
        kw["bn_epsilon"] = _typed(nw["bn_epsilon"], float, "network.bn_epsilon")
    if kw.get("residual"):
        if len(hidden) < 3 or len(hidden) % 2 == 0 or len(set(map(str, hidden))) != 1:
            raise ConfigError("network.residual: hidden must list an odd number (>= 3) of equal widths")

    for key, kind in (("name", str), ("description", str), ("split_seed", int), ("loss", str),
                      ("direction", str), ("step", str), ("metrics_every", int),
                      ("adagrad_eps", float), ("bn_momentum", float), ("full_scale", bool)):
        if key in doc:
            kw[key] = _typed(doc[key], kind, key)
    try:
        if "loss" in kw:
            kw["loss"] = loss_kind(kw["loss"]).value
        if "step" in kw:
            optim.parse_step_policy(kw["step"])
        if "direction" in kw:
            optim.DirectionState(kw["direction"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if kw.get("metrics_every", 1) < 1:
        raise ConfigError("metrics_every: must be >= 1")

    if "gols" in doc:
        fields = {f.name: f.type for f in dataclasses.fields(ls.GolsConfig)}
        _check_keys(doc["gols"], set(fields), "gols")
        types = {"int": int, "float": float, "bool": bool}
        vals = {k: _typed(v, types[fields[k]] if isinstance(fields[k], str) else fields[k], f"gols.{k}")
                for k, v in doc["gols"].items()}
        try:
            kw["gols"] = ls.GolsConfig(**vals)
        except ValueError as exc:
            raise ConfigError(f"gols: {exc}") from None

    if "batch_size" in doc:
        b = doc["batch_size"]
        if b == "M" or b is None:
            kw["batch_size"] = "M"
        else:
            b = _typed(b, int, "batch_size")
            if b < 1:
                raise ConfigError("batch_size: must be >= 1")
            kw["batch_size"] = b

    if "budget" in doc:
        bd = doc["budget"]
        _check_keys(bd, {"iterations", "function_evaluations"}, "budget")
        if len(bd) != 1:
            raise ConfigError("budget: give exactly one of iterations / function_evaluations")
        (kind, n), = bd.items()
        n = _typed(n, int, f"budget.{kind}")
        if n < 1:
            raise ConfigError(f"budget.{kind}: must be >= 1")
        kw["budget"] = optim.Budget(kind, n)

    if "seeds" in doc:
        s = doc["seeds"]
        if isinstance(s, list):
            kw["seeds"] = tuple(_typed(v, int, "seeds[]") for v in s)
        else:
            kw["seeds"] = tuple(range(_typed(s, int, "seeds")))
        if not kw["seeds"]:
            raise ConfigError("seeds: need at least one seed")

    if "probe" in doc:
        _check_keys(doc["probe"], _PROBE, "probe")
        types = {f.name: type(f.default) for f in dataclasses.fields(ProbeSettings)}
        kw["probe"] = ProbeSettings(**{k: _typed(v, types[k], f"probe.{k}") for k, v in doc["probe"].items()})
    return RunConfig(**kw)


def parse_seeds(text):
    """``'10'`` -> 0..9, ``'3,5,7'`` -> those seeds, ``'2-5'`` -> 2..5."""
    text = str(text).strip()
    try:
        if "," in text:
            return tuple(int(t) for t in text.split(",") if t.strip())
        if "-" in text[1:]:
            a, b = text.split("-", 1)
            return tuple(range(int(a), int(b) + 1))
        return tuple(range(int(text)))
    except ValueError:
        raise ConfigError(f"bad --seeds value {text!r}") from None


def load(path_or_preset):
    """Parse a YAML file, or a preset name such as ``inv2``."""
    name = str(path_or_preset)
    if name in PRESETS + FULL_SCALE:
        text = resources.files("golsnet").joinpath("configs", f"{name}.yaml").read_text()
        where = f"preset {name}"
    else:
        try:
            with open(name) as f:
                text = f.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {name}: {exc.strerror}") from None
        where = name
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{where}:{loc} YAML syntax error: {getattr(exc, 'problem', exc)}") from None
    try:
        return parse(doc)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None


# -- expansion into runs ---------------------------------------------------


@dataclass(frozen=True)
class Cell:
    dataset: str
    activation: str
    train_config: optim.TrainConfig = field(repr=False)
    seeds: tuple = ()


def build_spec(cfg, input_dim, output_dim, act):
    widths = [resolve_width(h, input_dim) for h in cfg.hidden]
    if cfg.residual:
        return net.residual_mlp(input_dim, widths[0], (len(widths) - 1) // 2, output_dim, act,
                                batchnorm=cfg.batchnorm, bn_epsilon=cfg.bn_epsilon,
                                output_activation=cfg.output_activation)
    return net.mlp(input_dim, widths, output_dim, act, batchnorm=cfg.batchnorm,
                   bn_epsilon=cfg.bn_epsilon, output_activation=cfg.output_activation)


def cells(cfg):
    """One :class:`Cell` per (dataset, activation)."""
    out = []
    for ref in cfg.datasets:
        split = dat.prepare(ref.load(), cfg.split_seed)
        m = len(split.train)
        bs = None if cfg.batch_size == "M" or cfg.batch_size >= m else cfg.batch_size
        for act in cfg.activations:
            spec = build_spec(cfg, split.train.n_inputs, split.train.n_classes, act)
            tc = optim.TrainConfig(
                spec=spec, data=split, loss=loss_kind(cfg.loss), direction=cfg.direction,
                step=cfg.step, gols=cfg.gols, batch_size=bs, budget=cfg.budget,
                metrics_every=cfg.metrics_every, adagrad_eps=cfg.adagrad_eps,
                bn_momentum=cfg.bn_momentum, tag={"dataset": ref.name, "activation": act})
            out.append(Cell(ref.name, act, tc, cfg.seeds))
    return out
