"""Command-line runner.

    golsnet run --config inv2 --out runs --seeds 10 --jobs 4
    golsnet probe contour --config my.yaml
    golsnet probe sweep --config my.yaml
    golsnet summarize runs/inv2

``--config`` takes a YAML path or a preset name (inv1 ... inv9). The output
root defaults to ``$GOLSNET_OUT`` or ``./runs``; artifacts go to
``<root>/<config name>/``. Exit status: 0 when every run completed, 1 when
any run aborted, 2 for usage or config errors.
"""

import argparse
import csv
import dataclasses
import json
import math
import os
import platform
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfgmod
from . import linesearch as ls
from . import network as net
from . import optim
from . import probe as pr
from .errors import ConfigError, DataError

ENV_OUT = "GOLSNET_OUT"
SUMMARY_COLUMNS = ("dataset", "activation", "runs", "completed", "train_loss", "val_loss", "test_loss",
                   "train_error", "test_error", "loss_reduction", "median_step", "final_density",
                   "min_density", "rank")


def _versions():
    import yaml
    return {"golsnet": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "pyyaml": yaml.__version__}


def _out_dir(args, cfg):
    root = args.out or os.environ.get(ENV_OUT) or "runs"
    return Path(root) / cfg.name


def _load_config(args):
    cfg = cfgmod.load(args.config)
    if args.seeds is not None:
        cfg = dataclasses.replace(cfg, seeds=cfgmod.parse_seeds(args.seeds))
    return cfg


def _write_aggregate(path, logs):
    agg = optim.aggregate(logs)
    if not agg:
        return
    cols = [c for c in optim.COLUMNS if c in agg and c != "iteration"]
    n = agg["iteration"]["mean"].size
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["iteration"] + [f"{c}_{s}" for c in cols for s in ("mean", "median")])
        for i in range(n):
            w.writerow([i + 1] + [pr._fmt(agg[c][s][i]) for c in cols for s in ("mean", "median")])


def _train_job(job):
    tc, seed = job
    return optim.train(dataclasses.replace(tc, seed=seed))


def _map(fn, jobs, n_jobs):
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def cmd_run(args):
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    cells = cfgmod.cells(cfg)
    jobs = [(c.train_config, s) for c in cells for s in cfg.seeds]
    logs = _map(_train_job, jobs, args.jobs)
    runs, ok = [], True
    for k, c in enumerate(cells):
        cell_logs = logs[k * len(cfg.seeds):(k + 1) * len(cfg.seeds)]
        d = out / c.dataset / c.activation
        d.mkdir(parents=True, exist_ok=True)
        for seed, lg in zip(cfg.seeds, cell_logs):
            path = d / f"seed{seed}.csv"
            lg.write(path)
            runs.append({"dataset": c.dataset, "activation": c.activation, "seed": seed,
                         "log": str(path.relative_to(out)), "completed": lg.completed, "error": lg.error,
                         "iterations": len(lg), "fes": lg.rows[-1][1] if lg.rows else 0})
            ok &= lg.completed
            if not lg.completed:
                print(f"run aborted: {c.dataset}/{c.activation}/seed{seed}: {lg.error}", file=sys.stderr)
        _write_aggregate(d / "aggregate.csv", cell_logs)
    manifest = {"command": "run", "config": cfg.echo(), "seeds": list(cfg.seeds), "versions": _versions(),
                "columns": list(optim.COLUMNS), "runs": runs, "status": "completed" if ok else "aborted"}
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
    print(f"{len(runs)} runs written to {out}")
    return 0 if ok else 1


def probe_start(tc, seed):
    """Initial parameters, direction-pair seed, full-batch context and sampler for a probe."""
    init_seed, sampler_rng, probe_rng = optim.seed_streams(seed)
    x0 = net.init_params(tc.spec, init_seed)
    dir_seed = int(probe_rng.integers(2**63))
    full = ls.EvalContext(tc.spec, tc.loss, tc.data.train, None, sampler_rng)
    return x0, dir_seed, full, sampler_rng


def _probe_job(job):
    kind, cfg, cell, seed = job
    x0, dir_seed, full, sampler_rng = probe_start(cell.train_config, seed)
    p = cfg.probe
    if kind == "contour":
        return (pr.contour(full, x0, dir_seed, p.lo, p.hi, p.step),)
    u1, u2 = pr.random_orthonormal_pair(x0.size, dir_seed)
    d = pr.diagonal_direction(u1, u2)
    alphas = np.linspace(p.sweep_lo, p.sweep_hi, p.sweep_points)
    dyn = ls.EvalContext(full.spec, full.loss, full.train, p.sweep_batch, sampler_rng)
    return pr.sweep(full, x0, d, alphas), pr.sweep(dyn, x0, d, alphas)


def cmd_probe(args):
    cfg = _load_config(args)
    out = _out_dir(args, cfg) / "probe"
    cells = cfgmod.cells(cfg)
    jobs = [(args.kind, cfg, c, s) for c in cells for s in cfg.seeds]
    results = _map(_probe_job, jobs, args.jobs)
    files = []
    for (_, _, c, seed), res in zip(jobs, results):
        d = out / c.dataset / c.activation
        d.mkdir(parents=True, exist_ok=True)
        if args.kind == "contour":
            path = d / f"contour_seed{seed}.csv"
            res[0].to_csv(path)
            files.append({"dataset": c.dataset, "activation": c.activation, "seed": seed,
                          "file": str(path.relative_to(out)), "range": res[0].value_range})
        else:
            for mode, r in zip(("full", "dynamic"), res):
                path = d / f"sweep_{mode}_seed{seed}.csv"
                r.to_csv(path)
                files.append({"dataset": c.dataset, "activation": c.activation, "seed": seed,
                              "mode": r.mode, "file": str(path.relative_to(out)),
                              "sign_changes": len(r.sign_changes())})
    with open(out / f"manifest_{args.kind}.json", "w") as f:
        json.dump({"command": f"probe {args.kind}", "config": cfg.echo(), "seeds": list(cfg.seeds),
                   "versions": _versions(), "files": files}, f, indent=2)
    print(f"{len(files)} {args.kind} files written to {out}")
    return 0


# -- summarize -------------------------------------------------------------


def _median(values):
    v = [x for x in values if not math.isnan(x)]
    return float(np.median(v)) if v else math.nan


def summarize(output_dir):
    """Per (dataset, activation) medians over completed runs; returns (rows, problems)."""
    root = Path(output_dir)
    problems = []
    found = {}
    manifest = root / "manifest.json"
    if manifest.exists():
        with open(manifest) as f:
            entries = json.load(f).get("runs", [])
        for e in entries:
            path = root / e["log"]
            if not path.exists():
                problems.append(f"missing log {e['log']}")
                continue
            found.setdefault((e["dataset"], e["activation"]), []).append(path)
    else:
        for path in sorted(root.glob("*/*/seed*.csv")):
            found.setdefault((path.parent.parent.name, path.parent.name), []).append(path)
    rows = []
    for (ds, act), paths in sorted(found.items()):
        logs = []
        for p in paths:
            try:
                logs.append(optim.read_log(p))
            except (OSError, ValueError) as exc:
                problems.append(f"unreadable log {p}: {exc}")
        done = [lg for lg in logs if lg.completed and len(lg)]
        row = {"dataset": ds, "activation": act, "runs": len(paths), "completed": len(done)}
        for m in optim.METRICS:
            row[m] = _median([lg.final(m) for lg in done])
        row["loss_reduction"] = _median([1 - lg.final("train_loss") / lg.initial["train_loss"]
                                         for lg in done if lg.initial.get("train_loss")])
        row["median_step"] = _median([float(np.median(lg.column("step"))) for lg in done])
        row["final_density"] = _median([lg.final("grad_density") for lg in done])
        row["min_density"] = _median([float(np.min(lg.column("grad_density"))) for lg in done])
        rows.append(row)
    for ds in {r["dataset"] for r in rows}:
        group = sorted((r for r in rows if r["dataset"] == ds),
                       key=lambda r: (math.isnan(r["train_loss"]), r["train_loss"]))
        for i, r in enumerate(group, 1):
            r["rank"] = i
    return rows, problems


def cmd_summarize(args):
    rows, problems = summarize(args.output_dir)
    for p in problems:
        print(f"warning: {p}", file=sys.stderr)
    if not rows:
        print(f"warning: no run artifacts under {args.output_dir}", file=sys.stderr)
    out = Path(args.output_dir)
    if out.is_dir():
        with open(out / "summary.csv", "w", newline="") as f:
            w = csv.DictWriter(f, SUMMARY_COLUMNS, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: pr._fmt(v) if isinstance(v, float) else v for k, v in r.items()})
    header = f"{'dataset':<10} {'activation':<10} {'runs':>4} {'train':>9} {'val':>9} {'test':>9} " \
             f"{'test_err':>8} {'reduct':>7} {'step':>9} {'density':>7} {'rank':>4}"
    print(header)
    for r in sorted(rows, key=lambda r: (r["dataset"], r["rank"])):
        print(f"{r['dataset']:<10} {r['activation']:<10} {r['completed']:>4} {r['train_loss']:>9.4g} "
              f"{r['val_loss']:>9.4g} {r['test_loss']:>9.4g} {r['test_error']:>8.3f} "
              f"{r['loss_reduction']:>7.2f} {r['median_step']:>9.3g} {r['final_density']:>7.2f} {r['rank']:>4}")
    return 0


# -- entry point -----------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="golsnet", description="Gradient-only line search training experiments.")
    p.add_argument("--version", action="version", version=f"golsnet {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="YAML config path or preset name (inv1 ... inv9)")
        sp.add_argument("--out", help=f"output root (default ${ENV_OUT} or ./runs)")
        sp.add_argument("--seeds", help="seed count '10', list '1,2,3' or range '0-9'; overrides the config")
        sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    r = sub.add_parser("run", help="train every (dataset, activation, seed) cell")
    common(r)
    r.set_defaults(func=cmd_run)
    pb = sub.add_parser("probe", help="loss-landscape probes")
    psub = pb.add_subparsers(dest="kind", required=True)
    for kind, text in (("contour", "2-D full-batch loss grids"), ("sweep", "full and dynamic F/F' sweeps")):
        sp = psub.add_parser(kind, help=text)
        common(sp)
        sp.set_defaults(func=cmd_probe)
    s = sub.add_parser("summarize", help="per-activation comparison table")
    s.add_argument("output_dir")
    s.set_defaults(func=cmd_summarize)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("golsnet: error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args)
    except (ConfigError, DataError) as exc:
        print(f"golsnet: config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
