import csv
import json

import pytest

from golsnet import cli, config

TINY = """\
name: tiny
datasets: [iris]
network: {hidden: [2D], activations: [tanh, relu]}
budget: {iterations: 20}
seeds: 2
probe: {lo: -1, hi: 1, step: 0.5, sweep_points: 11}
"""


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.yaml"
    p.write_text(TINY)
    return p


def test_run_artifacts(tiny, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(tiny), "--out", str(out)]) == 0
    root = out / "tiny"
    man = json.loads((root / "manifest.json").read_text())
    assert man["status"] == "completed" and len(man["runs"]) == 4
    assert config.parse(man["config"]) == config.load(tiny)
    for r in man["runs"]:
        with open(root / r["log"]) as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == cli.optim.COLUMNS and len(rows) == 21
    assert (root / "iris" / "relu" / "aggregate.csv").exists()


def test_env_out_and_seeds(tiny, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUT, str(tmp_path / "env"))
    assert cli.main(["run", "--config", str(tiny), "--seeds", "5,6"]) == 0
    assert (tmp_path / "env" / "tiny" / "iris" / "tanh" / "seed6.csv").exists()


def test_run_deterministic(tiny, tmp_path):
    for k in ("a", "b"):
        cli.main(["run", "--config", str(tiny), "--out", str(tmp_path / k), "--jobs", "2" if k == "b" else "1"])
    for name in ("seed0.csv", "seed1.csv", "aggregate.csv"):
        assert (tmp_path / "a/tiny/iris/relu" / name).read_bytes() == \
            (tmp_path / "b/tiny/iris/relu" / name).read_bytes()


def test_abort_exit_status(tmp_path):
    p = tmp_path / "boom.yaml"
    p.write_text("name: boom\ndatasets: [iris]\nnetwork: {hidden: [8], activations: [elu]}\n"
                 "step: 'fixed:1e6'\nbudget: {iterations: 20}\nseeds: 1\n")
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path)]) == 1
    man = json.loads((tmp_path / "boom" / "manifest.json").read_text())
    assert man["status"] == "aborted" and man["runs"][0]["error"]


def test_config_error_exit(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("datasets: [iris]\nnetwork: {hidden: [4]}\nbatchsize: 3\n")
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "batchsize" in capsys.readouterr().err


def test_invalid_subcommand():
    with pytest.raises(SystemExit) as e:
        cli.main(["probe", "heatmap", "--config", "inv1"])
    assert e.value.code == 2


def test_probe_outputs(tiny, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["probe", "contour", "--config", str(tiny), "--out", str(out)]) == 0
    assert cli.main(["probe", "sweep", "--config", str(tiny), "--out", str(out)]) == 0
    d = out / "tiny" / "probe" / "iris" / "tanh"
    rows = list(csv.reader(open(d / "contour_seed0.csv")))
    assert len(rows) == 6 and len(rows[0]) == 6
    for mode in ("full", "dynamic"):
        rows = list(csv.reader(open(d / f"sweep_{mode}_seed1.csv")))
        assert rows[0] == ["alpha", "f", "df"] and len(rows) == 12


def test_summarize(tiny, tmp_path, capsys):
    out = tmp_path / "out"
    cli.main(["run", "--config", str(tiny), "--out", str(out), "--seeds", "1"])
    rows, problems = cli.summarize(out / "tiny")
    assert not problems and {r["activation"] for r in rows} == {"tanh", "relu"}
    log = cli.optim.read_log(out / "tiny" / "iris" / "tanh" / "seed0.csv")
    tanh = next(r for r in rows if r["activation"] == "tanh")
    assert tanh["train_loss"] == log.final("train_loss")
    assert sorted(r["rank"] for r in rows) == [1, 2]
    capsys.readouterr()
    assert cli.main(["summarize", str(out / "tiny")]) == 0
    assert "relu" in capsys.readouterr().out
    assert (out / "tiny" / "summary.csv").exists()


def test_summarize_empty(tmp_path, capsys):
    assert cli.main(["summarize", str(tmp_path)]) == 0
    assert "warning" in capsys.readouterr().err


def test_summarize_missing_log(tiny, tmp_path):
    out = tmp_path / "out"
    cli.main(["run", "--config", str(tiny), "--out", str(out)])
    (out / "tiny" / "iris" / "relu" / "seed1.csv").unlink()
    rows, problems = cli.summarize(out / "tiny")
    assert problems and len(rows) == 2
