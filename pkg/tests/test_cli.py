import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from stable_alloc.cli import main

BASE = ["--sides", "4,4", "--resolution", "16,16", "--seed", "3"]


def test_allocate_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["allocate", *BASE, "--lambda", "1", "--alpha", "0.8", "--out", str(out), "--render", "ppm:4"])
    assert code == 0
    for name in ("centers.csv", "allocation.csv", "allocation.json", "config.json", "stats.json", "verify.json", "allocation.ppm"):
        assert (out / name).exists(), name
    printed = json.loads(capsys.readouterr().out)
    assert printed["stats"]["stable"] is True
    assert json.loads((out / "verify.json").read_text())["n_unstable_pairs"] == 0


def test_verify_stats_render_on_saved_run(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["allocate", *BASE, "--count", "16", "--alpha", "critical", "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["verify", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["stable"]
    assert main(["stats", str(out / "allocation.csv"), "--territories", "--probe", "0"]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["unclaimed_fraction"] == 0 and stats["mean_residual_appetite"] == 0
    assert len(stats["territories"]) == 16
    assert main(["render", str(out), "--image", str(tmp_path / "a.ppm"), "--style", "annuli"]) == 0
    assert (tmp_path / "a.ppm").read_bytes().startswith(b"P6\n64 64\n255\n")


def test_verify_detects_tampering(tmp_path, capsys):
    out = tmp_path / "run"
    main(["allocate", *BASE, "--lambda", "1", "--alpha", "0.5", "--out", str(out)])
    p = out / "allocation.csv"
    rows = p.read_text().splitlines()
    cells = [r.split(",") for r in rows[1:]]
    claimed = next(i for i, (_, c) in enumerate(cells) if c != "-1")
    cells[claimed][1] = "-1"
    p.write_text("\n".join([rows[0]] + [",".join(r) for r in cells]) + "\n")
    assert main(["verify", str(out)]) == 2


def test_generate(tmp_path, capsys):
    assert main(["generate", *BASE, "--lattice", "1", "--out", str(tmp_path / "c.csv")]) == 0
    assert len((tmp_path / "c.csv").read_text().splitlines()) == 17


def test_exit_codes(tmp_path, capsys):
    assert main(["allocate", *BASE, "--alpha", "-2", "--out", str(tmp_path / "x")]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("x0,x1\n9,9\n")
    assert main(["allocate", *BASE, "--centers", str(bad), "--out", str(tmp_path / "y")]) == 1
    assert main(["verify", str(tmp_path / "missing.csv")]) == 3
    assert main(["allocate", *BASE, "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "z")]) == 3


def test_config_file_with_overrides(tmp_path, capsys):
    cfg = {"sides": [4, 4], "resolution": [16, 16], "alpha": 2.0, "seed": 1}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    out = tmp_path / "run"
    assert main(["allocate", "--config", str(tmp_path / "cfg.json"), "--alpha", "0.25", "--out", str(out)]) == 0
    saved = json.loads((out / "config.json").read_text())
    assert saved["alpha"] == 0.25 and saved["seed"] == 1


def test_sweep(tmp_path, capsys):
    target = tmp_path / "s.csv"
    code = main(["sweep", *BASE, "--lambda", "1", "--grid", "alpha=0.5,2", "--seeds", "0:3", "--threads", "1", "--csv", str(target)])
    assert code == 0
    rows = list(csv.DictReader(target.open()))
    assert len(rows) == 2 * 3 + 2
    summary = [r for r in rows if r["kind"] == "summary"]
    assert len(summary) == 2
    sub = next(r for r in summary if float(r["alpha"]) == 0.5)
    assert abs(float(sub["unclaimed_fraction"]) - 0.5) < 0.2


def test_sweep_threads_agree(tmp_path, capsys):
    args = ["sweep", *BASE, "--lambda", "1", "--grid", "alpha=0.5,1", "--seeds", "0,1"]
    main(args + ["--threads", "1", "--csv", str(tmp_path / "a.csv")])
    main(args + ["--threads", "2", "--csv", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_text() == (tmp_path / "b.csv").read_text()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "stable_alloc.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "allocate" in proc.stdout and "oracle" not in proc.stdout.split("positional")[0]


def test_oracle_subcommand(tmp_path, capsys):
    (tmp_path / "i.json").write_text(json.dumps({"distances": [[1, 2], [2, 1]], "quota": 1}))
    assert main(["oracle", str(tmp_path / "i.json")]) == 0
    assert json.loads(capsys.readouterr().out)["stable_assignments"] == [[0, 1]]
