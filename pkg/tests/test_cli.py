import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from fixtures import TWO_CENTRES, blobs
from peerinfo import cli
from peerinfo.formats import EmbeddingMatrix, read_assignments, read_effects, read_policy_report, read_workers, write_embeddings
from peerinfo.verify import ClaimResult, TheoryReport

SMALL = """
seed: 5
population: {n: 150, effort_noise: 2.0}
clustering: {k_max: 4, restarts: 3}
verify: {n_per_model: 15}
"""


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(SMALL)
    return str(path)


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_full_pipeline(tmp_path, config):
    out = tmp_path / "out"
    assert run("simulate", "--config", config, "--out", out) == 0
    workers = read_workers(out / "workers.csv")
    assert len(workers) == 150
    assert run("classify", "--config", config, "--out", out) == 0
    types = read_assignments(out / "classification.csv", "type", 1, 4)
    assert types == {w.worker_id: int(w.type) for w in workers}

    emb = EmbeddingMatrix(tuple(w.worker_id for w in workers), blobs(TWO_CENTRES, per_blob=75, dim=4))
    write_embeddings(out / "embeddings.txt", emb)
    assert run("cluster", "--config", config, "--out", out) == 0
    report = json.loads((out / "cluster_report.json").read_text())
    assert report["k"] == 2 and report["n"] == 150 and report["d"] == 4
    labels = read_assignments(out / "clusters.csv", "cluster")
    assert sorted(set(labels.values())) == [0, 1]

    assert run("welfare", "--config", config, "--out", out, "--format", "jsonl") == 0
    rows = read_policy_report(out / "policy_report.jsonl", "jsonl")
    assert [r["policy"] for r in rows] == ["uniform_exante", "uniform_expost", "targeted", "targeted_best"]
    assert all(r["n"] == 150 for r in rows)

    assert run("report", "--config", config, "--out", out, "--clusters", out / "clusters.csv") == 0
    for g in ("all", "type", "cluster"):
        table = read_effects(out / f"effects_{g}.csv")
        total = sum(sum(v.values()) for v in table.sizes.values())
        assert total == 150


def test_elicit_writes_schedules(tmp_path, config):
    assert run("elicit", "--config", config, "--out", tmp_path) == 0
    assert (tmp_path / "schedules.csv").read_bytes().count(b"\r\n") == 1 + 150 * 18


def test_seed_flag_overrides_config(tmp_path, config):
    run("simulate", "--config", config, "--out", tmp_path / "a")
    run("simulate", "--config", config, "--out", tmp_path / "b", "--seed", 6)
    run("simulate", "--config", config, "--out", tmp_path / "c", "--seed", 5)
    a, b, c = ((tmp_path / d / "workers.csv").read_bytes() for d in "abc")
    assert a != b and a == c


def test_verify_success(tmp_path, config):
    assert run("verify", "--config", config, "--out", tmp_path) == 0
    body = json.loads((tmp_path / "theory_report.json").read_text())
    assert body["passed"] is True


def test_verify_failure_exit_code(tmp_path, config, monkeypatch):
    failing = TheoryReport({"x": ClaimResult("x", 1e-7, 1, 0, 1.0)})
    monkeypatch.setattr(cli, "verify_predictions", lambda *a, **k: failing)
    assert run("verify", "--config", config, "--out", tmp_path) == 2


def test_invalid_inputs_exit_one(tmp_path, config, capsys):
    assert run("classify", "--out", tmp_path) == 1
    assert "not found" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("worker_id,scenario,bin,prefer_info,wtp_cents\r\nw1,exante,1,1,51\r\n", newline="")
    assert run("classify", "--out", tmp_path, "--input", bad) == 1
    assert f"{bad}:2" in capsys.readouterr().err
    cfg = tmp_path / "c.yaml"
    cfg.write_text("population: {seed: 1}\n")
    assert run("simulate", "--config", cfg, "--out", tmp_path) == 1
    assert run("simulate", "--seed", -3, "--out", tmp_path) == 1


def test_unknown_cluster_ids_exit_one(tmp_path, config):
    run("simulate", "--config", config, "--out", tmp_path)
    (tmp_path / "c.csv").write_text("worker_id,cluster\r\nnobody,0\r\n", newline="")
    assert run("report", "--out", tmp_path, "--clusters", tmp_path / "c.csv") == 1


def test_output_directory_from_environment(tmp_path, config, monkeypatch):
    monkeypatch.setenv("PEERINFO_OUT", str(tmp_path / "env"))
    assert run("elicit", "--config", config) == 0
    assert (tmp_path / "env" / "schedules.csv").is_file()


def test_argparse_rejects_bad_usage(capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["bogus"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        cli.main(["simulate", "--format", "xml"])
    assert err.value.code == 1


def test_console_script(tmp_path, config):
    exe = shutil.which("peerinfo")
    cmd = [exe] if exe else [sys.executable, "-m", "peerinfo.cli"]
    done = subprocess.run([*cmd, "elicit", "--config", config, "--out", str(tmp_path)], capture_output=True, text=True)
    assert done.returncode == 0, done.stderr
    assert (tmp_path / "schedules.csv").is_file()
