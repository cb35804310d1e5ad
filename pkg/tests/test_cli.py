from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from prematch.cli import main

from .test_ingestion import write_fixture_match


def sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(*argv: str) -> int:
    return main(list(argv))


def test_unknown_flag_exits_1_with_usage(capsys) -> None:
    assert run("synth", "--wat", "7") == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_unknown_subcommand_exits_1(capsys) -> None:
    assert run("frobnicate") == 1


def test_synth_is_deterministic_and_writes_manifest(tmp_path) -> None:
    out1, out2 = tmp_path / "a" / "data.csv", tmp_path / "b" / "data.csv"
    out1.parent.mkdir()
    out2.parent.mkdir()
    assert run("synth", "--n-matches", "40", "--seed", "7", "--out", str(out1)) == 0
    assert run("synth", "--n-matches", "40", "--seed", "7", "--out", str(out2)) == 0
    assert sha(out1) == sha(out2)
    manifest = json.loads((out1.parent / "run-manifest.json").read_text())
    assert manifest["subcommand"] == "synth"
    assert manifest["seed"] == 7
    assert manifest["config"]["n_matches"] == 40
    assert str(out1) in manifest["outputs"]


def test_synth_different_seed_changes_output(tmp_path) -> None:
    out1, out2 = tmp_path / "d1.csv", tmp_path / "d2.csv"
    run("synth", "--n-matches", "40", "--seed", "1", "--out", str(out1))
    run("synth", "--n-matches", "40", "--seed", "2", "--out", str(out2))
    assert sha(out1) != sha(out2)


def test_synth_draws_and_records_seed_when_omitted(tmp_path) -> None:
    out = tmp_path / "data.csv"
    assert run("synth", "--n-matches", "10", "--out", str(out)) == 0
    manifest = json.loads((tmp_path / "run-manifest.json").read_text())
    assert isinstance(manifest["seed"], int)
    assert "--seed" in manifest["replay_argv"]


def test_synth_rejects_unknown_config_keys(tmp_path, capsys) -> None:
    cfg = tmp_path / "gen.json"
    cfg.write_text(json.dumps({"n_matches": 5, "bogus": 1}))
    assert run("synth", "--config", str(cfg), "--seed", "1", "--out", str(tmp_path / "x.csv")) == 2
    assert "unknown GenConfig keys" in capsys.readouterr().err


def test_featurize_produces_feature_csv_and_sidecar(tmp_path) -> None:
    data = tmp_path / "data.csv"
    run("synth", "--n-matches", "30", "--seed", "3", "--out", str(data))
    features = tmp_path / "features.csv"
    assert run("featurize", "--data", str(data), "--out", str(features)) == 0
    header = features.read_text().splitlines()[0]
    assert header.startswith("f01,") and header.endswith(",outcome")
    assert len(header.split(",")) == 45
    sidecar = json.loads((tmp_path / "features.csv.columns.json").read_text())
    assert len(sidecar) == 44


def test_featurize_missing_file_exits_2(tmp_path, capsys) -> None:
    assert run("featurize", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "f.csv")) == 2


def test_screen_writes_json_and_markdown(tmp_path) -> None:
    data = tmp_path / "data.csv"
    run("synth", "--n-matches", "60", "--seed", "4", "--out", str(data))
    assert (
        run(
            "screen", "--data", str(data), "--alpha", "0.05",
            "--out-json", str(tmp_path / "screen.json"),
            "--out-md", str(tmp_path / "screen.md"),
        )
        == 0
    )
    payload = json.loads((tmp_path / "screen.json").read_text())
    assert set(payload["features"]) == {"win_rate", "mastery_points", "season_games", "recent_games"}
    md = (tmp_path / "screen.md").read_text()
    assert md.startswith("| Feature |")


def test_train_and_predict_round_trip(tmp_path) -> None:
    data = tmp_path / "data.csv"
    run("synth", "--n-matches", "60", "--seed", "5", "--out", str(data))
    features = tmp_path / "features.csv"
    run("featurize", "--data", str(data), "--out", str(features))
    model = tmp_path / "model.bin"
    assert (
        run(
            "train", "--model", "gboost", "--features", str(features),
            "--seed", "1", "--out", str(model),
        )
        == 0
    )
    probs = tmp_path / "probs.csv"
    assert run("predict", "--model-file", str(model), "--features", str(features), "--out", str(probs)) == 0
    lines = probs.read_text().splitlines()
    assert lines[0] == "proba"
    values = [float(v) for v in lines[1:]]
    assert len(values) == 60
    assert all(0.0 <= v <= 1.0 for v in values)


def test_train_config_overrides_spec_fields(tmp_path) -> None:
    data = tmp_path / "data.csv"
    run("synth", "--n-matches", "40", "--seed", "6", "--out", str(data))
    features = tmp_path / "features.csv"
    run("featurize", "--data", str(data), "--out", str(features))
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"n_estimators": 3}))
    model = tmp_path / "model.bin"
    assert (
        run(
            "train", "--model", "rf", "--features", str(features),
            "--config", str(cfg), "--seed", "1", "--out", str(model),
        )
        == 0
    )
    manifest = json.loads((tmp_path / "run-manifest.json").read_text())
    assert manifest["config"]["n_estimators"] == 3


def test_train_rejects_unknown_spec_keys(tmp_path, capsys) -> None:
    data = tmp_path / "data.csv"
    run("synth", "--n-matches", "40", "--seed", "6", "--out", str(data))
    features = tmp_path / "features.csv"
    run("featurize", "--data", str(data), "--out", str(features))
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"n_trees": 3}))
    assert (
        run(
            "train", "--model", "rf", "--features", str(features),
            "--config", str(cfg), "--seed", "1", "--out", str(tmp_path / "m.bin"),
        )
        == 2
    )


def test_train_dnn_emits_training_curve(tmp_path) -> None:
    data = tmp_path / "data.csv"
    run("synth", "--n-matches", "50", "--seed", "8", "--out", str(data))
    features = tmp_path / "features.csv"
    run("featurize", "--data", str(data), "--out", str(features))
    cfg = tmp_path / "dnn.json"
    cfg.write_text(json.dumps({"max_epochs": 3, "patience": 5}))
    model = tmp_path / "dnn.bin"
    assert (
        run(
            "train", "--model", "dnn", "--features", str(features),
            "--config", str(cfg), "--seed", "1", "--out", str(model),
        )
        == 0
    )
    curves = tmp_path / "dnn.bin.curves.csv"
    assert curves.exists()
    assert curves.read_text().splitlines()[0] == "epoch,train_loss,train_acc,val_loss,val_acc"


def test_evaluate_writes_reports_and_curves(tmp_path) -> None:
    data = tmp_path / "data.csv"
    run("synth", "--n-matches", "120", "--seed", "9", "--out", str(data))
    features = tmp_path / "features.csv"
    run("featurize", "--data", str(data), "--out", str(features))
    cfg = tmp_path / "dnn.json"
    cfg.write_text(json.dumps({"max_epochs": 2, "patience": 4}))
    out_dir = tmp_path / "eval"
    assert (
        run(
            "evaluate", "--model", "dnn", "--features", str(features),
            "--config", str(cfg), "--k", "10", "--seed", "1", "--out-dir", str(out_dir),
        )
        == 0
    )
    assert (out_dir / "report.md").exists()
    assert (out_dir / "curves.csv").exists()
    payload = json.loads((out_dir / "report.json").read_text())
    report = payload["reports"][0]
    assert report["model"] == "dnn"
    assert len(report["fold_accuracies"]) == 10
    assert report["n_ref"] == 120


def test_report_merges_multiple_evaluations(tmp_path) -> None:
    data = tmp_path / "data.csv"
    run("synth", "--n-matches", "80", "--seed", "10", "--out", str(data))
    features = tmp_path / "features.csv"
    run("featurize", "--data", str(data), "--out", str(features))
    dirs = []
    for model in ("gboost", "knn"):
        out_dir = tmp_path / f"eval-{model}"
        run(
            "evaluate", "--model", model, "--features", str(features),
            "--k", "5", "--seed", "2", "--out-dir", str(out_dir),
        )
        dirs.append(out_dir / "report.json")
    merged = tmp_path / "table.md"
    assert run("report", "--inputs", *map(str, dirs), "--out", str(merged)) == 0
    lines = merged.read_text().splitlines()
    assert len(lines) == 4  # header + separator + two rows
    assert "GBOOST" in lines[2]
    assert "KNN" in lines[3]


def test_ingest_from_fixtures(tmp_path) -> None:
    fixtures = tmp_path / "fixtures"
    fixtures.mkdir()
    rng = np.random.default_rng(0)
    for mid in ("a", "b", "c"):
        write_fixture_match(fixtures, mid, rng)
    out = tmp_path / "ingested.csv"
    assert run("ingest", "--fixtures", str(fixtures), "--n", "3", "--seed", "1", "--out", str(out)) == 0
    assert out.read_text().count("\n") == 4  # header + 3 matches


def test_ingest_exhaustion_exits_2_with_partial(tmp_path, capsys) -> None:
    fixtures = tmp_path / "fixtures"
    fixtures.mkdir()
    rng = np.random.default_rng(1)
    write_fixture_match(fixtures, "only", rng)
    out = tmp_path / "partial.csv"
    assert run("ingest", "--fixtures", str(fixtures), "--n", "5", "--seed", "1", "--out", str(out)) == 2
    assert out.exists()
    assert out.read_text().count("\n") == 2  # header + 1 match
    assert "exhausted" in capsys.readouterr().err


def test_manifest_replay_reproduces_outputs_byte_for_byte(tmp_path) -> None:
    out = tmp_path / "data.csv"
    run("synth", "--n-matches", "30", "--seed", "11", "--out", str(out))
    manifest = json.loads((tmp_path / "run-manifest.json").read_text())
    digest_before = sha(out)
    out.unlink()
    assert run(*manifest["replay_argv"]) == 0
    assert sha(out) == digest_before
