"""Command-line entry point.

Every run writes a ``run-manifest.json`` next to its primary output capturing
the resolved configuration, seeds, and input/output digests, so any run can
be replayed bit-for-bit from its manifest. Exit codes: 0 success, 1 usage
error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from prematch import __version__, dataset, features
from prematch.evaluation import EvaluationReport, cross_validate, emit_report, summarize
from prematch.ingestion import (
    ApiConfig,
    ApiClient,
    FixtureTransport,
    HttpTransport,
    SourceExhausted,
    ingest_random_matches,
)
from prematch.models.base import TrainedArtifact, fit, load_artifact, make_spec, save_artifact, spec_to_dict
from prematch.ratelimit import VirtualClock
from prematch.synthgen import GenConfig, generate_dataset

API_KEY_ENV = "PREMATCH_API_KEY"
MODEL_CHOICES = ("svc", "knn", "rf", "gboost", "dnn")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we map usage problems to 1
        raise UsageError(f"{message}\n{self.format_usage()}")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return "sha256:" + digest.hexdigest()


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    return int.from_bytes(os.urandom(4), "big")


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise DataError(f"{path}: expected a JSON object")
    return obj


def _write_manifest(
    subcommand: str,
    out_dir: Path,
    *,
    seed: int | None,
    config: dict,
    inputs: dict[str, Path],
    outputs: dict[str, Path],
    replay_argv: list[str],
) -> Path:
    manifest = {
        "format": "run-manifest-v1",
        "package_version": __version__,
        "subcommand": subcommand,
        "seed": seed,
        "config": config,
        "inputs": {name: _sha256(p) for name, p in sorted(inputs.items())},
        "outputs": {name: _sha256(p) for name, p in sorted(outputs.items())},
        "replay_argv": replay_argv,
    }
    path = out_dir / "run-manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def build_parser() -> _Parser:
    parser = _Parser(prog="prematch", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", parents=[], help="generate a synthetic dataset CSV")
    p.add_argument("--config", help="GenConfig JSON file")
    p.add_argument("--n-matches", type=int, help="override the configured match count")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output dataset CSV")

    p = sub.add_parser("ingest", help="collect matches from fixtures or a live API")
    p.add_argument("--fixtures", help="directory of JSON fixture payloads")
    p.add_argument("--config", help="ApiConfig JSON file")
    p.add_argument("--n", type=int, required=True, help="unique matches to collect")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output dataset CSV")

    p = sub.add_parser("featurize", help="turn a dataset CSV into the 44-column feature CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("screen", help="correlation-screen the raw per-player features")
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out-json", required=True)
    p.add_argument("--out-md", required=True)

    p = sub.add_parser("train", help="fit one model family on a feature CSV")
    p.add_argument("--model", required=True, choices=MODEL_CHOICES)
    p.add_argument("--features", required=True)
    p.add_argument("--config", help="JSON file of spec field overrides")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output model artifact file")

    p = sub.add_parser("predict", help="score a feature CSV with a trained model")
    p.add_argument("--model-file", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="output probabilities CSV")

    p = sub.add_parser("evaluate", help="stratified k-fold cross-validation")
    p.add_argument("--model", required=True, choices=MODEL_CHOICES)
    p.add_argument("--features", required=True)
    p.add_argument("--config", help="JSON file of spec field overrides")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--ci", choices=("binomial", "fold"), default="binomial")
    p.add_argument("--n-ref", type=int, help="trial count for the binomial CI (default: dataset size)")
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("report", help="merge evaluation JSON reports into one markdown table")
    p.add_argument("--inputs", nargs="+", required=True, help="report.json files, in row order")
    p.add_argument("--out", required=True)

    return parser


def cmd_synth(args) -> None:
    overrides = _load_json(args.config) if args.config else {}
    if args.n_matches is not None:
        overrides["n_matches"] = args.n_matches
    try:
        cfg = GenConfig.from_dict(overrides)
    except (TypeError, ValueError) as exc:
        raise DataError(str(exc)) from None
    seed = _resolve_seed(args.seed)
    out = Path(args.out)
    ds = generate_dataset(cfg, seed)
    dataset.write_csv(ds, out)
    replay = ["synth", "--seed", str(seed), "--out", str(out)]
    if args.config:
        replay[1:1] = ["--config", args.config]
    if args.n_matches is not None:
        replay[1:1] = ["--n-matches", str(args.n_matches)]
    _write_manifest(
        "synth",
        out.parent,
        seed=seed,
        config=cfg.to_dict(),
        inputs={args.config: Path(args.config)} if args.config else {},
        outputs={str(out): out},
        replay_argv=replay,
    )
    print(f"wrote {len(ds.matches)} matches to {out}")


def cmd_ingest(args) -> None:
    overrides = _load_json(args.config) if args.config else {}
    api_key = os.environ.get(API_KEY_ENV, "")
    try:
        cfg = ApiConfig.from_dict({**overrides, "api_key": api_key})
    except (TypeError, ValueError) as exc:
        raise DataError(str(exc)) from None
    seed = _resolve_seed(args.seed)
    out = Path(args.out)
    if args.fixtures:
        transport = FixtureTransport(args.fixtures)
        client = ApiClient(cfg, transport, clock=VirtualClock())
    else:
        transport = HttpTransport(cfg.base_url, cfg.api_key)
        client = ApiClient(cfg, transport)
    try:
        ds = ingest_random_matches(client, args.n, seed)
    except SourceExhausted as exc:
        dataset.write_csv(exc.dataset, out)
        print(str(exc), file=sys.stderr)
        raise DataError(f"partial dataset of {len(exc.dataset.matches)} matches written to {out}") from None
    dataset.write_csv(ds, out)
    replay = ["ingest", "--n", str(args.n), "--seed", str(seed), "--out", str(out)]
    if args.fixtures:
        replay += ["--fixtures", args.fixtures]
    if args.config:
        replay += ["--config", args.config]
    config = {k: v for k, v in overrides.items()}
    config.update({"n": args.n, "fixtures": args.fixtures})
    _write_manifest(
        "ingest",
        out.parent,
        seed=seed,
        config=config,
        inputs={args.config: Path(args.config)} if args.config else {},
        outputs={str(out): out},
        replay_argv=replay,
    )
    print(f"wrote {len(ds.matches)} matches to {out} ({client.stats.requests} requests)")


def _load_dataset(path: str) -> dataset.Dataset:
    try:
        return dataset.read_csv(path)
    except FileNotFoundError:
        raise DataError(f"dataset file not found: {path}") from None
    except ValueError as exc:
        raise DataError(str(exc)) from None


def cmd_featurize(args) -> None:
    ds = dataset.dedup(_load_dataset(args.data))
    try:
        X, y = features.build_feature_matrix(ds)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out = Path(args.out)
    features.write_feature_csv(X, y, out)
    sidecar = out.with_suffix(out.suffix + ".columns.json")
    sidecar.write_text(json.dumps(features.feature_descriptions(), indent=2) + "\n", encoding="utf-8")
    _write_manifest(
        "featurize",
        out.parent,
        seed=None,
        config={"data": args.data, "n_matches": len(ds.matches)},
        inputs={args.data: Path(args.data)},
        outputs={str(out): out, str(sidecar): sidecar},
        replay_argv=["featurize", "--data", args.data, "--out", str(out)],
    )
    print(f"wrote {X.shape[0]} rows x {X.shape[1]} features to {out}")


def cmd_screen(args) -> None:
    ds = dataset.dedup(_load_dataset(args.data))
    try:
        report = features.screen_features(ds, alpha=args.alpha)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out_json = Path(args.out_json)
    out_md = Path(args.out_md)
    payload = {
        "alpha": report.alpha,
        "n_points": report.n_points,
        "features": {
            name: {"r": s.r, "p_value": s.p_value, "selected": s.selected}
            for name, s in report.features.items()
        },
    }
    out_json.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    out_md.write_text(features.screening_markdown(report), encoding="utf-8")
    _write_manifest(
        "screen",
        out_json.parent,
        seed=None,
        config={"data": args.data, "alpha": args.alpha},
        inputs={args.data: Path(args.data)},
        outputs={str(out_json): out_json, str(out_md): out_md},
        replay_argv=["screen", "--data", args.data, "--alpha", repr(args.alpha),
                     "--out-json", str(out_json), "--out-md", str(out_md)],
    )
    selected = [name for name, s in report.features.items() if s.selected]
    print(f"selected at alpha={args.alpha}: {', '.join(selected) if selected else 'none'}")


def _load_features(path: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        return features.read_feature_csv(path)
    except FileNotFoundError:
        raise DataError(f"feature file not found: {path}") from None
    except ValueError as exc:
        raise DataError(str(exc)) from None


def _build_spec(model: str, config_path: str | None):
    overrides = _load_json(config_path) if config_path else {}
    try:
        return make_spec(model, overrides)
    except (TypeError, ValueError) as exc:
        raise DataError(str(exc)) from None


def cmd_train(args) -> None:
    X, y = _load_features(args.features)
    spec = _build_spec(args.model, args.config)
    seed = _resolve_seed(args.seed)
    scaler = None
    X_fit = X
    if spec.standardize:
        scaler = features.Standardizer().fit(X)
        X_fit = scaler.transform(X)
    try:
        model = fit(spec, X_fit, y, seed)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out = Path(args.out)
    save_artifact(TrainedArtifact(spec=spec, model=model, scaler=scaler, seed=seed), out)
    outputs = {str(out): out}
    if args.model == "dnn":
        curves = out.parent / (out.name + ".curves.csv")
        model.curve_.write_csv(curves)
        outputs[str(curves)] = curves
    replay = ["train", "--model", args.model, "--features", args.features,
              "--seed", str(seed), "--out", str(out)]
    if args.config:
        replay += ["--config", args.config]
    _write_manifest(
        "train",
        out.parent,
        seed=seed,
        config=spec_to_dict(spec),
        inputs={args.features: Path(args.features), **({args.config: Path(args.config)} if args.config else {})},
        outputs=outputs,
        replay_argv=replay,
    )
    print(f"trained {args.model} on {X.shape[0]} rows; artifact at {out}")


def cmd_predict(args) -> None:
    try:
        artifact = load_artifact(args.model_file)
    except FileNotFoundError:
        raise DataError(f"model file not found: {args.model_file}") from None
    except ValueError as exc:
        raise DataError(str(exc)) from None
    X, _ = _load_features(args.features)
    proba = np.asarray(artifact.predict_proba(X), dtype=float)
    out = Path(args.out)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("proba\n")
        for value in proba:
            fh.write(f"{float(value)!r}\n")
    _write_manifest(
        "predict",
        out.parent,
        seed=None,
        config={"model_file": args.model_file},
        inputs={args.model_file: Path(args.model_file), args.features: Path(args.features)},
        outputs={str(out): out},
        replay_argv=["predict", "--model-file", args.model_file,
                     "--features", args.features, "--out", str(out)],
    )
    print(f"scored {proba.size} rows to {out}")


def cmd_evaluate(args) -> None:
    X, y = _load_features(args.features)
    spec = _build_spec(args.model, args.config)
    seed = _resolve_seed(args.seed)
    n_ref = args.n_ref if args.n_ref is not None else X.shape[0]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        accs, models = cross_validate(spec, X, y, k=args.k, seed=seed, collect_models=True)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    report = summarize(accs, n_ref=n_ref, model=args.model, ci_method=args.ci)
    report_md = out_dir / "report.md"
    report_json = out_dir / "report.json"
    report_md.write_text(emit_report([report], "markdown"), encoding="utf-8")
    report_json.write_text(emit_report([report], "json"), encoding="utf-8")
    outputs = {str(report_md): report_md, str(report_json): report_json}
    if args.model == "dnn":
        curves = out_dir / "curves.csv"
        models[0].curve_.write_csv(curves)  # first fold's training curve
        outputs[str(curves)] = curves
    replay = ["evaluate", "--model", args.model, "--features", args.features,
              "--k", str(args.k), "--seed", str(seed), "--ci", args.ci,
              "--n-ref", str(n_ref), "--out-dir", str(out_dir)]
    if args.config:
        replay += ["--config", args.config]
    _write_manifest(
        "evaluate",
        out_dir,
        seed=seed,
        config={**spec_to_dict(spec), "k": args.k, "ci": args.ci, "n_ref": n_ref},
        inputs={args.features: Path(args.features), **({args.config: Path(args.config)} if args.config else {})},
        outputs=outputs,
        replay_argv=replay,
    )
    print(emit_report([report], "markdown"), end="")


def cmd_report(args) -> None:
    reports = []
    for path in args.inputs:
        obj = _load_json(path)
        if "reports" not in obj or not isinstance(obj["reports"], list):
            raise DataError(f"{path}: expected an object with a 'reports' list")
        reports.extend(EvaluationReport.from_dict(r) for r in obj["reports"])
    if not reports:
        raise DataError("no reports found in inputs")
    out = Path(args.out)
    out.write_text(emit_report(reports, "markdown"), encoding="utf-8")
    _write_manifest(
        "report",
        out.parent,
        seed=None,
        config={"inputs": list(args.inputs)},
        inputs={p: Path(p) for p in args.inputs},
        outputs={str(out): out},
        replay_argv=["report", "--inputs", *args.inputs, "--out", str(out)],
    )
    print(f"wrote {len(reports)}-row table to {out}")


HANDLERS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "featurize": cmd_featurize,
    "screen": cmd_screen,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    try:
        HANDLERS[args.subcommand](args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
