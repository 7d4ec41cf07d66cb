"""Command-line pipeline orchestration.

Each stage reads the previous stage's artifacts from the output
directory and writes its own under a stage-name prefix, so any stage
can be inspected or replayed in isolation. Re-running a stage with
unchanged inputs reproduces its artifacts byte for byte.

Exit codes: 0 success, 2 validation failure, 3 partial batch failure
(some mutants were skipped but the rest of the stage completed).
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path
from typing import Sequence

from . import harness, mutation, report as report_mod, semantics
from .abstraction import AbstractedUnit, abstract
from .classifier import (
    ForestConfig,
    LabeledSample,
    cross_validate,
    evaluate,
    load_forest,
    predict as forest_predict,
    save_forest,
    train_forest,
    write_predictions,
)
from .embedding import (
    EmbedderConfig,
    embed,
    load_model,
    read_embeddings,
    save_model,
    train,
    write_embeddings,
)
from .errors import (
    ConfigInvalid,
    MimicryError,
    MissingUpstreamArtifact,
    TooFewGroups,
)
from .harness import ProjectConfig
from .lexing import tokenize
from .predictors import BuiltinPredictor, RemotePredictor
from .semantics import VulnerabilityRecord

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARTIAL = 3

ABSTRACT_UNITS = "abstract_units.jsonl"
MUTATE_MANIFEST = "mutate_manifest.jsonl"
MUTATE_SEQUENCES = "mutate_sequences.jsonl"
MUTATE_SKIPS = "mutate_skips.json"
MUTANTS_DIR = "mutants"
RUN_RESULTS = "run_results.jsonl"
RUN_SKIPS = "run_skips.json"
LABEL_RECORDS = "label_records.jsonl"
EMBED_MODEL = "embed_train_model.bin"
EMBED_VECTORS = "embed_vectors.jsonl"
TRAIN_MODEL = "train_model.bin"
PREDICT_CSV = "predict_predictions.csv"
PREDICT_METRICS = "predict_metrics.json"
PREDICT_CV = "predict_cv.json"
REPORT_MD = "report.md"
REPORT_JSON = "report.json"

PIPELINE_STAGES = (
    "abstract",
    "mutate",
    "run",
    "label",
    "embed-train",
    "embed",
    "train",
    "predict",
    "report",
)


@dataclass(frozen=True)
class RunConfig:
    project: ProjectConfig
    vulnerability: VulnerabilityRecord
    files: tuple[str, ...]
    predictor: str  # "builtin" or "remote=<url>"
    k: int
    mask_on_abstracted: bool
    embedder: EmbedderConfig
    forest: ForestConfig
    eval_folds: int
    eval_seed: int
    out_dir: Path


def _parse_predictor(value) -> str:
    if value == "builtin":
        return "builtin"
    if isinstance(value, str) and value.startswith("remote="):
        url = value[len("remote="):]
        if not url:
            raise ConfigInvalid("remote predictor requires a URL: remote=<url>")
        return value
    if isinstance(value, dict) and "remote" in value:
        return f"remote={value['remote']}"
    raise ConfigInvalid(f"predictor must be 'builtin' or remote=<url>, got {value!r}")


def load_run_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigInvalid(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    try:
        project = ProjectConfig.from_json(doc["project"])
        vuln = doc["vulnerability"]
        vulnerability = VulnerabilityRecord(
            project=vuln.get("project", project.name),
            pov_tests=tuple(vuln["pov_tests"]),
            cve_id=vuln.get("cve_id"),
        )
        files = tuple(doc["files"])
    except KeyError as exc:
        raise ConfigInvalid(f"config missing field {exc}") from exc
    if not files:
        raise ConfigInvalid("config lists no source files to mutate")
    gen = doc.get("generator", {})
    k = int(gen.get("k", 5))
    if k < 1:
        raise ConfigInvalid(f"generator.k must be >= 1, got {k}")
    emb = dict(doc.get("embedder", {}))
    forest = dict(doc.get("forest", {}))
    ev = doc.get("eval", {})
    return RunConfig(
        project=project,
        vulnerability=vulnerability,
        files=files,
        predictor=_parse_predictor(doc.get("predictor", "builtin")),
        k=k,
        mask_on_abstracted=bool(gen.get("mask_on_abstracted", False)),
        embedder=EmbedderConfig(
            max_len=emb.get("max_len", 150),
            embed_dim=emb.get("embed_dim", 64),
            hidden_dim=emb.get("hidden_dim", 128),
            epochs=emb.get("epochs", 10),
            learning_rate=emb.get("learning_rate", 0.1),
            seed=emb.get("seed", 0),
        ),
        forest=ForestConfig(
            n_trees=forest.get("n_trees", 100),
            min_samples_leaf=forest.get("min_samples_leaf", 1),
            threshold=forest.get("threshold", 0.5),
            seed=forest.get("seed", 0),
        ),
        eval_folds=int(ev.get("folds", 5)),
        eval_seed=int(ev.get("seed", 0)),
        out_dir=Path(doc.get("out_dir", "out")),
    )


def _apply_overrides(rc: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.out is not None:
        rc = dc_replace(rc, out_dir=Path(args.out))
    if args.predictor is not None:
        rc = dc_replace(rc, predictor=_parse_predictor(args.predictor))
    if args.k is not None:
        if args.k < 1:
            raise ConfigInvalid(f"--k must be >= 1, got {args.k}")
        rc = dc_replace(rc, k=args.k)
    if args.seed is not None:
        rc = dc_replace(
            rc,
            embedder=dc_replace(rc.embedder, seed=args.seed),
            forest=dc_replace(rc.forest, seed=args.seed),
            eval_seed=args.seed,
        )
    return rc


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise MissingUpstreamArtifact(
            f"{path.name} not found in {path.parent}; run the {producer} stage first"
        )
    return path


def _read_source(rc: RunConfig, relpath: str) -> str:
    path = Path(rc.project.root) / relpath
    if not path.is_file():
        raise ConfigInvalid(f"source file missing: {path}")
    # Bytes-faithful read: the manifest records the hash of exactly
    # these bytes, and the harness verifies clones against it.
    return path.read_bytes().decode("utf-8")


def _write_json(path: Path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _read_jsonl(path: Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def stage_abstract(rc: RunConfig) -> int:
    rows = []
    for relpath in rc.files:
        ts = tokenize(_read_source(rc, relpath))
        unit = abstract(ts)
        rows.append({"file": relpath, "unit": json.loads(unit.to_json())})
    rows.sort(key=lambda r: r["file"])
    out = rc.out_dir / ABSTRACT_UNITS
    with open(out, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    print(f"abstract: {len(rows)} file(s) -> {out}")
    return EXIT_OK


def _make_predictor(rc: RunConfig):
    if rc.predictor == "builtin":
        return BuiltinPredictor()
    return RemotePredictor(rc.predictor[len("remote="):])


def stage_mutate(rc: RunConfig) -> int:
    units_path = _require(rc.out_dir / ABSTRACT_UNITS, "abstract")
    stored = {row["file"]: row["unit"] for row in _read_jsonl(units_path)}
    predictor = _make_predictor(rc)
    all_mutants: list[mutation.Mutant] = []
    all_skips: list[dict] = []
    for relpath in rc.files:
        source = _read_source(rc, relpath)
        ts = tokenize(source)
        unit = abstract(ts)
        if relpath not in stored:
            raise MissingUpstreamArtifact(
                f"{relpath} absent from {ABSTRACT_UNITS}; rerun the abstract stage"
            )
        if stored[relpath] != json.loads(unit.to_json()):
            raise ConfigInvalid(
                f"{relpath} changed since the abstract stage ran; rerun it"
            )
        mutants, skips = mutation.generate_all(
            ts, predictor, k=rc.k, file=relpath,
            mask_on_abstracted=rc.mask_on_abstracted,
        )
        all_mutants.extend(mutants)
        all_skips.extend(skips)
    mutation.write_manifest(all_mutants, rc.out_dir / MUTATE_MANIFEST)
    mutation.write_sequences(all_mutants, rc.out_dir / MUTATE_SEQUENCES)
    mutation.write_patched_tree(all_mutants, rc.out_dir / MUTANTS_DIR)
    _write_json(rc.out_dir / MUTATE_SKIPS, {"skips": sorted(
        all_skips, key=lambda s: (s["file"], s["token_index"])
    )})
    print(f"mutate: {len(all_mutants)} mutant(s), {len(all_skips)} site(s) skipped")
    if all_skips and not all_mutants:
        print("mutate: every site failed; see " + str(rc.out_dir / MUTATE_SKIPS),
              file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_PARTIAL if all_skips else EXIT_OK


def _mutants_from_manifest(rc: RunConfig) -> list[mutation.Mutant]:
    manifest = _require(rc.out_dir / MUTATE_MANIFEST, "mutate")
    mutants = []
    for row in mutation.read_manifest(manifest):
        patched = rc.out_dir / MUTANTS_DIR / row["id"] / row["file"]
        _require(patched, "mutate")
        site = mutation.MaskSite(
            token_index=row["token_index"],
            site_kind=row["site_kind"],
            original=row["original"],
            statement_span=(row["statement_start"], row["statement_start"]),
        )
        mutants.append(
            mutation.Mutant(
                id=row["id"],
                file=row["file"],
                site=site,
                replacement=row["replacement"],
                operator_tag=row["operator_tag"],
                patched_source=patched.read_bytes().decode("utf-8"),
                annotated_sequence=(),
                valid=row["valid"],
                original_sha256=row["original_sha256"],
            )
        )
    return mutants


def stage_run(rc: RunConfig, jobs: int) -> int:
    mutants = _mutants_from_manifest(rc)
    workdir = rc.out_dir / "work"
    # Clones refuse to overwrite leftovers, so each invocation starts clean.
    shutil.rmtree(workdir, ignore_errors=True)
    workdir.mkdir(parents=True, exist_ok=True)

    def attempt(m: mutation.Mutant):
        try:
            return harness.run_one(rc.project, m, workdir), None
        except MimicryError as exc:
            return None, {"mutant_id": m.id, "error": f"{type(exc).__name__}: {exc}"}

    if jobs <= 1:
        outcomes = [attempt(m) for m in mutants]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(attempt, mutants))
    records = [rec for rec, _ in outcomes if rec is not None]
    skips = [skip for _, skip in outcomes if skip is not None]
    harness.write_results(rc.out_dir / RUN_RESULTS, records)
    _write_json(rc.out_dir / RUN_SKIPS, {"skips": sorted(skips, key=lambda s: s["mutant_id"])})
    print(f"run: {len(records)} mutant(s) executed, {len(skips)} skipped")
    if skips and not records:
        print("run: every mutant failed; see " + str(rc.out_dir / RUN_SKIPS),
              file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_PARTIAL if skips else EXIT_OK


def stage_label(rc: RunConfig) -> int:
    results = harness.read_results(_require(rc.out_dir / RUN_RESULTS, "run"))
    pov = frozenset(rc.vulnerability.pov_tests)
    records = [
        semantics.make_label_record(
            mutant_id=r.mutant_id,
            project=rc.project.name,
            mutant_failing=harness.failing_set(r.outcomes),
            pov_failing=pov,
        )
        for r in results
    ]
    semantics.write_labels(rc.out_dir / LABEL_RECORDS, records)
    counts = semantics.label_counts(records)
    print("label: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return EXIT_OK


def _read_corpus(rc: RunConfig) -> list[tuple[str, list[str]]]:
    rows = _read_jsonl(_require(rc.out_dir / MUTATE_SEQUENCES, "mutate"))
    return [(row["mutant_id"], list(row["tokens"])) for row in rows]


def stage_embed_train(rc: RunConfig) -> int:
    corpus = [tokens for _, tokens in _read_corpus(rc)]
    model = train(corpus, rc.embedder)
    save_model(rc.out_dir / EMBED_MODEL, model)
    final = model.loss_history[-1] if model.loss_history else float("nan")
    print(f"embed-train: {len(corpus)} sequence(s), final epoch loss {final:.4f}")
    return EXIT_OK


def stage_embed(rc: RunConfig) -> int:
    model = load_model(_require(rc.out_dir / EMBED_MODEL, "embed-train"))
    rows = [(mid, embed(model, tokens)) for mid, tokens in _read_corpus(rc)]
    write_embeddings(rc.out_dir / EMBED_VECTORS, rows)
    print(f"embed: {len(rows)} vector(s) -> {rc.out_dir / EMBED_VECTORS}")
    return EXIT_OK


def _assemble_samples(rc: RunConfig) -> list[LabeledSample]:
    vectors = dict(read_embeddings(_require(rc.out_dir / EMBED_VECTORS, "embed")))
    labels = semantics.read_labels(_require(rc.out_dir / LABEL_RECORDS, "label"))
    samples = []
    for rec in labels:
        if rec.mutant_id in vectors:
            samples.append(
                LabeledSample(
                    mutant_id=rec.mutant_id,
                    group_id=rec.project,
                    features=vectors[rec.mutant_id],
                    truth=rec.label == semantics.MIMICKING,
                )
            )
    return samples


def stage_train(rc: RunConfig) -> int:
    samples = _assemble_samples(rc)
    if len(samples) < 2:
        raise ConfigInvalid(f"need at least 2 labeled samples to train, got {len(samples)}")
    # Tiny single-project corpora are routinely one-class; train anyway
    # and let the metrics stage flag the degeneracy.
    model = train_forest(samples, rc.forest, allow_degenerate=True)
    save_forest(rc.out_dir / TRAIN_MODEL, model)
    positives = sum(1 for s in samples if s.truth)
    print(f"train: {len(samples)} sample(s), {positives} mimicking -> {rc.out_dir / TRAIN_MODEL}")
    return EXIT_OK


def stage_predict(rc: RunConfig) -> int:
    model = load_forest(_require(rc.out_dir / TRAIN_MODEL, "train"))
    samples = _assemble_samples(rc)
    rows = []
    preds = []
    truths = []
    for s in samples:
        label, score = forest_predict(model, s.features)
        rows.append((s.mutant_id, score, label, s.truth))
        preds.append(label)
        truths.append(s.truth)
    write_predictions(rc.out_dir / PREDICT_CSV, rows)
    metrics = evaluate(preds, truths).to_json() if rows else None
    _write_json(rc.out_dir / PREDICT_METRICS, metrics)
    n_groups = len({s.group_id for s in samples})
    if n_groups >= rc.eval_folds:
        try:
            cv = cross_validate(samples, k=rc.eval_folds, seed=rc.eval_seed, forest=rc.forest)
            _write_json(rc.out_dir / PREDICT_CV, cv.to_json())
            print(f"predict: cross-validation over {n_groups} group(s) written")
        except TooFewGroups:
            _write_json(rc.out_dir / PREDICT_CV, None)
    else:
        _write_json(rc.out_dir / PREDICT_CV, None)
        print(
            f"predict: {n_groups} group(s) < {rc.eval_folds} folds;"
            " cross-validation skipped"
        )
    print(f"predict: {len(rows)} prediction(s) -> {rc.out_dir / PREDICT_CSV}")
    return EXIT_OK


def stage_report(rc: RunConfig) -> int:
    labels = semantics.read_labels(_require(rc.out_dir / LABEL_RECORDS, "label"))
    classifier_metrics = None
    cv_path = rc.out_dir / PREDICT_CV
    metrics_path = rc.out_dir / PREDICT_METRICS
    if cv_path.exists():
        doc = json.loads(cv_path.read_text(encoding="utf-8"))
        if doc is not None:
            classifier_metrics = doc
    if classifier_metrics is None and metrics_path.exists():
        doc = json.loads(metrics_path.read_text(encoding="utf-8"))
        if doc is not None:
            classifier_metrics = {"pooled": doc}
    doc = report_mod.build_report(labels, classifier_metrics)
    report_mod.write_report(rc.out_dir / REPORT_MD, rc.out_dir / REPORT_JSON, doc)
    print(f"report: {rc.out_dir / REPORT_MD}")
    return EXIT_OK


def run_stage(name: str, rc: RunConfig, jobs: int) -> int:
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    if name == "abstract":
        return stage_abstract(rc)
    if name == "mutate":
        return stage_mutate(rc)
    if name == "run":
        return stage_run(rc, jobs)
    if name == "label":
        return stage_label(rc)
    if name == "embed-train":
        return stage_embed_train(rc)
    if name == "embed":
        return stage_embed(rc)
    if name == "train":
        return stage_train(rc)
    if name == "predict":
        return stage_predict(rc)
    if name == "report":
        return stage_report(rc)
    raise ConfigInvalid(f"unknown stage {name!r}")


def run_pipeline(rc: RunConfig, jobs: int) -> int:
    worst = EXIT_OK
    for stage in PIPELINE_STAGES:
        code = run_stage(stage, rc, jobs)
        if code == EXIT_VALIDATION:
            return code
        worst = max(worst, code)
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimicry",
        description="Generate, execute, label, and predict vulnerability-mimicking mutants.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in PIPELINE_STAGES + ("pipeline",):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the run config JSON")
        p.add_argument("--out", help="output directory (overrides config out_dir)")
        p.add_argument("--jobs", type=int, default=1, help="worker pool size for the run stage")
        p.add_argument("--seed", type=int, help="seed for embedder, forest, and fold assignment")
        p.add_argument("--predictor", help="builtin or remote=<url>")
        p.add_argument("--k", type=int, help="candidates requested per mask site")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = _apply_overrides(load_run_config(args.config), args)
        if args.command == "pipeline":
            return run_pipeline(rc, args.jobs)
        return run_stage(args.command, rc, args.jobs)
    except MimicryError as exc:
        print(
            json.dumps(
                {"error": type(exc).__name__, "message": str(exc)}, sort_keys=True
            ),
            file=sys.stderr,
        )
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
