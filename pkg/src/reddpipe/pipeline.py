"""End-to-end pipeline: project -> topic-filter -> train -> predict ->
aggregate -> queue, with every intermediate artifact written to the output
directory and a run report carrying metrics plus artifact digests.

The report is byte-identical across runs with the same seeds: artifact
timestamps come from the config (a fixed epoch by default), paths in the
report are relative to the output directory, and all randomness is seeded.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import corpus as corpus_mod
from . import embeddings, metrics, redd, topics, triage
from .errors import ReddpipeError, ValidationError

DEFAULT_CREATED_AT = "1970-01-01T00:00:00Z"


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one ranking run needs; see docs/FORMATS.md for the file form."""

    corpus_path: Path
    output_dir: Path
    d_full: int = 768
    d_red: int = 100
    projection_seed: int = 0
    bucket_edges: tuple = topics.DEFAULT_BUCKET_EDGES
    topic_id: str = "topic"
    topic_file: Optional[Path] = None
    topic_example_page_ids: tuple = ()
    topic_threshold: Optional[float] = None
    train: redd.TrainConfig = field(default_factory=redd.TrainConfig)
    queue_cutoff: int = 300
    precision_k: int = 40
    min_pages: int = 1
    model_version: int = 1
    created_at: str = DEFAULT_CREATED_AT

    def __post_init__(self):
        object.__setattr__(self, "corpus_path", Path(self.corpus_path))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        if self.topic_file is not None:
            object.__setattr__(self, "topic_file", Path(self.topic_file))
        object.__setattr__(self, "bucket_edges", tuple(self.bucket_edges))
        object.__setattr__(
            self, "topic_example_page_ids", tuple(self.topic_example_page_ids)
        )
        if self.d_red > self.d_full:
            raise ValidationError(f"d_red {self.d_red} exceeds d_full {self.d_full}")
        if self.queue_cutoff < 1 or self.precision_k < 1 or self.min_pages < 1:
            raise ValidationError("queue_cutoff, precision_k and min_pages must be >= 1")
        if self.topic_file is None and not self.topic_example_page_ids:
            raise ValidationError(
                "config needs either topic_file or topic_example_page_ids"
            )


def config_from_json(obj: dict, base_dir: Path = Path(".")) -> PipelineConfig:
    """Build a config from a parsed document; unknown keys are rejected."""
    known = {
        "corpus", "output_dir", "d_full", "d_red", "projection_seed",
        "bucket_edges", "topic_id", "topic_file", "topic_example_page_ids",
        "topic_threshold", "train", "queue_cutoff", "precision_k",
        "min_pages", "model_version", "created_at",
    }
    unknown = [k for k in obj if k not in known]
    if unknown:
        raise ValidationError(f"unknown pipeline config keys {unknown}")
    for required in ("corpus", "output_dir"):
        if required not in obj:
            raise ValidationError(f"pipeline config is missing {required!r}")
    corpus_path = base_dir / obj["corpus"]
    if not corpus_path.exists():
        raise ValidationError(f"config field 'corpus': file not found: {corpus_path}")
    train_cfg = redd.TrainConfig.from_json(obj.get("train", {}))
    return PipelineConfig(
        corpus_path=corpus_path,
        output_dir=base_dir / obj["output_dir"],
        d_full=int(obj.get("d_full", 768)),
        d_red=int(obj.get("d_red", 100)),
        projection_seed=int(obj.get("projection_seed", 0)),
        bucket_edges=tuple(obj.get("bucket_edges", topics.DEFAULT_BUCKET_EDGES)),
        topic_id=obj.get("topic_id", "topic"),
        topic_file=(base_dir / obj["topic_file"]) if obj.get("topic_file") else None,
        topic_example_page_ids=tuple(obj.get("topic_example_page_ids", ())),
        topic_threshold=obj.get("topic_threshold"),
        train=train_cfg,
        queue_cutoff=int(obj.get("queue_cutoff", 300)),
        precision_k=int(obj.get("precision_k", 40)),
        min_pages=int(obj.get("min_pages", 1)),
        model_version=int(obj.get("model_version", 1)),
        created_at=obj.get("created_at", DEFAULT_CREATED_AT),
    )


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"pipeline config file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        return config_from_json(json.load(fh), base_dir=path.parent)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Stage:
    """Names the failing stage while leaving earlier artifacts on disk."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or not isinstance(exc, Exception):
            return False
        if isinstance(exc, ReddpipeError) and str(exc).startswith("stage '"):
            return False
        raise ReddpipeError(f"stage '{self.name}' failed: {exc}") from exc


def _domain_truth(records) -> set:
    """Domains whose labeled pages are majority-positive (synthetic oracle)."""
    by_domain: dict = {}
    for rec in records:
        if rec.label is not None:
            by_domain.setdefault(rec.domain, []).append(rec.label)
    return {d for d, labels in by_domain.items() if sum(labels) * 2 > len(labels)}


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute the full ranking pipeline; returns the run report dict.

    Artifacts written under config.output_dir: reduced corpus, projection,
    topic file, model file, page scores, domain scores, review queue, and
    run_report.json. Deterministic given the config's seeds.
    """
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict = {}

    with _Stage("load-corpus"):
        records, manifest = corpus_mod.load_corpus(config.corpus_path)
        if not records:
            raise ValidationError("corpus is empty")

    with _Stage("project"):
        needs_projection = any(r.embedding_reduced is None for r in records)
        if needs_projection:
            projection = embeddings.make_projection(
                config.d_full, config.d_red, config.projection_seed
            )
            records = embeddings.reduce_pages(records, projection)
            embeddings.save_projection(projection, out / "projection.json")
            artifacts["projection.json"] = None
            corpus_mod.save_corpus(
                records,
                out / "corpus_reduced.jsonl",
                name=manifest.name,
                d_full=manifest.d_full,
                d_red=config.d_red,
            )
            artifacts["corpus_reduced.jsonl"] = None

    with _Stage("topic"):
        if config.topic_file is not None:
            topic = topics.load_topic(config.topic_file)
        else:
            by_id = {r.page_id: r for r in records}
            missing = [p for p in config.topic_example_page_ids if p not in by_id]
            if missing:
                raise ValidationError(f"topic example pages not in corpus: {missing}")
            topic = topics.build_topic(
                [by_id[p] for p in config.topic_example_page_ids],
                topic_id=config.topic_id,
                bucket_edges=config.bucket_edges,
                created_at=config.created_at,
            )
        if topic.threshold is None:
            if config.topic_threshold is None:
                raise ValidationError(
                    "topic has no threshold; set topic_threshold in the config "
                    "or calibrate the topic first"
                )
            topic = topic.with_threshold(config.topic_threshold)
        topics.save_topic(topic, out / "topic.json")
        artifacts["topic.json"] = None

    with _Stage("filter"):
        filtered = topics.filter_on_topic(topic, records)
        if not filtered:
            raise ValidationError("no pages pass the topic threshold")

    with _Stage("train"):
        train_split = [r for r in filtered if r.split == "train" and r.label is not None]
        model = redd.train(train_split, config.train)
        model.version = config.model_version
        redd.save_model(model, out / "model.json")
        artifacts["model.json"] = None

    with _Stage("predict"):
        scored = redd.predict_pages(model, filtered)
        with (out / "page_scores.jsonl").open("w", encoding="utf-8") as fh:
            for page_id, score in scored:
                fh.write(json.dumps({"page_id": page_id, "score": score}) + "\n")
        artifacts["page_scores.jsonl"] = None

    with _Stage("aggregate"):
        by_id = {r.page_id: r for r in filtered}
        rows = [(pid, by_id[pid].domain, s) for pid, s in scored]
        aggregation = triage.aggregate_domains(
            rows, min_pages=config.min_pages, model_version=config.model_version
        )
        with (out / "domain_scores.jsonl").open("w", encoding="utf-8") as fh:
            for dom in aggregation.domains:
                fh.write(json.dumps(dom.to_json(), sort_keys=True) + "\n")
        artifacts["domain_scores.jsonl"] = None

    with _Stage("queue"):
        queue = triage.build_queue(
            aggregation.domains,
            cutoff=config.queue_cutoff,
            model_version=config.model_version,
            created_at=config.created_at,
        )
        save_queue(queue, out / "queue.json")
        artifacts["queue.json"] = None

    with _Stage("metrics"):
        test_split = [r for r in filtered if r.split == "test" and r.label is not None]
        auc = None
        if test_split and len({r.label for r in test_split}) == 2:
            x = np.stack([r.embedding_reduced for r in test_split]).astype(np.float64)
            y = np.array([r.label for r in test_split])
            auc = metrics.auc_roc(redd.forward(model, x), y)
        truth = _domain_truth(filtered)
        k = min(config.precision_k, len(queue.items)) if queue.items else None
        p_at_k = None
        if truth and k:
            ranked = [(d.domain, d.mean_score) for d in queue.items]
            p_at_k = metrics.precision_at_k(ranked, truth, k)

    report = {
        "created_at": config.created_at,
        "seeds": {
            "projection": config.projection_seed,
            "train": config.train.seed,
        },
        "counts": {
            "corpus": len(records),
            "filtered": len(filtered),
            "train": len(train_split),
            "test": len(test_split),
            "domains": len(aggregation.domains),
            "queue": len(queue.items),
        },
        "metrics": {
            "auc_test_filtered": auc,
            "precision_at_k": p_at_k,
            "precision_k": k,
            "final_train_loss": model.training_meta["final_train_loss"],
            "initial_train_loss": model.training_meta["initial_train_loss"],
        },
        "topic": {
            "topic_id": topic.topic_id,
            "threshold": topic.threshold,
        },
        "queue_id": queue.queue_id,
        "model_version": config.model_version,
        "artifacts": {},
    }
    for name in sorted(artifacts):
        report["artifacts"][name] = _sha256(out / name)
    report_path = out / "run_report.json"
    report_path.write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return report


def save_queue(queue: triage.ReviewQueue, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "queue_id": queue.queue_id,
        "cutoff": queue.cutoff,
        "created_at": queue.created_at,
        "model_version": queue.model_version,
        "items": [d.to_json() for d in queue.items],
    }
    path.write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")


def load_queue(path) -> triage.ReviewQueue:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"queue file not found: {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    try:
        items = tuple(
            triage.DomainScore(
                domain=d["domain"],
                mean_score=float(d["mean_score"]),
                page_count=int(d["page_count"]),
                score_std=float(d["score_std"]),
                model_version=int(d["model_version"]),
            )
            for d in doc["items"]
        )
        return triage.ReviewQueue(
            queue_id=doc["queue_id"],
            items=items,
            cutoff=int(doc["cutoff"]),
            created_at=doc.get("created_at", ""),
            model_version=int(doc.get("model_version", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed queue file: {exc!r}") from exc
