"""HTTP review service: serves queues and calibration samples, accepts
verdicts and relevance marks, and retrains on demand.

State is file-backed under one data directory; the decision log is
append-only with fsync before acknowledgment, so a kill at any point
replays to the same state. Writers are serialized per resource; reads are
lock-free snapshots.

Endpoints:
    GET  /health
    GET  /queues
    GET  /queues/{id}?start=&end=
    POST /queues/{id}/decisions
    GET  /topics/{id}/calibration
    POST /topics/{id}/calibration/marks
    POST /topics/{id}/calibration/confirm
    POST /models/retrain
    GET  /models/retrain/{job_id}
    GET  /models/{version}/metrics
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

import numpy as np

from . import corpus as corpus_mod
from . import metrics, pipeline, redd, topics, triage
from .errors import (
    ConflictError,
    NotFoundError,
    ReddpipeError,
    ValidationError,
)

QUEUE_SAMPLE_PAGES = 3
SNIPPET_CHARS = 200


@dataclass
class ServiceConfig:
    data_dir: Path
    bucket_sample_size: int = 4
    calibration_seed: int = 0
    default_k: int = 40
    min_pages: int = 1
    retrain_defaults: redd.TrainConfig = field(default_factory=redd.TrainConfig)

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


class ServiceState:
    """All service state, loaded from and persisted to the data directory.

    Layout: corpus.jsonl, topics/<id>.json, models/registry.json +
    models/v<NNN>.json, queues/<id>.json, calibration/<id>.json,
    decisions.log.
    """

    def __init__(self, config: ServiceConfig):
        self.config = config
        d = config.data_dir
        d.mkdir(parents=True, exist_ok=True)
        (d / "topics").mkdir(exist_ok=True)
        (d / "models").mkdir(exist_ok=True)
        (d / "queues").mkdir(exist_ok=True)
        (d / "calibration").mkdir(exist_ok=True)

        self._decision_lock = threading.Lock()
        self._calibration_lock = threading.Lock()
        self._retrain_lock = threading.Lock()

        self.records: list = []
        self.manifest = None
        corpus_path = d / "corpus.jsonl"
        if corpus_path.exists():
            self.records, self.manifest = corpus_mod.load_corpus(corpus_path)

        self.topics: dict = {}
        for path in sorted((d / "topics").glob("*.json")):
            topic = topics.load_topic(path)
            self.topics[topic.topic_id] = topic

        self.queues: dict = {}
        for path in sorted((d / "queues").glob("*.json")):
            queue = pipeline.load_queue(path)
            self.queues[queue.queue_id] = queue

        self.registry = {"versions": {}, "active": {}, "last_decision_id": {}}
        registry_path = d / "models" / "registry.json"
        if registry_path.exists():
            self.registry = json.loads(registry_path.read_text(encoding="utf-8"))

        self.decisions: list = triage.read_decision_log(d / "decisions.log")
        self._idempotency: dict = {
            dec.idempotency_key: dec
            for dec in self.decisions
            if dec.idempotency_key
        }
        self.calibrations: dict = {}
        for path in sorted((d / "calibration").glob("*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            self.calibrations[doc["topic_id"]] = doc

        self.jobs: dict = {}

    # -- helpers ---------------------------------------------------------

    def _decision_log_path(self) -> Path:
        return self.config.data_dir / "decisions.log"

    def _save_registry(self) -> None:
        path = self.config.data_dir / "models" / "registry.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self.registry, sort_keys=True) + "\n", encoding="utf-8")
        tmp.replace(path)

    def _model_path(self, version: int) -> Path:
        return self.config.data_dir / "models" / f"v{version:04d}.json"

    def load_model(self, version: int) -> redd.ReddModel:
        path = self._model_path(version)
        if not path.exists():
            raise NotFoundError(f"model version {version} not found")
        return redd.load_model(path)

    def _latest_by_domain(self, queue_id: str) -> dict:
        latest = triage.latest_decisions(
            [d for d in self.decisions if d.queue_id == queue_id]
        )
        return {domain: dec for (_, domain), dec in latest.items()}

    # -- queues ----------------------------------------------------------

    def list_queues(self) -> dict:
        rows = []
        for queue in self.queues.values():
            decided = len(self._latest_by_domain(queue.queue_id))
            rows.append(
                {
                    "queue_id": queue.queue_id,
                    "size": len(queue.items),
                    "model_version": queue.model_version,
                    "created_at": queue.created_at,
                    "decided": decided,
                }
            )
        rows.sort(key=lambda r: r["queue_id"])
        return {"queues": rows}

    def get_queue(
        self, queue_id: str, start: Optional[int] = None, end: Optional[int] = None
    ) -> dict:
        if queue_id not in self.queues:
            raise NotFoundError(f"unknown queue {queue_id!r}")
        queue = self.queues[queue_id]
        verdicts = self._latest_by_domain(queue_id)
        lo = 1 if start is None else start
        hi = len(queue.items) if end is None else end
        if lo < 1 or hi > len(queue.items) or lo > hi:
            raise ValidationError(
                f"rank range [{lo}, {hi}] out of bounds for queue of "
                f"{len(queue.items)}"
            )
        by_domain: dict = {}
        for rec in self.records:
            by_domain.setdefault(rec.domain, []).append(rec)
        rows = []
        for rank in range(lo, hi + 1):
            item = queue.items[rank - 1]
            decision = verdicts.get(item.domain)
            pages = sorted(by_domain.get(item.domain, []), key=lambda r: r.page_id)
            samples = [
                {"page_id": rec.page_id, "text": rec.text[:SNIPPET_CHARS]}
                for rec in pages[:QUEUE_SAMPLE_PAGES]
            ]
            rows.append(
                {
                    "rank": rank,
                    "domain": item.domain,
                    "mean_score": item.mean_score,
                    "page_count": item.page_count,
                    "score_std": item.score_std,
                    "status": decision.verdict if decision else "pending",
                    "decision_id": decision.decision_id if decision else None,
                    "sample_pages": samples,
                }
            )
        return {
            "queue_id": queue_id,
            "model_version": queue.model_version,
            "created_at": queue.created_at,
            "total": len(queue.items),
            "cutoff": queue.cutoff,
            "start": lo,
            "end": hi,
            "rows": rows,
        }

    def post_decision(
        self,
        queue_id: str,
        domain: str,
        verdict: str,
        reviewer_id: str,
        note: str = "",
        idempotency_key: Optional[str] = None,
    ) -> dict:
        if queue_id not in self.queues:
            raise NotFoundError(f"unknown queue {queue_id!r}")
        if not reviewer_id:
            raise ValidationError("reviewer_id is required")
        if verdict not in triage.VERDICTS:
            raise ValidationError(
                f"unknown verdict {verdict!r}; expected one of {triage.VERDICTS}"
            )
        queue = self.queues[queue_id]
        if domain not in set(queue.domains()):
            raise NotFoundError(f"domain {domain!r} is not in queue {queue_id!r}")
        with self._decision_lock:
            if idempotency_key and idempotency_key in self._idempotency:
                existing = self._idempotency[idempotency_key]
                return {
                    "decision_id": existing.decision_id,
                    "duplicate": True,
                    "verdict": existing.verdict,
                }
            decision = triage.ReviewDecision(
                decision_id=f"d{len(self.decisions) + 1:08d}",
                queue_id=queue_id,
                domain=domain,
                verdict=verdict,
                reviewer_id=reviewer_id,
                timestamp=_now(),
                note=note,
                idempotency_key=idempotency_key,
            )
            # Durable before acknowledged: append + fsync, then update memory.
            triage.append_decision(self._decision_log_path(), decision)
            self.decisions.append(decision)
            if idempotency_key:
                self._idempotency[idempotency_key] = decision
        return {"decision_id": decision.decision_id, "duplicate": False, "verdict": verdict}

    # -- calibration -----------------------------------------------------

    def _calibration_path(self, topic_id: str) -> Path:
        return self.config.data_dir / "calibration" / f"{topic_id}.json"

    def _save_calibration(self, doc: dict) -> None:
        path = self._calibration_path(doc["topic_id"])
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")
        tmp.replace(path)

    def _open_calibration(self, topic_id: str) -> dict:
        if topic_id not in self.topics:
            raise NotFoundError(f"unknown topic {topic_id!r}")
        if topic_id in self.calibrations:
            return self.calibrations[topic_id]
        topic = self.topics[topic_id]
        scorable = [r for r in self.records if r.embedding_reduced is not None]
        if not scorable:
            raise ValidationError("no pages with reduced embeddings to calibrate on")
        scored = topics.score_pages(topic, scorable)
        report = topics.bucket_report(
            topic,
            scored,
            sample_size=self.config.bucket_sample_size,
            seed=self.config.calibration_seed,
        )
        doc = {
            "topic_id": topic_id,
            "frozen": topic.threshold is not None,
            "threshold": topic.threshold,
            "sample_size": report.sample_size,
            "seed": report.seed,
            "out_of_range": report.out_of_range,
            "total": report.total,
            "buckets": [
                {
                    "lo": b.lo,
                    "hi": b.hi,
                    "count": b.count,
                    "sample_page_ids": list(b.sample_page_ids),
                }
                for b in report.buckets
            ],
            "marks": [],
        }
        self.calibrations[topic_id] = doc
        self._save_calibration(doc)
        return doc

    @staticmethod
    def _fractions(doc: dict) -> list:
        """Relevance fraction per bucket from the latest mark per page."""
        fractions = []
        for i, bucket in enumerate(doc["buckets"]):
            latest: dict = {}
            for mark in doc["marks"]:
                if mark["bucket"] == i:
                    latest[mark["page_id"]] = bool(mark["relevant"])
            if latest:
                fractions.append(sum(latest.values()) / len(latest))
            else:
                fractions.append(None)
        return fractions

    def _calibration_view(self, doc: dict) -> dict:
        fractions = self._fractions(doc)
        view = dict(doc)
        view["buckets"] = [
            {**bucket, "relevance_fraction": fraction}
            for bucket, fraction in zip(doc["buckets"], fractions)
        ]
        snippets = {}
        by_id = {r.page_id: r for r in self.records}
        for bucket in doc["buckets"]:
            for page_id in bucket["sample_page_ids"]:
                rec = by_id.get(page_id)
                if rec is not None:
                    snippets[page_id] = rec.text[:SNIPPET_CHARS]
        view["page_texts"] = snippets
        return view

    def get_calibration(self, topic_id: str) -> dict:
        with self._calibration_lock:
            return self._calibration_view(self._open_calibration(topic_id))

    def post_relevance_mark(
        self, topic_id: str, bucket_lo: float, page_id: str, relevant: bool
    ) -> dict:
        with self._calibration_lock:
            doc = self._open_calibration(topic_id)
            if doc["frozen"]:
                raise ConflictError(
                    f"calibration for topic {topic_id!r} is frozen"
                )
            index = None
            for i, bucket in enumerate(doc["buckets"]):
                if abs(bucket["lo"] - bucket_lo) < 1e-12:
                    index = i
                    break
            if index is None:
                raise ValidationError(f"no bucket with lower edge {bucket_lo}")
            if page_id not in doc["buckets"][index]["sample_page_ids"]:
                raise ValidationError(
                    f"page {page_id!r} is not in the sample of bucket "
                    f"[{doc['buckets'][index]['lo']}, {doc['buckets'][index]['hi']})"
                )
            doc["marks"].append(
                {"bucket": index, "page_id": page_id, "relevant": bool(relevant)}
            )
            self._save_calibration(doc)
            return self._calibration_view(doc)

    def confirm_calibration(self, topic_id: str) -> dict:
        with self._calibration_lock:
            doc = self._open_calibration(topic_id)
            if doc["frozen"]:
                raise ConflictError(f"calibration for topic {topic_id!r} is frozen")
            topic = self.topics[topic_id]
            fractions = self._fractions(doc)
            for bucket, fraction in zip(doc["buckets"], fractions):
                if bucket["count"] > 0 and fraction is None:
                    raise ValidationError(
                        f"bucket [{bucket['lo']}, {bucket['hi']}) has pages "
                        f"but no relevance marks"
                    )
            report = topics.BucketReport(
                topic_id=topic_id,
                edges=topic.bucket_edges,
                buckets=[
                    topics.BucketStat(
                        lo=b["lo"],
                        hi=b["hi"],
                        count=b["count"],
                        sample_page_ids=tuple(b["sample_page_ids"]),
                        relevance_fraction=f,
                    )
                    for b, f in zip(doc["buckets"], fractions)
                ],
                out_of_range=doc["out_of_range"],
                total=doc["total"],
                sample_size=doc["sample_size"],
                seed=doc["seed"],
            )
            threshold = topics.select_threshold(report)
            frozen_topic = topic.with_threshold(threshold)
            self.topics[topic_id] = frozen_topic
            topics.save_topic(
                frozen_topic, self.config.data_dir / "topics" / f"{topic_id}.json"
            )
            doc["frozen"] = True
            doc["threshold"] = threshold
            self._save_calibration(doc)
            return {"topic_id": topic_id, "threshold": threshold, "frozen": True}

    # -- retraining ------------------------------------------------------

    def post_retrain(self, topic_id: str, overrides: Optional[dict] = None) -> dict:
        if topic_id not in self.topics:
            raise NotFoundError(f"unknown topic {topic_id!r}")
        topic = self.topics[topic_id]
        if topic.threshold is None:
            raise ConflictError(f"topic {topic_id!r} has no threshold set")
        if not self._retrain_lock.acquire(blocking=False):
            raise ConflictError("another retraining run is in progress")
        try:
            last_used = self.registry["last_decision_id"].get(topic_id, "")
            new_decisions = [d for d in self.decisions if d.decision_id > last_used]
            if not new_decisions:
                raise ConflictError("no new labels: no decisions since last training")

            cfg = self.config.retrain_defaults
            if overrides:
                cfg = redd.TrainConfig.from_json({**cfg.to_json(), **overrides})

            filtered = topics.filter_on_topic(
                topic, [r for r in self.records if r.embedding_reduced is not None]
            )
            policy = triage.MergePolicy(
                eligible_page_ids=frozenset(r.page_id for r in filtered)
            )
            merged = triage.merge_decisions(self.records, self.decisions, policy)
            merged_filtered = topics.filter_on_topic(topic, list(merged.records))
            train_split = [
                r for r in merged_filtered if r.split == "train" and r.label is not None
            ]
            model = redd.train(train_split, cfg)

            # Success: persist corpus, model, registry (atomic swap order).
            versions = [int(v) for v in self.registry["versions"].get(topic_id, [])]
            new_version = (max(versions) + 1) if versions else 1
            model.version = new_version
            redd.save_model(model, self._model_path(new_version))
            corpus_tmp = self.config.data_dir / "corpus.jsonl.tmp"
            corpus_mod.save_corpus(
                list(merged.records),
                corpus_tmp,
                name=self.manifest.name if self.manifest else "corpus",
            )
            corpus_tmp.replace(self.config.data_dir / "corpus.jsonl")
            self.records = list(merged.records)
            self.registry["versions"].setdefault(topic_id, []).append(new_version)
            self.registry["active"][topic_id] = new_version
            self.registry["last_decision_id"][topic_id] = max(
                d.decision_id for d in self.decisions
            )
            self._save_registry()
            job_id = f"job{len(self.jobs) + 1:06d}"
            job = {
                "job_id": job_id,
                "status": "done",
                "topic_id": topic_id,
                "model_version": new_version,
                "n_train": len(train_split),
                "merged_pages": len(merged.audit),
            }
            self.jobs[job_id] = job
            return job
        finally:
            self._retrain_lock.release()

    def job_status(self, job_id: str) -> dict:
        if job_id not in self.jobs:
            raise NotFoundError(f"unknown job {job_id!r}")
        return self.jobs[job_id]

    # -- metrics ---------------------------------------------------------

    def get_metrics(
        self,
        version: int,
        topic_id: str,
        k: Optional[int] = None,
        focus_language: Optional[str] = None,
    ) -> dict:
        if topic_id not in self.topics:
            raise NotFoundError(f"unknown topic {topic_id!r}")
        topic = self.topics[topic_id]
        if topic.threshold is None:
            raise ConflictError(f"topic {topic_id!r} has no threshold set")
        model = self.load_model(version)
        filtered = topics.filter_on_topic(
            topic, [r for r in self.records if r.embedding_reduced is not None]
        )
        test_split = [r for r in filtered if r.split == "test" and r.label is not None]
        out: dict = {"model_version": version, "topic_id": topic_id}
        if test_split and len({r.label for r in test_split}) == 2:
            x = np.stack([r.embedding_reduced for r in test_split]).astype(np.float64)
            y = np.array([r.label for r in test_split])
            out["auc_test_filtered"] = metrics.auc_roc(redd.forward(model, x), y)
        else:
            out["auc_test_filtered"] = None

        if focus_language is None and test_split:
            langs = sorted({r.language for r in test_split})
            counts = {l: sum(1 for r in test_split if r.language == l) for l in langs}
            focus_language = max(counts, key=lambda l: (counts[l], l))
        if focus_language and test_split:
            scores = [s for _, s in redd.predict_pages(model, test_split)]
            table = metrics.language_score_table(test_split, scores, focus_language)
            out["language_table"] = table.to_json()

        queue_metrics = {}
        for queue in self.queues.values():
            if queue.model_version != version:
                continue
            queue_decisions = [d for d in self.decisions if d.queue_id == queue.queue_id]
            if not queue_decisions:
                continue
            k_eff = min(k or self.config.default_k, len(queue.items))
            evaluation = triage.evaluate_queue(queue, queue_decisions, k_eff)
            queue_metrics[queue.queue_id] = {
                "precision_at_k": evaluation.precision_at_k,
                "k": evaluation.k,
                "baseline": evaluation.baseline,
                "n_positive": evaluation.n_positive,
                "rank_histogram": list(evaluation.rank_histogram),
                "histogram_bin": evaluation.histogram_bin,
            }
        out["queues"] = queue_metrics
        return out


def bootstrap_data_dir(
    data_dir,
    records,
    topic: topics.TopicModel,
    model: redd.ReddModel,
    queue: Optional[triage.ReviewQueue] = None,
    manifest_name: str = "corpus",
) -> Path:
    """Lay out a service data directory from in-memory artifacts."""
    data_dir = Path(data_dir)
    for sub in ("topics", "models", "queues", "calibration"):
        (data_dir / sub).mkdir(parents=True, exist_ok=True)
    corpus_mod.save_corpus(records, data_dir / "corpus.jsonl", name=manifest_name)
    topics.save_topic(topic, data_dir / "topics" / f"{topic.topic_id}.json")
    redd.save_model(model, data_dir / "models" / f"v{model.version:04d}.json")
    registry = {
        "versions": {topic.topic_id: [model.version]},
        "active": {topic.topic_id: model.version},
        "last_decision_id": {topic.topic_id: ""},
    }
    (data_dir / "models" / "registry.json").write_text(
        json.dumps(registry, sort_keys=True) + "\n", encoding="utf-8"
    )
    if queue is not None:
        pipeline.save_queue(queue, data_dir / "queues" / f"{queue.queue_id}.json")
    return data_dir


# --- HTTP layer -----------------------------------------------------------------

_ROUTES = [
    ("GET", re.compile(r"^/health$"), "health"),
    ("GET", re.compile(r"^/queues$"), "queues_list"),
    ("GET", re.compile(r"^/queues/(?P<queue_id>[^/]+)$"), "queue_get"),
    ("POST", re.compile(r"^/queues/(?P<queue_id>[^/]+)/decisions$"), "decision_post"),
    ("GET", re.compile(r"^/topics/(?P<topic_id>[^/]+)/calibration$"), "calibration_get"),
    ("POST", re.compile(r"^/topics/(?P<topic_id>[^/]+)/calibration/marks$"), "mark_post"),
    ("POST", re.compile(r"^/topics/(?P<topic_id>[^/]+)/calibration/confirm$"), "confirm_post"),
    ("POST", re.compile(r"^/models/retrain$"), "retrain_post"),
    ("GET", re.compile(r"^/models/retrain/(?P<job_id>[^/]+)$"), "job_get"),
    ("GET", re.compile(r"^/models/(?P<version>\d+)/metrics$"), "metrics_get"),
]


class ReviewRequestHandler(BaseHTTPRequestHandler):
    server_version = "reddpipe-review/0.1"
    state: ServiceState  # injected by make_server

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, code: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header(
            "Access-Control-Allow-Headers",
            "Content-Type, Idempotency-Key, X-Reviewer-Token",
        )
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON body: {exc}") from exc
        if not isinstance(obj, dict):
            raise ValidationError("request body must be a JSON object")
        return obj

    def _query(self) -> dict:
        if "?" not in self.path:
            return {}
        out = {}
        for part in self.path.split("?", 1)[1].split("&"):
            if "=" in part:
                key, value = part.split("=", 1)
                out[key] = value
        return out

    def do_OPTIONS(self):
        self._send(200, {})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def _dispatch(self, method: str) -> None:
        path = self.path.split("?", 1)[0]
        for verb, pattern, name in _ROUTES:
            if verb != method:
                continue
            match = pattern.match(path)
            if match:
                try:
                    handler = getattr(self, f"_handle_{name}")
                    handler(**match.groupdict())
                except NotFoundError as exc:
                    self._send(404, {"error": str(exc)})
                except ConflictError as exc:
                    self._send(409, {"error": str(exc)})
                except ValidationError as exc:
                    self._send(400, {"error": str(exc)})
                except ReddpipeError as exc:
                    self._send(500, {"error": str(exc)})
                return
        self._send(404, {"error": f"no route for {method} {path}"})

    def _handle_health(self):
        self._send(200, {"status": "ok", "queues": len(self.state.queues)})

    def _handle_queues_list(self):
        self._send(200, self.state.list_queues())

    def _handle_queue_get(self, queue_id: str):
        query = self._query()
        start = int(query["start"]) if "start" in query else None
        end = int(query["end"]) if "end" in query else None
        self._send(200, self.state.get_queue(queue_id, start=start, end=end))

    def _handle_decision_post(self, queue_id: str):
        body = self._body()
        reviewer = self.headers.get("X-Reviewer-Token") or body.get("reviewer_id", "")
        idem = self.headers.get("Idempotency-Key") or body.get("idempotency_key")
        result = self.state.post_decision(
            queue_id=queue_id,
            domain=body.get("domain", ""),
            verdict=body.get("verdict", ""),
            reviewer_id=reviewer,
            note=body.get("note", ""),
            idempotency_key=idem,
        )
        self._send(201 if not result.get("duplicate") else 200, result)

    def _handle_calibration_get(self, topic_id: str):
        self._send(200, self.state.get_calibration(topic_id))

    def _handle_mark_post(self, topic_id: str):
        body = self._body()
        if "bucket_lo" not in body or "page_id" not in body or "relevant" not in body:
            raise ValidationError("mark needs bucket_lo, page_id and relevant")
        self._send(
            200,
            self.state.post_relevance_mark(
                topic_id,
                float(body["bucket_lo"]),
                str(body["page_id"]),
                bool(body["relevant"]),
            ),
        )

    def _handle_confirm_post(self, topic_id: str):
        self._send(200, self.state.confirm_calibration(topic_id))

    def _handle_retrain_post(self):
        body = self._body()
        topic_id = body.get("topic_id", "")
        if not topic_id:
            raise ValidationError("retrain needs topic_id")
        job = self.state.post_retrain(topic_id, body.get("train"))
        self._send(200, job)

    def _handle_job_get(self, job_id: str):
        self._send(200, self.state.job_status(job_id))

    def _handle_metrics_get(self, version: str):
        query = self._query()
        topic_id = query.get("topic")
        if not topic_id:
            if len(self.state.topics) == 1:
                topic_id = next(iter(self.state.topics))
            else:
                raise ValidationError("metrics needs ?topic=<topic_id>")
        k = int(query["k"]) if "k" in query else None
        focus = query.get("focus_language")
        self._send(
            200,
            self.state.get_metrics(int(version), topic_id, k=k, focus_language=focus),
        )


class ReviewHTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    request_queue_size = 128


def make_server(state: ServiceState, host: str = "127.0.0.1", port: int = 0) -> ReviewHTTPServer:
    handler = type("BoundHandler", (ReviewRequestHandler,), {"state": state})
    return ReviewHTTPServer((host, port), handler)


def serve_forever(
    data_dir,
    host: str = "127.0.0.1",
    port: int = 8765,
    retrain_defaults: Optional[redd.TrainConfig] = None,
) -> None:
    config = ServiceConfig(data_dir=Path(data_dir))
    if retrain_defaults is not None:
        config.retrain_defaults = retrain_defaults
    state = ServiceState(config)
    server = make_server(state, host, port)
    print(
        f"review service on http://{host}:{server.server_address[1]} (data: {data_dir})",
        flush=True,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
