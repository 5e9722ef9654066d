"""Domain-level aggregation, review queues, queue evaluation, and the merge
that folds human verdicts back into the training corpus.

The decision log is append-only line-delimited JSON: corrections are new
records, and the latest decision id wins per (queue, domain). Queues are
frozen snapshots tied to the model version that produced them.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus import PageRecord
from .errors import CorpusError, ValidationError
from .metrics import precision_at_k

logger = logging.getLogger(__name__)

VERDICTS = ("blocklist", "flag", "trustworthy", "skip")

DEFAULT_VERDICT_LABELS: Mapping[str, Optional[int]] = {
    "blocklist": 1,
    "trustworthy": 0,
    "flag": None,
    "skip": None,
}


@dataclass(frozen=True)
class DomainScore:
    """Aggregated disinformation score for one domain."""

    domain: str
    mean_score: float
    page_count: int
    score_std: float
    model_version: int = 0

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "mean_score": self.mean_score,
            "page_count": self.page_count,
            "score_std": self.score_std,
            "model_version": self.model_version,
        }


@dataclass(frozen=True)
class ReviewQueue:
    """Frozen ranked snapshot of the top domains for human review."""

    queue_id: str
    items: tuple
    cutoff: int
    created_at: str = ""
    model_version: int = 0

    def domains(self) -> list:
        return [d.domain for d in self.items]


@dataclass(frozen=True)
class ReviewDecision:
    """One appended human verdict; immutable, corrections are new records."""

    decision_id: str
    queue_id: str
    domain: str
    verdict: str
    reviewer_id: str
    timestamp: str
    note: str = ""
    idempotency_key: Optional[str] = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValidationError(
                f"unknown verdict {self.verdict!r}; expected one of {VERDICTS}"
            )

    def to_json(self) -> dict:
        return {
            "decision_id": self.decision_id,
            "queue_id": self.queue_id,
            "domain": self.domain,
            "verdict": self.verdict,
            "reviewer_id": self.reviewer_id,
            "timestamp": self.timestamp,
            "note": self.note,
            "idempotency_key": self.idempotency_key,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ReviewDecision":
        return cls(
            decision_id=obj["decision_id"],
            queue_id=obj["queue_id"],
            domain=obj["domain"],
            verdict=obj["verdict"],
            reviewer_id=obj["reviewer_id"],
            timestamp=obj["timestamp"],
            note=obj.get("note", "") or "",
            idempotency_key=obj.get("idempotency_key"),
        )


@dataclass(frozen=True)
class AggregationResult:
    domains: tuple
    excluded: dict = field(default_factory=dict)


def aggregate_domains(
    page_scores: Iterable[tuple],
    min_pages: int = 1,
    model_version: int = 0,
) -> AggregationResult:
    """Unweighted per-domain mean/std/count over (page_id, domain, score) rows.

    Domains with fewer than min_pages contributing pages are excluded and
    reported. Output is sorted by mean descending, domain name ascending.
    """
    if min_pages < 1:
        raise ValidationError("min_pages must be >= 1")
    by_domain: dict = {}
    for page_id, domain, score in page_scores:
        score = float(score)
        if not 0.0 < score < 1.0:
            raise ValidationError(
                f"page {page_id!r}: score must be in (0, 1), got {score}"
            )
        by_domain.setdefault(domain, []).append(score)

    domains = []
    excluded = {}
    for domain in sorted(by_domain):
        values = np.asarray(by_domain[domain])
        if len(values) < min_pages:
            excluded[domain] = len(values)
            continue
        domains.append(
            DomainScore(
                domain=domain,
                mean_score=float(values.mean()),
                page_count=len(values),
                score_std=float(values.std()),
                model_version=model_version,
            )
        )
    domains.sort(key=lambda d: (-d.mean_score, d.domain))
    return AggregationResult(domains=tuple(domains), excluded=excluded)


def build_queue(
    domains: Sequence[DomainScore],
    cutoff: int,
    model_version: int = 0,
    created_at: str = "",
    queue_id: Optional[str] = None,
) -> ReviewQueue:
    """Take the top-cutoff domains by mean score (name tie-break).

    The queue id defaults to a digest of the ranked content, so rebuilding
    from identical inputs yields the identical queue.
    """
    if cutoff < 1:
        raise ValidationError(f"cutoff must be >= 1, got {cutoff}")
    ranked = sorted(domains, key=lambda d: (-d.mean_score, d.domain))
    items = tuple(ranked[:cutoff])
    if queue_id is None:
        blob = json.dumps(
            [(d.domain, d.mean_score, d.page_count) for d in items] + [model_version]
        ).encode("utf-8")
        queue_id = "q" + hashlib.sha256(blob).hexdigest()[:12]
    return ReviewQueue(
        queue_id=queue_id,
        items=items,
        cutoff=cutoff,
        created_at=created_at,
        model_version=model_version,
    )


def latest_decisions(decisions: Iterable[ReviewDecision]) -> dict:
    """Latest-effective decision per (queue_id, domain); max decision_id wins."""
    latest: dict = {}
    for d in decisions:
        key = (d.queue_id, d.domain)
        if key not in latest or d.decision_id > latest[key].decision_id:
            latest[key] = d
    return latest


@dataclass(frozen=True)
class QueueEvaluation:
    precision_at_k: float
    baseline: float
    k: int
    n_positive: int
    rank_histogram: tuple
    histogram_bin: int
    positive_domains: tuple


def evaluate_queue(
    queue: ReviewQueue,
    decisions: Sequence[ReviewDecision],
    k: int,
    histogram_bin: int = 30,
) -> QueueEvaluation:
    """Precision@k, the blocklist base rate, and blocked-rank histogram.

    Positives are domains whose latest-effective verdict is blocklist. The
    histogram counts blocked domains per rank bin of width histogram_bin.
    """
    members = set(queue.domains())
    for d in decisions:
        if d.queue_id != queue.queue_id:
            raise ValidationError(
                f"decision {d.decision_id} references queue {d.queue_id!r}, "
                f"not {queue.queue_id!r}"
            )
        if d.domain not in members:
            raise ValidationError(
                f"decision {d.decision_id} references domain {d.domain!r} "
                f"not in the queue"
            )
    latest = latest_decisions(decisions)
    positives = {dom for (_, dom), d in latest.items() if d.verdict == "blocklist"}
    ranked = [(d.domain, d.mean_score) for d in queue.items]
    p_at_k = precision_at_k(ranked, positives, k)
    baseline = len(positives) / len(queue.items)
    n_bins = (len(queue.items) + histogram_bin - 1) // histogram_bin
    histogram = [0] * n_bins
    for rank, item in enumerate(queue.items, start=1):
        if item.domain in positives:
            histogram[(rank - 1) // histogram_bin] += 1
    return QueueEvaluation(
        precision_at_k=p_at_k,
        baseline=baseline,
        k=k,
        n_positive=len(positives),
        rank_histogram=tuple(histogram),
        histogram_bin=histogram_bin,
        positive_domains=tuple(sorted(positives)),
    )


@dataclass(frozen=True)
class MergePolicy:
    """How verdicts become labels, and which pages are eligible.

    ``eligible_page_ids`` restricts label changes to the topic-filtered
    pages (None means every page of the domain is eligible).
    """

    verdict_labels: Mapping[str, Optional[int]] = field(
        default_factory=lambda: dict(DEFAULT_VERDICT_LABELS)
    )
    eligible_page_ids: Optional[frozenset] = None


@dataclass(frozen=True)
class MergeResult:
    records: tuple
    audit: dict = field(default_factory=dict)
    skipped: tuple = ()


def merge_decisions(
    records: Sequence[PageRecord],
    decisions: Sequence[ReviewDecision],
    policy: MergePolicy = MergePolicy(),
) -> MergeResult:
    """Fold verdicts into page labels, returning a new corpus plus audit trail.

    The input corpus is never mutated; applying the same decision set twice
    is a fixed point. Decisions naming domains absent from the corpus are
    reported in ``skipped``.
    """
    latest = latest_decisions(decisions)
    domain_verdict: dict = {}
    for (_, domain), d in sorted(latest.items(), key=lambda kv: kv[1].decision_id):
        domain_verdict[domain] = d

    known_domains = {rec.domain for rec in records}
    skipped = tuple(
        (dom, "domain not in corpus")
        for dom in sorted(domain_verdict)
        if dom not in known_domains
    )

    audit: dict = {}
    out = []
    for rec in records:
        decision = domain_verdict.get(rec.domain)
        if decision is None:
            out.append(rec)
            continue
        label = policy.verdict_labels.get(decision.verdict)
        eligible = (
            policy.eligible_page_ids is None
            or rec.page_id in policy.eligible_page_ids
        )
        if label is None or not eligible:
            out.append(rec)
            continue
        audit[rec.page_id] = decision.decision_id
        out.append(rec if rec.label == label else replace(rec, label=label))
    return MergeResult(records=tuple(out), audit=audit, skipped=skipped)


# --- decision log -------------------------------------------------------------

def append_decision(path, decision: ReviewDecision) -> None:
    """Append one record and fsync before returning (durable-write contract)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    line = json.dumps(decision.to_json(), sort_keys=True) + "\n"
    with path.open("a", encoding="utf-8") as fh:
        fh.write(line)
        fh.flush()
        os.fsync(fh.fileno())


def read_decision_log(path) -> list:
    """Replay the log; a corrupt trailing partial line is ignored with a warning."""
    path = Path(path)
    if not path.exists():
        return []
    raw = path.read_text(encoding="utf-8")
    if not raw:
        return []
    lines = raw.split("\n")
    trailing_partial = lines and lines[-1] != ""
    if lines and lines[-1] == "":
        lines = lines[:-1]
    decisions = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        is_last = i == len(lines) - 1
        try:
            obj = json.loads(line)
            decisions.append(ReviewDecision.from_json(obj))
        except (json.JSONDecodeError, KeyError, ValidationError) as exc:
            if is_last and trailing_partial:
                logger.warning(
                    "decision log %s: ignoring corrupt trailing partial line: %r",
                    path,
                    line[:80],
                )
                continue
            raise CorpusError(f"{path}:{i + 1}: corrupt decision record: {exc}") from exc
    return decisions
