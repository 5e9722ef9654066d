"""Zero-shot topic projection: centroid building, cosine scoring, bucket
calibration, threshold selection, and corpus filtering.

A topic is the arithmetic mean of a few example pages' reduced embeddings.
Pages are ranked by cosine similarity against it; a human inspects samples
from similarity buckets and the threshold is the lower edge of the
lowest-similarity bucket that is still majority-relevant.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import PageRecord
from .errors import DimensionError, ValidationError

DEFAULT_BUCKET_EDGES = (0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0)


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between a and b; zero-norm inputs score 0.0."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise DimensionError(
            f"cosine_similarity: shapes {va.shape} and {vb.shape} do not match"
        )
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True, eq=False)
class TopicModel:
    """Topic centroid with optional frozen threshold and bucket edges."""

    topic_id: str
    centroid: np.ndarray
    example_page_ids: tuple
    bucket_edges: tuple = DEFAULT_BUCKET_EDGES
    threshold: Optional[float] = None
    created_at: str = ""

    def __post_init__(self):
        arr = np.asarray(self.centroid, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "centroid", arr)
        object.__setattr__(self, "example_page_ids", tuple(self.example_page_ids))
        edges = tuple(float(e) for e in self.bucket_edges)
        if len(edges) < 2:
            raise ValidationError("bucket_edges needs at least two edges")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValidationError(f"bucket_edges must be strictly ascending: {edges}")
        object.__setattr__(self, "bucket_edges", edges)
        if self.threshold is not None and self.threshold not in edges:
            raise ValidationError(
                f"threshold {self.threshold} is not one of the bucket edges {edges}"
            )

    def with_threshold(self, value: float) -> "TopicModel":
        return replace(self, threshold=float(value))


def build_topic(
    example_pages: Sequence[PageRecord],
    topic_id: str = "topic",
    bucket_edges: Sequence[float] = DEFAULT_BUCKET_EDGES,
    created_at: str = "",
) -> TopicModel:
    """Average the example pages' reduced embeddings into a topic centroid."""
    if not example_pages:
        raise ValidationError("build_topic requires at least one example page")
    vectors = []
    for rec in example_pages:
        if rec.embedding_reduced is None:
            raise ValidationError(f"example page {rec.page_id!r} has no embedding_reduced")
        vectors.append(np.asarray(rec.embedding_reduced, dtype=np.float64))
    dims = {v.shape[0] for v in vectors}
    if len(dims) != 1:
        raise DimensionError(f"example embeddings have mixed dimensions {sorted(dims)}")
    centroid = np.mean(vectors, axis=0)
    return TopicModel(
        topic_id=topic_id,
        centroid=centroid,
        example_page_ids=tuple(r.page_id for r in example_pages),
        bucket_edges=tuple(bucket_edges),
        created_at=created_at,
    )


def _similarities(t: TopicModel, pages: Sequence[PageRecord]) -> np.ndarray:
    dim = t.centroid.shape[0]
    mat = np.empty((len(pages), dim), dtype=np.float64)
    for i, rec in enumerate(pages):
        if rec.embedding_reduced is None:
            raise ValidationError(f"page {rec.page_id!r} has no embedding_reduced")
        if rec.embedding_reduced.shape[0] != dim:
            raise DimensionError(
                f"page {rec.page_id!r}: embedding dimension "
                f"{rec.embedding_reduced.shape[0]} != centroid dimension {dim}"
            )
        mat[i] = rec.embedding_reduced
    c_norm = np.linalg.norm(t.centroid)
    norms = np.linalg.norm(mat, axis=1)
    if c_norm == 0.0:
        return np.zeros(len(pages))
    sims = mat @ t.centroid
    safe = np.where(norms > 0.0, norms * c_norm, 1.0)
    sims = np.where(norms > 0.0, sims / safe, 0.0)
    return np.clip(sims, -1.0, 1.0)


def score_pages(t: TopicModel, pages: Sequence[PageRecord]) -> list:
    """Score every page against the topic, sorted by similarity descending.

    Ties break by page_id ascending so the ranking is a total order.
    """
    sims = _similarities(t, pages)
    scored = [(rec.page_id, float(s)) for rec, s in zip(pages, sims)]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored


@dataclass
class BucketStat:
    """One similarity bucket [lo, hi): count, sampled page ids, reviewer fraction."""

    lo: float
    hi: float
    count: int = 0
    sample_page_ids: tuple = ()
    relevance_fraction: Optional[float] = None


@dataclass
class BucketReport:
    """Histogram of similarity scores over a topic's bucket edges."""

    topic_id: str
    edges: tuple
    buckets: list
    out_of_range: int
    total: int
    sample_size: int
    seed: int

    def with_fractions(self, fractions: Sequence[Optional[float]]) -> "BucketReport":
        if len(fractions) != len(self.buckets):
            raise ValidationError(
                f"expected {len(self.buckets)} fractions, got {len(fractions)}"
            )
        buckets = [
            replace(b, relevance_fraction=f) for b, f in zip(self.buckets, fractions)
        ]
        return replace(self, buckets=buckets)


def _bucket_index(edges: Sequence[float], score: float) -> Optional[int]:
    # Half-open buckets [e_i, e_{i+1}); the top bucket is closed at the right.
    if score < edges[0] or score > edges[-1]:
        return None
    if score == edges[-1]:
        return len(edges) - 2
    return bisect_right(edges, score) - 1


def bucket_report(
    t: TopicModel,
    scored: Sequence[tuple],
    sample_size: int = 4,
    seed: int = 0,
) -> BucketReport:
    """Assign scores to buckets and draw a deterministic sample per bucket.

    Scores outside [min edge, max edge] are counted as out-of-range, never
    silently dropped. Samples are drawn without replacement from the
    bucket's page ids (sorted first, so input order is irrelevant).
    """
    edges = t.bucket_edges
    members: list = [[] for _ in range(len(edges) - 1)]
    out_of_range = 0
    for page_id, score in scored:
        idx = _bucket_index(edges, score)
        if idx is None:
            out_of_range += 1
        else:
            members[idx].append(page_id)

    children = np.random.SeedSequence(seed).spawn(len(members))
    buckets = []
    for i, ids in enumerate(members):
        ids_sorted = sorted(ids)
        take = min(sample_size, len(ids_sorted))
        if take > 0:
            rng = np.random.Generator(np.random.PCG64(children[i]))
            picks = rng.choice(len(ids_sorted), size=take, replace=False)
            sample = tuple(ids_sorted[j] for j in picks)
        else:
            sample = ()
        buckets.append(
            BucketStat(lo=edges[i], hi=edges[i + 1], count=len(ids_sorted), sample_page_ids=sample)
        )
    return BucketReport(
        topic_id=t.topic_id,
        edges=edges,
        buckets=buckets,
        out_of_range=out_of_range,
        total=len(scored),
        sample_size=sample_size,
        seed=seed,
    )


def select_threshold(report: BucketReport) -> float:
    """Pick the threshold from reviewer relevance fractions.

    Scans buckets from the one nearest 1 downward and stops at the first
    bucket that is not majority-relevant (fraction > 0.5 strictly); returns
    the lower edge of the lowest bucket that passed. Empty buckets fail the
    majority test. If no bucket passes, falls back to the top bucket's
    lower edge.
    """
    for bucket in report.buckets:
        if bucket.count > 0 and bucket.relevance_fraction is None:
            raise ValidationError(
                f"bucket [{bucket.lo}, {bucket.hi}) has pages but no relevance fraction"
            )
    last_pass: Optional[BucketStat] = None
    for bucket in reversed(report.buckets):
        frac = bucket.relevance_fraction
        if bucket.count > 0 and frac is not None and frac > 0.5:
            last_pass = bucket
        else:
            break
    if last_pass is None:
        return report.buckets[-1].lo
    return last_pass.lo


def filter_on_topic(t: TopicModel, pages: Sequence[PageRecord]) -> list:
    """Keep exactly the pages scoring >= the frozen threshold, in input order."""
    if t.threshold is None:
        raise ValidationError(f"topic {t.topic_id!r} has no threshold set")
    sims = _similarities(t, pages)
    return [rec for rec, s in zip(pages, sims) if s >= t.threshold]


# --- topic file ---------------------------------------------------------------

def save_topic(t: TopicModel, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "topic_id": t.topic_id,
        "example_page_ids": list(t.example_page_ids),
        "centroid": [float(v) for v in t.centroid],
        "bucket_edges": [float(e) for e in t.bucket_edges],
        "threshold": t.threshold,
        "created_at": t.created_at,
    }
    path.write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")


def load_topic(path) -> TopicModel:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"topic file not found: {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    try:
        return TopicModel(
            topic_id=doc["topic_id"],
            centroid=np.asarray(doc["centroid"], dtype=np.float64),
            example_page_ids=tuple(doc["example_page_ids"]),
            bucket_edges=tuple(doc["bucket_edges"]),
            threshold=doc["threshold"],
            created_at=doc.get("created_at", ""),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed topic file: {exc!r}") from exc
