"""Evaluation metrics: nearest-neighbor category agreement (pSameCat),
AUC-ROC, precision@k, and per-language score diagnostics.

All neighbor search is exact and exhaustive; ties are broken by page id so
every number is deterministic across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .corpus import PageRecord
from .errors import ValidationError


@dataclass(frozen=True)
class PSameCatConfig:
    """k nearest neighbors by cosine distance; ties break by page_id."""

    k_neighbors: int = 5
    distance: str = "cosine"
    tie_rule: str = "page_id"

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValidationError("k_neighbors must be >= 1")
        if self.distance != "cosine":
            raise ValidationError(f"unsupported distance {self.distance!r}")
        if self.tie_rule != "page_id":
            raise ValidationError(f"unsupported tie rule {self.tie_rule!r}")


@dataclass(frozen=True)
class PSameCatResult:
    """Mean neighbor category agreement plus the exclusion report."""

    score: float
    n_evaluated: int
    n_excluded: int


def psamecat(
    pages: Sequence[PageRecord],
    cfg: PSameCatConfig = PSameCatConfig(),
    embedding_field: str = "embedding_reduced",
) -> PSameCatResult:
    """Average fraction of a page's k nearest neighbors sharing a category.

    Pages with empty category sets take part neither as queries nor as
    candidates; they are counted in the result. The query page is excluded
    from its own neighbor list. Search is exhaustive.
    """
    if embedding_field not in ("embedding_full", "embedding_reduced"):
        raise ValidationError(f"unknown embedding field {embedding_field!r}")
    eligible = [p for p in pages if p.categories]
    n_excluded = len(pages) - len(eligible)
    k = cfg.k_neighbors
    if len(eligible) < k + 1:
        raise ValidationError(
            f"need at least {k + 1} pages with categories, got {len(eligible)}"
        )
    vectors = []
    for rec in eligible:
        vec = getattr(rec, embedding_field)
        if vec is None:
            raise ValidationError(f"page {rec.page_id!r} has no {embedding_field}")
        vectors.append(np.asarray(vec, dtype=np.float64))
    mat = np.stack(vectors)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    mat = np.where(norms > 0.0, mat / np.where(norms > 0.0, norms, 1.0), 0.0)
    sims = mat @ mat.T

    ids = np.array([rec.page_id for rec in eligible])
    cats = [rec.categories for rec in eligible]
    fractions = np.empty(len(eligible))
    for i in range(len(eligible)):
        row = sims[i].copy()
        row[i] = -np.inf  # self never a neighbor
        # lexsort: primary key last; descending similarity, then ascending id
        order = np.lexsort((ids, -row))
        neighbors = order[:k]
        shared = sum(1 for j in neighbors if not cats[i].isdisjoint(cats[j]))
        fractions[i] = shared / k
    return PSameCatResult(
        score=float(np.mean(fractions)),
        n_evaluated=len(eligible),
        n_excluded=n_excluded,
    )


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean rank of their group."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc_roc(scores, labels) -> float:
    """Probability a random positive outscores a random negative; ties count 1/2."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape:
        raise ValidationError(f"lengths differ: {s.shape} vs {y.shape}")
    pos = y == 1
    neg = y == 0
    n_pos = int(pos.sum())
    n_neg = int(neg.sum())
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("auc_roc requires both classes present")
    ranks = _average_ranks(s)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def make_ranked(pairs: Sequence[tuple]) -> list:
    """Sort (id, score) pairs by score descending, id ascending; ids must be unique."""
    items = [(str(i), float(s)) for i, s in pairs]
    if len({i for i, _ in items}) != len(items):
        raise ValidationError("ranked list ids must be unique")
    items.sort(key=lambda item: (-item[1], item[0]))
    return items


def precision_at_k(ranked: Sequence[tuple], positives, k: int) -> float:
    """|top-k intersect positives| / k over an already-ordered ranked list."""
    if not 1 <= k <= len(ranked):
        raise ValidationError(f"k must be in [1, {len(ranked)}], got {k}")
    scores = [float(s) for _, s in ranked]
    if any(b > a for a, b in zip(scores, scores[1:])):
        raise ValidationError("ranked list scores must be non-increasing")
    positives = set(positives)
    hits = sum(1 for item_id, _ in ranked[:k] if item_id in positives)
    return hits / k


@dataclass(frozen=True)
class LanguageCell:
    count: int
    mean: Optional[float]
    std: Optional[float]


@dataclass(frozen=True)
class LanguageScoreTable:
    """Mean/std/count of scores per (class, focus-vs-other-language) cell."""

    focus_language: str
    cells: dict = field(default_factory=dict)

    def cell(self, label: int, group: str) -> LanguageCell:
        return self.cells[(label, group)]

    def to_json(self) -> dict:
        out = {"focus_language": self.focus_language}
        names = {0: "trustworthy", 1: "disinformation"}
        for (label, group), cell in sorted(self.cells.items()):
            key = f"{names[label]}_{group}"
            out[key] = {"count": cell.count, "mean": cell.mean, "std": cell.std}
        return out


def language_score_table(
    pages: Sequence[PageRecord],
    scores: Sequence[float],
    focus_language: str,
) -> LanguageScoreTable:
    """Score statistics split by class and by focus language vs the rest.

    Empty cells report count 0 with mean/std left undefined (None), never 0.
    """
    if not pages:
        raise ValidationError("language_score_table requires at least one page")
    if len(pages) != len(scores):
        raise ValidationError("pages and scores lengths differ")
    if not any(p.language == focus_language for p in pages):
        raise ValidationError(f"focus language {focus_language!r} not present")
    groups: dict = {(label, grp): [] for label in (0, 1) for grp in ("focus", "other")}
    for rec, score in zip(pages, scores):
        if rec.label is None:
            raise ValidationError(f"page {rec.page_id!r} has no label")
        grp = "focus" if rec.language == focus_language else "other"
        groups[(rec.label, grp)].append(float(score))
    cells = {}
    for key, values in groups.items():
        if values:
            arr = np.asarray(values)
            cells[key] = LanguageCell(
                count=len(values), mean=float(arr.mean()), std=float(arr.std())
            )
        else:
            cells[key] = LanguageCell(count=0, mean=None, std=None)
    return LanguageScoreTable(focus_language=focus_language, cells=cells)
