"""Deterministic synthetic corpora: clustered Gaussian pages with languages,
labels, categories, and domains.

Used as the desk-scale stand-in for real annotated page data, both by the
experiment runners and by the test suite. Everything is a pure function of
(spec, seed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .corpus import PageRecord
from .errors import ValidationError


@dataclass(frozen=True)
class CellCount:
    """Exact number of pages to generate for one (topic, language, label) cell."""

    topic: str
    language: str
    label: int
    count: int


@dataclass(frozen=True)
class SyntheticSpec:
    """Declarative description of a synthetic corpus.

    ``topics`` maps topic name to its cluster center (a d_full vector);
    ``language_offsets`` maps language code to an additive offset vector;
    ``class_shift`` is added to every label=1 page. Cell counts are honored
    exactly. ``pages_per_domain`` groups pages of one cell into synthetic
    domains; ``test_fraction`` is the per-page probability of the test split.
    """

    d_full: int
    topics: dict
    cells: tuple
    language_offsets: dict = field(default_factory=dict)
    class_shift: Optional[np.ndarray] = None
    noise_std: float = 1.0
    pages_per_domain: int = 4
    test_fraction: float = 0.2
    id_prefix: str = "p"

    def __post_init__(self):
        if self.d_full <= 0:
            raise ValidationError("d_full must be positive")
        if not self.topics:
            raise ValidationError("at least one topic is required")
        if not self.cells:
            raise ValidationError("at least one cell count is required")
        if self.noise_std < 0:
            raise ValidationError("noise_std must be >= 0")
        if self.pages_per_domain < 1:
            raise ValidationError("pages_per_domain must be >= 1")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ValidationError("test_fraction must be in [0, 1)")
        topics = {k: self._vec(v, f"topic {k!r}") for k, v in self.topics.items()}
        offsets = {
            k: self._vec(v, f"language offset {k!r}")
            for k, v in self.language_offsets.items()
        }
        shift = (
            self._vec(self.class_shift, "class_shift")
            if self.class_shift is not None
            else None
        )
        object.__setattr__(self, "topics", topics)
        object.__setattr__(self, "language_offsets", offsets)
        object.__setattr__(self, "class_shift", shift)
        object.__setattr__(self, "cells", tuple(self.cells))
        for cell in self.cells:
            if cell.count <= 0:
                raise ValidationError(
                    f"cell ({cell.topic}, {cell.language}, {cell.label}): "
                    f"count must be positive, got {cell.count}"
                )
            if cell.label not in (0, 1):
                raise ValidationError("cell label must be 0 or 1")
            if cell.topic not in topics:
                raise ValidationError(f"cell references unknown topic {cell.topic!r}")

    def _vec(self, v, what: str) -> np.ndarray:
        arr = np.asarray(v, dtype=np.float64)
        if arr.shape != (self.d_full,):
            raise ValidationError(
                f"{what}: expected a vector of dimension {self.d_full}, got shape {arr.shape}"
            )
        arr.setflags(write=False)
        return arr


def generate_synthetic_corpus(spec: SyntheticSpec, seed: int) -> list:
    """Generate page records deterministically from (spec, seed).

    Per page: embedding_full = topic center + language offset + label * shift
    + N(0, noise_std^2) noise; categories = {topic}; domains group
    ``pages_per_domain`` consecutive pages of one cell.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    records: list = []
    counter = 0
    for cell in spec.cells:
        base = spec.topics[cell.topic].copy()
        if cell.language in spec.language_offsets:
            base = base + spec.language_offsets[cell.language]
        if cell.label == 1 and spec.class_shift is not None:
            base = base + spec.class_shift
        for i in range(cell.count):
            noise = rng.normal(0.0, spec.noise_std, spec.d_full)
            emb = base + noise
            domain_idx = i // spec.pages_per_domain
            split = "test" if rng.random() < spec.test_fraction else "train"
            counter += 1
            records.append(
                PageRecord(
                    page_id=f"{spec.id_prefix}{counter:05d}",
                    domain=(
                        f"{cell.topic}-{cell.language}-l{cell.label}"
                        f"-d{domain_idx:03d}.example"
                    ),
                    language=cell.language,
                    text=f"{cell.topic} {cell.language} page {counter}",
                    embedding_full=emb,
                    categories=frozenset({cell.topic}),
                    label=cell.label,
                    split=split,
                )
            )
    return records


# --- spec files -------------------------------------------------------------

def _vector_from_form(form, d_full: int) -> np.ndarray:
    """Decode a vector form: explicit list, {"axis", "scale"}, or
    {"random_unit", "scale"} (seeded random unit vector)."""
    if isinstance(form, (list, tuple)):
        return np.asarray(form, dtype=np.float64)
    if isinstance(form, dict) and "axis" in form:
        v = np.zeros(d_full)
        v[int(form["axis"])] = float(form.get("scale", 1.0))
        return v
    if isinstance(form, dict) and "random_unit" in form:
        sub = np.random.Generator(np.random.PCG64(int(form["random_unit"])))
        v = sub.standard_normal(d_full)
        v /= np.linalg.norm(v)
        return v * float(form.get("scale", 1.0))
    raise ValidationError(f"unrecognized vector form: {form!r}")


def spec_from_json(obj: dict) -> SyntheticSpec:
    try:
        d_full = int(obj["d_full"])
        topics = {k: _vector_from_form(v, d_full) for k, v in obj["topics"].items()}
        offsets = {
            k: _vector_from_form(v, d_full)
            for k, v in obj.get("language_offsets", {}).items()
        }
        shift = obj.get("class_shift")
        cells = tuple(
            CellCount(c["topic"], c["language"], int(c["label"]), int(c["count"]))
            for c in obj["cells"]
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed synthetic spec: {exc!r}") from exc
    return SyntheticSpec(
        d_full=d_full,
        topics=topics,
        cells=cells,
        language_offsets=offsets,
        class_shift=None if shift is None else _vector_from_form(shift, d_full),
        noise_std=float(obj.get("noise_std", 1.0)),
        pages_per_domain=int(obj.get("pages_per_domain", 4)),
        test_fraction=float(obj.get("test_fraction", 0.2)),
        id_prefix=str(obj.get("id_prefix", "p")),
    )


def load_spec(path) -> SyntheticSpec:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"synthetic spec file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        return spec_from_json(json.load(fh))


# --- fixtures shared by experiments and tests --------------------------------

def default_pipeline_spec(d_full: int = 96) -> SyntheticSpec:
    """Two-topic labeled corpus for end-to-end pipeline runs.

    One on-topic cluster (with a class-conditional shift separating the
    labels) and one off-topic cluster; the pipeline projects, filters on the
    on-topic centroid, trains, and ranks domains.
    """
    on_center = np.zeros(d_full)
    on_center[0] = 10.0
    off_center = np.zeros(d_full)
    off_center[0] = -10.0
    fr_offset = np.zeros(d_full)
    fr_offset[2] = 0.5
    shift = np.zeros(d_full)
    shift[1] = 4.0
    return SyntheticSpec(
        d_full=d_full,
        topics={"warcoverage": on_center, "cooking": off_center},
        cells=(
            CellCount("warcoverage", "en", 1, 300),
            CellCount("warcoverage", "en", 0, 300),
            CellCount("warcoverage", "fr", 1, 100),
            CellCount("warcoverage", "fr", 0, 100),
            CellCount("cooking", "en", 1, 400),
            CellCount("cooking", "en", 0, 400),
        ),
        language_offsets={"fr": fr_offset},
        class_shift=shift,
        noise_std=0.6,
        pages_per_domain=4,
        test_fraction=0.25,
    )


def make_clustered_pages(
    n_pages: int,
    n_categories: int,
    d_full: int,
    seed: int,
    noise_std: float = 0.045,
) -> list:
    """Pages in ``n_categories`` Gaussian clusters around random unit centers.

    Cluster centers are unit vectors; per-coordinate noise keeps clusters
    compact but not degenerate, which makes nearest-neighbor category
    agreement high without saturating.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    centers = rng.standard_normal((n_categories, d_full))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    records = []
    for i in range(n_pages):
        c = i % n_categories
        emb = centers[c] + rng.normal(0.0, noise_std, d_full)
        records.append(
            PageRecord(
                page_id=f"c{i:05d}",
                domain=f"cat{c}.example",
                language="en",
                text=f"cluster {c} page {i}",
                embedding_full=emb,
                categories=frozenset({f"cat{c}"}),
            )
        )
    return records


def make_blob_pages(
    n_per_class: int,
    d_red: int,
    separation: float,
    seed: int,
    noise_std: float = 1.0,
    test_fraction: float = 0.0,
    domains_per_class: int = 10,
) -> list:
    """Two Gaussian blobs in reduced-embedding space, labeled 0/1."""
    rng = np.random.Generator(np.random.PCG64(seed))
    shift = np.zeros(d_red)
    shift[0] = separation
    records = []
    for i in range(2 * n_per_class):
        label = i % 2
        emb = label * shift + rng.normal(0.0, noise_std, d_red)
        split = "test" if rng.random() < test_fraction else "train"
        records.append(
            PageRecord(
                page_id=f"b{i:05d}",
                domain=f"blob{label}-d{(i // 2) % domains_per_class:02d}.example",
                language="en",
                embedding_reduced=emb,
                label=label,
                split=split,
            )
        )
    return records


def make_ring_pages(
    n_per_class: int,
    seed: int,
    r_inner: float = 1.0,
    r_outer: float = 3.0,
    noise_std: float = 0.15,
    test_fraction: float = 0.25,
) -> list:
    """Concentric 2-D rings: radially separable, not linearly separable.

    Inner ring is label 0, outer ring label 1.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    records = []
    for i in range(2 * n_per_class):
        label = i % 2
        radius = (r_outer if label else r_inner) + rng.normal(0.0, noise_std)
        angle = rng.uniform(0.0, 2.0 * np.pi)
        emb = np.array([radius * np.cos(angle), radius * np.sin(angle)])
        split = "test" if rng.random() < test_fraction else "train"
        records.append(
            PageRecord(
                page_id=f"r{i:05d}",
                domain=f"ring{label}.example",
                language="en",
                embedding_reduced=emb,
                label=label,
                split=split,
            )
        )
    return records
