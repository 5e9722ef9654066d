"""Embedding acquisition seam and Gaussian random projection.

The real multilingual encoder stays outside this artifact; anything exposing
``name``, ``dimension`` and ``embed(text, language)`` plugs in. A
deterministic hash-seeded embedder is provided for experiments, plus the
dimension-reduction map: a seeded Gaussian matrix with entries
N(0, 1/d_red), which preserves squared norms in expectation.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, replace
from functools import lru_cache
from hashlib import blake2b
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .corpus import PageRecord
from .errors import DimensionError, ValidationError

GENERATOR_NAME = "pcg64-standard-normal"


class Embedder(Protocol):
    """Anything that turns page text into a fixed-dimension finite vector."""

    name: str
    dimension: int

    def embed(self, text: str, language: str = "") -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """Seeded Gaussian projection from d_full (cols) down to d_red (rows).

    Entries regenerate exactly from (seed, rows, cols); the scale is the
    per-entry standard deviation 1/sqrt(rows).
    """

    rows: int
    cols: int
    seed: int
    scale: float
    entries: np.ndarray

    def __post_init__(self):
        if self.entries.shape != (self.rows, self.cols):
            raise DimensionError(
                f"projection entries shape {self.entries.shape} != "
                f"({self.rows}, {self.cols})"
            )
        if not np.all(np.isfinite(self.entries)):
            raise ValidationError("projection entries must be finite")
        self.entries.setflags(write=False)


def _gaussian_entries(d_full: int, d_red: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    entries = rng.standard_normal((d_red, d_full)) / np.sqrt(d_red)
    return entries.astype(np.float32)


def make_projection(d_full: int, d_red: int, seed: int) -> ProjectionMatrix:
    """Build the d_red x d_full projection with i.i.d. N(0, 1/d_red) entries."""
    if d_red <= 0:
        raise ValidationError(f"d_red must be positive, got {d_red}")
    if d_red > d_full:
        raise DimensionError(f"d_red {d_red} exceeds d_full {d_full}")
    return ProjectionMatrix(
        rows=d_red,
        cols=d_full,
        seed=seed,
        scale=float(1.0 / np.sqrt(d_red)),
        entries=_gaussian_entries(d_full, d_red, seed),
    )


def project(m: ProjectionMatrix, v) -> np.ndarray:
    """Plain matrix-vector product m @ v; no centering, no normalization."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != m.cols:
        raise DimensionError(
            f"expected a vector of dimension {m.cols}, got shape {arr.shape}"
        )
    return m.entries.astype(np.float64) @ arr


def project_batch(m: ProjectionMatrix, x) -> np.ndarray:
    """Row-wise projection of an (n, d_full) matrix to (n, d_red)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != m.cols:
        raise DimensionError(
            f"expected an (n, {m.cols}) matrix, got shape {arr.shape}"
        )
    return arr @ m.entries.astype(np.float64).T


def reduce_pages(records: Sequence[PageRecord], m: ProjectionMatrix) -> list:
    """Return new records with embedding_reduced = projection of embedding_full."""
    out = []
    for rec in records:
        if rec.embedding_full is None:
            raise ValidationError(f"page {rec.page_id!r} has no embedding_full")
        reduced = project(m, rec.embedding_full)
        out.append(replace(rec, embedding_reduced=reduced.astype(np.float32)))
    return out


# --- synthetic embedder -------------------------------------------------------

@lru_cache(maxsize=65536)
def _hash_vector(key: str, dimension: int, seed: int) -> np.ndarray:
    digest = blake2b(f"{seed}:{key}".encode("utf-8"), digest_size=8).digest()
    sub = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))
    vec = sub.standard_normal(dimension)
    vec.setflags(write=False)
    return vec


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def synthetic_embed(
    text: str,
    language: str,
    dimension: int,
    seed: int = 0,
    lang_weight: float = 0.0,
) -> np.ndarray:
    """Deterministic hash-seeded embedding mixing content and language.

    The content component is the unit-normalized mean of per-token hash
    vectors, so pages sharing vocabulary land close together. ``lang_weight``
    (lambda) blends in a per-language offset: 0 gives language-agnostic
    embeddings (a fine-tuned multilingual space), near 1 gives
    language-dominated ones (the raw-text confound).
    """
    if dimension <= 0:
        raise ValidationError(f"dimension must be positive, got {dimension}")
    if not 0.0 <= lang_weight <= 1.0:
        raise ValidationError(f"lang_weight must be in [0, 1], got {lang_weight}")
    tokens = text.split()
    if tokens:
        content = _unit(
            np.mean([_hash_vector(f"tok:{t}", dimension, seed) for t in tokens], axis=0)
        )
    else:
        content = np.zeros(dimension)
    out = (1.0 - lang_weight) * content
    if lang_weight > 0.0 and language:
        out = out + lang_weight * _unit(_hash_vector(f"lang:{language}", dimension, seed))
    return out


@dataclass(frozen=True)
class SyntheticEmbedder:
    """Embedder-protocol wrapper around synthetic_embed."""

    dimension: int
    seed: int = 0
    lang_weight: float = 0.0
    name: str = "synthetic"

    def embed(self, text: str, language: str = "") -> np.ndarray:
        return synthetic_embed(
            text, language, self.dimension, seed=self.seed, lang_weight=self.lang_weight
        )


def embed_pages(records: Sequence[PageRecord], embedder: Embedder) -> list:
    """Return new records with embedding_full computed by the embedder."""
    out = []
    for rec in records:
        vec = np.asarray(embedder.embed(rec.text, rec.language), dtype=np.float64)
        if vec.shape != (embedder.dimension,):
            raise DimensionError(
                f"embedder {embedder.name!r} returned shape {vec.shape}, "
                f"declared dimension {embedder.dimension}"
            )
        if not np.all(np.isfinite(vec)):
            raise ValidationError(
                f"embedder {embedder.name!r} returned non-finite values "
                f"for page {rec.page_id!r}"
            )
        out.append(replace(rec, embedding_full=vec.astype(np.float32)))
    return out


# --- projection file ----------------------------------------------------------

def save_projection(m: ProjectionMatrix, path) -> None:
    """Write header + row-major little-endian float32 entries."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = base64.b64encode(
        np.ascontiguousarray(m.entries, dtype="<f4").tobytes()
    ).decode("ascii")
    doc = {
        "d_full": m.cols,
        "d_red": m.rows,
        "seed": m.seed,
        "scale": m.scale,
        "generator": GENERATOR_NAME,
        "entries_b64": payload,
    }
    path.write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")


def load_projection(path) -> ProjectionMatrix:
    """Load a projection file; stored entries must equal regeneration from the header."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"projection file not found: {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("generator") != GENERATOR_NAME:
        raise ValidationError(
            f"{path}: unknown generator {doc.get('generator')!r}; "
            f"expected {GENERATOR_NAME!r}"
        )
    d_full, d_red, seed = int(doc["d_full"]), int(doc["d_red"]), int(doc["seed"])
    raw = base64.b64decode(doc["entries_b64"])
    entries = np.frombuffer(raw, dtype="<f4").reshape(d_red, d_full).copy()
    regenerated = _gaussian_entries(d_full, d_red, seed)
    if not np.array_equal(entries, regenerated):
        raise ValidationError(
            f"{path}: stored entries do not match regeneration from header"
        )
    return ProjectionMatrix(
        rows=d_red, cols=d_full, seed=seed, scale=float(doc["scale"]), entries=entries
    )
