"""Page records, dataset manifests, page-text assembly, and corpus file I/O.

A corpus is a UTF-8 line-delimited file of JSON objects, one page per line,
optionally preceded by a single ``{"manifest": {...}}`` line. Records are
immutable after construction; embeddings are stored as read-only float32
arrays (the on-disk precision).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import CorpusError, ValidationError

# Fixed tag priority for page-text assembly, most important first.
TAG_PRIORITY = ("title", "description", "h1", "h2", "h3", "h4", "h5", "h6", "p")

DEFAULT_TOKEN_LIMIT = 96
DEFAULT_D_FULL = 768
DEFAULT_D_RED = 100

VALID_SPLITS = ("train", "test")

_RECORD_KEYS = (
    "page_id",
    "domain",
    "language",
    "text",
    "embedding_full",
    "embedding_reduced",
    "categories",
    "label",
    "split",
)

_TOKEN_RE = re.compile(r"\S+")
_LANGUAGE_RE = re.compile(r"^[a-z0-9][a-z0-9-]*$")


def _freeze(vec) -> Optional[np.ndarray]:
    """Coerce an embedding to a read-only float32 vector, or pass None through."""
    if vec is None:
        return None
    arr = np.asarray(vec, dtype=np.float32)
    if arr.ndim != 1:
        raise ValidationError(f"embedding must be a flat vector, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError("embedding must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("embedding contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TagBlock:
    """One HTML tag's extracted content. The tag set is closed."""

    tag: str
    content: str

    def __post_init__(self):
        if self.tag not in TAG_PRIORITY:
            raise ValidationError(
                f"unknown tag {self.tag!r}; expected one of {TAG_PRIORITY}"
            )


@dataclass(frozen=True, eq=False)
class PageRecord:
    """One web page: identity, assembled text, embeddings, and labels.

    ``label`` is binary: 0 trustworthy, 1 disinformation. ``split`` is
    "train", "test", or None (unassigned).
    """

    page_id: str
    domain: str
    language: str
    text: str = ""
    embedding_full: Optional[np.ndarray] = None
    embedding_reduced: Optional[np.ndarray] = None
    categories: frozenset = frozenset()
    label: Optional[int] = None
    split: Optional[str] = None

    def __post_init__(self):
        if not self.page_id:
            raise ValidationError("page_id must be non-empty")
        if not self.domain:
            raise ValidationError(f"page {self.page_id!r}: domain must be non-empty")
        if not self.language or not _LANGUAGE_RE.match(self.language):
            raise ValidationError(
                f"page {self.page_id!r}: language must be a lowercase code, "
                f"got {self.language!r}"
            )
        if self.label is not None and self.label not in (0, 1):
            raise ValidationError(
                f"page {self.page_id!r}: label must be 0, 1 or null, got {self.label!r}"
            )
        if self.split is not None and self.split not in VALID_SPLITS:
            raise ValidationError(
                f"page {self.page_id!r}: unknown split {self.split!r}"
            )
        object.__setattr__(self, "embedding_full", _freeze(self.embedding_full))
        object.__setattr__(self, "embedding_reduced", _freeze(self.embedding_reduced))
        object.__setattr__(self, "categories", frozenset(str(c) for c in self.categories))

    def __eq__(self, other):
        if not isinstance(other, PageRecord):
            return NotImplemented
        return (
            self.page_id == other.page_id
            and self.domain == other.domain
            and self.language == other.language
            and self.text == other.text
            and _vec_eq(self.embedding_full, other.embedding_full)
            and _vec_eq(self.embedding_reduced, other.embedding_reduced)
            and self.categories == other.categories
            and self.label == other.label
            and self.split == other.split
        )

    def __hash__(self):
        return hash(self.page_id)


def _vec_eq(a: Optional[np.ndarray], b: Optional[np.ndarray]) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and bool(np.array_equal(a, b))


@dataclass(frozen=True)
class CorpusManifest:
    """Summary statistics for a corpus; always recomputable from its records."""

    name: str
    d_full: int
    d_red: int
    n_records: int
    n_positive: int
    languages: dict = field(default_factory=dict)
    split_counts: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d_full <= 0 or self.d_red <= 0:
            raise ValidationError("manifest dimensions must be positive")
        if self.n_positive > self.n_records:
            raise ValidationError(
                f"manifest: n_positive {self.n_positive} exceeds n_records {self.n_records}"
            )
        if sum(self.split_counts.values()) != self.n_records:
            raise ValidationError("manifest: split counts do not sum to n_records")
        if sum(self.languages.values()) != self.n_records:
            raise ValidationError("manifest: language counts do not sum to n_records")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "d_full": self.d_full,
            "d_red": self.d_red,
            "n_records": self.n_records,
            "n_positive": self.n_positive,
            "languages": {k: self.languages[k] for k in sorted(self.languages)},
            "split_counts": {k: self.split_counts[k] for k in sorted(self.split_counts)},
        }


def build_manifest(
    records: Sequence[PageRecord],
    name: str = "corpus",
    d_full: Optional[int] = None,
    d_red: Optional[int] = None,
) -> CorpusManifest:
    """Recompute a manifest from records, deriving dimensions when undeclared.

    Every embedding present is checked against the (declared or derived)
    dimensions; a mismatch is a CorpusError naming the offending page.
    """
    for rec in records:
        if d_full is None and rec.embedding_full is not None:
            d_full = int(rec.embedding_full.shape[0])
        if d_red is None and rec.embedding_reduced is not None:
            d_red = int(rec.embedding_reduced.shape[0])
    d_full = d_full if d_full is not None else DEFAULT_D_FULL
    d_red = d_red if d_red is not None else DEFAULT_D_RED

    languages: dict = {}
    split_counts: dict = {}
    n_positive = 0
    for rec in records:
        if rec.embedding_full is not None and rec.embedding_full.shape[0] != d_full:
            raise CorpusError(
                f"page {rec.page_id!r}: embedding_full has dimension "
                f"{rec.embedding_full.shape[0]}, manifest declares {d_full}"
            )
        if rec.embedding_reduced is not None and rec.embedding_reduced.shape[0] != d_red:
            raise CorpusError(
                f"page {rec.page_id!r}: embedding_reduced has dimension "
                f"{rec.embedding_reduced.shape[0]}, manifest declares {d_red}"
            )
        languages[rec.language] = languages.get(rec.language, 0) + 1
        split = rec.split if rec.split is not None else "unassigned"
        split_counts[split] = split_counts.get(split, 0) + 1
        if rec.label == 1:
            n_positive += 1

    return CorpusManifest(
        name=name,
        d_full=d_full,
        d_red=d_red,
        n_records=len(records),
        n_positive=n_positive,
        languages=languages,
        split_counts=split_counts,
    )


def assemble_text(blocks: Iterable[TagBlock]) -> str:
    """Concatenate tag contents in fixed priority order.

    Blocks are stably sorted by tag rank (title > description > h1 > ... >
    h6 > p), so document order is preserved within a rank. Contents are
    joined with a single space; empty contents are dropped.
    """
    ordered = sorted(blocks, key=lambda b: TAG_PRIORITY.index(b.tag))
    return " ".join(b.content for b in ordered if b.content).strip()


def truncate_tokens(
    text: str,
    limit: int = DEFAULT_TOKEN_LIMIT,
    tokenizer: Optional[Callable[[str], list]] = None,
) -> str:
    """Return the prefix of ``text`` covering its first ``limit`` tokens.

    The default tokenizer splits on Unicode whitespace. A pluggable
    tokenizer returns a token list; tokens are located back in the text to
    keep the result a true prefix (tokenizers whose tokens are not ordered
    substrings fall back to space-joining the kept tokens).
    """
    if limit < 0:
        raise ValidationError(f"token limit must be >= 0, got {limit}")
    if limit == 0:
        return ""
    if tokenizer is None:
        spans = [m.span() for m in _TOKEN_RE.finditer(text)]
        if len(spans) <= limit:
            return text
        return text[: spans[limit - 1][1]]

    tokens = tokenizer(text)
    if len(tokens) <= limit:
        return text
    end = 0
    pos = 0
    for tok in tokens[:limit]:
        at = text.find(tok, pos)
        if at < 0:
            return " ".join(tokens[:limit])
        end = at + len(tok)
        pos = end
    return text[:end]


def _record_to_json(rec: PageRecord) -> dict:
    return {
        "page_id": rec.page_id,
        "domain": rec.domain,
        "language": rec.language,
        "text": rec.text,
        "embedding_full": None
        if rec.embedding_full is None
        else [float(v) for v in rec.embedding_full],
        "embedding_reduced": None
        if rec.embedding_reduced is None
        else [float(v) for v in rec.embedding_reduced],
        "categories": sorted(rec.categories),
        "label": rec.label,
        "split": rec.split,
    }


def _record_from_json(obj: dict, where: str) -> PageRecord:
    if not isinstance(obj, dict):
        raise CorpusError(f"{where}: record must be an object")
    missing = [k for k in _RECORD_KEYS if k not in obj]
    extra = [k for k in obj if k not in _RECORD_KEYS]
    if missing:
        raise CorpusError(f"{where}: missing keys {missing}")
    if extra:
        raise CorpusError(f"{where}: unknown keys {extra}")
    try:
        return PageRecord(
            page_id=obj["page_id"],
            domain=obj["domain"],
            language=obj["language"],
            text=obj["text"] if obj["text"] is not None else "",
            embedding_full=obj["embedding_full"],
            embedding_reduced=obj["embedding_reduced"],
            categories=frozenset(obj["categories"] or ()),
            label=obj["label"],
            split=obj["split"],
        )
    except ValidationError as exc:
        raise CorpusError(f"{where}: {exc}") from exc


def _manifest_from_json(obj: dict) -> CorpusManifest:
    try:
        return CorpusManifest(
            name=obj["name"],
            d_full=int(obj["d_full"]),
            d_red=int(obj["d_red"]),
            n_records=int(obj["n_records"]),
            n_positive=int(obj["n_positive"]),
            languages={str(k): int(v) for k, v in obj["languages"].items()},
            split_counts={str(k): int(v) for k, v in obj["split_counts"].items()},
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise CorpusError(f"malformed embedded manifest: {exc!r}") from exc


def load_corpus(path) -> tuple:
    """Load a corpus file, validating every record and the manifest.

    Returns ``(records, manifest)`` where the manifest is recomputed from
    the records and cross-checked against any embedded one. Errors name the
    offending line.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")

    records: list = []
    embedded: Optional[CorpusManifest] = None
    seen: set = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed line: {exc}") from exc
            if lineno == 1 and isinstance(obj, dict) and "manifest" in obj:
                embedded = _manifest_from_json(obj["manifest"])
                continue
            rec = _record_from_json(obj, f"{path}:{lineno}")
            if rec.page_id in seen:
                raise CorpusError(
                    f"{path}:{lineno}: duplicate page_id {rec.page_id!r}"
                )
            seen.add(rec.page_id)
            records.append(rec)

    name = embedded.name if embedded is not None else path.stem
    manifest = build_manifest(
        records,
        name=name,
        d_full=embedded.d_full if embedded is not None else None,
        d_red=embedded.d_red if embedded is not None else None,
    )
    if embedded is not None:
        _cross_check_manifest(embedded, manifest, path)
    return records, manifest


def _cross_check_manifest(declared: CorpusManifest, actual: CorpusManifest, path: Path):
    problems = []
    for fld in ("d_full", "d_red", "n_records", "n_positive"):
        if getattr(declared, fld) != getattr(actual, fld):
            problems.append(
                f"{fld}: declared {getattr(declared, fld)}, actual {getattr(actual, fld)}"
            )
    if declared.languages != actual.languages:
        problems.append("language counts differ from records")
    if declared.split_counts != actual.split_counts:
        problems.append("split counts differ from records")
    if problems:
        raise CorpusError(f"{path}: embedded manifest mismatch: {'; '.join(problems)}")


def save_corpus(
    records: Sequence[PageRecord],
    path,
    name: str = "corpus",
    d_full: Optional[int] = None,
    d_red: Optional[int] = None,
    include_manifest: bool = True,
) -> CorpusManifest:
    """Write records (manifest first) as line-delimited JSON; returns the manifest."""
    path = Path(path)
    manifest = build_manifest(records, name=name, d_full=d_full, d_red=d_red)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        if include_manifest:
            fh.write(json.dumps({"manifest": manifest.to_json()}) + "\n")
        for rec in records:
            fh.write(json.dumps(_record_to_json(rec)) + "\n")
    return manifest
