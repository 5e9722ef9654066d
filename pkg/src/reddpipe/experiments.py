"""Desk-scale experiment runners: the topic-filter ablation and the
language-confound study.

Both experiments are deterministic functions of a seed. The ablation fixture
pairs an easy on-topic task (a shifted Gaussian blob) with a deliberately
hard off-topic stratum: a checkerboard of domain-labeled clusters laid over
the same coordinates the on-topic signal uses. Training on the unfiltered
union makes the small network spend its capacity on the checkerboard, which
degrades ranking on the topic-filtered test set; filtering removes the
competition.

The confound study embeds the same generated pages twice, once with
language-dominated vectors and once with language-agnostic ones, and shows
the classifier becoming a language detector in the first case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import metrics, redd, topics
from .corpus import PageRecord
from .embeddings import SyntheticEmbedder, make_projection, project
from .errors import ValidationError
from .synthetic import CellCount, SyntheticSpec, generate_synthetic_corpus

ABLATION_BUCKET_EDGES = (0.0, 0.25, 0.5, 0.75, 1.0)
ABLATION_THRESHOLD = 0.5

# Small net + short momentum run: enough for the filtered arm to converge,
# not enough for the unfiltered arm to untangle the checkerboard.
ABLATION_TRAIN = redd.TrainConfig(
    epochs=10,
    batch_size=64,
    learning_rate=0.02,
    optimizer="momentum",
    hidden_dims=(6, 8, 8),
)


def build_ablation_spec(
    n_on: int = 150,
    signal_shift: float = 3.5,
    grid: int = 7,
    per_cell: int = 200,
    grid_step: float = 1.8,
    d: int = 24,
    topic_scale: float = 5.0,
    off_topic_scale: float = -3.0,
    noise_std: float = 1.0,
) -> SyntheticSpec:
    """Synthetic spec for the ablation corpus.

    On-topic pages sit at +topic_scale on axis 0; the positive class is
    shifted along axis 1. Off-topic clusters form a grid x grid XOR
    checkerboard in the (axis 1, axis 2) plane at -|off_topic_scale| on
    axis 0, labeled by cell parity (their labels are inherited from their
    cluster, the way real labels are inherited from domains).
    """
    topic_axis = np.zeros(d)
    topic_axis[0] = topic_scale
    shift = np.zeros(d)
    shift[1] = signal_shift

    cluster_centers = {"onpos": topic_axis + shift, "onneg": topic_axis}
    cells = [
        CellCount("onpos", "en", 1, n_on),
        CellCount("onneg", "en", 0, n_on),
    ]
    half = (grid - 1) / 2.0
    for gi in range(grid):
        for gj in range(grid):
            center = np.zeros(d)
            center[0] = off_topic_scale
            center[1] = (gi - half) * grid_step
            center[2] = (gj - half) * grid_step
            name = f"off{gi}{gj}"
            cluster_centers[name] = center
            cells.append(CellCount(name, "en", (gi + gj) % 2, per_cell))
    return SyntheticSpec(
        d_full=d,
        topics=cluster_centers,
        cells=tuple(cells),
        noise_std=noise_std,
        pages_per_domain=4,
        test_fraction=0.25,
        id_prefix="abl",
    )


def build_ablation_fixture(seed: int, **spec_kwargs) -> tuple:
    """Generate the ablation corpus and its calibrated topic model.

    Pages carry the generated vectors directly as reduced embeddings (the
    ablation operates in classifier space). Returns (records, topic_model).
    """
    raw = generate_synthetic_corpus(build_ablation_spec(**spec_kwargs), seed)
    records = []
    for rec in raw:
        records.append(
            PageRecord(
                page_id=rec.page_id,
                domain=rec.domain,
                language=rec.language,
                text=rec.text,
                embedding_reduced=rec.embedding_full,
                categories=rec.categories,
                label=rec.label,
                split=rec.split,
            )
        )
    examples = [r for r in records if "onpos" in r.categories][:4]
    examples += [r for r in records if "onneg" in r.categories][:4]
    topic = topics.build_topic(
        examples, topic_id="ablation-topic", bucket_edges=ABLATION_BUCKET_EDGES
    ).with_threshold(ABLATION_THRESHOLD)
    return records, topic


@dataclass(frozen=True)
class AblationResult:
    auc_filtered_train: float
    auc_unfiltered_train: float
    n_train_filtered: int
    n_train_unfiltered: int
    n_test: int

    @property
    def gap(self) -> float:
        return self.auc_filtered_train - self.auc_unfiltered_train

    def to_json(self) -> dict:
        return {
            "auc_filtered_train": self.auc_filtered_train,
            "auc_unfiltered_train": self.auc_unfiltered_train,
            "gap": self.gap,
            "n_train_filtered": self.n_train_filtered,
            "n_train_unfiltered": self.n_train_unfiltered,
            "n_test": self.n_test,
        }


def run_filter_ablation(
    records: Sequence[PageRecord],
    topic: topics.TopicModel,
    cfg: Optional[redd.TrainConfig] = None,
) -> AblationResult:
    """Train twice (topic-filtered vs full training split), evaluate both on
    the topic-filtered test split."""
    if cfg is None:
        cfg = ABLATION_TRAIN
    filtered = topics.filter_on_topic(topic, records)
    train_filtered = [r for r in filtered if r.split == "train" and r.label is not None]
    test_filtered = [r for r in filtered if r.split == "test" and r.label is not None]
    train_all = [r for r in records if r.split == "train" and r.label is not None]
    if not test_filtered:
        raise ValidationError("ablation: topic-filtered test split is empty")

    model_filtered = redd.train(train_filtered, cfg)
    model_unfiltered = redd.train(train_all, cfg)
    x = np.stack([r.embedding_reduced for r in test_filtered]).astype(np.float64)
    y = np.array([r.label for r in test_filtered])
    return AblationResult(
        auc_filtered_train=metrics.auc_roc(redd.forward(model_filtered, x), y),
        auc_unfiltered_train=metrics.auc_roc(redd.forward(model_unfiltered, x), y),
        n_train_filtered=len(train_filtered),
        n_train_unfiltered=len(train_all),
        n_test=len(test_filtered),
    )


def run_default_ablation(seed: int, overrides: Optional[dict] = None) -> AblationResult:
    """Run the ablation on the built-in fixture; ``overrides`` may carry
    ``fixture`` kwargs for build_ablation_spec and a ``train`` config."""
    overrides = overrides or {}
    cfg = redd.TrainConfig.from_json(
        {**ABLATION_TRAIN.to_json(), **overrides.get("train", {})}
    )
    records, topic = build_ablation_fixture(seed, **overrides.get("fixture", {}))
    return run_filter_ablation(records, topic, cfg)


# --- language confound ----------------------------------------------------------

CONFOUND_FOCUS_LANGUAGE = "xx"
CONFOUND_LANGUAGES = (
    ("xx", 400, 0.90),
    ("en", 300, 0.15),
    ("fr", 300, 0.15),
    ("de", 300, 0.15),
)

CONFOUND_TRAIN = redd.TrainConfig(
    epochs=30,
    batch_size=64,
    learning_rate=0.05,
    hidden_dims=(32, 16, 8),
)


def build_confound_corpus(
    seed: int,
    lang_weight: float,
    d_full: int = 192,
    d_red: int = 48,
    languages: Sequence[tuple] = CONFOUND_LANGUAGES,
    vocab_size: int = 40,
    words_per_page: int = 6,
) -> list:
    """Pages whose text encodes the label through vocabulary choice.

    Disinformation pages draw from a disinfo vocabulary, trustworthy pages
    from a clean one, both mixed with shared topic words. One focus language
    holds most of the positives. The pages are embedded with the synthetic
    embedder at the given language weight and projected down to d_red.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    topic_vocab = [f"topicword{i}" for i in range(vocab_size)]
    disinfo_vocab = [f"disinfoword{i}" for i in range(vocab_size)]
    clean_vocab = [f"cleanword{i}" for i in range(vocab_size)]
    embedder = SyntheticEmbedder(dimension=d_full, seed=seed, lang_weight=lang_weight)
    projection = make_projection(d_full, d_red, seed=seed)

    records = []
    counter = 0
    for language, n_pages, positive_rate in languages:
        for i in range(n_pages):
            label = int(rng.random() < positive_rate)
            words = list(rng.choice(topic_vocab, words_per_page))
            words += list(rng.choice(disinfo_vocab if label else clean_vocab, words_per_page))
            text = " ".join(words)
            full = embedder.embed(text, language)
            counter += 1
            records.append(
                PageRecord(
                    page_id=f"k{counter:05d}",
                    domain=f"{language}-d{i // 4:03d}.example",
                    language=language,
                    text=text,
                    embedding_full=full,
                    embedding_reduced=project(projection, full).astype(np.float32),
                    label=label,
                    split="test" if rng.random() < 0.5 else "train",
                )
            )
    return records


@dataclass(frozen=True)
class ConfoundResult:
    """Language score tables for both embedder settings, plus diagnostics."""

    table_language_dominated: metrics.LanguageScoreTable
    table_content_driven: metrics.LanguageScoreTable
    trustworthy_gap_language_dominated: float
    trustworthy_gap_content_driven: float
    per_language_auc_content_driven: dict = field(default_factory=dict)
    focus_language: str = CONFOUND_FOCUS_LANGUAGE

    def to_json(self) -> dict:
        return {
            "focus_language": self.focus_language,
            "trustworthy_gap_language_dominated": self.trustworthy_gap_language_dominated,
            "trustworthy_gap_content_driven": self.trustworthy_gap_content_driven,
            "per_language_auc_content_driven": dict(
                sorted(self.per_language_auc_content_driven.items())
            ),
            "table_language_dominated": self.table_language_dominated.to_json(),
            "table_content_driven": self.table_content_driven.to_json(),
        }


def _confound_arm(seed: int, lang_weight: float, cfg: redd.TrainConfig):
    records = build_confound_corpus(seed, lang_weight)
    train_split = [r for r in records if r.split == "train"]
    test_split = [r for r in records if r.split == "test"]
    model = redd.train(train_split, cfg)
    scores = [s for _, s in redd.predict_pages(model, test_split)]
    table = metrics.language_score_table(test_split, scores, CONFOUND_FOCUS_LANGUAGE)
    return test_split, scores, table


def trustworthy_gap(table: metrics.LanguageScoreTable) -> float:
    """Focus-minus-other mean score for the trustworthy class."""
    focus = table.cell(0, "focus")
    other = table.cell(0, "other")
    if focus.mean is None or other.mean is None:
        raise ValidationError("trustworthy cells are empty; cannot compute the gap")
    return focus.mean - other.mean


def run_language_confound(
    seed: int,
    cfg: Optional[redd.TrainConfig] = None,
    lang_weight_high: float = 0.95,
    overrides: Optional[dict] = None,
) -> ConfoundResult:
    """Train on language-dominated and language-agnostic embeddings of the
    same generated pages; return both language score tables."""
    overrides = overrides or {}
    if cfg is None:
        cfg = redd.TrainConfig.from_json(
            {**CONFOUND_TRAIN.to_json(), **overrides.get("train", {})}
        )
    lang_weight_high = overrides.get("lang_weight_high", lang_weight_high)
    _, _, table_hi = _confound_arm(seed, lang_weight_high, cfg)
    test_lo, scores_lo, table_lo = _confound_arm(seed, 0.0, cfg)

    per_language_auc = {}
    for language in sorted({r.language for r in test_lo}):
        if language == CONFOUND_FOCUS_LANGUAGE:
            continue
        subset = [(r, s) for r, s in zip(test_lo, scores_lo) if r.language == language]
        labels = np.array([r.label for r, _ in subset])
        if len(set(labels.tolist())) < 2:
            continue
        per_language_auc[language] = metrics.auc_roc(
            np.array([s for _, s in subset]), labels
        )
    return ConfoundResult(
        table_language_dominated=table_hi,
        table_content_driven=table_lo,
        trustworthy_gap_language_dominated=trustworthy_gap(table_hi),
        trustworthy_gap_content_driven=trustworthy_gap(table_lo),
        per_language_auc_content_driven=per_language_auc,
    )


def largest_non_focus_language(result: ConfoundResult) -> str:
    """Languages are fixed-size in the fixture; the largest non-focus one is
    the alphabetically first of the biggest group."""
    sizes: dict = {}
    for language, n_pages, _ in CONFOUND_LANGUAGES:
        if language != result.focus_language:
            sizes[language] = n_pages
    biggest = max(sizes.values())
    return sorted(l for l, n in sizes.items() if n == biggest)[0]
