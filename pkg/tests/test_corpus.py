"""Corpus data model, text assembly, truncation, and file round-trips."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reddpipe.corpus import (
    TAG_PRIORITY,
    CorpusManifest,
    PageRecord,
    TagBlock,
    assemble_text,
    build_manifest,
    load_corpus,
    save_corpus,
    truncate_tokens,
)
from reddpipe.errors import CorpusError, ValidationError

from conftest import page


class TestTagBlock:
    def test_valid_tags(self):
        for tag in TAG_PRIORITY:
            assert TagBlock(tag, "x").tag == tag

    def test_unknown_tag_rejected(self):
        with pytest.raises(ValidationError):
            TagBlock("div", "x")


class TestAssembleText:
    def test_priority_ordering(self):
        blocks = [TagBlock("p", "body"), TagBlock("title", "Head")]
        assert assemble_text(blocks) == "Head body"

    def test_empty_input(self):
        assert assemble_text([]) == ""

    def test_stable_within_rank(self):
        blocks = [TagBlock("h2", "b"), TagBlock("h1", "a1"), TagBlock("h1", "a2")]
        assert assemble_text(blocks) == "a1 a2 b"

    def test_matches_brute_force_sort_oracle(self, rng):
        tags = list(TAG_PRIORITY)
        blocks = [
            TagBlock(tags[rng.integers(0, len(tags))], f"w{i}") for i in range(40)
        ]
        # Oracle: selection by rank, preserving input order inside each rank.
        expected = " ".join(
            b.content for t in tags for b in blocks if b.tag == t
        )
        assert assemble_text(blocks) == expected

    def test_empty_contents_dropped(self):
        blocks = [TagBlock("title", ""), TagBlock("p", "x"), TagBlock("h1", "")]
        assert assemble_text(blocks) == "x"

    @given(
        st.lists(
            st.tuples(st.sampled_from(TAG_PRIORITY), st.text("ab", min_size=1, max_size=3)),
            max_size=12,
        ),
        st.randoms(use_true_random=False),
    )
    def test_cross_rank_permutation_invariance(self, pairs, rnd):
        """Any permutation preserving within-rank order yields the same text."""
        blocks = [TagBlock(t, c) for t, c in pairs]
        baseline = assemble_text(blocks)
        by_rank = {t: [b for b in blocks if b.tag == t] for t in TAG_PRIORITY}
        ranks_present = [t for t in TAG_PRIORITY if by_rank[t]]
        shuffled_ranks = list(ranks_present)
        rnd.shuffle(shuffled_ranks)
        # Interleave ranks in shuffled order while keeping each rank's sequence.
        permuted = [b for t in shuffled_ranks for b in by_rank[t]]
        assert assemble_text(permuted) == baseline


class TestTruncateTokens:
    def test_basic(self):
        assert truncate_tokens("a b c", 2) == "a b"

    def test_shorter_than_limit(self):
        assert truncate_tokens("a b", 96) == "a b"

    def test_long_input_has_limit_tokens(self):
        text = " ".join(chr(ord("a") + i % 26) for i in range(200))
        out = truncate_tokens(text, 96)
        assert len(out.split()) == 96
        assert text.startswith(out)

    def test_limit_zero(self):
        assert truncate_tokens("a b", 0) == ""

    def test_negative_limit_rejected(self):
        with pytest.raises(ValidationError):
            truncate_tokens("a", -1)

    def test_pluggable_tokenizer(self):
        # a character tokenizer: every non-space char is one token
        tokenizer = lambda s: [c for c in s if not c.isspace()]
        assert truncate_tokens("abc def", 4, tokenizer) == "abc d"

    @given(st.text("ab \t", max_size=60), st.integers(0, 8))
    def test_fixed_point_and_bound(self, text, limit):
        out = truncate_tokens(text, limit)
        assert len(out.split()) <= limit
        assert truncate_tokens(out, limit) == out


class TestPageRecord:
    def test_validation(self):
        with pytest.raises(ValidationError):
            page("")
        with pytest.raises(ValidationError):
            page("p1", domain="")
        with pytest.raises(ValidationError):
            page("p1", language="EN")
        with pytest.raises(ValidationError):
            PageRecord(page_id="p1", domain="d", language="en", label=2)
        with pytest.raises(ValidationError):
            PageRecord(page_id="p1", domain="d", language="en", split="validation")

    def test_embeddings_frozen_float32(self):
        rec = page("p1", reduced=[1.0, 2.0])
        assert rec.embedding_reduced.dtype == np.float32
        with pytest.raises(ValueError):
            rec.embedding_reduced[0] = 5.0

    def test_non_finite_embedding_rejected(self):
        with pytest.raises(ValidationError):
            page("p1", reduced=[1.0, float("nan")])

    def test_equality_covers_embeddings(self):
        a = page("p1", reduced=[1.0, 2.0])
        b = page("p1", reduced=[1.0, 2.0])
        c = page("p1", reduced=[1.0, 2.5])
        assert a == b
        assert a != c


class TestManifest:
    def test_counts_must_sum(self):
        with pytest.raises(ValidationError):
            CorpusManifest(
                name="x", d_full=768, d_red=100, n_records=2, n_positive=0,
                languages={"en": 1}, split_counts={"unassigned": 2},
            )

    def test_positive_bound(self):
        with pytest.raises(ValidationError):
            CorpusManifest(
                name="x", d_full=768, d_red=100, n_records=1, n_positive=2,
                languages={"en": 1}, split_counts={"unassigned": 1},
            )

    def test_paper_scale_stats_validate(self):
        # 17,473 train + 1,925 test with a 53% positive share
        n = 17473 + 1925
        n_pos = round(0.53 * n)
        m = CorpusManifest(
            name="corpus", d_full=768, d_red=100, n_records=n, n_positive=n_pos,
            languages={"multi": n},
            split_counts={"train": 17473, "test": 1925},
        )
        assert m.n_positive / m.n_records == pytest.approx(0.53, abs=1e-4)

    def test_build_manifest_recomputes(self):
        records = [
            page("p1", reduced=[1, 2], label=1, split="train"),
            page("p2", reduced=[3, 4], split="test", language="fr"),
        ]
        m = build_manifest(records, d_full=4)
        assert m.n_records == 2
        assert m.n_positive == 1
        assert m.languages == {"en": 1, "fr": 1}
        assert m.split_counts == {"train": 1, "test": 1}
        assert m.d_red == 2

    def test_dimension_mismatch_detected(self):
        records = [page("p1", reduced=[1, 2]), page("p2", reduced=[1, 2, 3])]
        with pytest.raises(CorpusError, match="p2"):
            build_manifest(records)


class TestCorpusIO:
    def _records(self):
        return [
            page("p1", reduced=[0.25, -1.5], full=[1.0] * 4, categories={"news"},
                 label=1, split="train", text="a b"),
            page("p2", reduced=[0.5, 2.5], full=[2.0] * 4, split="test", language="fr"),
            page("p3", reduced=[1.25, 0.125], full=[0.5] * 4),
        ]

    def test_round_trip_identity(self, tmp_path):
        path = tmp_path / "c.jsonl"
        save_corpus(self._records(), path, name="rt")
        loaded, manifest = load_corpus(path)
        assert loaded == self._records()
        assert manifest.name == "rt"
        assert manifest.n_records == 3

    def test_well_formed_three_line_file(self, tmp_path):
        path = tmp_path / "c.jsonl"
        save_corpus(self._records(), path, include_manifest=False)
        records, manifest = load_corpus(path)
        assert len(records) == 3
        assert manifest.n_records == 3

    def test_duplicate_page_id_reported(self, tmp_path):
        path = tmp_path / "c.jsonl"
        rows = [json.loads(line) for line in
                save_or_lines(self._records())]
        rows.append(rows[0])
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        with pytest.raises(CorpusError, match="duplicate page_id 'p1'"):
            load_corpus(path)

    def test_malformed_line_reports_lineno(self, tmp_path):
        path = tmp_path / "c.jsonl"
        lines = save_or_lines(self._records())
        lines.insert(1, "{not json")
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorpusError, match=":2"):
            load_corpus(path)

    def test_unknown_split_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        lines = save_or_lines(self._records())
        row = json.loads(lines[0])
        row["split"] = "dev"
        path.write_text(json.dumps(row) + "\n")
        with pytest.raises(CorpusError, match="split"):
            load_corpus(path)

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        row = json.loads(save_or_lines(self._records())[0])
        row["surprise"] = 1
        path.write_text(json.dumps(row) + "\n")
        with pytest.raises(CorpusError, match="unknown keys"):
            load_corpus(path)

    def test_manifest_mismatch_detected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        save_corpus(self._records(), path)
        lines = path.read_text().splitlines()
        manifest = json.loads(lines[0])
        manifest["manifest"]["n_positive"] = 3
        path.write_text("\n".join([json.dumps(manifest)] + lines[1:]) + "\n")
        with pytest.raises(CorpusError, match="manifest mismatch"):
            load_corpus(path)

    def test_missing_file(self):
        with pytest.raises(CorpusError, match="not found"):
            load_corpus("/nonexistent/corpus.jsonl")


def save_or_lines(records):
    """Record JSON lines without the manifest line."""
    from reddpipe.corpus import _record_to_json

    return [json.dumps(_record_to_json(r)) for r in records]
