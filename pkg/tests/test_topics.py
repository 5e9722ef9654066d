"""Topic centroid building, cosine scoring, buckets, threshold selection."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reddpipe.errors import DimensionError, ValidationError
from reddpipe.topics import (
    BucketReport,
    BucketStat,
    TopicModel,
    bucket_report,
    build_topic,
    cosine_similarity,
    filter_on_topic,
    load_topic,
    save_topic,
    score_pages,
    select_threshold,
)

from conftest import page


def oracle_cosine(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)


class TestCosineSimilarity:
    def test_identical_direction(self):
        assert cosine_similarity([1, 0], [1, 0]) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity([1, 0], [0, 1]) == 0.0

    def test_zero_vector_convention(self):
        assert cosine_similarity([0, 0], [1, 2]) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            cosine_similarity([1, 0], [1, 0, 0])

    @given(
        st.lists(st.floats(-5, 5), min_size=3, max_size=3),
        st.lists(st.floats(-5, 5), min_size=3, max_size=3),
        st.floats(0.01, 100.0),
    )
    def test_scale_invariance(self, a, b, c):
        assert cosine_similarity(a, [c * y for y in b]) == pytest.approx(
            cosine_similarity(a, b), abs=1e-6
        )

    def test_matches_oracle(self, rng):
        for _ in range(50):
            a = rng.normal(size=6)
            b = rng.normal(size=6)
            assert cosine_similarity(a, b) == pytest.approx(
                oracle_cosine(a, b), abs=1e-9
            )


class TestBuildTopic:
    def test_mean_of_two(self):
        t = build_topic([page("a", reduced=[1, 0]), page("b", reduced=[0, 1])])
        np.testing.assert_allclose(t.centroid, [0.5, 0.5])

    def test_single_page(self):
        t = build_topic([page("a", reduced=[0.25, -2])])
        np.testing.assert_allclose(t.centroid, [0.25, -2])

    def test_matches_componentwise_mean_oracle(self, rng):
        pages = [page(f"p{i}", reduced=rng.normal(size=7)) for i in range(10)]
        t = build_topic(pages)
        expected = [
            sum(float(p.embedding_reduced[j]) for p in pages) / 10 for j in range(7)
        ]
        np.testing.assert_allclose(t.centroid, expected, atol=1e-6)

    def test_empty_and_missing_rejected(self):
        with pytest.raises(ValidationError):
            build_topic([])
        with pytest.raises(ValidationError):
            build_topic([page("a")])

    def test_threshold_must_be_an_edge(self):
        t = build_topic([page("a", reduced=[1, 0])], bucket_edges=(0.0, 0.5, 1.0))
        with pytest.raises(ValidationError):
            t.with_threshold(0.3)
        assert t.with_threshold(0.5).threshold == 0.5


class TestScorePages:
    def test_centroid_page_ranked_first(self):
        t = build_topic([page("ex", reduced=[2.0, 1.0])])
        pages = [
            page("far", reduced=[-2.0, -1.0]),
            page("same", reduced=[4.0, 2.0]),
            page("mid", reduced=[1.0, 3.0]),
        ]
        scored = score_pages(t, pages)
        assert scored[0] == ("same", pytest.approx(1.0))
        assert scored[-1] == ("far", pytest.approx(-1.0))

    def test_matches_oracle_and_order(self, rng):
        t = build_topic([page("ex", reduced=rng.normal(size=5))])
        pages = [page(f"p{i:03d}", reduced=rng.normal(size=5)) for i in range(100)]
        scored = score_pages(t, pages)
        oracle = sorted(
            (
                (p.page_id, oracle_cosine(t.centroid, p.embedding_reduced))
                for p in pages
            ),
            key=lambda kv: (-kv[1], kv[0]),
        )
        assert [pid for pid, _ in scored] == [pid for pid, _ in oracle]
        for (pid_a, s_a), (pid_b, s_b) in zip(scored, oracle):
            assert s_a == pytest.approx(s_b, abs=1e-6)

    def test_deterministic_tie_break(self):
        t = build_topic([page("ex", reduced=[1.0, 0.0])])
        pages = [page("b", reduced=[2.0, 0.0]), page("a", reduced=[3.0, 0.0])]
        scored = score_pages(t, pages)
        assert [pid for pid, _ in scored] == ["a", "b"]


class TestBucketReport:
    def _topic(self, edges=(0.5, 0.75, 1.0)):
        return build_topic([page("ex", reduced=[1, 0])], bucket_edges=edges)

    def test_half_open_buckets_closed_top(self):
        t = self._topic()
        scored = [("a", 0.6), ("b", 0.8), ("c", 0.99), ("d", 1.0)]
        report = bucket_report(t, scored)
        assert [b.count for b in report.buckets] == [1, 3]
        assert report.out_of_range == 0

    def test_empty_scores(self):
        report = bucket_report(self._topic(), [])
        assert [b.count for b in report.buckets] == [0, 0]

    def test_out_of_range_counted(self):
        report = bucket_report(self._topic(), [("a", 0.4), ("b", 0.6)])
        assert report.out_of_range == 1
        assert report.total == 2

    def test_histogram_matches_oracle(self, rng):
        t = self._topic(edges=(0.0, 0.25, 0.5, 0.75, 1.0))
        scores = rng.uniform(0, 1, size=1000)
        scored = [(f"p{i}", float(s)) for i, s in enumerate(scores)]
        report = bucket_report(t, scored)
        edges = t.bucket_edges
        oracle = [0] * (len(edges) - 1)
        for _, s in scored:
            for i in range(len(edges) - 1):
                if (edges[i] <= s < edges[i + 1]) or (
                    i == len(edges) - 2 and s == edges[-1]
                ):
                    oracle[i] += 1
                    break
        assert [b.count for b in report.buckets] == oracle
        assert sum(b.count for b in report.buckets) + report.out_of_range == 1000

    def test_samples_deterministic_and_input_order_independent(self, rng):
        t = self._topic(edges=(0.0, 0.5, 1.0))
        scored = [(f"p{i}", float(rng.uniform(0, 1))) for i in range(50)]
        r1 = bucket_report(t, scored, sample_size=3, seed=9)
        r2 = bucket_report(t, list(reversed(scored)), sample_size=3, seed=9)
        assert [b.sample_page_ids for b in r1.buckets] == [
            b.sample_page_ids for b in r2.buckets
        ]
        r3 = bucket_report(t, scored, sample_size=3, seed=10)
        assert [b.sample_page_ids for b in r1.buckets] != [
            b.sample_page_ids for b in r3.buckets
        ]

    def test_samples_drawn_without_replacement(self):
        t = self._topic(edges=(0.0, 1.0))
        scored = [(f"p{i}", 0.5) for i in range(10)]
        report = bucket_report(t, scored, sample_size=10, seed=0)
        sample = report.buckets[0].sample_page_ids
        assert len(sample) == len(set(sample)) == 10


def report_with_fractions(spec):
    """spec: list of (lo, hi, count, fraction)."""
    return BucketReport(
        topic_id="t",
        edges=tuple([s[0] for s in spec] + [spec[-1][1]]),
        buckets=[
            BucketStat(lo=lo, hi=hi, count=count, relevance_fraction=frac)
            for lo, hi, count, frac in spec
        ],
        out_of_range=0,
        total=sum(s[2] for s in spec),
        sample_size=4,
        seed=0,
    )


class TestSelectThreshold:
    def test_spec_rule_example(self):
        report = report_with_fractions(
            [(0.7, 0.8, 10, 0.4), (0.8, 0.9, 10, 0.7), (0.9, 1.0, 10, 0.95)]
        )
        assert select_threshold(report) == 0.8

    def test_all_pass_returns_lowest_edge(self):
        report = report_with_fractions(
            [(0.7, 0.8, 10, 0.6), (0.8, 0.9, 10, 0.7), (0.9, 1.0, 10, 0.95)]
        )
        assert select_threshold(report) == 0.7

    def test_none_pass_falls_back_to_top_bucket(self):
        report = report_with_fractions(
            [(0.7, 0.8, 10, 0.2), (0.8, 0.9, 10, 0.5), (0.9, 1.0, 10, 0.3)]
        )
        assert select_threshold(report) == 0.9

    def test_exact_half_fails_majority(self):
        report = report_with_fractions([(0.8, 0.9, 10, 0.5), (0.9, 1.0, 10, 0.9)])
        assert select_threshold(report) == 0.9

    def test_empty_bucket_stops_scan(self):
        report = report_with_fractions(
            [(0.7, 0.8, 10, 0.9), (0.8, 0.9, 0, None), (0.9, 1.0, 10, 0.9)]
        )
        assert select_threshold(report) == 0.9

    def test_missing_fraction_on_nonempty_bucket_rejected(self):
        report = report_with_fractions(
            [(0.8, 0.9, 10, None), (0.9, 1.0, 10, 0.9)]
        )
        with pytest.raises(ValidationError):
            select_threshold(report)

    def test_contiguity_of_accepted_region(self):
        """The accepted interval always ends at 1: threshold is the lower edge
        of a contiguous passing suffix."""
        report = report_with_fractions(
            [(0.6, 0.7, 5, 0.9), (0.7, 0.8, 5, 0.1), (0.8, 0.9, 5, 0.8), (0.9, 1.0, 5, 0.7)]
        )
        # the low passing bucket below the failure never wins
        assert select_threshold(report) == 0.8


class TestFilterOnTopic:
    def test_boundary_inclusive(self):
        t = build_topic(
            [page("ex", reduced=[1.0, 0.0])], bucket_edges=(0.0, 0.8, 1.0)
        ).with_threshold(0.8)
        pages = [
            page("hi", reduced=[5.0, 0.0]),    # cos 1.0
            page("edge", reduced=[4.0, 3.0]),  # cos exactly 4/5
            page("lo", reduced=[3.0, 4.0]),    # cos 3/5
        ]
        kept = filter_on_topic(t, pages)
        assert [p.page_id for p in kept] == ["hi", "edge"]

    def test_threshold_minus_one_keeps_all(self, rng):
        t = build_topic(
            [page("ex", reduced=[1.0, 0.0])], bucket_edges=(-1.0, 0.0, 1.0)
        ).with_threshold(-1.0)
        pages = [page(f"p{i}", reduced=rng.normal(size=2)) for i in range(20)]
        assert len(filter_on_topic(t, pages)) == 20

    def test_unset_threshold_rejected(self):
        t = build_topic([page("ex", reduced=[1.0, 0.0])])
        with pytest.raises(ValidationError):
            filter_on_topic(t, [page("p", reduced=[1.0, 0.0])])

    def test_matches_brute_force_filter_oracle(self, rng):
        t = build_topic(
            [page("ex", reduced=rng.normal(size=4))],
            bucket_edges=(0.0, 0.5, 1.0),
        ).with_threshold(0.0)
        pages = [page(f"p{i}", reduced=rng.normal(size=4)) for i in range(100)]
        kept = {p.page_id for p in filter_on_topic(t, pages)}
        oracle = {
            p.page_id
            for p in pages
            if oracle_cosine(t.centroid, p.embedding_reduced) >= 0.0
        }
        assert kept == oracle

    def test_rescaling_never_changes_kept_set(self, rng):
        t = build_topic(
            [page("ex", reduced=rng.normal(size=4))], bucket_edges=(0.0, 0.5, 1.0)
        ).with_threshold(0.5)
        pages = [page(f"p{i}", reduced=rng.normal(size=4)) for i in range(30)]
        scaled = [
            page(p.page_id, reduced=np.asarray(p.embedding_reduced) * 7.5)
            for p in pages
        ]
        assert [p.page_id for p in filter_on_topic(t, pages)] == [
            p.page_id for p in filter_on_topic(t, scaled)
        ]


class TestTopicFile:
    def test_round_trip(self, tmp_path):
        t = build_topic(
            [page("a", reduced=[1.5, -0.5]), page("b", reduced=[0.5, 0.5])],
            topic_id="demo",
            bucket_edges=(0.0, 0.5, 1.0),
            created_at="2026-01-01T00:00:00Z",
        ).with_threshold(0.5)
        path = tmp_path / "topic.json"
        save_topic(t, path)
        loaded = load_topic(path)
        assert loaded.topic_id == "demo"
        assert loaded.threshold == 0.5
        assert loaded.example_page_ids == ("a", "b")
        np.testing.assert_array_equal(loaded.centroid, t.centroid)
        assert loaded.created_at == "2026-01-01T00:00:00Z"
