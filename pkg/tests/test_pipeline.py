"""Pipeline configuration, staged execution, and deterministic reports."""

import json

import pytest

from reddpipe import corpus as corpus_mod
from reddpipe import pipeline, redd, synthetic
from reddpipe.errors import ReddpipeError, ValidationError

from conftest import page


@pytest.fixture(scope="module")
def demo_corpus(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("pipe")
    records = synthetic.generate_synthetic_corpus(synthetic.default_pipeline_spec(), seed=7)
    path = tmp / "corpus.jsonl"
    corpus_mod.save_corpus(records, path, name="demo")
    examples = [r.page_id for r in records if "warcoverage" in r.categories and r.label == 1][:4]
    examples += [r.page_id for r in records if "warcoverage" in r.categories and r.label == 0][:4]
    return path, tuple(examples)


def demo_config(corpus_path, examples, out_dir, seed=7):
    return pipeline.PipelineConfig(
        corpus_path=corpus_path,
        output_dir=out_dir,
        d_full=96,
        d_red=24,
        projection_seed=seed,
        topic_id="warcoverage",
        topic_example_page_ids=examples,
        topic_threshold=0.5,
        train=redd.TrainConfig(seed=seed),
        queue_cutoff=50,
        precision_k=10,
    )


class TestConfig:
    def test_missing_corpus_path_names_field(self, tmp_path):
        with pytest.raises(ValidationError, match="corpus"):
            pipeline.config_from_json(
                {"corpus": "missing.jsonl", "output_dir": "out"}, base_dir=tmp_path
            )

    def test_unknown_keys_rejected(self, tmp_path):
        (tmp_path / "c.jsonl").write_text("")
        with pytest.raises(ValidationError, match="unknown"):
            pipeline.config_from_json(
                {"corpus": "c.jsonl", "output_dir": "o", "bogus": 1}, base_dir=tmp_path
            )

    def test_required_keys(self, tmp_path):
        with pytest.raises(ValidationError, match="corpus"):
            pipeline.config_from_json({"output_dir": "o"}, base_dir=tmp_path)

    def test_needs_topic_source(self, tmp_path):
        (tmp_path / "c.jsonl").write_text("")
        with pytest.raises(ValidationError, match="topic"):
            pipeline.config_from_json(
                {"corpus": "c.jsonl", "output_dir": "o"}, base_dir=tmp_path
            )


class TestRunPipeline:
    def test_full_run_writes_artifacts_and_metrics(self, demo_corpus, tmp_path):
        corpus_path, examples = demo_corpus
        report = pipeline.run_pipeline(demo_config(corpus_path, examples, tmp_path / "out"))
        assert report["metrics"]["auc_test_filtered"] >= 0.95
        assert report["counts"]["filtered"] == 800
        for name in ("projection.json", "corpus_reduced.jsonl", "topic.json",
                     "model.json", "page_scores.jsonl", "domain_scores.jsonl",
                     "queue.json", "run_report.json"):
            assert (tmp_path / "out" / name).exists()
        assert set(report["artifacts"]) == {
            "projection.json", "corpus_reduced.jsonl", "topic.json",
            "model.json", "page_scores.jsonl", "domain_scores.jsonl", "queue.json",
        }

    def test_deterministic_byte_identical_reports(self, demo_corpus, tmp_path):
        corpus_path, examples = demo_corpus
        pipeline.run_pipeline(demo_config(corpus_path, examples, tmp_path / "a"))
        pipeline.run_pipeline(demo_config(corpus_path, examples, tmp_path / "b"))
        assert (tmp_path / "a" / "run_report.json").read_bytes() == (
            tmp_path / "b" / "run_report.json"
        ).read_bytes()

    def test_stage_failure_names_stage_and_keeps_artifacts(self, tmp_path):
        # Single-label corpus: training must fail inside the 'train' stage,
        # leaving the topic artifact written by the earlier stage on disk.
        records = [
            page(f"p{i}", reduced=[float(i), 1.0], label=1, split="train")
            for i in range(10)
        ]
        path = tmp_path / "c.jsonl"
        corpus_mod.save_corpus(records, path)
        config = pipeline.PipelineConfig(
            corpus_path=path,
            output_dir=tmp_path / "out",
            d_full=2,
            d_red=2,
            topic_example_page_ids=("p0",),
            topic_threshold=-1.0,
            bucket_edges=(-1.0, 0.0, 1.0),
        )
        with pytest.raises(ReddpipeError, match="stage 'train'"):
            pipeline.run_pipeline(config)
        assert (tmp_path / "out" / "topic.json").exists()

    def test_seed_changes_report(self, demo_corpus, tmp_path):
        corpus_path, examples = demo_corpus
        r1 = pipeline.run_pipeline(demo_config(corpus_path, examples, tmp_path / "s1", seed=7))
        r2 = pipeline.run_pipeline(demo_config(corpus_path, examples, tmp_path / "s2", seed=8))
        assert r1["artifacts"]["model.json"] != r2["artifacts"]["model.json"]

    def test_config_file_round_trip(self, demo_corpus, tmp_path):
        corpus_path, examples = demo_corpus
        doc = {
            "corpus": str(corpus_path),
            "output_dir": str(tmp_path / "out"),
            "d_full": 96,
            "d_red": 24,
            "projection_seed": 7,
            "topic_id": "warcoverage",
            "topic_example_page_ids": list(examples),
            "topic_threshold": 0.5,
            "train": {"seed": 7, "epochs": 5},
            "queue_cutoff": 20,
            "precision_k": 5,
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(doc))
        config = pipeline.load_config(cfg_path)
        assert config.train.epochs == 5
        report = pipeline.run_pipeline(config)
        assert report["counts"]["queue"] == 20


class TestQueueFile:
    def test_round_trip(self, tmp_path):
        from reddpipe.triage import DomainScore, build_queue

        queue = build_queue(
            [DomainScore("a.example", 0.9, 3, 0.05, 1),
             DomainScore("b.example", 0.4, 2, 0.01, 1)],
            cutoff=2, model_version=1, created_at="t",
        )
        path = tmp_path / "q.json"
        pipeline.save_queue(queue, path)
        loaded = pipeline.load_queue(path)
        assert loaded == queue
