"""Single entry point: corpus ops, projection, topic lifecycle, training,
evaluation, triage, experiments, the full pipeline, and the review service.

Exit codes: 0 success, 1 usage, 2 validation, 3 runtime.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import corpus as corpus_mod
from . import embeddings, experiments, metrics, pipeline, redd, service, synthetic, topics, triage
from .errors import ReddpipeError, ValidationError

EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _emit(payload: dict, fmt: str, metrics_out=None) -> None:
    if metrics_out:
        flat = {k: v for k, v in payload.items() if isinstance(v, (int, float)) and v is not None}
        Path(metrics_out).write_text(
            json.dumps(flat, sort_keys=True) + "\n", encoding="utf-8"
        )
    if fmt == "json":
        click.echo(json.dumps(payload, sort_keys=True))
    else:
        for key, value in payload.items():
            click.echo(f"{key} {value}")


def _load_scores(path) -> list:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"scores file not found: {path}")
    rows = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rows.append((str(obj["page_id"]), float(obj["score"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValidationError(f"{path}:{lineno}: bad score row: {exc!r}") from exc
    return rows


format_option = click.option(
    "--format", "fmt", type=click.Choice(["text", "json"]), default="text",
    help="Output format.",
)


@click.group()
def cli():
    """Disinformation triage pipeline: embeddings, topic filter, REDD, review."""


# -- corpus ---------------------------------------------------------------

@cli.group("corpus")
def corpus_group():
    """Corpus validation and synthetic generation."""


@corpus_group.command("validate")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@format_option
def corpus_validate(corpus_path, fmt):
    """Load a corpus file, validate every record, print the manifest."""
    _, manifest = corpus_mod.load_corpus(corpus_path)
    _emit(manifest.to_json(), fmt)


@corpus_group.command("synth")
@click.option("--spec", "spec_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def corpus_synth(spec_path, seed, out_path):
    """Generate a synthetic corpus from a spec file."""
    spec = synthetic.load_spec(spec_path)
    records = synthetic.generate_synthetic_corpus(spec, seed)
    manifest = corpus_mod.save_corpus(records, out_path, name=f"synthetic-{seed}")
    click.echo(f"wrote {manifest.n_records} records to {out_path}")


# -- embed ------------------------------------------------------------------

@cli.group("embed")
def embed_group():
    """Projection matrices and synthetic embeddings."""


@embed_group.command("make-matrix")
@click.option("--d-full", type=int, default=768, show_default=True)
@click.option("--d-red", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def embed_make_matrix(d_full, d_red, seed, out_path):
    """Create and store a Gaussian projection matrix."""
    matrix = embeddings.make_projection(d_full, d_red, seed)
    embeddings.save_projection(matrix, out_path)
    click.echo(f"wrote {d_red}x{d_full} projection (seed {seed}) to {out_path}")


@embed_group.command("project")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--matrix", "matrix_path", type=click.Path(), default=None,
              help="Existing projection file; otherwise one is created.")
@click.option("--d-red", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def embed_project(corpus_path, matrix_path, d_red, seed, out_path):
    """Fill embedding_reduced for every record via Gaussian projection."""
    records, manifest = corpus_mod.load_corpus(corpus_path)
    if matrix_path:
        matrix = embeddings.load_projection(matrix_path)
    else:
        matrix = embeddings.make_projection(manifest.d_full, d_red, seed)
    reduced = embeddings.reduce_pages(records, matrix)
    corpus_mod.save_corpus(reduced, out_path, name=manifest.name,
                           d_full=manifest.d_full, d_red=matrix.rows)
    click.echo(f"projected {len(reduced)} records to {matrix.rows} dims -> {out_path}")


@embed_group.command("synth")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--dimension", type=int, default=768, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--lang-weight", type=float, default=0.0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def embed_synth(corpus_path, dimension, seed, lang_weight, out_path):
    """Fill embedding_full from page text with the synthetic embedder."""
    records, manifest = corpus_mod.load_corpus(corpus_path)
    embedder = embeddings.SyntheticEmbedder(
        dimension=dimension, seed=seed, lang_weight=lang_weight
    )
    embedded = embeddings.embed_pages(records, embedder)
    corpus_mod.save_corpus(embedded, out_path, name=manifest.name, d_full=dimension)
    click.echo(f"embedded {len(embedded)} records at {dimension} dims -> {out_path}")


# -- topic ------------------------------------------------------------------

@cli.group("topic")
def topic_group():
    """Topic centroid lifecycle: build, score, buckets, threshold, filter."""


@topic_group.command("build")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--topic", "topic_path", required=True, type=click.Path(),
              help="Output topic file.")
@click.option("--topic-id", default="topic", show_default=True)
@click.option("--examples", required=True,
              help="Comma-separated example page ids.")
@click.option("--edges", default=None,
              help="Comma-separated bucket edges (default standard edges).")
def topic_build(corpus_path, topic_path, topic_id, examples, edges):
    """Average example pages into a topic centroid."""
    records, _ = corpus_mod.load_corpus(corpus_path)
    by_id = {r.page_id: r for r in records}
    ids = [p.strip() for p in examples.split(",") if p.strip()]
    missing = [p for p in ids if p not in by_id]
    if missing:
        raise ValidationError(f"example pages not in corpus: {missing}")
    edge_tuple = (
        tuple(float(e) for e in edges.split(",")) if edges else topics.DEFAULT_BUCKET_EDGES
    )
    topic = topics.build_topic(
        [by_id[p] for p in ids], topic_id=topic_id, bucket_edges=edge_tuple
    )
    topics.save_topic(topic, topic_path)
    click.echo(f"built topic {topic_id!r} from {len(ids)} examples -> {topic_path}")


@topic_group.command("score")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--topic", "topic_path", required=True, type=click.Path())
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Write page_id/score lines here.")
@click.option("--top", type=int, default=10, show_default=True)
def topic_score(corpus_path, topic_path, out_path, top):
    """Rank pages by similarity to the topic."""
    records, _ = corpus_mod.load_corpus(corpus_path)
    topic = topics.load_topic(topic_path)
    scored = topics.score_pages(topic, records)
    if out_path:
        with Path(out_path).open("w", encoding="utf-8") as fh:
            for page_id, score in scored:
                fh.write(json.dumps({"page_id": page_id, "score": score}) + "\n")
    for page_id, score in scored[:top]:
        click.echo(f"{score:.4f} {page_id}")


@topic_group.command("buckets")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--topic", "topic_path", required=True, type=click.Path())
@click.option("--sample-size", type=int, default=4, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@format_option
def topic_buckets(corpus_path, topic_path, sample_size, seed, fmt):
    """Histogram scored pages into the topic's similarity buckets."""
    records, _ = corpus_mod.load_corpus(corpus_path)
    topic = topics.load_topic(topic_path)
    scored = topics.score_pages(topic, records)
    report = topics.bucket_report(topic, scored, sample_size=sample_size, seed=seed)
    if fmt == "json":
        click.echo(json.dumps({
            "topic_id": report.topic_id,
            "out_of_range": report.out_of_range,
            "total": report.total,
            "buckets": [
                {"lo": b.lo, "hi": b.hi, "count": b.count,
                 "sample_page_ids": list(b.sample_page_ids)}
                for b in report.buckets
            ],
        }, sort_keys=True))
    else:
        for b in report.buckets:
            click.echo(f"[{b.lo}, {b.hi}) count={b.count} sample={list(b.sample_page_ids)}")
        click.echo(f"out_of_range {report.out_of_range}")


@topic_group.command("set-threshold")
@click.option("--topic", "topic_path", required=True, type=click.Path())
@click.option("--threshold", type=float, required=True)
def topic_set_threshold(topic_path, threshold):
    """Freeze the topic threshold (must be one of its bucket edges)."""
    topic = topics.load_topic(topic_path)
    topics.save_topic(topic.with_threshold(threshold), topic_path)
    click.echo(f"topic {topic.topic_id!r} threshold set to {threshold}")


@topic_group.command("filter")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--topic", "topic_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
def topic_filter(corpus_path, topic_path, out_path):
    """Keep only the pages at or above the topic threshold."""
    records, manifest = corpus_mod.load_corpus(corpus_path)
    topic = topics.load_topic(topic_path)
    kept = topics.filter_on_topic(topic, records)
    corpus_mod.save_corpus(kept, out_path, name=f"{manifest.name}-filtered",
                           d_full=manifest.d_full, d_red=manifest.d_red)
    click.echo(f"kept {len(kept)} of {len(records)} pages -> {out_path}")


# -- redd ---------------------------------------------------------------------

@cli.group("redd")
def redd_group():
    """Train, predict with, and gradient-check the classifier."""


def _train_config(config_path, seed) -> redd.TrainConfig:
    if config_path:
        obj = json.loads(Path(config_path).read_text(encoding="utf-8"))
        cfg = redd.TrainConfig.from_json(obj)
    else:
        cfg = redd.TrainConfig()
    if seed is not None:
        cfg = redd.TrainConfig.from_json({**cfg.to_json(), "seed": seed})
    return cfg


@redd_group.command("train")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--topic", "topic_path", default=None, type=click.Path(),
              help="Optional topic file; training is restricted to pages above threshold.")
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--model-out", required=True, type=click.Path())
def redd_train(corpus_path, topic_path, config_path, seed, model_out):
    """Train on the labeled train split of the (optionally filtered) corpus."""
    records, _ = corpus_mod.load_corpus(corpus_path)
    if topic_path:
        topic = topics.load_topic(topic_path)
        records = topics.filter_on_topic(topic, records)
    train_split = [r for r in records if r.split == "train" and r.label is not None]
    cfg = _train_config(config_path, seed)
    model = redd.train(train_split, cfg)
    redd.save_model(model, model_out)
    meta = model.training_meta
    click.echo(
        f"trained {cfg.architecture} on {meta['n_records']} pages: "
        f"loss {meta['initial_train_loss']:.4f} -> {meta['final_train_loss']:.4f} "
        f"-> {model_out}"
    )


@redd_group.command("predict")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--model-in", "model_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
def redd_predict(corpus_path, model_path, out_path):
    """Score every page with a stored model."""
    records, _ = corpus_mod.load_corpus(corpus_path)
    model = redd.load_model(model_path)
    scored = redd.predict_pages(model, records)
    with Path(out_path).open("w", encoding="utf-8") as fh:
        for page_id, score in scored:
            fh.write(json.dumps({"page_id": page_id, "score": score}) + "\n")
    click.echo(f"scored {len(scored)} pages -> {out_path}")


@redd_group.command("gradcheck")
@click.option("--d-red", type=int, default=100, show_default=True)
@click.option("--arch", type=click.Choice(redd.ARCHITECTURES), default="nonlinear",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@format_option
def redd_gradcheck(d_red, arch, seed, fmt):
    """Compare analytic gradients against central finite differences."""
    rng = np.random.Generator(np.random.PCG64(seed))
    model = redd.init_model(d_red, architecture=arch, seed=seed)
    batch = rng.normal(size=(4, d_red))
    labels = np.array([0.0, 1.0, 1.0, 0.0])
    error = redd.gradient_check(model, batch, labels)
    _emit({"max_relative_error": error, "architecture": arch, "d_red": d_red}, fmt)


# -- eval ----------------------------------------------------------------------

@cli.group("eval")
def eval_group():
    """Metrics and the two scripted experiments."""


@eval_group.command("psamecat")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--field", "embedding_field",
              type=click.Choice(["embedding_full", "embedding_reduced"]),
              default="embedding_reduced", show_default=True)
@click.option("--metrics-out", default=None, type=click.Path())
@format_option
def eval_psamecat(corpus_path, k, embedding_field, metrics_out, fmt):
    """Nearest-neighbor category agreement."""
    records, _ = corpus_mod.load_corpus(corpus_path)
    result = metrics.psamecat(records, metrics.PSameCatConfig(k_neighbors=k), embedding_field)
    _emit({"psamecat": result.score, "n_evaluated": result.n_evaluated,
           "n_excluded": result.n_excluded}, fmt, metrics_out)


@eval_group.command("auc")
@click.option("--scores", "scores_path", required=True, type=click.Path())
@click.option("--corpus", "corpus_path", required=True, type=click.Path(),
              help="Labels come from this corpus.")
@click.option("--metrics-out", default=None, type=click.Path())
@format_option
def eval_auc(scores_path, corpus_path, metrics_out, fmt):
    """AUC-ROC of a score file against corpus labels."""
    records, _ = corpus_mod.load_corpus(corpus_path)
    labels_by_id = {r.page_id: r.label for r in records if r.label is not None}
    rows = [(pid, s) for pid, s in _load_scores(scores_path) if pid in labels_by_id]
    if not rows:
        raise ValidationError("no scored pages carry labels")
    auc = metrics.auc_roc(
        np.array([s for _, s in rows]),
        np.array([labels_by_id[pid] for pid, _ in rows]),
    )
    _emit({"auc": auc, "n": len(rows)}, fmt, metrics_out)


@eval_group.command("p-at-k")
@click.option("--scores", "scores_path", required=True, type=click.Path(),
              help="Ranked item/score file (any ids).")
@click.option("--positives", required=True,
              help="Comma-separated positive ids, or @file with one id per line.")
@click.option("--k", type=int, required=True)
@click.option("--metrics-out", default=None, type=click.Path())
@format_option
def eval_p_at_k(scores_path, positives, k, metrics_out, fmt):
    """Precision at k over a ranked score file."""
    rows = metrics.make_ranked(_load_scores(scores_path))
    if positives.startswith("@"):
        ids = {
            line.strip()
            for line in Path(positives[1:]).read_text(encoding="utf-8").splitlines()
            if line.strip()
        }
    else:
        ids = {p.strip() for p in positives.split(",") if p.strip()}
    value = metrics.precision_at_k(rows, ids, k)
    _emit({"precision_at_k": value, "k": k, "n_positive": len(ids)}, fmt, metrics_out)


@eval_group.command("langtable")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--scores", "scores_path", required=True, type=click.Path())
@click.option("--focus", "focus_language", required=True)
@format_option
def eval_langtable(corpus_path, scores_path, focus_language, fmt):
    """Per-language score statistics split by class."""
    records, _ = corpus_mod.load_corpus(corpus_path)
    scores = dict(_load_scores(scores_path))
    scored = [(r, scores[r.page_id]) for r in records
              if r.page_id in scores and r.label is not None]
    if not scored:
        raise ValidationError("no labeled pages with scores")
    table = metrics.language_score_table(
        [r for r, _ in scored], [s for _, s in scored], focus_language
    )
    click.echo(json.dumps(table.to_json(), sort_keys=True,
                          indent=None if fmt == "json" else 2))


def _load_overrides(path):
    if path is None:
        return None
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"experiment spec file not found: {p}")
    return json.loads(p.read_text(encoding="utf-8"))


@eval_group.command("ablation")
@click.option("--spec", "spec_path", default=None, type=click.Path(),
              help="JSON overrides: {\"fixture\": {...}, \"train\": {...}}.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--metrics-out", default=None, type=click.Path())
@format_option
def eval_ablation(spec_path, seed, metrics_out, fmt):
    """Topic-filter ablation on the built-in synthetic fixture."""
    result = experiments.run_default_ablation(seed, overrides=_load_overrides(spec_path))
    _emit(result.to_json(), fmt, metrics_out)


@eval_group.command("confound")
@click.option("--spec", "spec_path", default=None, type=click.Path(),
              help="JSON overrides: {\"train\": {...}, \"lang_weight_high\": x}.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--metrics-out", default=None, type=click.Path())
@format_option
def eval_confound(spec_path, seed, metrics_out, fmt):
    """Language-confound experiment on the built-in synthetic fixture."""
    result = experiments.run_language_confound(
        seed, overrides=_load_overrides(spec_path)
    )
    payload = result.to_json()
    if metrics_out:
        flat = {
            "trustworthy_gap_language_dominated": result.trustworthy_gap_language_dominated,
            "trustworthy_gap_content_driven": result.trustworthy_gap_content_driven,
            **{f"auc_{k}": v for k, v in result.per_language_auc_content_driven.items()},
        }
        Path(metrics_out).write_text(json.dumps(flat, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(json.dumps(payload, sort_keys=True) if fmt == "json" else json.dumps(payload, sort_keys=True, indent=2))


# -- triage ----------------------------------------------------------------------

@cli.group("triage")
def triage_group():
    """Domain aggregation, queue building, evaluation, decision merge."""


@triage_group.command("aggregate")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--scores", "scores_path", required=True, type=click.Path())
@click.option("--min-pages", type=int, default=1, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def triage_aggregate(corpus_path, scores_path, min_pages, out_path):
    """Aggregate page scores into domain scores."""
    records, _ = corpus_mod.load_corpus(corpus_path)
    domain_by_id = {r.page_id: r.domain for r in records}
    rows = []
    for page_id, score in _load_scores(scores_path):
        if page_id not in domain_by_id:
            raise ValidationError(f"scored page {page_id!r} not in corpus")
        rows.append((page_id, domain_by_id[page_id], score))
    result = triage.aggregate_domains(rows, min_pages=min_pages)
    with Path(out_path).open("w", encoding="utf-8") as fh:
        for dom in result.domains:
            fh.write(json.dumps(dom.to_json(), sort_keys=True) + "\n")
    click.echo(
        f"aggregated {len(rows)} pages into {len(result.domains)} domains "
        f"({len(result.excluded)} excluded) -> {out_path}"
    )


@triage_group.command("queue")
@click.option("--domains", "domains_path", required=True, type=click.Path())
@click.option("--cutoff", type=int, default=300, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def triage_queue(domains_path, cutoff, out_path):
    """Freeze the top domains into a review queue."""
    path = Path(domains_path)
    if not path.exists():
        raise ValidationError(f"domain scores file not found: {path}")
    items = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                items.append(triage.DomainScore(
                    domain=obj["domain"], mean_score=obj["mean_score"],
                    page_count=obj["page_count"], score_std=obj["score_std"],
                    model_version=obj.get("model_version", 0),
                ))
    queue = triage.build_queue(items, cutoff=cutoff)
    pipeline.save_queue(queue, out_path)
    click.echo(f"queue {queue.queue_id} with {len(queue.items)} domains -> {out_path}")


@triage_group.command("evaluate")
@click.option("--queue", "queue_path", required=True, type=click.Path())
@click.option("--decisions", "log_path", required=True, type=click.Path())
@click.option("--k", type=int, default=40, show_default=True)
@click.option("--metrics-out", default=None, type=click.Path())
@format_option
def triage_evaluate(queue_path, log_path, k, metrics_out, fmt):
    """Precision@k, baseline, and blocked-rank histogram for a queue."""
    queue = pipeline.load_queue(queue_path)
    decisions = [d for d in triage.read_decision_log(log_path)
                 if d.queue_id == queue.queue_id]
    evaluation = triage.evaluate_queue(queue, decisions, k=min(k, len(queue.items)))
    _emit({
        "precision_at_k": evaluation.precision_at_k,
        "k": evaluation.k,
        "baseline": evaluation.baseline,
        "n_positive": evaluation.n_positive,
        "rank_histogram": list(evaluation.rank_histogram),
    }, fmt, metrics_out)


@triage_group.command("merge")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--decisions", "log_path", required=True, type=click.Path())
@click.option("--topic", "topic_path", default=None, type=click.Path(),
              help="Restrict label changes to pages above this topic's threshold.")
@click.option("--out", "out_path", required=True, type=click.Path())
def triage_merge(corpus_path, log_path, topic_path, out_path):
    """Fold review verdicts back into corpus labels."""
    records, manifest = corpus_mod.load_corpus(corpus_path)
    decisions = triage.read_decision_log(log_path)
    eligible = None
    if topic_path:
        topic = topics.load_topic(topic_path)
        eligible = frozenset(r.page_id for r in topics.filter_on_topic(topic, records))
    result = triage.merge_decisions(
        records, decisions, triage.MergePolicy(eligible_page_ids=eligible)
    )
    corpus_mod.save_corpus(list(result.records), out_path, name=manifest.name,
                           d_full=manifest.d_full, d_red=manifest.d_red)
    click.echo(
        f"merged {len(result.audit)} label updates "
        f"({len(result.skipped)} domains skipped) -> {out_path}"
    )


# -- pipeline & service ------------------------------------------------------------

@cli.command("run")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=None,
              help="Override both projection and training seeds.")
def run_cmd(config_path, seed):
    """Run the full pipeline from a config file."""
    config = pipeline.load_config(config_path)
    if seed is not None:
        train_cfg = redd.TrainConfig.from_json({**config.train.to_json(), "seed": seed})
        config = pipeline.PipelineConfig(
            **{**config.__dict__, "projection_seed": seed, "train": train_cfg}
        )
    report = pipeline.run_pipeline(config)
    click.echo(json.dumps(report["metrics"], sort_keys=True))
    click.echo(f"report: {config.output_dir / 'run_report.json'}")


@cli.command("serve")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--train-config", "train_config_path", default=None, type=click.Path(),
              help="Default training config for retrain requests.")
def serve_cmd(data_dir, host, port, train_config_path):
    """Start the HTTP review service."""
    retrain_defaults = _train_config(train_config_path, None)
    service.serve_forever(data_dir, host=host, port=port,
                          retrain_defaults=retrain_defaults)


def entrypoint(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except ValidationError as exc:
        click.echo(f"validation error: {exc}", err=True)
        return EXIT_VALIDATION
    except ReddpipeError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_RUNTIME
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_RUNTIME


def main():  # console-script shim
    sys.exit(entrypoint())


if __name__ == "__main__":
    main()
