"""Acceptance suite: one test per acceptance criterion, each printing a
pass/fail line with its measured values.

Criteria (all desk-scale, deterministic given the frozen seeds):
  1. Oracle equivalence of every metric against brute force      (< 10 s)
  2. Gradient check across architectures and input widths        (< 10 s)
  3. Projection quality: pSameCat drop under 768 -> 100          (< 30 s)
  4. Pipeline AUC >= 0.95; nonlinear-linear rings gap >= 0.2     (< 60 s)
  5. Filter ablation gap >= 0.10 across 5 seeds                  (< 2 min)
  6. Language confound gaps and per-language AUC                 (< 2 min)
  7. Triage fixtures: baseline, histogram, merge idempotence
  8. Determinism and durability (byte-identical reports; replay;
     concurrent decision posts)
"""

import os
import re
import signal
import subprocess
import sys
import threading
import time

import numpy as np

from reddpipe import corpus as corpus_mod
from reddpipe import (
    embeddings,
    experiments,
    metrics,
    pipeline,
    redd,
    service,
    synthetic,
    topics,
    triage,
)

from conftest import page
from test_metrics import oracle_auc, oracle_psamecat
from test_pipeline import demo_config
from test_service import build_world, http

ABLATION_SEEDS = (5, 6, 7, 8, 9)
PROJECTION_SEEDS = (1, 2, 3, 4, 5)


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


class TestCriterion1OracleEquivalence:
    """Every metric matches an independent brute-force oracle on randomized
    corpora of <= 200 items (exact counts, <=1e-9 means, <=1e-6 cosine)."""

    def test_oracle_equivalence(self):
        t0 = time.time()
        rng = np.random.Generator(np.random.PCG64(101))

        # pSameCat on 200 pages
        pages = [
            page(
                f"p{i:03d}",
                reduced=rng.normal(size=8),
                categories={f"c{rng.integers(0, 6)}"},
            )
            for i in range(200)
        ]
        ours = metrics.psamecat(pages, metrics.PSameCatConfig(k_neighbors=5))
        oracle = oracle_psamecat(pages, 5)
        ok_psc = abs(ours.score - oracle) <= 1e-9

        # AUC on 200 scores with ties
        scores = rng.uniform(size=200)
        scores[:30] = 0.5
        labels = rng.integers(0, 2, size=200)
        labels[0], labels[1] = 0, 1
        ok_auc = abs(metrics.auc_roc(scores, labels) - oracle_auc(scores, labels)) <= 1e-9

        # precision@k with exact counting
        ranked = [(f"i{j}", 1.0 - j * 0.004) for j in range(200)]
        positions = sorted(rng.choice(200, size=31, replace=False).tolist())
        positives = {f"i{j}" for j in positions}
        ok_pk = all(
            metrics.precision_at_k(ranked, positives, k)
            == sum(1 for j in positions if j < k) / k
            for k in (1, 7, 40, 200)
        )

        # domain aggregation against dict grouping
        rows = [
            (f"p{i}", f"d{rng.integers(0, 40):02d}", float(rng.uniform(0.01, 0.99)))
            for i in range(200)
        ]
        agg = triage.aggregate_domains(rows)
        grouped = {}
        for _, dom, s in rows:
            grouped.setdefault(dom, []).append(s)
        ok_agg = len(agg.domains) == len(grouped) and all(
            abs(d.mean_score - sum(grouped[d.domain]) / len(grouped[d.domain])) <= 1e-9
            and d.page_count == len(grouped[d.domain])
            for d in agg.domains
        )

        # bucket histogram exact counts
        topic = topics.build_topic(
            [page("ex", reduced=[1.0, 0.0])], bucket_edges=(0.0, 0.25, 0.5, 0.75, 1.0)
        )
        scored = [(f"s{i}", float(rng.uniform(0, 1))) for i in range(200)]
        buckets = topics.bucket_report(topic, scored)
        edges = topic.bucket_edges
        hist = [0] * (len(edges) - 1)
        for _, s in scored:
            for i in range(len(edges) - 1):
                if (edges[i] <= s < edges[i + 1]) or (i == len(edges) - 2 and s == edges[-1]):
                    hist[i] += 1
                    break
        ok_hist = [b.count for b in buckets.buckets] == hist

        # threshold selection against a hand-applied rule
        from test_topics import report_with_fractions

        cases = [
            ([(0.7, 0.8, 5, 0.4), (0.8, 0.9, 5, 0.7), (0.9, 1.0, 5, 0.95)], 0.8),
            ([(0.7, 0.8, 5, 0.9), (0.8, 0.9, 5, 0.9), (0.9, 1.0, 5, 0.9)], 0.7),
            ([(0.7, 0.8, 5, 0.1), (0.8, 0.9, 5, 0.2), (0.9, 1.0, 5, 0.3)], 0.9),
        ]
        ok_thr = all(
            topics.select_threshold(report_with_fractions(spec)) == expected
            for spec, expected in cases
        )

        elapsed = time.time() - t0
        ok = all([ok_psc, ok_auc, ok_pk, ok_agg, ok_hist, ok_thr]) and elapsed < 10
        report(
            "criterion-1 oracle equivalence",
            ok,
            f"psamecat={ok_psc} auc={ok_auc} p@k={ok_pk} aggregate={ok_agg} "
            f"histogram={ok_hist} threshold={ok_thr} in {elapsed:.1f}s (< 10 s)",
        )


class TestCriterion2GradientCheck:
    # SELU's derivative jumps at z = 0, so central differences are evaluated
    # at batches whose pre-activations all sit clear of the kink (the batch
    # seeds below were screened for min |z| > 1.5e-3, beyond the 1e-4 step's
    # straddle zone). Linear models have no kink; any batch works.
    BATCH_SEEDS = {("nonlinear", 3): 38, ("nonlinear", 100): 68,
                   ("linear", 3): 1, ("linear", 100): 1}

    def test_gradients_across_architectures_and_widths(self):
        t0 = time.time()
        worst = {}
        for arch in ("linear", "nonlinear"):
            for d_red in (3, 100):
                rng = np.random.Generator(
                    np.random.PCG64(self.BATCH_SEEDS[(arch, d_red)])
                )
                model = redd.init_model(d_red, architecture=arch, seed=7)
                batch = rng.normal(size=(6, d_red))
                labels = rng.integers(0, 2, size=6).astype(float)
                worst[(arch, d_red)] = redd.gradient_check(model, batch, labels)
        elapsed = time.time() - t0
        max_err = max(worst.values())
        ok = max_err <= 1e-4 and elapsed < 10
        detail = ", ".join(f"{a}/{d}: {e:.2e}" for (a, d), e in worst.items())
        report(
            "criterion-2 gradient check",
            ok,
            f"{detail}; max {max_err:.2e} <= 1e-4 in {elapsed:.1f}s (< 10 s)",
        )


class TestCriterion3ProjectionQuality:
    def test_psamecat_survives_projection(self):
        t0 = time.time()
        pages = synthetic.make_clustered_pages(550, 5, 768, seed=11, noise_std=0.06)
        full = metrics.psamecat(pages, embedding_field="embedding_full").score
        drops = []
        for seed in PROJECTION_SEEDS:
            projection = embeddings.make_projection(768, 100, seed=seed)
            reduced = embeddings.reduce_pages(pages, projection)
            red = metrics.psamecat(reduced, embedding_field="embedding_reduced").score
            drops.append(full - red)
        elapsed = time.time() - t0
        ok = all(d <= 0.03 for d in drops) and elapsed < 30
        report(
            "criterion-3 projection quality",
            ok,
            f"pSameCat(768)={full:.4f}, drops={[round(d, 4) for d in drops]} "
            f"(all <= 0.03) in {elapsed:.1f}s (< 30 s)",
        )


class TestCriterion4PipelineAuc:
    def test_pipeline_auc_and_rings_gap(self, tmp_path):
        t0 = time.time()
        records = synthetic.generate_synthetic_corpus(
            synthetic.default_pipeline_spec(), seed=7
        )
        corpus_path = tmp_path / "corpus.jsonl"
        corpus_mod.save_corpus(records, corpus_path, name="acceptance")
        examples = [r.page_id for r in records
                    if "warcoverage" in r.categories and r.label == 1][:4]
        examples += [r.page_id for r in records
                     if "warcoverage" in r.categories and r.label == 0][:4]
        run_report = pipeline.run_pipeline(
            demo_config(corpus_path, tuple(examples), tmp_path / "out", seed=7)
        )
        auc = run_report["metrics"]["auc_test_filtered"]

        rings = synthetic.make_ring_pages(400, seed=7)
        train_split = [p for p in rings if p.split == "train"]
        test_split = [p for p in rings if p.split == "test"]
        x = np.stack([p.embedding_reduced for p in test_split]).astype(np.float64)
        y = np.array([p.label for p in test_split])
        cfg = dict(epochs=150, seed=7, learning_rate=0.05)
        auc_nl = metrics.auc_roc(
            redd.forward(redd.train(train_split, redd.TrainConfig(**cfg)), x), y
        )
        auc_li = metrics.auc_roc(
            redd.forward(
                redd.train(train_split, redd.TrainConfig(architecture="linear", **cfg)), x
            ),
            y,
        )
        elapsed = time.time() - t0
        ok = auc >= 0.95 and (auc_nl - auc_li) >= 0.2 and elapsed < 60
        report(
            "criterion-4 pipeline AUC",
            ok,
            f"filtered held-out AUC={auc:.4f} (>= 0.95); rings nonlinear={auc_nl:.3f} "
            f"linear={auc_li:.3f} gap={auc_nl - auc_li:.3f} (>= 0.2) "
            f"in {elapsed:.1f}s (< 60 s)",
        )


class TestCriterion5FilterAblation:
    def test_gap_across_five_seeds(self):
        t0 = time.time()
        gaps = []
        filtered_aucs = []
        for seed in ABLATION_SEEDS:
            result = experiments.run_default_ablation(seed)
            gaps.append(result.gap)
            filtered_aucs.append(result.auc_filtered_train)
        elapsed = time.time() - t0
        ok = all(g >= 0.10 for g in gaps) and elapsed < 120
        report(
            "criterion-5 filter ablation",
            ok,
            f"seeds {ABLATION_SEEDS}: gaps={[round(g, 3) for g in gaps]} "
            f"(all >= 0.10), filtered AUCs={[round(a, 3) for a in filtered_aucs]} "
            f"in {elapsed:.1f}s (< 2 min)",
        )


class TestCriterion6LanguageConfound:
    def test_confound_margins(self):
        t0 = time.time()
        result = experiments.run_language_confound(seed=7)
        biggest = experiments.largest_non_focus_language(result)
        auc_big = result.per_language_auc_content_driven[biggest]
        elapsed = time.time() - t0
        ok = (
            result.trustworthy_gap_language_dominated >= 0.3
            and result.trustworthy_gap_content_driven <= 0.15
            and auc_big >= 0.8
            and elapsed < 120
        )
        report(
            "criterion-6 language confound",
            ok,
            f"lang-dominated trustworthy gap={result.trustworthy_gap_language_dominated:.3f} "
            f"(>= 0.3); content-driven gap={result.trustworthy_gap_content_driven:.3f} "
            f"(<= 0.15); AUC[{biggest}]={auc_big:.3f} (>= 0.8) in {elapsed:.1f}s (< 2 min)",
        )


class TestCriterion7TriageFixtures:
    def test_triage_fixtures(self):
        # 26-positive/300-queue baseline within 1e-9 of 26/300
        items = [
            triage.DomainScore(f"d{i:04d}", 0.99 - i * 0.001, 3, 0.01, 1)
            for i in range(300)
        ]
        queue = triage.build_queue(items, cutoff=300, queue_id="qa")
        rng = np.random.Generator(np.random.PCG64(707))
        ranks = sorted(rng.choice(300, size=26, replace=False).tolist())
        decisions = [
            triage.ReviewDecision(
                decision_id=f"d{i:08d}", queue_id="qa",
                domain=queue.items[r].domain, verdict="blocklist",
                reviewer_id="rev", timestamp=f"t{i}",
            )
            for i, r in enumerate(ranks, start=1)
        ]
        evaluation = triage.evaluate_queue(queue, decisions, k=40, histogram_bin=30)
        ok_baseline = abs(evaluation.baseline - 26 / 300) <= 1e-9

        hist_oracle = [0] * 10
        for r in ranks:
            hist_oracle[r // 30] += 1
        ok_hist = list(evaluation.rank_histogram) == hist_oracle
        ok_pk = evaluation.precision_at_k == sum(1 for r in ranks if r < 40) / 40

        # merge idempotence
        corpus = [
            page(f"p{i}", domain=f"d{i % 9:04d}.site", label=(1 if i % 5 == 0 else None))
            for i in range(90)
        ]
        merge_decisions_set = [
            triage.ReviewDecision(
                decision_id=f"m{i:08d}", queue_id="qa", domain=f"d{i:04d}.site",
                verdict=("blocklist" if i % 2 else "trustworthy"),
                reviewer_id="rev", timestamp=f"t{i}",
            )
            for i in range(9)
        ]
        once = triage.merge_decisions(corpus, merge_decisions_set)
        twice = triage.merge_decisions(list(once.records), merge_decisions_set)
        ok_merge = once.records == twice.records and tuple(corpus) != once.records

        ok = all([ok_baseline, ok_hist, ok_pk, ok_merge])
        report(
            "criterion-7 triage fixtures",
            ok,
            f"baseline={evaluation.baseline:.6f} (26/300 within 1e-9: {ok_baseline}); "
            f"histogram exact: {ok_hist}; p@40 exact: {ok_pk}; "
            f"merge idempotent: {ok_merge}",
        )


class TestCriterion8DeterminismDurability:
    def test_byte_identical_run_reports(self, tmp_path):
        records = synthetic.generate_synthetic_corpus(
            synthetic.default_pipeline_spec(), seed=7
        )
        corpus_path = tmp_path / "corpus.jsonl"
        corpus_mod.save_corpus(records, corpus_path, name="acceptance")
        examples = [r.page_id for r in records
                    if "warcoverage" in r.categories and r.label == 1][:4]
        examples += [r.page_id for r in records
                     if "warcoverage" in r.categories and r.label == 0][:4]
        pipeline.run_pipeline(
            demo_config(corpus_path, tuple(examples), tmp_path / "r1", seed=7)
        )
        pipeline.run_pipeline(
            demo_config(corpus_path, tuple(examples), tmp_path / "r2", seed=7)
        )
        b1 = (tmp_path / "r1" / "run_report.json").read_bytes()
        b2 = (tmp_path / "r2" / "run_report.json").read_bytes()
        ok = b1 == b2
        report(
            "criterion-8a deterministic run reports",
            ok,
            f"identical seeds give byte-identical reports ({len(b1)} bytes)",
        )

    def test_kill_minus_nine_and_replay(self, tmp_path):
        """Run the real server in a subprocess, post decisions, SIGKILL it,
        restart on the same data dir, and compare the replayed state."""
        build_world(tmp_path)

        def spawn():
            proc = subprocess.Popen(
                [sys.executable, "-m", "reddpipe", "serve",
                 "--data-dir", str(tmp_path), "--port", "0"],
                stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
            )
            line = proc.stdout.readline()
            match = re.search(r"http://[\d.]+:(\d+)", line)
            assert match, f"no port in server banner: {line!r}"
            return proc, int(match.group(1))

        proc, port = spawn()
        try:
            base = f"http://127.0.0.1:{port}"
            _, listing = http("GET", f"{base}/queues")
            queue_id = listing["queues"][0]["queue_id"]
            _, body = http("GET", f"{base}/queues/{queue_id}")
            domains = [r["domain"] for r in body["rows"]]
            for i, domain in enumerate(domains[:6]):
                status, _ = http(
                    "POST", f"{base}/queues/{queue_id}/decisions",
                    {"domain": domain, "verdict": "blocklist" if i % 2 else "flag",
                     "reviewer_id": f"r{i}"},
                )
                assert status == 201
            _, before = http("GET", f"{base}/queues/{queue_id}")
        finally:
            os.kill(proc.pid, signal.SIGKILL)
            proc.wait()

        proc, port = spawn()
        try:
            base = f"http://127.0.0.1:{port}"
            _, after = http("GET", f"{base}/queues/{queue_id}")
        finally:
            os.kill(proc.pid, signal.SIGKILL)
            proc.wait()
        ok = before == after
        report(
            "criterion-8b kill-and-restart replay",
            ok,
            f"queue view identical after SIGKILL restart "
            f"({sum(1 for r in after['rows'] if r['status'] != 'pending')} decided rows)",
        )

    def test_hundred_concurrent_posts_durable(self, tmp_path):
        build_world(tmp_path)
        state = service.ServiceState(service.ServiceConfig(data_dir=tmp_path))
        srv = service.make_server(state)
        threading.Thread(target=srv.serve_forever, daemon=True).start()
        base = f"http://127.0.0.1:{srv.server_address[1]}"
        queue_id = next(iter(state.queues))
        domains = state.queues[queue_id].domains()
        statuses = []
        lock = threading.Lock()

        def post(i):
            status, _ = http(
                "POST", f"{base}/queues/{queue_id}/decisions",
                {"domain": domains[i % len(domains)], "verdict": "flag",
                 "reviewer_id": f"r{i}"},
            )
            with lock:
                statuses.append(status)

        threads = [threading.Thread(target=post, args=(i,)) for i in range(100)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        srv.shutdown()
        logged = triage.read_decision_log(tmp_path / "decisions.log")
        ids = {d.decision_id for d in logged}
        ok = (
            statuses.count(201) == 100
            and len(logged) == 100
            and len(ids) == 100
        )
        report(
            "criterion-8c concurrent decision durability",
            ok,
            f"{statuses.count(201)}/100 acknowledged, {len(logged)} in log, "
            f"{len(ids)} unique ids, log parses cleanly",
        )
