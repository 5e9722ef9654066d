"""Record real review-service responses as JSON fixtures for the UI
contract tests.

Run from the repository root with the Python package installed:

    python frontend/fixtures/record.py

Deterministic: rebuilds the same seeded world every time.
"""

import json
import tempfile
import threading
from pathlib import Path

from reddpipe import redd, service, synthetic, topics, triage

FIXTURE_DIR = Path(__file__).parent


def build_world(data_dir):
    records = synthetic.make_blob_pages(
        150, 8, 4.0, seed=3, test_fraction=0.3, domains_per_class=15
    )
    topic = topics.build_topic(
        records[:6], topic_id="demo", bucket_edges=(-1.0, 0.0, 0.5, 1.0)
    )
    model = redd.train(
        [r for r in records if r.split == "train"], redd.TrainConfig(epochs=15, seed=1)
    )
    model.version = 1
    scored = redd.predict_pages(model, records)
    domain_by_id = {r.page_id: r.domain for r in records}
    aggregation = triage.aggregate_domains(
        [(pid, domain_by_id[pid], s) for pid, s in scored], model_version=1
    )
    queue = triage.build_queue(
        aggregation.domains, cutoff=20, model_version=1, created_at="2026-08-01T00:00:00Z"
    )
    service.bootstrap_data_dir(data_dir, records, topic, model, queue)
    return queue


def save(name, payload):
    path = FIXTURE_DIR / f"{name}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


def main():
    with tempfile.TemporaryDirectory() as tmp:
        queue = build_world(tmp)
        state = service.ServiceState(service.ServiceConfig(data_dir=tmp))

        save("queue_fresh", state.get_queue(queue.queue_id))
        save("queue_window", state.get_queue(queue.queue_id, start=5, end=9))

        top = state.get_queue(queue.queue_id)["rows"]
        state.post_decision(queue.queue_id, top[0]["domain"], "blocklist", "rev1",
                            idempotency_key="fix-1")
        state.post_decision(queue.queue_id, top[1]["domain"], "flag", "rev1",
                            idempotency_key="fix-2")
        state.post_decision(queue.queue_id, top[3]["domain"], "trustworthy", "rev2",
                            idempotency_key="fix-3")
        save("queue_decided", state.get_queue(queue.queue_id))

        save("calibration_fresh", state.get_calibration("demo"))
        calibration = state.get_calibration("demo")
        nonempty = [b for b in calibration["buckets"] if b["count"] > 0]
        for i, bucket in enumerate(nonempty):
            marks = [True, True, True, False] if i == 0 else [True] * 4
            for page_id, relevant in zip(bucket["sample_page_ids"], marks):
                marked = state.post_relevance_mark(
                    "demo", bucket["lo"], page_id, relevant
                )
        save("calibration_marked", marked)
        save("calibration_confirmed", state.confirm_calibration("demo"))
        save("calibration_frozen", state.get_calibration("demo"))
        save("metrics_v1", state.get_metrics(1, "demo", k=10))

        job = state.post_retrain("demo", {"epochs": 10, "seed": 2})
        save("retrain_job", job)
        save("metrics_v2", state.get_metrics(2, "demo", k=10))


if __name__ == "__main__":
    main()
