import assert from "node:assert/strict";
import { test } from "node:test";

import { PendingStore, newIdempotencyKey } from "../src/pending.js";

test("idempotency keys are unique", () => {
  const keys = new Set(Array.from({ length: 200 }, () => newIdempotencyKey()));
  assert.equal(keys.size, 200);
});

test("enqueue replaces an older intent for the same domain", () => {
  const store = new PendingStore();
  store.enqueue("q1", "a.example", "flag");
  store.enqueue("q1", "a.example", "blocklist");
  const items = store.forQueue("q1");
  assert.equal(items.length, 1);
  assert.equal(items[0]!.verdict, "blocklist");
});

test("acknowledge drops the submission; failure keeps it retryable", () => {
  const store = new PendingStore();
  const item = store.enqueue("q1", "a.example", "flag");
  store.markFailed(item.key);
  assert.equal(store.forQueue("q1")[0]!.state, "failed");
  store.acknowledge(item.key);
  assert.equal(store.size, 0);
});

test("flush retries with the original idempotency key until acked", async () => {
  const store = new PendingStore();
  const item = store.enqueue("q1", "a.example", "blocklist");
  const seen: string[] = [];
  let failFirst = true;

  const submit = async (p: { key: string }) => {
    seen.push(p.key);
    if (failFirst) {
      failFirst = false;
      throw new Error("offline");
    }
    return { decision_id: "d1" };
  };

  let result = await store.flush(submit);
  assert.deepEqual(result, { sent: 0, failed: 1 });
  assert.equal(store.size, 1);

  result = await store.flush(submit);
  assert.deepEqual(result, { sent: 1, failed: 0 });
  assert.equal(store.size, 0);
  // identical key on both attempts: the server can dedupe
  assert.deepEqual(seen, [item.key, item.key]);
});
