// Locally queued mutations awaiting server acknowledgment.
//
// A submission stays "pending" (or "failed", which keeps it retryable)
// until the server acks it; only then does it disappear from the store.
// Pending state must never render as a confirmed verdict.

import type { Verdict } from "./types.js";

export type SubmissionState = "pending" | "failed";

export interface PendingDecision {
  key: string; // idempotency key, fixed at enqueue time
  queueId: string;
  domain: string;
  verdict: Verdict;
  note: string;
  state: SubmissionState;
  attempts: number;
}

let counter = 0;

export function newIdempotencyKey(): string {
  counter += 1;
  const rand =
    typeof globalThis.crypto?.randomUUID === "function"
      ? globalThis.crypto.randomUUID()
      : Math.random().toString(36).slice(2);
  return `ui-${counter}-${rand}`;
}

export class PendingStore {
  private items: PendingDecision[] = [];

  enqueue(queueId: string, domain: string, verdict: Verdict, note = ""): PendingDecision {
    const item: PendingDecision = {
      key: newIdempotencyKey(),
      queueId,
      domain,
      verdict,
      note,
      state: "pending",
      attempts: 0,
    };
    // one in-flight verdict per domain: a newer click replaces the old intent
    this.items = this.items.filter(
      (p) => !(p.queueId === queueId && p.domain === domain)
    );
    this.items.push(item);
    return item;
  }

  forQueue(queueId: string): PendingDecision[] {
    return this.items.filter((p) => p.queueId === queueId);
  }

  acknowledge(key: string): void {
    this.items = this.items.filter((p) => p.key !== key);
  }

  markFailed(key: string): void {
    const item = this.items.find((p) => p.key === key);
    if (item) {
      item.state = "failed";
      item.attempts += 1;
    }
  }

  /** Retry every queued submission through `submit`; acks drop items,
   * failures stay queued for the next retry. */
  async flush(
    submit: (item: PendingDecision) => Promise<unknown>
  ): Promise<{ sent: number; failed: number }> {
    let sent = 0;
    let failed = 0;
    for (const item of [...this.items]) {
      item.state = "pending";
      try {
        await submit(item);
        this.acknowledge(item.key);
        sent += 1;
      } catch {
        this.markFailed(item.key);
        failed += 1;
      }
    }
    return { sent, failed };
  }

  get size(): number {
    return this.items.length;
  }
}
