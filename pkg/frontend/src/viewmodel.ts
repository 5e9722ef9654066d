// View models for the two screens.
//
// Hard rules, contract-tested against recorded service fixtures:
//   - rendered order always equals server rank order (no client-side
//     re-ranking, no sorting anywhere in this module);
//   - every number on screen is a value the server sent;
//   - pending submissions are flagged and never shown as confirmed.

import type { PendingDecision } from "./pending.js";
import type { CalibrationDoc, QueuePage, Verdict } from "./types.js";

export interface QueueRowView {
  rank: number;
  domain: string;
  meanScore: number;
  pageCount: number;
  scoreStd: number;
  /** Confirmed verdict from the server, or "pending" when undecided. */
  status: Verdict | "pending";
  /** Locally submitted verdict not yet acknowledged by the server. */
  pendingVerdict: Verdict | null;
  pendingFailed: boolean;
  beyondCutoff: boolean;
  samplePages: { pageId: string; text: string }[];
}

export interface QueueView {
  queueId: string;
  modelVersion: number;
  createdAt: string;
  total: number;
  cutoff: number;
  rows: QueueRowView[];
  decided: number;
  pendingCount: number;
}

export function buildQueueView(
  payload: QueuePage,
  pending: PendingDecision[] = []
): QueueView {
  const pendingByDomain = new Map<string, PendingDecision>();
  for (const item of pending) {
    if (item.queueId === payload.queue_id) {
      pendingByDomain.set(item.domain, item);
    }
  }
  // Map in payload order; the server's rank order is the display order.
  const rows = payload.rows.map((row): QueueRowView => {
    const local = pendingByDomain.get(row.domain);
    return {
      rank: row.rank,
      domain: row.domain,
      meanScore: row.mean_score,
      pageCount: row.page_count,
      scoreStd: row.score_std,
      status: row.status,
      pendingVerdict: local ? local.verdict : null,
      pendingFailed: local ? local.state === "failed" : false,
      beyondCutoff: row.rank > payload.cutoff,
      samplePages: row.sample_pages.map((p) => ({ pageId: p.page_id, text: p.text })),
    };
  });
  return {
    queueId: payload.queue_id,
    modelVersion: payload.model_version,
    createdAt: payload.created_at,
    total: payload.total,
    cutoff: payload.cutoff,
    rows,
    decided: rows.filter((r) => r.status !== "pending").length,
    pendingCount: pendingByDomain.size,
  };
}

/**
 * Precision-so-far over the frozen queue order: confirmed blocklist
 * verdicts among the top k rows. Matches the service's queue metrics when
 * every decision is in (contract-tested against the metrics fixture).
 */
export function precisionSoFar(payload: QueuePage, k: number): number {
  if (k < 1 || k > payload.rows.length) {
    throw new RangeError(`k must be in [1, ${payload.rows.length}]`);
  }
  let hits = 0;
  for (const row of payload.rows.slice(0, k)) {
    if (row.status === "blocklist") {
      hits += 1;
    }
  }
  return hits / k;
}

export interface CalibrationBucketView {
  lo: number;
  hi: number;
  count: number;
  /** Server-computed fraction; null until the bucket has marks. */
  relevanceFraction: number | null;
  samples: { pageId: string; text: string; mark: boolean | null }[];
}

export interface CalibrationView {
  topicId: string;
  frozen: boolean;
  threshold: number | null;
  total: number;
  outOfRange: number;
  buckets: CalibrationBucketView[];
  /** Every nonempty bucket fully marked, i.e. confirm is allowed. */
  readyToConfirm: boolean;
}

export function buildCalibrationView(doc: CalibrationDoc): CalibrationView {
  // latest mark per (bucket, page)
  const latest = new Map<string, boolean>();
  for (const mark of doc.marks) {
    latest.set(`${mark.bucket}:${mark.page_id}`, mark.relevant);
  }
  const buckets = doc.buckets.map((bucket, index): CalibrationBucketView => {
    const samples = bucket.sample_page_ids.map((pageId) => ({
      pageId,
      text: doc.page_texts[pageId] ?? "",
      mark: latest.get(`${index}:${pageId}`) ?? null,
    }));
    return {
      lo: bucket.lo,
      hi: bucket.hi,
      count: bucket.count,
      relevanceFraction: bucket.relevance_fraction,
      samples,
    };
  });
  const readyToConfirm =
    !doc.frozen &&
    buckets.every((b) => b.count === 0 || b.relevanceFraction !== null);
  return {
    topicId: doc.topic_id,
    frozen: doc.frozen,
    threshold: doc.threshold,
    total: doc.total,
    outOfRange: doc.out_of_range,
    buckets,
    readyToConfirm,
  };
}
