// Service payload shapes, mirrored from the review service's JSON API.
// The UI never recomputes any of these numbers; it only displays them.

export type Verdict = "blocklist" | "flag" | "trustworthy" | "skip";

export const VERDICTS: Verdict[] = ["blocklist", "flag", "trustworthy", "skip"];

export interface SamplePage {
  page_id: string;
  text: string;
}

export interface QueueRow {
  rank: number;
  domain: string;
  mean_score: number;
  page_count: number;
  score_std: number;
  status: Verdict | "pending";
  decision_id: string | null;
  sample_pages: SamplePage[];
}

export interface QueuePage {
  queue_id: string;
  model_version: number;
  created_at: string;
  total: number;
  cutoff: number;
  start: number;
  end: number;
  rows: QueueRow[];
}

export interface QueueListing {
  queues: {
    queue_id: string;
    size: number;
    model_version: number;
    created_at: string;
    decided: number;
  }[];
}

export interface CalibrationBucket {
  lo: number;
  hi: number;
  count: number;
  sample_page_ids: string[];
  relevance_fraction: number | null;
}

export interface CalibrationDoc {
  topic_id: string;
  frozen: boolean;
  threshold: number | null;
  sample_size: number;
  seed: number;
  out_of_range: number;
  total: number;
  buckets: CalibrationBucket[];
  marks: { bucket: number; page_id: string; relevant: boolean }[];
  page_texts: Record<string, string>;
}

export interface DecisionAck {
  decision_id: string;
  duplicate: boolean;
  verdict: Verdict;
}

export interface RetrainJob {
  job_id: string;
  status: string;
  topic_id: string;
  model_version: number;
  n_train: number;
  merged_pages: number;
}

export interface QueueMetrics {
  precision_at_k: number;
  k: number;
  baseline: number;
  n_positive: number;
  rank_histogram: number[];
  histogram_bin: number;
}

export interface MetricsDoc {
  model_version: number;
  topic_id: string;
  auc_test_filtered: number | null;
  language_table?: Record<string, unknown>;
  queues: Record<string, QueueMetrics>;
}
