// Thin typed client over the review service's HTTP API. All mutations go
// through here with idempotency keys; nothing else talks to the network.

import type {
  CalibrationDoc,
  DecisionAck,
  MetricsDoc,
  QueueListing,
  QueuePage,
  RetrainJob,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ReviewApi {
  constructor(
    private readonly baseUrl: string,
    private readonly reviewerToken: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init)
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    extraHeaders: Record<string, string> = {}
  ): Promise<T> {
    const headers: Record<string, string> = {
      "Content-Type": "application/json",
      "X-Reviewer-Token": this.reviewerToken,
      ...extraHeaders,
    };
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const message =
        typeof payload === "object" && payload !== null && "error" in payload
          ? String((payload as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return payload as T;
  }

  listQueues(): Promise<QueueListing> {
    return this.request("GET", "/queues");
  }

  getQueue(queueId: string, start?: number, end?: number): Promise<QueuePage> {
    const range =
      start !== undefined && end !== undefined ? `?start=${start}&end=${end}` : "";
    return this.request("GET", `/queues/${queueId}${range}`);
  }

  postDecision(
    queueId: string,
    domain: string,
    verdict: Verdict,
    idempotencyKey: string,
    note = ""
  ): Promise<DecisionAck> {
    return this.request(
      "POST",
      `/queues/${queueId}/decisions`,
      { domain, verdict, note },
      { "Idempotency-Key": idempotencyKey }
    );
  }

  getCalibration(topicId: string): Promise<CalibrationDoc> {
    return this.request("GET", `/topics/${topicId}/calibration`);
  }

  postMark(
    topicId: string,
    bucketLo: number,
    pageId: string,
    relevant: boolean
  ): Promise<CalibrationDoc> {
    return this.request("POST", `/topics/${topicId}/calibration/marks`, {
      bucket_lo: bucketLo,
      page_id: pageId,
      relevant,
    });
  }

  confirmCalibration(topicId: string): Promise<{ topic_id: string; threshold: number }> {
    return this.request("POST", `/topics/${topicId}/calibration/confirm`);
  }

  retrain(topicId: string, train?: Record<string, unknown>): Promise<RetrainJob> {
    return this.request("POST", "/models/retrain", { topic_id: topicId, train });
  }

  jobStatus(jobId: string): Promise<RetrainJob> {
    return this.request("GET", `/models/retrain/${jobId}`);
  }

  getMetrics(version: number, topicId: string, k?: number): Promise<MetricsDoc> {
    const kq = k === undefined ? "" : `&k=${k}`;
    return this.request("GET", `/models/${version}/metrics?topic=${topicId}${kq}`);
  }
}
