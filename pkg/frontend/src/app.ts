// Browser bootstrap: wires the API client, pending store, view models, and
// renderer together. The server stays the single source of truth; every
// interaction refreshes from a server response.

import { ApiError, ReviewApi } from "./api.js";
import { PendingStore } from "./pending.js";
import { renderCalibrationScreen, renderQueueScreen } from "./render.js";
import type { Verdict } from "./types.js";
import { buildCalibrationView, buildQueueView, precisionSoFar } from "./viewmodel.js";

interface AppState {
  api: ReviewApi;
  pending: PendingStore;
  queueId: string | null;
  topicId: string;
  precisionK: number;
  notice: string;
}

function $(selector: string): HTMLElement {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as HTMLElement;
}

async function refreshQueue(state: AppState): Promise<void> {
  if (!state.queueId) return;
  const payload = await state.api.getQueue(state.queueId);
  const view = buildQueueView(payload, state.pending.forQueue(state.queueId));
  const k = Math.min(state.precisionK, payload.rows.length);
  const anyDecided = payload.rows.some((r) => r.status !== "pending");
  const precision = anyDecided ? { k, value: precisionSoFar(payload, k) } : null;
  $("#queue").innerHTML = renderQueueScreen(view, precision);
}

async function refreshCalibration(state: AppState): Promise<void> {
  try {
    const doc = await state.api.getCalibration(state.topicId);
    $("#calibration").innerHTML = renderCalibrationScreen(buildCalibrationView(doc));
  } catch (err) {
    $("#calibration").innerHTML = `<p class="error">${String(err)}</p>`;
  }
}

function notify(state: AppState, message: string): void {
  state.notice = message;
  $("#notice").textContent = message;
}

async function submitDecision(
  state: AppState,
  domain: string,
  verdict: Verdict
): Promise<void> {
  if (!state.queueId) return;
  const item = state.pending.enqueue(state.queueId, domain, verdict);
  await refreshQueue(state); // optimistic: row shows "pending"
  try {
    const ack = await state.api.postDecision(
      item.queueId,
      item.domain,
      item.verdict,
      item.key,
      item.note
    );
    state.pending.acknowledge(item.key);
    notify(state, ack.duplicate
      ? `duplicate submission suppressed (${ack.decision_id})`
      : `recorded ${verdict} for ${domain} (${ack.decision_id})`);
  } catch (err) {
    if (err instanceof ApiError) {
      // a definite server verdict (validation/conflict) is not retryable
      state.pending.acknowledge(item.key);
      notify(state, `rejected: ${err.message}`);
    } else {
      state.pending.markFailed(item.key);
      notify(state, `offline? queued ${verdict} for ${domain}; will retry`);
    }
  }
  await refreshQueue(state);
}

async function retryPending(state: AppState): Promise<void> {
  const { sent, failed } = await state.pending.flush((item) =>
    state.api.postDecision(item.queueId, item.domain, item.verdict, item.key, item.note)
  );
  if (sent || failed) {
    notify(state, `retried pending submissions: ${sent} sent, ${failed} still queued`);
    await refreshQueue(state);
  }
}

async function handleAction(state: AppState, target: HTMLElement): Promise<void> {
  const action = target.dataset.action;
  if (action === "decide") {
    await submitDecision(
      state,
      target.dataset.domain ?? "",
      (target.dataset.verdict ?? "skip") as Verdict
    );
  } else if (action === "retrain") {
    try {
      const job = await state.api.retrain(state.topicId);
      notify(state, `retrained: model v${job.model_version} (${job.status})`);
      $("#model-version").textContent = `model v${job.model_version}`;
      await refreshQueue(state);
    } catch (err) {
      notify(state, `retrain refused: ${String(err instanceof ApiError ? err.message : err)}`);
    }
  } else if (action === "mark") {
    try {
      await state.api.postMark(
        state.topicId,
        Number(target.dataset.bucketLo),
        target.dataset.page ?? "",
        target.dataset.relevant === "true"
      );
      await refreshCalibration(state);
    } catch (err) {
      notify(state, `mark rejected: ${String(err instanceof ApiError ? err.message : err)}`);
    }
  } else if (action === "confirm") {
    try {
      const done = await state.api.confirmCalibration(state.topicId);
      notify(state, `threshold frozen at ${done.threshold}`);
      await refreshCalibration(state);
    } catch (err) {
      notify(state, `confirm rejected: ${String(err instanceof ApiError ? err.message : err)}`);
      await refreshCalibration(state);
    }
  }
}

export async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8765";
  const reviewer = params.get("reviewer") ?? "reviewer-ui";
  const state: AppState = {
    api: new ReviewApi(base, reviewer),
    pending: new PendingStore(),
    queueId: params.get("queue"),
    topicId: params.get("topic") ?? "",
    precisionK: Number(params.get("k") ?? 40),
    notice: "",
  };

  const listing = await state.api.listQueues();
  if (!state.queueId && listing.queues.length > 0) {
    state.queueId = listing.queues[0]!.queue_id;
  }
  if (!state.topicId) {
    // single-topic deployments: let the metrics endpoint pick it up later;
    // calibration needs an explicit ?topic= otherwise
    state.topicId = params.get("topic") ?? "demo";
  }

  document.body.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (target) {
      void handleAction(state, target);
    }
  });
  window.setInterval(() => void retryPending(state), 5000);

  await refreshQueue(state);
  await refreshCalibration(state);
}

if (typeof document !== "undefined" && document.getElementById("queue")) {
  void start();
}
