// HTML rendering for the review and calibration screens. Pure string
// templates over the view models; event wiring lives in app.ts through
// data-* attributes.

import type { CalibrationView, QueueRowView, QueueView } from "./viewmodel.js";
import { VERDICTS } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(value: number, digits = 3): string {
  return value.toFixed(digits);
}

const VERDICT_LABELS: Record<string, string> = {
  blocklist: "Blocklist",
  flag: "Flag",
  trustworthy: "Trustworthy",
  skip: "Skip",
};

function verdictButtons(row: QueueRowView): string {
  return VERDICTS.map(
    (verdict) =>
      `<button class="verdict ${verdict}" data-action="decide" ` +
      `data-domain="${escapeHtml(row.domain)}" data-verdict="${verdict}">` +
      `${VERDICT_LABELS[verdict]}</button>`
  ).join("");
}

function statusBadge(row: QueueRowView): string {
  if (row.pendingVerdict !== null) {
    const label = row.pendingFailed ? "retrying" : "pending";
    return `<span class="badge pending">${row.pendingVerdict} (${label}…)</span>`;
  }
  if (row.status === "pending") {
    return `<span class="badge undecided">undecided</span>`;
  }
  return `<span class="badge verdict-${row.status}">${row.status}</span>`;
}

function sampleList(samples: { pageId: string; text: string }[]): string {
  if (samples.length === 0) {
    return `<p class="muted">no stored pages</p>`;
  }
  const items = samples
    .map(
      (s) =>
        `<li><code>${escapeHtml(s.pageId)}</code> ` +
        `<span class="snippet">${escapeHtml(s.text) || "<em>(no text)</em>"}</span></li>`
    )
    .join("");
  return `<ul class="samples">${items}</ul>`;
}

export function renderQueueRows(view: QueueView): string {
  const parts: string[] = [];
  let separated = false;
  for (const row of view.rows) {
    if (row.beyondCutoff && !separated) {
      parts.push(
        `<tr class="cutoff-separator"><td colspan="6">` +
        `below review cutoff (${view.cutoff}) — read-only</td></tr>`
      );
      separated = true;
    }
    const classes = [
      row.beyondCutoff ? "beyond-cutoff" : "",
      row.pendingVerdict !== null ? "has-pending" : "",
    ]
      .filter(Boolean)
      .join(" ");
    parts.push(
      `<tr class="${classes}" data-rank="${row.rank}" data-domain="${escapeHtml(row.domain)}">` +
        `<td class="rank">${row.rank}</td>` +
        `<td class="domain">${escapeHtml(row.domain)}` +
        `<details><summary>${row.pageCount} pages</summary>${sampleList(row.samplePages)}</details></td>` +
        `<td class="score">${fmt(row.meanScore)}</td>` +
        `<td class="std">±${fmt(row.scoreStd)}</td>` +
        `<td class="status">${statusBadge(row)}</td>` +
        `<td class="actions">${row.beyondCutoff ? "" : verdictButtons(row)}</td>` +
      `</tr>`
    );
  }
  return parts.join("\n");
}

export function renderQueueScreen(
  view: QueueView,
  precision: { k: number; value: number } | null
): string {
  const precisionText = precision
    ? `precision@${precision.k} so far: <strong>${fmt(precision.value, 4)}</strong>`
    : "precision: no decisions yet";
  return `
<section class="queue-screen" data-queue="${escapeHtml(view.queueId)}">
  <header>
    <h2>Review queue ${escapeHtml(view.queueId)}</h2>
    <span class="meta">model v${view.modelVersion} · created ${escapeHtml(view.createdAt)}</span>
    <span class="meta">${view.decided}/${view.total} decided · ${view.pendingCount} pending</span>
    <span class="meta">${precisionText}</span>
    <button data-action="retrain">Retrain model</button>
  </header>
  <table class="queue">
    <thead><tr>
      <th>#</th><th>domain</th><th>mean score</th><th>std</th><th>status</th><th></th>
    </tr></thead>
    <tbody>
${renderQueueRows(view)}
    </tbody>
  </table>
</section>`;
}

export function renderCalibrationScreen(view: CalibrationView): string {
  const bucketBlocks = view.buckets
    .map((bucket) => {
      const fraction =
        bucket.relevanceFraction === null
          ? `<span class="muted">unmarked</span>`
          : `<strong>${fmt(bucket.relevanceFraction, 2)}</strong> relevant`;
      const rows = bucket.samples
        .map((sample) => {
          const markState =
            sample.mark === null ? "" : sample.mark ? "marked-yes" : "marked-no";
          const controls = view.frozen
            ? ""
            : `<button data-action="mark" data-bucket-lo="${bucket.lo}" ` +
              `data-page="${escapeHtml(sample.pageId)}" data-relevant="true">relevant</button>` +
              `<button data-action="mark" data-bucket-lo="${bucket.lo}" ` +
              `data-page="${escapeHtml(sample.pageId)}" data-relevant="false">irrelevant</button>`;
          return (
            `<li class="${markState}"><code>${escapeHtml(sample.pageId)}</code> ` +
            `<span class="snippet">${escapeHtml(sample.text)}</span> ${controls}</li>`
          );
        })
        .join("");
      return `
  <div class="bucket">
    <h3>[${bucket.lo}, ${bucket.hi}) — ${bucket.count} pages · ${fraction}</h3>
    <ul>${rows}</ul>
  </div>`;
    })
    .join("\n");

  const status = view.frozen
    ? `<p class="frozen">Threshold frozen at <strong>${view.threshold}</strong>; this screen is read-only.</p>`
    : `<button data-action="confirm" ${view.readyToConfirm ? "" : "disabled"}>
         Confirm threshold selection</button>`;
  return `
<section class="calibration-screen" data-topic="${escapeHtml(view.topicId)}">
  <header>
    <h2>Topic calibration: ${escapeHtml(view.topicId)}</h2>
    <span class="meta">${view.total} pages scored · ${view.outOfRange} out of range</span>
  </header>
  ${status}
${bucketBlocks}
</section>`;
}
