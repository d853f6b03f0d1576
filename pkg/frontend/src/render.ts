// View layer: state in, HTML string out. The DOM glue only swaps innerHTML
// and delegates events, so everything visible is testable as a string.
// Consistency-ratio text appears exclusively inside data-cr attributes and
// carries service display strings verbatim.

import { SCALE_TOKENS } from "./api.js";
import type { FlowState } from "./state.js";
import { latestGaugeDisplay } from "./state.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function gauge(state: FlowState): string {
  const shown = latestGaugeDisplay(state);
  const latest = state.records.length
    ? state.records[state.records.length - 1].cr_generalized
    : null;
  const over = latest !== null && latest > state.threshold;
  const fraction = latest === null || !Number.isFinite(latest)
    ? 1
    : Math.min(latest / (2 * state.threshold), 1);
  return `
  <section class="gauge ${over ? "gauge-over" : "gauge-ok"}">
    <h2>inconsistency ratio</h2>
    <div class="gauge-bar">
      <div class="gauge-fill" style="width:${(fraction * 100).toFixed(1)}%"></div>
      <div class="gauge-threshold" style="left:50%" title="0.1 acceptance threshold"></div>
    </div>
    <div class="gauge-value" data-cr="${esc(shown)}">${esc(shown)}</div>
  </section>`;
}

function chart(state: FlowState): string {
  const report = state.report;
  if (!report || report.series.generalized.length === 0) {
    return `<section class="chart chart-empty">no connected readings yet</section>`;
  }
  const all = [...report.series.generalized, ...report.series.naive];
  const xs = all.map((p) => p[0]);
  const ys = all.map((p) => p[1]);
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs);
  const yMax = Math.max(...ys, report.threshold) * 1.15;
  const W = 360;
  const H = 160;
  const px = (x: number) => x1 === x0 ? W / 2 : ((x - x0) / (x1 - x0)) * (W - 20) + 10;
  const py = (y: number) => H - 10 - (y / yMax) * (H - 20);
  const line = (pts: [number, number][]) =>
    pts.map(([x, y]) => `${px(x).toFixed(1)},${py(y).toFixed(1)}`).join(" ");
  const thresholdY = py(report.threshold).toFixed(1);
  return `
  <section class="chart">
    <h2>monitoring history</h2>
    <svg viewBox="0 0 ${W} ${H}" role="img" aria-label="consistency ratio history">
      <line x1="10" y1="${thresholdY}" x2="${W - 10}" y2="${thresholdY}" class="threshold-line"/>
      <polyline class="series-naive" fill="none" points="${line(report.series.naive)}"/>
      <polyline class="series-generalized" fill="none" points="${line(report.series.generalized)}"/>
    </svg>
    <div class="legend">
      <span class="legend-generalized">adjusted for missing entries</span>
      <span class="legend-naive">complete-matrix baseline</span>
    </div>
  </section>`;
}

function banner(state: FlowState): string {
  if (!state.banner) return "";
  const b = state.banner;
  return `
  <aside class="banner" data-after-answer="${b.afterAnswer}">
    inconsistency jumped to <strong data-cr="${esc(b.display)}">${esc(b.display)}</strong>
    after comparing <em>${esc(b.pairLabels[0])}</em> with <em>${esc(b.pairLabels[1])}</em>
    &mdash; consider revising this judgment before continuing.
  </aside>`;
}

function picker(state: FlowState): string {
  const buttons = SCALE_TOKENS.map((token) => {
    const selected = state.selectedToken === token ? " selected" : "";
    return `<button class="scale-token${selected}" data-token="${token}">${token}</button>`;
  }).join("");
  return `<div class="picker" role="group" aria-label="judgment scale">${buttons}</div>`;
}

function question(state: FlowState): string {
  if (!state.pair || !state.pairLabels) return "";
  const [first, second] = state.pairLabels;
  return `
  <section class="question">
    <h2>comparison ${state.answered + 1} of ${state.total}</h2>
    <p>How strongly is <em>${esc(first)}</em> preferred to <em>${esc(second)}</em>?</p>
    ${picker(state)}
    <button class="submit" data-action="submit" ${state.selectedToken ? "" : "disabled"}>
      record judgment
    </button>
  </section>`;
}

function completion(state: FlowState): string {
  const report = state.report;
  if (!report) return `<section class="done">finishing up&hellip;</section>`;
  const final = report.display.final_cr ?? "—";
  const weights = report.weights;
  const maxW = weights ? Math.max(...weights.weights) : 1;
  const bars = weights
    ? weights.weights.map((w, k) => `
      <div class="weight-row">
        <span class="weight-label">${esc(report.labels[k])}</span>
        <div class="weight-bar" style="width:${((w / maxW) * 100).toFixed(1)}%"></div>
        <span class="weight-value">${JSON.stringify(w)}</span>
      </div>`).join("")
    : "";
  const href = `data:application/json,${encodeURIComponent(JSON.stringify(report))}`;
  return `
  <section class="done ${report.accepted ? "accepted" : "rejected"}">
    <h2>questionnaire complete</h2>
    <p>final inconsistency ratio
      <strong data-cr="${esc(final)}">${esc(final)}</strong>
      ${report.accepted ? "&mdash; within the acceptance threshold." : "&mdash; above the acceptance threshold."}
    </p>
    <div class="weights">${bars}</div>
    <a class="download" download="session-report.json" href="${href}">download report</a>
  </section>`;
}

export function render(state: FlowState): string {
  if (state.phase === "setup") {
    return `
    <main class="app">
      <h1>pairwise comparison questionnaire</h1>
      <section class="setup">
        <label>alternatives (comma separated)
          <input id="labels" value="house A, house B, house C, house D, house E, house F"/>
        </label>
        <button data-action="start">start session</button>
      </section>
      ${state.error ? `<aside class="error">${esc(state.error)}</aside>` : ""}
    </main>`;
  }
  const body = state.phase === "completed" ? completion(state) : question(state);
  return `
  <main class="app">
    <h1>pairwise comparison questionnaire</h1>
    <div class="progress">${state.answered}/${state.total} answered</div>
    ${banner(state)}
    ${body}
    ${gauge(state)}
    ${chart(state)}
    ${state.error ? `<aside class="error">${esc(state.error)} <button data-action="retry">retry</button></aside>` : ""}
  </main>`;
}
