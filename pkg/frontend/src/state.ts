// Questionnaire flow state machine. Pure data in, pure data out: every
// number shown to the user is carried verbatim from a service response,
// never recomputed here. Threshold comparisons for the banner use the
// service-provided numeric ratio against the service-provided threshold.

import type { AnswerRecord, NextPair, Report, SessionCreated } from "./api.js";

export type Phase = "setup" | "asking" | "completed" | "error";

export interface Banner {
  afterAnswer: number;
  pair: [number, number];
  pairLabels: [string, string];
  display: string;            // the service's display string for the spike value
}

export interface FlowState {
  phase: Phase;
  sessionId: string | null;
  labels: string[];
  total: number;
  answered: number;
  pair: [number, number] | null;
  pairLabels: [string, string] | null;
  selectedToken: string | null;
  records: AnswerRecord[];
  report: Report | null;
  banner: Banner | null;
  error: string | null;
  threshold: number;
}

export function initialState(): FlowState {
  return {
    phase: "setup",
    sessionId: null,
    labels: [],
    total: 0,
    answered: 0,
    pair: null,
    pairLabels: null,
    selectedToken: null,
    records: [],
    report: null,
    banner: null,
    error: null,
    threshold: 0.1,
  };
}

export function onSessionCreated(state: FlowState, created: SessionCreated): FlowState {
  return {
    ...state,
    phase: "asking",
    sessionId: created.id,
    labels: created.labels,
    total: created.order.length,
    answered: 0,
    records: [],
    banner: null,
    error: null,
  };
}

export function onNext(state: FlowState, next: NextPair): FlowState {
  if (next.done) {
    return { ...state, pair: null, pairLabels: null };
  }
  return {
    ...state,
    phase: "asking",
    pair: next.pair ?? null,
    pairLabels: next.labels ?? null,
    answered: next.answered ?? state.answered,
    total: next.total ?? state.total,
    selectedToken: null,
    error: null,
  };
}

function lastFiniteRatio(records: AnswerRecord[]): number | null {
  for (let k = records.length - 1; k >= 0; k--) {
    const value = records[k].cr_generalized;
    if (value !== null && Number.isFinite(value)) return value;
  }
  return null;
}

export function onAnswerRecorded(state: FlowState, pair: [number, number],
                                 record: AnswerRecord): FlowState {
  const previous = lastFiniteRatio(state.records);
  let banner = state.banner;
  const current = record.cr_generalized;
  if (current !== null && Number.isFinite(current) && current > state.threshold
      && (previous === null || previous <= state.threshold)) {
    banner = {
      afterAnswer: record.answered_count,
      pair,
      pairLabels: [state.labels[pair[0] - 1], state.labels[pair[1] - 1]],
      display: record.display.cr_generalized ?? "",
    };
  } else if (current !== null && Number.isFinite(current) && current <= state.threshold) {
    banner = null;
  }
  return {
    ...state,
    answered: record.answered_count,
    records: [...state.records, record],
    banner,
    selectedToken: null,
    phase: record.status === "completed" ? "completed" : state.phase,
    pair: record.next ?? null,
    pairLabels: record.next
      ? [state.labels[record.next[0] - 1], state.labels[record.next[1] - 1]]
      : null,
  };
}

export function onReport(state: FlowState, report: Report): FlowState {
  return { ...state, report, threshold: report.threshold };
}

export function onError(state: FlowState, message: string): FlowState {
  return { ...state, error: message };
}

export function onSelect(state: FlowState, token: string): FlowState {
  return { ...state, selectedToken: token };
}

export function latestGaugeDisplay(state: FlowState): string {
  for (let k = state.records.length - 1; k >= 0; k--) {
    const shown = state.records[k].display.cr_generalized;
    if (shown !== null) return shown;
  }
  return "—";
}
