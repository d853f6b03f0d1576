// Replay recorded service interactions through the state machine and the
// renderer, asserting the banner timing and that every consistency-ratio
// string on screen byte-matches a string the service actually sent.

import { describe, expect, it } from "vitest";
import type { AnswerRecord, Report, SessionCreated } from "../api.js";
import { render } from "../render.js";
import {
  FlowState,
  initialState,
  onAnswerRecorded,
  onNext,
  onReport,
  onSessionCreated,
} from "../state.js";
import published from "../fixtures/published-curve.json";
import live from "../fixtures/recorded-live.json";

interface Interaction {
  request: { method: string; path: string; body?: Record<string, unknown> };
  status: number;
  response: unknown;
}

interface Frame {
  afterAnswer: number;
  state: FlowState;
  html: string;
}

function extractCrStrings(html: string): string[] {
  return [...html.matchAll(/data-cr="([^"]*)"/g)].map((m) => m[1]);
}

function fixtureDisplayStrings(interactions: Interaction[]): Set<string> {
  const allowed = new Set<string>(["—"]);
  for (const step of interactions) {
    const body = step.response as {
      display?: { cr_generalized?: string | null; cr_naive?: string | null; final_cr?: string | null };
    };
    if (body && body.display) {
      for (const value of Object.values(body.display)) {
        if (typeof value === "string") allowed.add(value);
      }
    }
  }
  return allowed;
}

function replay(interactions: Interaction[]): { frames: Frame[]; final: Frame } {
  let state = initialState();
  const frames: Frame[] = [];
  for (const step of interactions) {
    const { method, path } = step.request;
    if (method === "POST" && path === "/v1/sessions") {
      state = onSessionCreated(state, step.response as SessionCreated);
    } else if (method === "GET" && path.endsWith("/next")) {
      state = onNext(state, step.response as never);
    } else if (method === "POST" && path.endsWith("/answers")) {
      const body = step.request.body as { i: number; j: number };
      state = onAnswerRecorded(state, [body.i, body.j], step.response as AnswerRecord);
      frames.push({ afterAnswer: state.answered, state, html: render(state) });
    } else if (method === "GET" && path.endsWith("/report")) {
      state = onReport(state, step.response as Report);
    }
  }
  return { frames, final: { afterAnswer: state.answered, state, html: render(state) } };
}

describe("published-curve replay", () => {
  const interactions = published.interactions as unknown as Interaction[];

  it("raises the banner exactly after the seventh answer", () => {
    const { frames } = replay(interactions);
    for (const frame of frames) {
      const banner = frame.state.banner;
      if (frame.afterAnswer < 7) {
        expect(banner).toBeNull();
      } else if (frame.afterAnswer < 15) {
        expect(banner).not.toBeNull();
        expect(banner!.afterAnswer).toBe(7);
      } else {
        expect(banner).toBeNull();   // final ratio is back under the threshold
      }
    }
    const spikeFrame = frames.find((f) => f.afterAnswer === 7)!;
    expect(spikeFrame.state.banner!.display).toBe("0.1811");
    expect(spikeFrame.html).toContain('data-after-answer="7"');
    expect(spikeFrame.html).toContain("consider revising");
  });

  it("names the pair that caused the spike", () => {
    const { frames } = replay(interactions);
    const spike = frames.find((f) => f.afterAnswer === 7)!.state.banner!;
    expect(spike.pair).toEqual([2, 4]);
    expect(spike.pairLabels).toEqual(["house B", "house D"]);
  });

  it("completes with the published final ratio on a green screen", () => {
    const { final } = replay(interactions);
    expect(final.state.phase).toBe("completed");
    expect(final.html).toContain('data-cr="0.0936"');
    expect(final.html).toContain('class="done accepted"');
    expect(final.html).toContain("download report");
  });

  it("only ever displays ratio strings sent by the service", () => {
    const allowed = fixtureDisplayStrings(interactions);
    const { frames, final } = replay(interactions);
    for (const frame of [...frames, final]) {
      for (const shown of extractCrStrings(frame.html)) {
        expect(allowed.has(shown), `unexpected on-screen value ${shown}`).toBe(true);
      }
    }
  });

  it("keeps the chart series verbatim from the report payload", () => {
    const { final } = replay(interactions);
    const report = final.state.report!;
    expect(report.series.generalized.map((p) => p[1])).toEqual(
      (interactions[interactions.length - 1].response as Report).series.generalized.map((p) => p[1]),
    );
    expect(final.html).toContain("series-generalized");
    expect(final.html).toContain("series-naive");
  });
});

describe("live-recording replay", () => {
  const interactions = live.interactions as unknown as Interaction[];

  it("raises the banner after the sixth answer with the recorded value", () => {
    const { frames } = replay(interactions);
    for (const frame of frames) {
      if (frame.afterAnswer < 6) expect(frame.state.banner).toBeNull();
    }
    const spike = frames.find((f) => f.afterAnswer === 6)!.state.banner!;
    expect(spike.afterAnswer).toBe(6);
    expect(spike.display).toBe("0.2111");
  });

  it("clears the banner once the ratio falls back under the threshold", () => {
    const { frames } = replay(interactions);
    expect(frames.find((f) => f.afterAnswer === 7)!.state.banner).not.toBeNull();
    expect(frames.find((f) => f.afterAnswer === 8)!.state.banner).toBeNull();
  });

  it("renders the non-finite reading exactly as the service printed it", () => {
    const { frames } = replay(interactions);
    const infinite = frames.find((f) => f.afterAnswer === 5)!;
    expect(infinite.state.banner).toBeNull();
    expect(infinite.html).toContain('data-cr="inf"');
  });

  it("completes with the recorded final ratio and byte-matched strings", () => {
    const allowed = fixtureDisplayStrings(interactions);
    const { frames, final } = replay(interactions);
    expect(final.html).toContain('data-cr="0.0929"');
    for (const frame of [...frames, final]) {
      for (const shown of extractCrStrings(frame.html)) {
        expect(allowed.has(shown), `unexpected on-screen value ${shown}`).toBe(true);
      }
    }
  });
});
