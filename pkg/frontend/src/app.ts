// DOM glue: owns the single mutable state reference, renders on change, and
// keeps exactly one mutation in flight (every change round-trips to the
// service before the screen updates).

import { ApiClient, ApiError, tokenValue } from "./api.js";
import { render } from "./render.js";
import {
  FlowState,
  initialState,
  onAnswerRecorded,
  onError,
  onNext,
  onReport,
  onSelect,
  onSessionCreated,
} from "./state.js";

export class App {
  private state: FlowState = initialState();
  private busy = false;

  constructor(private root: HTMLElement, private api: ApiClient) {
    root.addEventListener("click", (event) => this.onClick(event));
    this.paint();
  }

  private paint(): void {
    this.root.innerHTML = render(this.state);
  }

  private set(state: FlowState): void {
    this.state = state;
    this.paint();
  }

  private onClick(event: Event): void {
    const target = event.target as HTMLElement;
    const token = target.getAttribute("data-token");
    if (token) {
      this.set(onSelect(this.state, token));
      return;
    }
    const action = target.getAttribute("data-action");
    if (action === "start") void this.start();
    if (action === "submit") void this.submit();
    if (action === "retry") void this.resync();
  }

  private labelsFromInput(): string[] {
    const input = this.root.querySelector<HTMLInputElement>("#labels");
    const raw = input ? input.value : "";
    return raw.split(",").map((s) => s.trim()).filter(Boolean);
  }

  async start(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const labels = this.labelsFromInput();
      const created = await this.api.createSession(labels.length, labels,
                                                   labels.length === 6 ? "ross" : "balanced");
      this.set(onSessionCreated(this.state, created));
      await this.refreshNext();
    } catch (error) {
      this.set(onError(this.state, describe(error)));
    } finally {
      this.busy = false;
    }
  }

  private async refreshNext(): Promise<void> {
    if (!this.state.sessionId) return;
    const next = await this.api.next(this.state.sessionId);
    this.set(onNext(this.state, next));
    if (next.done) await this.loadReport();
  }

  private async loadReport(): Promise<void> {
    if (!this.state.sessionId) return;
    const report = await this.api.report(this.state.sessionId);
    this.set(onReport({ ...this.state, phase: "completed" }, report));
  }

  async submit(): Promise<void> {
    const { sessionId, pair, selectedToken } = this.state;
    if (this.busy || !sessionId || !pair || !selectedToken) return;
    this.busy = true;
    try {
      const record = await this.api.answer(sessionId, pair[0], pair[1],
                                           tokenValue(selectedToken));
      this.set(onAnswerRecorded(this.state, pair, record));
      const report = await this.api.report(sessionId);
      this.set(onReport(this.state, report));
      if (this.state.phase === "completed") return;
      if (!this.state.pair) await this.refreshNext();
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        await this.resync();
      } else {
        this.set(onError(this.state, describe(error)));
      }
    } finally {
      this.busy = false;
    }
  }

  async resync(): Promise<void> {
    try {
      this.set(onError(this.state, ""));
      await this.refreshNext();
    } catch (error) {
      this.set(onError(this.state, describe(error)));
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    const body = error.body as { error?: string; detail?: string } | null;
    return body?.error ? `${body.error}: ${body.detail ?? ""}` : `request failed (${error.status})`;
  }
  return "network failure — check that the service is running";
}

declare global {
  interface Window {
    pcmApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.pcmApp = new App(document.getElementById("app") as HTMLElement, new ApiClient(""));
}
