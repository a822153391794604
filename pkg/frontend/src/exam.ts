// Student exam client: passkey modal, environment gate, one-question-at-a-
// time answering with immediate (per-question serialized) saves, and a
// server-authoritative countdown that issues exactly one auto-submit.

import { ApiClient, ApiFailure } from "./api.js";
import { clear, el } from "./dom.js";
import type { SessionState } from "./types.js";

const SYNC_EVERY_TICKS = 15;

export class ExamView {
  state: SessionState | null = null;
  remaining = 0;
  submitIssued = false;
  private index = 0;
  private timer: ReturnType<typeof setInterval> | null = null;
  private ticks = 0;
  private paperName: string | null = null;
  // per-question serialization: at most one answer POST in flight per
  // question, latest value wins
  private inflight = new Map<number, Promise<void>>();
  private queued = new Map<number, string>();

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private onDone: (state: SessionState) => void = () => {},
  ) {}

  async open(): Promise<void> {
    try {
      this.applyState(await this.api.sessionState());
    } catch (err) {
      if (err instanceof ApiFailure && err.status === 404) {
        await this.renderInbox();
        return;
      }
      throw err;
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  applyState(state: SessionState): void {
    this.state = state;
    // server-authoritative: never let the display exceed the server value
    this.remaining = Math.min(
      state.phase === "IN_EXAM" ? state.remaining_seconds : 0,
      this.remaining > 0 ? this.remaining : Infinity,
    );
    if (state.phase !== "IN_EXAM") {
      this.stop();
    }
    this.render();
    if (state.phase === "IN_EXAM" && this.timer === null) {
      this.timer = setInterval(() => this.tick(), 1000);
    }
  }

  private async tick(): Promise<void> {
    this.remaining = Math.max(0, this.remaining - 1);
    this.ticks += 1;
    this.renderCountdown();
    if (this.remaining <= 0) {
      await this.autoSubmit();
      return;
    }
    if (this.ticks % SYNC_EVERY_TICKS === 0) {
      try {
        this.applyState(await this.api.sessionState());
      } catch {
        // transient; next sync retries
      }
    }
  }

  private async autoSubmit(): Promise<void> {
    if (this.submitIssued) {
      return;
    }
    this.submitIssued = true;
    this.stop();
    try {
      const state = await this.api.sessionSubmit();
      this.applyState(state);
      this.onDone(state);
    } catch (err) {
      if (err instanceof ApiFailure && err.status === 409) {
        // stale phase (likely already expired server-side): refresh
        this.applyState(await this.api.sessionState());
        return;
      }
      throw err;
    }
  }

  async manualSubmit(): Promise<void> {
    await this.autoSubmit();
  }

  async startPaper(name: string, passkey?: string): Promise<void> {
    this.paperName = name;
    this.applyState(await this.api.sessionStart(name, passkey));
  }

  answer(question: number, response: string): void {
    if (!this.state || this.state.phase !== "IN_EXAM") {
      return;
    }
    this.state.answers[String(question)] = response;
    this.queued.set(question, response);
    if (!this.inflight.has(question)) {
      this.inflight.set(question, this.drain(question));
    }
  }

  private async drain(question: number): Promise<void> {
    while (this.queued.has(question)) {
      const value = this.queued.get(question)!;
      this.queued.delete(question);
      try {
        const state = await this.api.sessionAnswer(question, value);
        if (!this.queued.has(question)) {
          this.state = state;
        }
      } catch (err) {
        if (err instanceof ApiFailure && err.status === 409) {
          this.applyState(await this.api.sessionState());
        }
        break;
      }
    }
    this.inflight.delete(question);
  }

  /** Resolves once every queued answer write has been acknowledged. */
  async flushAnswers(): Promise<void> {
    while (this.inflight.size > 0) {
      await Promise.all([...this.inflight.values()]);
    }
  }

  // --- rendering ---------------------------------------------------------

  private async renderInbox(): Promise<void> {
    const { names } = await this.api.inbox();
    clear(this.root);
    const list = el("ul", { class: "inbox" });
    for (const name of names) {
      const button = el("button", { class: "paper", "data-paper": name }, [name]);
      button.addEventListener("click", () => void this.startPaper(name));
      list.append(el("li", {}, [button]));
    }
    this.root.append(
      el("h2", {}, ["Inbox"]),
      names.length ? list : el("p", { class: "empty" }, ["No papers have appeared yet."]),
    );
  }

  private render(): void {
    if (!this.state) {
      return;
    }
    switch (this.state.phase) {
      case "PASSKEY_REQUIRED":
        this.renderPasskeyModal();
        return;
      case "ENV_CHECK":
        this.renderEnvCheck();
        return;
      case "IN_EXAM":
        this.renderExam();
        return;
      case "FAILED":
        clear(this.root);
        this.root.append(el("p", { class: "failure" }, [this.state.failure ?? "failed"]));
        return;
      default:
        this.renderFinished();
    }
  }

  private renderPasskeyModal(): void {
    clear(this.root);
    const input = el("input", { type: "password", class: "passkey-input", placeholder: "passkey" });
    const error = el("p", { class: "passkey-error" }, [
      this.state?.error ? `That passkey was not accepted (attempt ${this.state.attempts}).` : "",
    ]);
    const button = el("button", { class: "passkey-submit" }, ["Unlock"]);
    button.addEventListener("click", () => {
      void this.startPaper(this.paperName ?? "", input.value);
    });
    this.root.append(
      el("div", { class: "modal passkey-modal" }, [
        el("h2", {}, ["This paper is locked"]),
        input,
        button,
        error,
      ]),
    );
  }

  private renderEnvCheck(): void {
    clear(this.root);
    const items = (this.state?.violations ?? []).map((v) => el("li", { class: "violation" }, [v]));
    const retry = el("button", { class: "env-retry" }, ["Check again"]);
    retry.addEventListener("click", () => void this.startPaper(this.paperName ?? ""));
    this.root.append(
      el("div", { class: "env-check" }, [
        el("h2", {}, ["Environment check"]),
        items.length
          ? el("ul", { class: "violations" }, items)
          : el("p", {}, ["Checking recording devices..."]),
        retry,
      ]),
    );
  }

  private renderCountdown(): void {
    const node = this.root.querySelector(".countdown");
    if (node) {
      node.textContent = formatSeconds(this.remaining);
    }
  }

  private renderExam(): void {
    const state = this.state!;
    const paper = state.paper!;
    const question = paper.questions[Math.min(this.index, paper.questions.length - 1)]!;
    clear(this.root);

    const nav = el("div", { class: "nav" });
    paper.questions.forEach((q, i) => {
      const answered = state.answers[String(q.number)] !== undefined;
      const button = el(
        "button",
        { class: `nav-q${i === this.index ? " current" : ""}${answered ? " answered" : ""}` },
        [String(q.number)],
      );
      button.addEventListener("click", () => {
        this.index = i;
        this.render();
      });
      nav.append(button);
    });

    const body = el("div", { class: "question" }, [
      el("h3", {}, [`Q${question.number}`]),
      el("p", { class: "stem" }, [question.stem]),
    ]);
    const current = state.answers[String(question.number)] ?? "";
    if (question.kind === "MCQ") {
      for (const option of question.options) {
        const radio = el("input", {
          type: "radio",
          name: `q${question.number}`,
          value: option.label,
          id: `q${question.number}-${option.label}`,
        }) as HTMLInputElement;
        radio.checked = current === option.label;
        radio.addEventListener("change", () => this.answer(question.number, option.label));
        body.append(
          el("label", { class: "option", for: `q${question.number}-${option.label}` }, [
            radio,
            `${option.label}) ${option.text}`,
          ]),
        );
      }
    } else {
      const area = el("textarea", {
        class: "struct-answer",
        rows: String(question.answer_lines ?? 4),
      }) as HTMLTextAreaElement;
      area.value = current;
      area.addEventListener("input", () => this.answer(question.number, area.value));
      body.append(area);
    }

    const submit = el("button", { class: "submit" }, ["Submit exam"]);
    submit.addEventListener("click", () => void this.manualSubmit());

    this.root.append(
      el("header", { class: "exam-header" }, [
        el("h2", {}, [paper.title]),
        el("span", { class: "countdown" }, [formatSeconds(this.remaining)]),
      ]),
      nav,
      body,
      submit,
    );
  }

  private renderFinished(): void {
    clear(this.root);
    this.root.append(
      el("div", { class: "finished" }, [
        el("h2", {}, ["Exam over"]),
        el("p", { class: "phase" }, [`state: ${this.state?.phase ?? "?"}`]),
      ]),
    );
  }
}

export function formatSeconds(total: number): string {
  const minutes = Math.floor(total / 60);
  const seconds = Math.floor(total % 60);
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}
