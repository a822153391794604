// Lecturer review screen: the mark table with manual-mark inputs and a
// horizontal timeline of gesture events colored by kind (hover = comment).

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import type { GestureEventRecord, MarkReport } from "./types.js";

const KIND_COLORS: Record<string, string> = {
  FACE_ABSENT: "#c0392b",
  FACE_PRESENT: "#27ae60",
  LOOK_AWAY: "#e67e22",
  LOOK_BACK: "#2ecc71",
  MOVEMENT_BURST: "#8e44ad",
};

export class ReviewView {
  report: MarkReport | null = null;
  events: GestureEventRecord[] = [];

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private returnId: string,
  ) {}

  async open(): Promise<void> {
    const full = await this.api.returnReport(this.returnId);
    this.report = full.mark ?? (await this.api.markReturn(this.returnId));
    this.events = await this.api.eventFeed(this.returnId);
    this.render();
  }

  async setManual(q: number, score: number): Promise<void> {
    this.report = await this.api.manualMark(this.returnId, q, score);
    this.render();
  }

  render(): void {
    clear(this.root);
    this.root.append(el("h2", {}, [`Return ${this.returnId}`]));
    if (this.report) {
      this.root.append(this.markTable(this.report));
    }
    this.root.append(this.timeline());
  }

  private markTable(report: MarkReport): HTMLElement {
    const table = el("table", { class: "marks" });
    table.append(
      el("tr", {}, [
        el("th", {}, ["q"]),
        el("th", {}, ["kind"]),
        el("th", {}, ["response"]),
        el("th", {}, ["awarded"]),
      ]),
    );
    for (const row of report.rows) {
      const awarded = el("td", { class: "awarded" });
      if (row.kind === "STRUCT") {
        const input = el("input", {
          class: `manual-q${row.number}`,
          type: "number",
          step: "0.5",
          min: "0",
          max: String(row.max),
          value: row.awarded === null ? "" : String(row.awarded),
        }) as HTMLInputElement;
        input.addEventListener("change", () => {
          void this.setManual(row.number, Number(input.value));
        });
        awarded.append(input);
      } else {
        awarded.textContent = row.awarded === null ? "pending" : row.awarded.toFixed(1);
      }
      table.append(
        el("tr", { class: `mark-row q${row.number}` }, [
          el("td", {}, [String(row.number)]),
          el("td", {}, [row.kind]),
          el("td", {}, [row.response ?? "-"]),
          awarded,
        ]),
      );
    }
    table.append(
      el("tr", { class: "totals" }, [
        el("td", { colspan: "3" }, ["total"]),
        el("td", { class: "total-cell" }, [
          `${report.totals.total.toFixed(1)}/${report.totals.max.toFixed(1)}` +
            (report.totals.pending ? ` (${report.totals.pending} pending)` : ""),
        ]),
      ]),
    );
    return table;
  }

  private timeline(): HTMLElement {
    if (this.events.length === 0) {
      return el("p", { class: "timeline-empty" }, ["no gesture events"]);
    }
    const start = Math.min(...this.events.map((ev) => ev.start_ms));
    const end = Math.max(...this.events.map((ev) => ev.end_ms), start + 1);
    const span = end - start;
    const lane = el("div", { class: "timeline" });
    for (const ev of this.events) {
      const left = ((ev.start_ms - start) / span) * 100;
      const width = Math.max(((ev.end_ms - ev.start_ms) / span) * 100, 0.5);
      lane.append(
        el("div", {
          class: `timeline-bar kind-${ev.kind}`,
          title: ev.comment,
          "data-kind": ev.kind,
          "data-start": String(ev.start_ms),
          "data-end": String(ev.end_ms),
          style: `position:absolute;left:${left}%;width:${width}%;` +
            `background:${KIND_COLORS[ev.kind] ?? "#7f8c8d"};height:18px;`,
        }),
      );
    }
    lane.setAttribute("style", "position:relative;height:20px;background:#ecf0f1;");
    return el("div", { class: "timeline-box" }, [
      el("h3", {}, ["Gesture timeline"]),
      lane,
    ]);
  }
}
