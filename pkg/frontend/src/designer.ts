// Lecturer exam designer: a palette of question kinds (click-to-add, with
// drag-and-drop as enhancement), inline editing, server-side validation on
// save, and a publish dialog. The draft is the only client state; saving
// and reloading reconstructs everything from the API.

import { ApiClient, ApiFailure } from "./api.js";
import { clear, el } from "./dom.js";
import type { PaperMirror, QuestionMirror } from "./types.js";

function blankMcq(number: number): QuestionMirror {
  return {
    number,
    kind: "MCQ",
    stem: "",
    options: [
      { label: "A", text: "" },
      { label: "B", text: "" },
    ],
    key: null,
    answer_lines: null,
    model: null,
    response: null,
  };
}

function blankStruct(number: number): QuestionMirror {
  return {
    number,
    kind: "STRUCT",
    stem: "",
    options: [],
    key: null,
    answer_lines: 4,
    model: null,
    response: null,
  };
}

export class DesignerView {
  draft: PaperMirror;
  violations: string[] = [];
  saveBlocked = false;
  saved = false;
  private created = false;
  published: { name: string; locators: string[] } | null = null;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    draft?: PaperMirror,
  ) {
    this.draft = draft ?? {
      id: "",
      title: "",
      duration_minutes: 30,
      variant: "DESIGN",
      author: "",
      questions: [],
    };
  }

  async load(paperId: string): Promise<void> {
    this.draft = await this.api.getPaper(paperId);
    this.created = true;
    this.saved = true;
    this.render();
  }

  addQuestion(kind: "MCQ" | "STRUCT"): QuestionMirror {
    const number = this.draft.questions.length + 1;
    const question = kind === "MCQ" ? blankMcq(number) : blankStruct(number);
    this.draft.questions.push(question);
    this.edited();
    return question;
  }

  removeQuestion(number: number): void {
    this.draft.questions = this.draft.questions.filter((q) => q.number !== number);
    this.draft.questions.forEach((q, i) => {
      q.number = i + 1;
    });
    this.edited();
  }

  moveQuestion(from: number, to: number): void {
    if (to < 0 || to >= this.draft.questions.length) {
      return;
    }
    const [q] = this.draft.questions.splice(from, 1);
    this.draft.questions.splice(to, 0, q!);
    this.draft.questions.forEach((item, i) => {
      item.number = i + 1;
    });
    this.edited();
  }

  addOption(question: QuestionMirror): void {
    const label = String.fromCharCode(65 + question.options.length);
    question.options.push({ label, text: "" });
    this.edited();
  }

  removeOption(question: QuestionMirror, label: string): void {
    question.options = question.options.filter((o) => o.label !== label);
    question.options.forEach((o, i) => {
      o.label = String.fromCharCode(65 + i);
    });
    // the key may now reference a missing option; the server says so on save
    this.edited();
  }

  edited(): void {
    this.saved = false;
    this.saveBlocked = false;
    this.violations = [];
    this.render();
  }

  /** An edit invalidates the last validation verdict: unblock saving and
   * reflect it on the live button without a focus-stealing re-render. */
  private clearBlock(): void {
    this.saved = false;
    this.saveBlocked = false;
    const save = this.root.querySelector(".save") as HTMLButtonElement | null;
    if (save) {
      save.disabled = false;
      save.textContent = "Save";
    }
  }

  async save(): Promise<boolean> {
    try {
      if (this.created) {
        await this.api.putPaper(this.draft);
      } else {
        await this.api.createPaper(this.draft);
        this.created = true;
      }
      this.saved = true;
      this.violations = [];
      this.saveBlocked = false;
      this.render();
      return true;
    } catch (err) {
      if (err instanceof ApiFailure && (err.status === 422 || err.status === 400)) {
        this.violations = err.message.split(";").map((part) => part.trim());
        this.saveBlocked = true;
        this.render();
        return false;
      }
      throw err;
    }
  }

  async publish(passkey: string, locators: string[]): Promise<void> {
    this.published = await this.api.publish(this.draft.id, passkey || null, locators);
    this.render();
  }

  // --- rendering -----------------------------------------------------------

  render(): void {
    clear(this.root);
    const header = el("div", { class: "designer-header" }, [
      this.field("id", this.draft.id, (v) => (this.draft.id = v), !this.created),
      this.field("title", this.draft.title, (v) => (this.draft.title = v)),
      this.field("duration", String(this.draft.duration_minutes), (v) => {
        this.draft.duration_minutes = Number(v) || 0;
      }),
      this.field("author", this.draft.author, (v) => (this.draft.author = v)),
    ]);

    const palette = el("div", { class: "palette" });
    for (const kind of ["MCQ", "STRUCT"] as const) {
      const item = el("button", { class: `palette-${kind.toLowerCase()}`, draggable: "true" }, [
        `+ ${kind}`,
      ]);
      item.addEventListener("click", () => this.addQuestion(kind));
      item.addEventListener("dragstart", (ev) => {
        (ev as DragEvent).dataTransfer?.setData("text/question-kind", kind);
      });
      palette.append(item);
    }

    const canvas = el("div", { class: "canvas" });
    canvas.addEventListener("dragover", (ev) => ev.preventDefault());
    canvas.addEventListener("drop", (ev) => {
      ev.preventDefault();
      const kind = (ev as DragEvent).dataTransfer?.getData("text/question-kind");
      if (kind === "MCQ" || kind === "STRUCT") {
        this.addQuestion(kind);
      }
    });
    this.draft.questions.forEach((question, index) => {
      canvas.append(this.questionEditor(question, index));
    });

    const messages = el(
      "ul",
      { class: "violations" },
      this.violations.map((v) => el("li", { class: "violation" }, [v])),
    );

    const save = el("button", { class: "save" }, [this.saved ? "Saved" : "Save"]) as HTMLButtonElement;
    save.disabled = this.saveBlocked;
    save.addEventListener("click", () => void this.save());

    const publishBox = this.publishDialog();
    this.root.append(header, palette, canvas, messages, save, publishBox);
  }

  private field(name: string, value: string, set: (v: string) => void, enabled = true): HTMLElement {
    const input = el("input", { class: `field-${name}`, value }) as HTMLInputElement;
    input.disabled = !enabled;
    input.addEventListener("input", () => {
      set(input.value);
      this.clearBlock();
    });
    return el("label", { class: "field" }, [name, input]);
  }

  private questionEditor(question: QuestionMirror, index: number): HTMLElement {
    const box = el("div", { class: `question-editor kind-${question.kind.toLowerCase()}` });
    box.append(el("h4", {}, [`Q${question.number} ${question.kind}`]));

    const stem = el("input", { class: "stem", value: question.stem }) as HTMLInputElement;
    stem.addEventListener("input", () => {
      question.stem = stem.value;
      this.clearBlock();
    });
    box.append(stem);

    if (question.kind === "MCQ") {
      for (const option of question.options) {
        const text = el("input", { class: `option-${option.label}`, value: option.text }) as HTMLInputElement;
        text.addEventListener("input", () => {
          option.text = text.value;
          this.clearBlock();
        });
        const isKey = el("input", { type: "radio", name: `key-${question.number}` }) as HTMLInputElement;
        isKey.checked = question.key === option.label;
        isKey.addEventListener("change", () => {
          question.key = option.label;
          this.clearBlock();
        });
        const drop = el("button", { class: `drop-${option.label}` }, ["x"]);
        drop.addEventListener("click", () => this.removeOption(question, option.label));
        box.append(el("div", { class: "option-row" }, [`${option.label})`, text, isKey, drop]));
      }
      const add = el("button", { class: "add-option" }, ["+ option"]);
      add.addEventListener("click", () => this.addOption(question));
      box.append(add);
    } else {
      const lines = el("input", {
        class: "answer-lines",
        type: "number",
        value: String(question.answer_lines ?? 4),
      }) as HTMLInputElement;
      lines.addEventListener("input", () => {
        question.answer_lines = Number(lines.value) || 1;
        this.clearBlock();
      });
      const model = el("input", { class: "model", value: question.model ?? "" }) as HTMLInputElement;
      model.addEventListener("input", () => {
        question.model = model.value || null;
        this.clearBlock();
      });
      box.append(el("label", {}, ["answer lines", lines]), el("label", {}, ["model answer", model]));
    }

    const up = el("button", { class: "move-up" }, ["^"]);
    up.addEventListener("click", () => this.moveQuestion(index, index - 1));
    const down = el("button", { class: "move-down" }, ["v"]);
    down.addEventListener("click", () => this.moveQuestion(index, index + 1));
    const remove = el("button", { class: "remove-question" }, ["remove"]);
    remove.addEventListener("click", () => this.removeQuestion(question.number));
    box.append(el("div", { class: "question-tools" }, [up, down, remove]));
    return box;
  }

  private publishDialog(): HTMLElement {
    const passkey = el("input", { class: "publish-passkey", placeholder: "passkey" }) as HTMLInputElement;
    const locators = el("input", {
      class: "publish-locators",
      placeholder: "dir:/srv/inbox, ftp://u:p@host/exams",
    }) as HTMLInputElement;
    const go = el("button", { class: "publish" }, ["Publish"]);
    go.addEventListener("click", () => {
      const list = locators.value
        .split(",")
        .map((part) => part.trim())
        .filter((part) => part.length > 0);
      void this.publish(passkey.value, list);
    });
    const confirmation = this.published
      ? el("p", { class: "publish-confirmation" }, [
          `published ${this.published.name} to ${this.published.locators.join(", ")}`,
        ])
      : el("p", { class: "publish-confirmation empty" }, [""]);
    return el("div", { class: "publish-dialog" }, [passkey, locators, go, confirmation]);
  }
}
