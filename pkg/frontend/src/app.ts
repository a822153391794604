// Entry point: token sign-in, role probe, and screen routing. The UI keeps
// no state beyond the active view model; a reload rebuilds everything from
// API GETs.

import { ApiClient, ApiFailure } from "./api.js";
import { DesignerView } from "./designer.js";
import { clear, el } from "./dom.js";
import { ExamView } from "./exam.js";
import { ReviewView } from "./review.js";

type RoleName = "LECTURER" | "STUDENT";

async function probeRole(api: ApiClient): Promise<RoleName> {
  try {
    await api.inbox();
    return "STUDENT";
  } catch (err) {
    if (err instanceof ApiFailure && err.status === 403) {
      return "LECTURER";
    }
    throw err;
  }
}

async function lecturerHome(root: HTMLElement, api: ApiClient): Promise<void> {
  clear(root);
  const designerRoot = el("div", { class: "designer-root" });
  const returnsRoot = el("div", { class: "returns-root" });
  root.append(el("h1", {}, ["Lecturer"]), designerRoot, returnsRoot);

  new DesignerView(designerRoot, api).render();

  const { returns } = await api.listReturns();
  if (returns.length === 0) {
    returnsRoot.append(el("p", { class: "no-returns" }, ["no returns collected yet"]));
    return;
  }
  const list = el("ul", { class: "returns" });
  for (const item of returns) {
    const open = el("button", { class: "open-return" }, [
      `${item.id}${item.marked ? " (marked)" : ""}`,
    ]);
    open.addEventListener("click", () => {
      const reviewRoot = el("div", { class: "review-root" });
      clear(returnsRoot);
      returnsRoot.append(reviewRoot);
      void new ReviewView(reviewRoot, api, item.id).open();
    });
    list.append(el("li", {}, [open]));
  }
  returnsRoot.append(list);
}

async function studentHome(root: HTMLElement, api: ApiClient): Promise<void> {
  clear(root);
  const examRoot = el("div", { class: "exam-root" });
  root.append(el("h1", {}, ["Student"]), examRoot);
  await new ExamView(examRoot, api).open();
}

export async function signIn(
  root: HTMLElement,
  token: string,
  fetcher?: ConstructorParameters<typeof ApiClient>[1],
): Promise<void> {
  const api = new ApiClient(token, fetcher);
  const role = await probeRole(api);
  if (role === "STUDENT") {
    await studentHome(root, api);
  } else {
    await lecturerHome(root, api);
  }
}

export function mount(root: HTMLElement): void {
  clear(root);
  const token = el("input", { class: "token", type: "password", placeholder: "access token" }) as HTMLInputElement;
  const go = el("button", { class: "sign-in" }, ["Sign in"]);
  const error = el("p", { class: "sign-in-error" });
  go.addEventListener("click", () => {
    signIn(root, token.value).catch((err) => {
      error.textContent = err instanceof ApiFailure ? err.message : String(err);
    });
  });
  root.append(el("h1", {}, ["examgrid"]), token, go, error);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app")!);
}
