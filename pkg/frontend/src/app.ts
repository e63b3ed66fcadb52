// Browser bootstrap: wires the session controller to the static page.

import { ReviewApi } from "./api.js";
import { ReviewSession, SessionState } from "./controller.js";
import { CardSide, deriveUi, ReviewCard, Segment, VERDICT_KEYS } from "./viewmodel.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function renderSegments(target: HTMLElement, segments: Segment[]): void {
  target.textContent = "";
  segments.forEach((segment, i) => {
    if (i > 0) {
      target.appendChild(document.createTextNode(" "));
    }
    const span = document.createElement(segment.emphasized ? "strong" : "span");
    if (segment.cssClass) {
      span.className = segment.cssClass;
    }
    span.textContent = segment.text;
    target.appendChild(span);
  });
}

function renderSide(prefix: string, side: CardSide): void {
  renderSegments(el(`${prefix}-source`), side.source);
  const translation = el(`${prefix}-translation`);
  if (side.translation) {
    renderSegments(translation, side.translation);
  } else {
    translation.textContent = "(no translation)";
  }
}

function renderCard(card: ReviewCard): void {
  el("card-pair").textContent = card.pairId;
  el("card-reason").textContent = card.reason ?? card.label;
  renderSide("original", card.sides[0]);
  renderSide("substituted", card.sides[1]);
}

function render(state: SessionState): void {
  const ui = deriveUi(state);

  el("loading").hidden = ui.mode !== "loading";
  el("empty").hidden = ui.mode !== "empty";
  el("card").hidden = ui.mode !== "reviewing";
  el("banner").hidden = !ui.banner;

  if (ui.progress) {
    el("progress-fill").style.width = `${ui.progress.percent}%`;
    el("progress-text").textContent = ui.progress.text;
    el("progress-counts").textContent = ui.progress.counts;
  }
  if (ui.card) {
    renderCard(ui.card);
  }
  document.querySelectorAll<HTMLButtonElement>("#verdicts button").forEach((button) => {
    button.disabled = !ui.buttonsEnabled;
  });

  const toast = el("toast");
  toast.hidden = ui.toast === null;
  if (ui.toast !== null) {
    el("toast-message").textContent = ui.toast;
  }
}

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const lang = params.get("lang") ?? "fr";
  // The service counts one effective annotator; pass an id only when the
  // session was opened for a specific one (?annotator=), matching the
  // --annotator flag the service was started with.
  const annotator = params.get("annotator") ?? undefined;
  el("language-tag").textContent = lang;

  const api = new ReviewApi("");
  const session = new ReviewSession(api, lang, annotator, render);

  document.querySelectorAll<HTMLButtonElement>("#verdicts button").forEach((button) => {
    const verdict = VERDICT_KEYS[button.dataset.key ?? ""];
    if (verdict) {
      button.addEventListener("click", () => void session.submit(verdict));
    }
  });
  document.addEventListener("keydown", (event) => {
    if (event.repeat || event.ctrlKey || event.metaKey || event.altKey) {
      return;
    }
    void session.handleKey(event.key);
  });
  el("retry").addEventListener("click", () => void session.retry());
  el("dismiss").addEventListener("click", () => session.dismissError());

  void session.refresh();
}

main();
