/** Browser wiring: form, pickers, cards grid, comparison table.
 * The API base defaults to the page origin and can be overridden with
 * ?api=http://host:port for a separately served backend. */

import { Api, ClassScheme } from "./api.js";
import { WhatIfStore } from "./state.js";
import { cardView, comparisonView, DEFAULT_SCHEME, renderCard, renderComparison } from "./view.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? window.location.origin;
const api = new Api(apiBase);
const store = new WhatIfStore(api);
let scheme: ClassScheme = DEFAULT_SCHEME;

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

const cardsNode = el<HTMLDivElement>("cards");
const comparisonNode = el<HTMLDivElement>("comparison");
const statusNode = el<HTMLParagraphElement>("service-status");

function render(): void {
  const variants = store.list();
  cardsNode.innerHTML = variants.map((v) => renderCard(cardView(v, scheme))).join("");
  comparisonNode.innerHTML = renderComparison(comparisonView(variants));
  for (const button of cardsNode.querySelectorAll<HTMLButtonElement>("button.retry")) {
    button.addEventListener("click", () => {
      void store.scoreDraft(button.dataset.label!);
    });
  }
}

store.subscribe(render);

async function loadPickers(): Promise<void> {
  try {
    const [sources, categories, meta] = await Promise.all([
      api.sources(),
      api.categories(),
      api.model(),
    ]);
    scheme = meta.class_scheme ?? DEFAULT_SCHEME;
    const fill = (listId: string, keys: string[]) => {
      el<HTMLDataListElement>(listId).innerHTML = keys
        .map((k) => `<option value="${k.replace(/"/g, "&quot;")}"></option>`)
        .join("");
    };
    fill("source-options", Object.keys(sources.scores).sort());
    fill("category-options", Object.keys(categories.scores).sort());
    statusNode.textContent =
      `service ok: bundle ${meta.bundle_fingerprint}, ` +
      `${Object.keys(sources.scores).length} sources, ` +
      `${Object.keys(categories.scores).length} categories`;
  } catch (err) {
    statusNode.textContent =
      `service unreachable at ${apiBase}: ${err instanceof Error ? err.message : err}. ` +
      `Free-text source/category entry still works once it is back.`;
  }
}

void loadPickers();

el<HTMLFormElement>("draft-form").addEventListener("submit", (event) => {
  event.preventDefault();
  const label = el<HTMLInputElement>("draft-label").value.trim() || `draft ${store.list().length + 1}`;
  try {
    store.addVariant(label, {
      title: el<HTMLInputElement>("draft-title").value,
      summary: el<HTMLTextAreaElement>("draft-summary").value,
      source: el<HTMLInputElement>("draft-source").value,
      category: el<HTMLInputElement>("draft-category").value,
    });
  } catch (err) {
    alert(err instanceof Error ? err.message : String(err));
    return;
  }
  el<HTMLInputElement>("draft-label").value = "";
  void store.scoreDraft(label);
});

el<HTMLButtonElement>("score-all").addEventListener("click", () => {
  void store.scoreAll();
});
