/** DOM rendering: ViewModel in, elements out. No logic beyond layout. */

import type { ViewModel } from "./viewmodel.js";

export interface Handlers {
  onSubmitQuery(query: string): void;
  onClickProduct(productId: string): void;
  onNoClick(): void;
  onDismissError(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function render(root: HTMLElement, vm: ViewModel, handlers: Handlers): void {
  root.replaceChildren();

  const bannerEl = el("div", `banner banner-${vm.banner.kind}`, vm.banner.text);
  if (vm.banner.kind === "error") {
    const dismiss = el("button", "dismiss", "Dismiss");
    dismiss.addEventListener("click", handlers.onDismissError);
    bannerEl.append(dismiss);
  }
  root.append(bannerEl);

  const form = el("form", "query-form");
  const input = el("input");
  input.placeholder = "unknown query word, e.g. footwear";
  input.disabled = !vm.queryFormEnabled;
  const go = el("button", undefined, "Search");
  go.disabled = !vm.queryFormEnabled;
  form.append(input, go);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    if (input.value.trim().length > 0) handlers.onSubmitQuery(input.value);
  });
  root.append(form);

  if (vm.convergenceCard !== null) {
    root.append(el("div", "convergence-card", vm.convergenceCard));
  }

  const cardRow = el("div", "cards");
  for (const card of vm.cards) {
    const cardEl = el("button", "product-card");
    cardEl.disabled = !vm.cardsEnabled;
    cardEl.append(el("div", "product-label", card.label));
    const chips = el("div", "chips");
    for (const feature of card.features) chips.append(el("span", "chip", feature));
    cardEl.append(chips);
    cardEl.addEventListener("click", () => handlers.onClickProduct(card.id));
    cardRow.append(cardEl);
  }
  if (vm.cards.length > 0) {
    const none = el("button", "no-click", "None of these");
    none.disabled = !vm.cardsEnabled;
    none.addEventListener("click", handlers.onNoClick);
    cardRow.append(none);
  }
  root.append(cardRow);

  const chart = el("div", "belief-chart");
  for (const bar of vm.beliefBars) {
    const row = el("div", "belief-row");
    row.append(el("span", "belief-label", bar.label));
    const track = el("div", "belief-track");
    const fill = el("div", "belief-fill");
    fill.style.width = `${(bar.probability * 100).toFixed(1)}%`;
    track.append(fill);
    row.append(track, el("span", "belief-value", bar.display));
    chart.append(row);
  }
  root.append(chart);

  const eigPanel = el("div", "eig-panel");
  eigPanel.append(
    el("h3", undefined, vm.eigStale ? "Why this bundle? (stale)" : "Why this bundle?"),
  );
  const table = el("table", "eig-table");
  for (const row of vm.eigRows) {
    const tr = el("tr", row.highlighted ? "highlighted" : undefined);
    tr.append(el("td", undefined, row.display), el("td", undefined, row.eigDisplay));
    table.append(tr);
  }
  eigPanel.append(table);
  root.append(eigPanel);

  const historyPanel = el("div", "history");
  for (const step of vm.history) {
    historyPanel.append(
      el(
        "div",
        "history-row",
        `#${step.index}: ${step.bundleDisplay} — ${step.outcome} → ` +
          `${step.topNode} (${step.topDisplay})`,
      ),
    );
  }
  root.append(historyPanel);
}
