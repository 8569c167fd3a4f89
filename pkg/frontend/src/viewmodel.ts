/**
 * Pure projection from UI state + catalog data to what the page shows.
 * Probabilities are the API's values rounded for display only — nothing
 * here recomputes or renormalizes them.
 */

import type { Kg, Product } from "./api.js";
import type { UiState } from "./state.js";

export interface ProductCard {
  id: string;
  label: string;
  features: string[];
}

export interface BeliefBar {
  nodeId: string;
  label: string;
  probability: number; // raw API value, used for bar width
  display: string; // rounded for the label
}

export interface EigRowView {
  bundle: string[];
  display: string; // e.g. "P3 + P4"
  eig: number;
  eigDisplay: string;
  highlighted: boolean; // true for the bundle currently on screen
}

export interface HistoryRow {
  index: number;
  bundleDisplay: string;
  outcome: string;
  topNode: string;
  topDisplay: string;
}

export interface ViewModel {
  banner: { kind: "status" | "error"; text: string };
  queryFormEnabled: boolean;
  cards: ProductCard[];
  cardsEnabled: boolean;
  beliefBars: BeliefBar[];
  eigRows: EigRowView[];
  eigStale: boolean;
  convergenceCard: string | null;
  history: HistoryRow[];
}

export function formatProbability(p: number): string {
  return p.toFixed(3);
}

export function formatEig(v: number): string {
  return v.toFixed(4);
}

function nodeLabel(kg: Kg, nodeId: string): string {
  return kg.nodes.find((n) => n.id === nodeId)?.label ?? nodeId;
}

function productById(kg: Kg, productId: string): Product {
  const product = kg.products.find((p) => p.id === productId);
  if (product === undefined) {
    throw new Error(`unknown product in bundle: ${productId}`);
  }
  return product;
}

function banner(state: UiState): ViewModel["banner"] {
  switch (state.phase) {
    case "entering-query":
      return { kind: "status", text: "Type an unfamiliar query word to begin." };
    case "awaiting-click":
      return {
        kind: "status",
        text: `Which of these is closest to "${state.query}"?`,
      };
    case "awaiting-server":
      return { kind: "status", text: "Thinking…" };
    case "converged":
      return { kind: "status", text: "Converged — lexicon entry minted." };
    case "exhausted":
      return {
        kind: "status",
        text: "Step budget exhausted without convergence.",
      };
    case "error":
      return { kind: "error", text: state.errorMessage ?? "Something went wrong." };
  }
}

export function buildViewModel(state: UiState, kg: Kg | null): ViewModel {
  const cards =
    kg !== null && state.bundle !== null
      ? state.bundle.map((id) => {
          const p = productById(kg, id);
          return { id: p.id, label: p.label, features: [...p.features].sort() };
        })
      : [];

  const beliefBars =
    kg === null
      ? []
      : Object.entries(state.belief)
          .sort(([, a], [, b]) => b - a)
          .map(([nodeId, probability]) => ({
            nodeId,
            label: nodeLabel(kg, nodeId),
            probability,
            display: formatProbability(probability),
          }));

  const shown = state.bundle === null ? null : [...state.bundle].sort().join(",");
  const eigRows = state.eigTable.map((row) => ({
    bundle: row.bundle,
    display: row.bundle.join(" + "),
    eig: row.eig,
    eigDisplay: formatEig(row.eig),
    highlighted: shown !== null && [...row.bundle].sort().join(",") === shown,
  }));

  const convergenceCard =
    state.phase === "converged" && state.lexiconEntry !== null && kg !== null
      ? `"${state.query}" means ${nodeLabel(kg, state.lexiconEntry.node)} ` +
        `(p = ${formatProbability(state.lexiconEntry.confidence)})`
      : null;

  const history = state.history.map((step) => {
    const top = Object.entries(step.belief).sort(([, a], [, b]) => b - a)[0];
    return {
      index: step.index,
      bundleDisplay: step.bundle.join(" + "),
      outcome: step.clicked === null ? "none of these" : `clicked ${step.clicked}`,
      topNode: top === undefined ? "—" : kg === null ? top[0] : nodeLabel(kg, top[0]),
      topDisplay: top === undefined ? "—" : formatProbability(top[1]),
    };
  });

  return {
    banner: banner(state),
    queryFormEnabled: state.phase === "entering-query",
    cards,
    cardsEnabled: state.phase === "awaiting-click",
    beliefBars,
    eigRows,
    eigStale: state.eigStale,
    convergenceCard,
    history,
  };
}
