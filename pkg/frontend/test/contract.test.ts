/**
 * Contract test: replay a recorded gateway exchange through the state
 * machine and view-model builder, asserting every rendered value matches
 * the corresponding API field within display rounding. The fixture was
 * captured against the live service with the bundled figure2 catalog and
 * the query "footwear", clicking shoes until convergence.
 */

import { describe, expect, it } from "vitest";

import {
  CreateSessionSchema,
  EigTableSchema,
  FeedbackSchema,
  KgSchema,
} from "../src/api.js";
import { initialState, reduce, type UiState } from "../src/state.js";
import { buildViewModel, formatProbability } from "../src/viewmodel.js";

import exchange from "./fixtures/footwear-exchange.json";

const kg = KgSchema.parse(exchange[0]!.response.body);
const created = CreateSessionSchema.parse(exchange[1]!.response.body);
const eigTable = EigTableSchema.parse(exchange[2]!.response.body);
const feedbackRecords = exchange.filter((r) =>
  r.request.path.endsWith("/feedback"),
);
const finalTrace = exchange[exchange.length - 1]!.response.body as {
  status: string;
  belief: Record<string, number>;
};

function assertBeliefMatchesApi(state: UiState, belief: Record<string, number>) {
  const vm = buildViewModel(state, kg);
  expect(vm.beliefBars).toHaveLength(Object.keys(belief).length);
  for (const bar of vm.beliefBars) {
    expect(bar.probability).toBe(belief[bar.nodeId]); // raw value untouched
    expect(bar.display).toBe(formatProbability(belief[bar.nodeId]!));
  }
}

describe("footwear flow replayed from the recorded exchange", () => {
  it("renders the whole flow consistently with the API responses", () => {
    let state = reduce(initialState, {
      kind: "query-submitted",
      query: "footwear",
    });
    state = reduce(state, { kind: "session-started", response: created });
    state = reduce(state, { kind: "eig-received", table: eigTable });

    // opening view: cards are exactly the server's bundle, belief is the prior
    let vm = buildViewModel(state, kg);
    expect(vm.cards.map((c) => c.id)).toEqual(created.bundle);
    assertBeliefMatchesApi(state, created.belief);

    // EIG panel: exhaustive C(4,2) table, shown bundle highlighted at row 1
    expect(vm.eigRows).toHaveLength(6);
    expect(vm.eigRows[0]!.highlighted).toBe(true);
    expect(vm.eigRows[0]!.bundle).toEqual(created.bundle);
    expect(vm.eigRows.slice(1).every((r) => !r.highlighted)).toBe(true);

    for (const record of feedbackRecords) {
      const clicked = (record.request.body as { clicked: string | null }).clicked;
      const response = FeedbackSchema.parse(record.response.body);
      state = reduce(state, { kind: "feedback-sent", clicked });
      expect(buildViewModel(state, kg).cardsEnabled).toBe(false); // in flight
      state = reduce(state, { kind: "feedback-received", response });
      assertBeliefMatchesApi(state, response.belief);
    }

    // terminal view: convergence card names the node from the API, with its
    // confidence rounded for display only
    vm = buildViewModel(state, kg);
    const last = FeedbackSchema.parse(
      feedbackRecords[feedbackRecords.length - 1]!.response.body,
    );
    expect(state.phase).toBe("converged");
    expect(last.lexicon_entry).not.toBeNull();
    expect(last.lexicon_entry!.node).toBe("shoes");
    expect(vm.convergenceCard).toBe(
      `"footwear" means Shoes (p = ${formatProbability(last.lexicon_entry!.confidence)})`,
    );
    expect(vm.cardsEnabled).toBe(false);

    // the UI's terminal state agrees with the server's own trace
    expect(state.phase).toBe(finalTrace.status);
    assertBeliefMatchesApi(state, finalTrace.belief);

    // history: one confirmed row per feedback round trip, none invented
    expect(vm.history).toHaveLength(feedbackRecords.length);
    expect(vm.history.map((h) => h.index)).toEqual(
      feedbackRecords.map((_, i) => i),
    );
  });
});
