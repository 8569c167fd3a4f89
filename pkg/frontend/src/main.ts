/** Wire the state machine, API client, and renderer together. */

import { ApiClient, ApiError, type Kg } from "./api.js";
import { render } from "./render.js";
import { initialState, reduce, type UiEvent, type UiState } from "./state.js";
import { buildViewModel } from "./viewmodel.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("gateway") ?? "";
const kgId = params.get("kg") ?? "figure2";

const api = new ApiClient(baseUrl);
const root = document.getElementById("app");
if (root === null) throw new Error("missing #app container");

let state: UiState = initialState;
let kg: Kg | null = null;

function dispatch(event: UiEvent): void {
  state = reduce(state, event);
  render(root!, buildViewModel(state, kg), handlers);
}

function fail(err: unknown): void {
  const message =
    err instanceof ApiError ? err.message : "Could not reach the gateway.";
  dispatch({ kind: "request-failed", message });
}

async function refreshEig(): Promise<void> {
  if (state.sessionId === null) return;
  try {
    const table = await api.getEigTable(state.sessionId);
    dispatch({ kind: "eig-received", table });
  } catch {
    dispatch({ kind: "eig-fetch-failed" });
  }
}

const handlers = {
  onSubmitQuery(query: string): void {
    dispatch({ kind: "query-submitted", query });
    api
      .createSession(kgId, query.trim())
      .then((response) => {
        dispatch({ kind: "session-started", response });
        return refreshEig();
      })
      .catch(fail);
  },

  onClickProduct(productId: string): void {
    submit(productId);
  },

  onNoClick(): void {
    submit(null);
  },

  onDismissError(): void {
    dispatch({ kind: "error-dismissed" });
  },
};

function submit(clicked: string | null): void {
  if (state.sessionId === null) return;
  const sessionId = state.sessionId;
  dispatch({ kind: "feedback-sent", clicked });
  api
    .submitFeedback(sessionId, clicked)
    .then((response) => {
      dispatch({ kind: "feedback-received", response });
      return refreshEig();
    })
    .catch(fail);
}

api
  .getKg(kgId)
  .then((loaded) => {
    kg = loaded;
    dispatch({ kind: "error-dismissed" }); // no-op rerender with catalog data
  })
  .catch(fail);

render(root, buildViewModel(state, kg), handlers);
