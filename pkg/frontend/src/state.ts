/**
 * UI state machine. Every transition corresponds to an API event (a
 * request going out or a response coming back) — the reducer holds no
 * inference logic and never invents data. States mirror the session's
 * own statuses, plus the purely client-side entering/awaiting/error
 * phases.
 */

import type {
  CreateSessionResponse,
  EigTable,
  FeedbackResponse,
} from "./api.js";

export type Phase =
  | "entering-query"
  | "awaiting-click"
  | "awaiting-server"
  | "converged"
  | "exhausted"
  | "error";

export interface HistoryStep {
  index: number;
  bundle: string[];
  clicked: string | null;
  belief: Record<string, number>;
}

export interface UiState {
  phase: Phase;
  sessionId: string | null;
  query: string;
  bundle: string[] | null;
  belief: Record<string, number>;
  eigTable: EigTable;
  eigStale: boolean;
  lexiconEntry: { node: string; confidence: number } | null;
  history: HistoryStep[];
  pendingClick: string | null;
  errorMessage: string | null;
  phaseBeforeError: Phase | null;
}

export type UiEvent =
  | { kind: "query-submitted"; query: string }
  | { kind: "session-started"; response: CreateSessionResponse }
  | { kind: "feedback-sent"; clicked: string | null }
  | { kind: "feedback-received"; response: FeedbackResponse }
  | { kind: "eig-received"; table: EigTable }
  | { kind: "eig-fetch-failed" }
  | { kind: "request-failed"; message: string }
  | { kind: "error-dismissed" };

export const initialState: UiState = {
  phase: "entering-query",
  sessionId: null,
  query: "",
  bundle: null,
  belief: {},
  eigTable: [],
  eigStale: false,
  lexiconEntry: null,
  history: [],
  pendingClick: null,
  errorMessage: null,
  phaseBeforeError: null,
};

function phaseForStatus(status: "active" | "converged" | "exhausted"): Phase {
  return status === "active" ? "awaiting-click" : status;
}

/** May the user submit a query right now? */
export function canSubmitQuery(state: UiState, query: string): boolean {
  return state.phase === "entering-query" && query.trim().length > 0;
}

/** May the user click a card (or "None of these") right now? */
export function canGiveFeedback(state: UiState): boolean {
  return state.phase === "awaiting-click" && state.bundle !== null;
}

export function reduce(state: UiState, event: UiEvent): UiState {
  switch (event.kind) {
    case "query-submitted":
      if (!canSubmitQuery(state, event.query)) return state;
      return { ...state, phase: "awaiting-server", query: event.query.trim() };

    case "session-started":
      if (state.phase !== "awaiting-server") return state;
      return {
        ...state,
        phase: phaseForStatus(event.response.status),
        sessionId: event.response.session_id,
        bundle: event.response.bundle,
        belief: event.response.belief,
        eigStale: true,
      };

    case "feedback-sent":
      // double submissions are dropped, not queued
      if (!canGiveFeedback(state)) return state;
      return { ...state, phase: "awaiting-server", pendingClick: event.clicked };

    case "feedback-received": {
      if (state.phase !== "awaiting-server") return state;
      // the step enters history only once the server confirmed it
      const step: HistoryStep = {
        index: state.history.length,
        bundle: state.bundle ?? [],
        clicked: state.pendingClick ?? null,
        belief: event.response.belief,
      };
      return {
        ...state,
        phase: phaseForStatus(event.response.status),
        bundle: event.response.bundle,
        belief: event.response.belief,
        lexiconEntry: event.response.lexicon_entry,
        history: [...state.history, step],
        pendingClick: null,
        eigStale: true,
      };
    }

    case "eig-received":
      return { ...state, eigTable: event.table, eigStale: false };

    case "eig-fetch-failed":
      return { ...state, eigStale: true };

    case "request-failed": {
      // surface the failure; session state is left exactly as it was
      const resumePhase: Phase =
        state.phase === "awaiting-server"
          ? state.sessionId === null
            ? "entering-query"
            : "awaiting-click"
          : state.phase;
      return {
        ...state,
        phase: "error",
        pendingClick: null,
        errorMessage: event.message,
        phaseBeforeError: resumePhase,
      };
    }

    case "error-dismissed": {
      if (state.phase !== "error") return state;
      return {
        ...state,
        phase: state.phaseBeforeError ?? "entering-query",
        errorMessage: null,
        phaseBeforeError: null,
      };
    }
  }
}
