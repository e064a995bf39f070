/**
 * UI state and the pure transition logic the page renders from.
 *
 * The displayed label is "—" whenever the top score falls below the
 * threshold; threshold changes apply to the next response without restart.
 */

import type { PredictResponse } from "./client.js";

export const BELOW_THRESHOLD = "—";
export const HISTORY_LIMIT = 12;

export type ServiceStatus = "idle" | "ok" | "error";

export interface HistoryEntry {
  timestamp: number;
  label: string;
  score: number;
}

export interface UiState {
  serviceUrl: string;
  listening: boolean;
  threshold: number;
  lastResponse: PredictResponse | null;
  status: ServiceStatus;
  statusDetail: string;
  history: HistoryEntry[];
}

export function initialState(serviceUrl: string): UiState {
  return {
    serviceUrl,
    listening: false,
    threshold: 0.5,
    lastResponse: null,
    status: "idle",
    statusDetail: "",
    history: [],
  };
}

export function topScore(response: PredictResponse): { label: string; score: number } {
  let best = { label: BELOW_THRESHOLD, score: -Infinity };
  for (const [label, score] of Object.entries(response.scores)) {
    if (score > best.score) {
      best = { label, score };
    }
  }
  return best;
}

/** Label to display for a response under the current threshold. */
export function displayLabel(response: PredictResponse, threshold: number): string {
  const best = topScore(response);
  return best.score >= threshold ? best.label : BELOW_THRESHOLD;
}

export function applyResponse(state: UiState, response: PredictResponse, timestamp: number): UiState {
  const best = topScore(response);
  const entry: HistoryEntry = {
    timestamp,
    label: best.score >= state.threshold ? best.label : BELOW_THRESHOLD,
    score: best.score,
  };
  return {
    ...state,
    lastResponse: response,
    status: "ok",
    statusDetail: "",
    history: [entry, ...state.history].slice(0, HISTORY_LIMIT),
  };
}

export function applyFailure(state: UiState, detail: string): UiState {
  // keep the last good response on screen; the next window retries anyway
  return { ...state, status: "error", statusDetail: detail };
}

export function setThreshold(state: UiState, threshold: number): UiState {
  return { ...state, threshold: Math.min(1, Math.max(0, threshold)) };
}

export function setListening(state: UiState, listening: boolean): UiState {
  return { ...state, listening, status: listening ? state.status : "idle" };
}
