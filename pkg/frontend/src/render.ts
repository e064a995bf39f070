/** DOM rendering: score bars, history list, status light, banner. */

import type { UiState } from "./state.js";
import { BELOW_THRESHOLD, displayLabel } from "./state.js";

export interface Elements {
  bars: HTMLElement;
  bigLabel: HTMLElement;
  history: HTMLElement;
  status: HTMLElement;
  banner: HTMLElement;
}

export function lookupElements(root: Document): Elements {
  const get = (id: string) => {
    const el = root.getElementById(id);
    if (!el) {
      throw new Error(`missing element #${id}`);
    }
    return el;
  };
  return {
    bars: get("bars"),
    bigLabel: get("big-label"),
    history: get("history"),
    status: get("status"),
    banner: get("banner"),
  };
}

export function render(state: UiState, el: Elements): void {
  el.status.dataset.state = state.listening ? state.status : "idle";
  el.status.textContent =
    state.status === "error" ? `service error: ${state.statusDetail}` : state.listening ? "listening" : "stopped";

  if (state.lastResponse) {
    const shown = displayLabel(state.lastResponse, state.threshold);
    el.bigLabel.textContent = shown;
    el.bigLabel.classList.toggle("muted", shown === BELOW_THRESHOLD);

    const entries = Object.entries(state.lastResponse.scores);
    const top = displayLabel(state.lastResponse, 0);
    el.bars.replaceChildren(
      ...entries.map(([label, score]) => {
        const row = document.createElement("div");
        row.className = "bar-row" + (label === top ? " top" : "");
        const name = document.createElement("span");
        name.className = "bar-name";
        name.textContent = label;
        const track = document.createElement("div");
        track.className = "bar-track";
        const fill = document.createElement("div");
        fill.className = "bar-fill";
        fill.style.width = `${(100 * score).toFixed(1)}%`;
        track.appendChild(fill);
        const value = document.createElement("span");
        value.className = "bar-value";
        value.textContent = score.toFixed(3);
        row.append(name, track, value);
        return row;
      }),
    );
  }

  el.history.replaceChildren(
    ...state.history.map((entry) => {
      const item = document.createElement("li");
      const when = new Date(entry.timestamp).toLocaleTimeString();
      item.textContent = `${when}  ${entry.label}  (${entry.score.toFixed(2)})`;
      return item;
    }),
  );
}

export function showBanner(el: Elements, message: string): void {
  el.banner.textContent = message;
  el.banner.hidden = message === "";
}
