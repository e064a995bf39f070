/**
 * Page wiring: capture loop -> serialized predict requests -> render.
 *
 * At most one request is in flight; windows that arrive while one is pending
 * are dropped in favor of the freshest, so the UI never lags the microphone.
 */

import { HOP_SECONDS, encodeWindowBase64 } from "./audio.js";
import { predict } from "./client.js";
import { startCapture, type CaptureSession } from "./capture.js";
import { lookupElements, render, showBanner } from "./render.js";
import {
  applyFailure,
  applyResponse,
  initialState,
  setListening,
  setThreshold,
  type UiState,
} from "./state.js";

const DEFAULT_SERVICE_URL = "http://127.0.0.1:8000";

let state: UiState = initialState(DEFAULT_SERVICE_URL);
let session: CaptureSession | null = null;
let timer: number | null = null;
let inFlight = false;

const el = lookupElements(document);
const serviceInput = document.getElementById("service-url") as HTMLInputElement;
const thresholdInput = document.getElementById("threshold") as HTMLInputElement;
const thresholdValue = document.getElementById("threshold-value") as HTMLElement;
const toggleButton = document.getElementById("toggle") as HTMLButtonElement;

serviceInput.value = state.serviceUrl;
thresholdInput.value = String(state.threshold);
thresholdValue.textContent = state.threshold.toFixed(2);

function update(next: UiState): void {
  state = next;
  render(state, el);
}

async function classifyLatestWindow(): Promise<void> {
  if (!session || inFlight) {
    return;
  }
  // drain to the freshest full window; skip the tick if none is ready
  let window = session.windower.nextWindow();
  let fresher = window;
  while (fresher) {
    window = fresher;
    fresher = session.windower.nextWindow();
  }
  if (!window) {
    return;
  }
  inFlight = true;
  try {
    const body = encodeWindowBase64(window, session.sampleRate);
    const response = await predict(state.serviceUrl, body);
    update(applyResponse(state, response, Date.now()));
  } catch (err) {
    update(applyFailure(state, err instanceof Error ? err.message : String(err)));
  } finally {
    inFlight = false;
  }
}

async function start(): Promise<void> {
  showBanner(el, "");
  try {
    session = await startCapture();
  } catch {
    showBanner(el, "Microphone permission denied — the demo cannot hear you.");
    return;
  }
  update(setListening({ ...state, serviceUrl: serviceInput.value }, true));
  toggleButton.textContent = "Stop";
  timer = window.setInterval(() => void classifyLatestWindow(), HOP_SECONDS * 1000);
}

function stop(): void {
  if (timer !== null) {
    clearInterval(timer);
    timer = null;
  }
  session?.stop();
  session = null;
  update(setListening(state, false));
  toggleButton.textContent = "Start listening";
}

toggleButton.addEventListener("click", () => {
  if (state.listening) {
    stop();
  } else {
    void start();
  }
});

thresholdInput.addEventListener("input", () => {
  const value = Number(thresholdInput.value);
  thresholdValue.textContent = value.toFixed(2);
  update(setThreshold(state, value));
});

serviceInput.addEventListener("change", () => {
  update({ ...state, serviceUrl: serviceInput.value });
});

render(state, el);
