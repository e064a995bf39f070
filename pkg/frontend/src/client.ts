/** Typed wrapper around the inference service's JSON API. */

export interface PredictResponse {
  label: string;
  scores: Record<string, number>;
}

export interface ModelInfo {
  name: string;
  n_labels: number;
  labels: string[];
}

export function parsePredictResponse(body: unknown): PredictResponse {
  if (typeof body !== "object" || body === null) {
    throw new Error("response is not an object");
  }
  const record = body as Record<string, unknown>;
  if (typeof record.label !== "string") {
    throw new Error("response is missing a string 'label'");
  }
  if (typeof record.scores !== "object" || record.scores === null) {
    throw new Error("response is missing a 'scores' map");
  }
  const scores: Record<string, number> = {};
  for (const [name, value] of Object.entries(record.scores as Record<string, unknown>)) {
    if (typeof value !== "number" || !Number.isFinite(value)) {
      throw new Error(`score for ${name} is not a finite number`);
    }
    scores[name] = value;
  }
  if (Object.keys(scores).length === 0) {
    throw new Error("scores map is empty");
  }
  return { label: record.label, scores };
}

export async function predict(serviceUrl: string, wavBase64: string): Promise<PredictResponse> {
  const resp = await fetch(`${serviceUrl.replace(/\/$/, "")}/predict`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ wav_data: wavBase64, method: "all_label" }),
  });
  if (!resp.ok) {
    throw new Error(`service responded ${resp.status}`);
  }
  return parsePredictResponse(await resp.json());
}

export async function fetchModelInfo(serviceUrl: string): Promise<ModelInfo> {
  const resp = await fetch(`${serviceUrl.replace(/\/$/, "")}/model`);
  if (!resp.ok) {
    throw new Error(`service responded ${resp.status}`);
  }
  return (await resp.json()) as ModelInfo;
}
