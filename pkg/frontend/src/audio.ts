/**
 * Audio munging for the capture path: sliding one-second windows, linear
 * resampling to 16 kHz, 16-bit PCM WAV encoding, and base64.
 */

export const SERVICE_SAMPLE_RATE = 16000;
export const WINDOW_SECONDS = 1.0;
export const HOP_SECONDS = 0.5;

/** Accumulates mono samples and serves sliding windows with 50% overlap. */
export class SampleWindower {
  private buffer: Float32Array;
  private length = 0;
  private readonly windowLen: number;
  private readonly hopLen: number;

  constructor(sampleRate: number) {
    this.windowLen = Math.round(sampleRate * WINDOW_SECONDS);
    this.hopLen = Math.round(sampleRate * HOP_SECONDS);
    this.buffer = new Float32Array(this.windowLen * 4);
  }

  push(chunk: Float32Array): void {
    if (this.length + chunk.length > this.buffer.length) {
      const grown = new Float32Array(Math.max(this.buffer.length * 2, this.length + chunk.length));
      grown.set(this.buffer.subarray(0, this.length));
      this.buffer = grown;
    }
    this.buffer.set(chunk, this.length);
    this.length += chunk.length;
  }

  /** Oldest pending window, or null until a full second has accumulated. */
  nextWindow(): Float32Array | null {
    if (this.length < this.windowLen) {
      return null;
    }
    const window = this.buffer.slice(0, this.windowLen);
    // drop one hop: the next window overlaps this one by 50%
    this.buffer.copyWithin(0, this.hopLen, this.length);
    this.length -= this.hopLen;
    return window;
  }

  reset(): void {
    this.length = 0;
  }
}

/** Linear-interpolation resampling; fine for one-second command audio. */
export function resampleLinear(
  samples: Float32Array,
  fromRate: number,
  toRate: number,
): Float32Array {
  if (fromRate === toRate) {
    return samples.slice();
  }
  const outLen = Math.round((samples.length * toRate) / fromRate);
  const out = new Float32Array(outLen);
  const step = fromRate / toRate;
  for (let i = 0; i < outLen; i++) {
    const pos = i * step;
    const lo = Math.floor(pos);
    const hi = Math.min(lo + 1, samples.length - 1);
    const frac = pos - lo;
    out[i] = samples[lo] * (1 - frac) + samples[hi] * frac;
  }
  return out;
}

/** Mono 16-bit PCM WAV: 44-byte header plus two bytes per sample. */
export function encodeWavPcm16(samples: Float32Array, sampleRate: number): Uint8Array {
  const dataLen = samples.length * 2;
  const out = new Uint8Array(44 + dataLen);
  const view = new DataView(out.buffer);

  const ascii = (offset: number, text: string) => {
    for (let i = 0; i < text.length; i++) {
      out[offset + i] = text.charCodeAt(i);
    }
  };
  ascii(0, "RIFF");
  view.setUint32(4, 36 + dataLen, true);
  ascii(8, "WAVE");
  ascii(12, "fmt ");
  view.setUint32(16, 16, true);
  view.setUint16(20, 1, true); // PCM
  view.setUint16(22, 1, true); // mono
  view.setUint32(24, sampleRate, true);
  view.setUint32(28, sampleRate * 2, true);
  view.setUint16(32, 2, true);
  view.setUint16(34, 16, true);
  ascii(36, "data");
  view.setUint32(40, dataLen, true);

  for (let i = 0; i < samples.length; i++) {
    const clamped = Math.max(-1, Math.min(1, samples[i]));
    const scaled = Math.round(clamped * 32768);
    view.setInt16(44 + i * 2, Math.max(-32768, Math.min(32767, scaled)), true);
  }
  return out;
}

export function bytesToBase64(bytes: Uint8Array): string {
  const ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  let out = "";
  for (let i = 0; i < bytes.length; i += 3) {
    const a = bytes[i];
    const b = i + 1 < bytes.length ? bytes[i + 1] : 0;
    const c = i + 2 < bytes.length ? bytes[i + 2] : 0;
    out += ALPHABET[a >> 2];
    out += ALPHABET[((a & 0x03) << 4) | (b >> 4)];
    out += i + 1 < bytes.length ? ALPHABET[((b & 0x0f) << 2) | (c >> 6)] : "=";
    out += i + 2 < bytes.length ? ALPHABET[c & 0x3f] : "=";
  }
  return out;
}

/** Capture window -> base64 WAV body, resampled to the service rate. */
export function encodeWindowBase64(samples: Float32Array, captureRate: number): string {
  const resampled = resampleLinear(samples, captureRate, SERVICE_SAMPLE_RATE);
  return bytesToBase64(encodeWavPcm16(resampled, SERVICE_SAMPLE_RATE));
}
