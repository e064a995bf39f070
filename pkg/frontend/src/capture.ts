/**
 * Microphone capture: feeds mono samples into a SampleWindower and hands out
 * one-second windows every 500 ms. Rendering never blocks this path; the
 * caller decides when to consume windows.
 */

import { SampleWindower } from "./audio.js";

export interface CaptureSession {
  sampleRate: number;
  windower: SampleWindower;
  stop: () => void;
}

export async function startCapture(): Promise<CaptureSession> {
  const stream = await navigator.mediaDevices.getUserMedia({ audio: true, video: false });
  const context = new AudioContext();
  const source = context.createMediaStreamSource(stream);
  const windower = new SampleWindower(context.sampleRate);

  // ScriptProcessorNode is deprecated but universally available; the demo
  // copies each callback buffer and does all heavy work outside the callback.
  const processor = context.createScriptProcessor(4096, 1, 1);
  processor.onaudioprocess = (event) => {
    windower.push(new Float32Array(event.inputBuffer.getChannelData(0)));
  };
  source.connect(processor);
  processor.connect(context.destination);

  const stop = () => {
    processor.disconnect();
    source.disconnect();
    stream.getTracks().forEach((track) => track.stop());
    void context.close();
    windower.reset();
  };

  return { sampleRate: context.sampleRate, windower, stop };
}
