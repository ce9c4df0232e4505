/**
 * Browser entry point: wires the session, preset, and audition models to the
 * DOM controls in index.html. All numbers shown come straight from service
 * responses; this file only moves them into elements.
 */

import { ApiClient } from "./api.js";
import { AbAudition, type Player } from "./audition.js";
import { PresetManager, paramsFromPreset } from "./presets.js";
import { Session, type SessionState } from "./session.js";
import { DITHER_KINDS, type ContourPoint, type DitherKind } from "./types.js";

const api = new ApiClient(location.origin);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fmt(value: number | null | undefined, digits = 6): string {
  return value == null ? "--" : value.toFixed(digits);
}

function drawTrace(canvas: HTMLCanvasElement, freq: number[], mag: number[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx || freq.length === 0) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const lo = Math.min(...mag);
  const hi = Math.max(...mag);
  ctx.beginPath();
  for (let i = 0; i < freq.length; i++) {
    const x = (i / (freq.length - 1)) * canvas.width;
    const y = canvas.height - ((mag[i]! - lo) / (hi - lo || 1)) * canvas.height;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.strokeStyle = "#1f77b4";
  ctx.stroke();
}

function render(state: SessionState): void {
  el("error-banner").textContent = state.error ?? "";
  el("busy").textContent = state.busy ? "processing..." : "";
  const m = state.lastMetrics;
  el("metric-entropy").textContent = fmt(m?.entropy_bits, 4);
  el("metric-mse").textContent = fmt(m?.mse, 8);
  el("metric-pwsnr").textContent = fmt(m?.pwsnr_db, 2);
  el("metric-coded").textContent = fmt(m?.coded_bits_per_symbol, 4);
  if (state.lastResponse) {
    const spec = state.lastResponse.spectrum;
    drawTrace(el("spectrum-original"), spec.original.freq_hz, spec.original.mag_db);
    drawTrace(el("spectrum-processed"), spec.processed.freq_hz, spec.processed.mag_db);
    audition.setBuffer("processed", state.ab.processed);
  }
  (el("ab-processed") as HTMLButtonElement).disabled = !audition.enabled("processed");
  (el("ab-original") as HTMLButtonElement).disabled = !audition.enabled("original");
}

const session = new Session(api, { onUpdate: render });
const presets = new PresetManager(api, (list) => {
  const select = el<HTMLSelectElement>("preset-list");
  select.innerHTML = "";
  for (const p of list) {
    const opt = document.createElement("option");
    opt.value = opt.textContent = p.name ?? "";
    select.appendChild(opt);
  }
});

const browserPlayer: Player = (() => {
  const ctx = new AudioContext();
  let source: AudioBufferSourceNode | null = null;
  return {
    play(bytes: Uint8Array, offset: number) {
      source?.stop();
      void ctx.decodeAudioData(bytes.buffer.slice(0) as ArrayBuffer).then((buffer) => {
        source = ctx.createBufferSource();
        source.buffer = buffer;
        source.connect(ctx.destination);
        source.start(0, offset % buffer.duration);
      });
    },
    stop() {
      source?.stop();
      source = null;
    },
    now: () => ctx.currentTime,
  };
})();
const audition = new AbAudition(browserPlayer);

// --- control wiring -------------------------------------------------------

el<HTMLInputElement>("file-input").addEventListener("change", async (event) => {
  const file = (event.target as HTMLInputElement).files?.[0];
  if (!file) return;
  session.loadFile(file.name, new Uint8Array(await file.arrayBuffer()));
  audition.setBuffer("original", session.state.ab.original);
  session.adjust({}); // kick off the baseline render
});

el<HTMLInputElement>("alpha-slider").addEventListener("input", (event) => {
  const alpha = Number((event.target as HTMLInputElement).value);
  el("alpha-value").textContent = alpha.toFixed(2);
  session.adjust({ alpha });
});

const pdfSelect = el<HTMLSelectElement>("pdf-select");
for (const kind of DITHER_KINDS) {
  const opt = document.createElement("option");
  opt.value = opt.textContent = kind;
  pdfSelect.appendChild(opt);
}
pdfSelect.value = session.state.params.dither;
pdfSelect.addEventListener("change", () => {
  session.adjust({ dither: pdfSelect.value as DitherKind });
});

el<HTMLInputElement>("subtractive-toggle").addEventListener("change", (event) => {
  session.adjust({ subtractive: (event.target as HTMLInputElement).checked });
});

el<HTMLInputElement>("shaping-toggle").addEventListener("change", (event) => {
  const on = (event.target as HTMLInputElement).checked;
  session.adjust({
    shaping: on
      ? { order: 512, iterations: 100, relax: 0.2, select: "best", redraw_dither: false }
      : null,
  });
});

/** EQ point drag: change exactly one contour point in the outgoing document. */
export function dragEqPoint(index: number, point: ContourPoint): void {
  const shaping = session.state.params.shaping;
  if (!shaping?.contour) return;
  const contour = shaping.contour.map((p, i): ContourPoint => (i === index ? point : p));
  session.adjust({ shaping: { ...shaping, contour } });
}

el("ab-original").addEventListener("click", () => {
  audition.isPlaying && audition.activeSlot === "processed" ? audition.toggle() : audition.play("original");
});
el("ab-processed").addEventListener("click", () => {
  audition.isPlaying && audition.activeSlot === "original" ? audition.toggle() : audition.play("processed");
});

el("preset-save").addEventListener("click", async () => {
  const name = el<HTMLInputElement>("preset-name").value.trim();
  if (!name) return;
  let outcome = await presets.save(name, session.state.params);
  if (!outcome.ok && outcome.duplicate) {
    const renamed = prompt(`Preset "${name}" exists. Save as:`, `${name}-2`);
    if (renamed) outcome = await presets.save(renamed, session.state.params);
  }
  if (!outcome.ok && !("duplicate" in outcome && outcome.duplicate)) {
    el("error-banner").textContent = "preset save failed";
  }
});

el("preset-load").addEventListener("click", async () => {
  const name = el<HTMLSelectElement>("preset-list").value;
  if (!name) return;
  const doc = await presets.load(name);
  session.adjust(paramsFromPreset(doc, session.state.params));
});

el("preset-delete").addEventListener("click", async () => {
  const name = el<HTMLSelectElement>("preset-list").value;
  if (name) await presets.remove(name);
});

void presets.refresh();
