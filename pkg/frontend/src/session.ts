/**
 * Console session: owns the loaded file, the parameter document, and the
 * debounced round trip to /process.
 *
 * Every displayed number originates from a service response; the session
 * never computes DSP locally. Request flow: at most one in-flight request
 * plus a single queue slot holding the newest parameter document. Sends are
 * rate-limited, and responses superseded by a newer send are discarded by
 * sequence number, so the metrics panel always reflects the newest
 * acknowledged parameter set.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  defaultParams,
  validateParams,
  type MetricRow,
  type ParamDoc,
  type PresetDoc,
  type ProcessResponse,
} from "./types.js";

export interface LoadedFile {
  name: string;
  bytes: Uint8Array;
}

export interface AbSlots {
  /** Original upload, available as soon as a file is loaded. */
  original: Uint8Array | null;
  /** Last processed audio (decoded from the service response). */
  processed: Uint8Array | null;
}

export interface SessionState {
  file: LoadedFile | null;
  params: ParamDoc;
  lastMetrics: MetricRow | null;
  lastResponse: ProcessResponse | null;
  ab: AbSlots;
  presets: PresetDoc[];
  /** Inline error banner; null when the last round trip succeeded. */
  error: string | null;
  busy: boolean;
}

export interface SessionOptions {
  /** Minimum milliseconds between /process sends (250 -> <= 4 req/s). */
  minIntervalMs?: number;
  onUpdate?: (state: SessionState) => void;
}

const MIN_INTERVAL_MS = 250;

export class Session {
  readonly state: SessionState = {
    file: null,
    params: defaultParams(),
    lastMetrics: null,
    lastResponse: null,
    ab: { original: null, processed: null },
    presets: [],
    error: null,
    busy: false,
  };

  private seq = 0;
  private appliedSeq = 0;
  private lastSendAt = -Infinity;
  private inflight: AbortController | null = null;
  private queued: ParamDoc | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private readonly minIntervalMs: number;
  private readonly onUpdate: (state: SessionState) => void;
  /** Resolves when the request pipeline drains; tests await this. */
  private idleResolvers: (() => void)[] = [];

  constructor(
    private readonly api: ApiClient,
    opts: SessionOptions = {},
  ) {
    this.minIntervalMs = opts.minIntervalMs ?? MIN_INTERVAL_MS;
    this.onUpdate = opts.onUpdate ?? (() => {});
  }

  loadFile(name: string, bytes: Uint8Array): void {
    this.state.file = { name, bytes };
    this.state.ab = { original: bytes, processed: null };
    this.state.lastMetrics = null;
    this.state.lastResponse = null;
    this.state.error = null;
    this.onUpdate(this.state);
  }

  /** Apply a control change and schedule a debounced /process round trip. */
  adjust(change: Partial<ParamDoc>): void {
    if (!this.state.file) throw new Error("no file loaded");
    const next: ParamDoc = { ...this.state.params, ...change };
    const problems = validateParams(next);
    if (problems.length > 0) {
      this.state.error = problems.join("; ");
      this.onUpdate(this.state);
      return;
    }
    this.state.params = next;
    this.state.error = null;
    this.queued = next; // newest document always wins the queue slot
    this.pump();
  }

  /** Number of /process requests sent so far (for rate-limit assertions). */
  get sendsIssued(): number {
    return this.seq;
  }

  /** Wait until no request is in flight, queued, or timer-pending. */
  whenIdle(): Promise<void> {
    if (!this.inflight && !this.queued && !this.timer) return Promise.resolve();
    return new Promise((resolve) => this.idleResolvers.push(resolve));
  }

  private pump(): void {
    if (!this.queued || this.inflight) return;
    const wait = this.lastSendAt + this.minIntervalMs - Date.now();
    if (wait > 0) {
      if (!this.timer) {
        this.timer = setTimeout(() => {
          this.timer = null;
          this.pump();
        }, wait);
      }
      return;
    }
    const doc = this.queued;
    this.queued = null;
    void this.send(doc);
  }

  private async send(doc: ParamDoc): Promise<void> {
    const file = this.state.file;
    if (!file) return;
    const mySeq = ++this.seq;
    this.lastSendAt = Date.now();
    this.inflight = new AbortController();
    this.state.busy = true;
    this.onUpdate(this.state);
    try {
      const resp = await this.api.process(file.bytes, doc, this.inflight.signal);
      // Discard if a newer request was issued while this one was in flight.
      if (mySeq === this.seq && mySeq > this.appliedSeq) {
        this.appliedSeq = mySeq;
        this.state.lastResponse = resp;
        this.state.lastMetrics = resp.metrics;
        this.state.ab.processed = decodeBase64(resp.audio_wav_base64);
        this.state.error = null;
      }
    } catch (err) {
      if (mySeq === this.seq) {
        this.state.error = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      }
    } finally {
      this.inflight = null;
      this.state.busy = false;
      this.onUpdate(this.state);
      this.pump();
      if (!this.inflight && !this.queued && !this.timer) {
        for (const resolve of this.idleResolvers.splice(0)) resolve();
      }
    }
  }
}

function decodeBase64(data: string): Uint8Array {
  if (typeof Buffer !== "undefined") return new Uint8Array(Buffer.from(data, "base64"));
  const binary = atob(data);
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) out[i] = binary.charCodeAt(i);
  return out;
}
