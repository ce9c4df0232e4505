/** Thin typed client for the dither service HTTP API. */

import type { ParamDoc, PresetDoc, ProcessResponse, ServiceError } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function raise(resp: Response): Promise<never> {
  let code = `http_${resp.status}`;
  let message = resp.statusText;
  try {
    const body = (await resp.json()) as ServiceError & { detail?: string };
    if (body.error) code = body.error;
    message = body.message ?? body.detail ?? message;
  } catch {
    /* non-JSON error body; keep the status text */
  }
  throw new ApiError(resp.status, code, message);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  async process(
    audio: Blob | Uint8Array,
    params: ParamDoc,
    signal?: AbortSignal,
  ): Promise<ProcessResponse> {
    const form = new FormData();
    const blob = audio instanceof Blob
      ? audio
      : new Blob([audio.buffer.slice(audio.byteOffset, audio.byteOffset + audio.byteLength) as ArrayBuffer]);
    form.append("audio", blob, "input.wav");
    form.append("params", JSON.stringify(params));
    const resp = await this.fetchImpl(`${this.baseUrl}/process`, {
      method: "POST",
      body: form,
      signal,
    });
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as ProcessResponse;
  }

  async listPresets(): Promise<PresetDoc[]> {
    const resp = await this.fetchImpl(`${this.baseUrl}/presets`);
    if (!resp.ok) await raise(resp);
    return ((await resp.json()) as { presets: PresetDoc[] }).presets;
  }

  async getPreset(name: string): Promise<PresetDoc> {
    const resp = await this.fetchImpl(`${this.baseUrl}/presets/${encodeURIComponent(name)}`);
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as PresetDoc;
  }

  async putPreset(name: string, doc: PresetDoc, overwrite = false): Promise<PresetDoc> {
    const query = overwrite ? "?overwrite=true" : "";
    const resp = await this.fetchImpl(
      `${this.baseUrl}/presets/${encodeURIComponent(name)}${query}`,
      {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(doc),
      },
    );
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as PresetDoc;
  }

  async deletePreset(name: string): Promise<void> {
    const resp = await this.fetchImpl(`${this.baseUrl}/presets/${encodeURIComponent(name)}`, {
      method: "DELETE",
    });
    if (!resp.ok) await raise(resp);
  }
}
