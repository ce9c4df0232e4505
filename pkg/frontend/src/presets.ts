/**
 * Preset workflow: CRUD against /presets with optimistic list updates that
 * roll back when the service rejects the change. A duplicate-name save is
 * reported as a rename prompt rather than an error banner.
 */

import { ApiClient, ApiError } from "./api.js";
import type { ParamDoc, PresetDoc } from "./types.js";

export type SaveOutcome =
  | { ok: true; preset: PresetDoc }
  | { ok: false; duplicate: true }
  | { ok: false; duplicate: false; message: string };

export class PresetManager {
  private cache: PresetDoc[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (presets: PresetDoc[]) => void = () => {},
  ) {}

  get presets(): PresetDoc[] {
    return this.cache;
  }

  async refresh(): Promise<PresetDoc[]> {
    this.cache = await this.api.listPresets();
    this.onChange(this.cache);
    return this.cache;
  }

  async save(name: string, params: ParamDoc, overwrite = false): Promise<SaveOutcome> {
    const previous = this.cache;
    const optimistic: PresetDoc = { ...params, name };
    this.cache = [...previous.filter((p) => p.name !== name), optimistic];
    this.onChange(this.cache);
    try {
      const stored = await this.api.putPreset(name, params, overwrite);
      this.cache = [...previous.filter((p) => p.name !== name), stored];
      this.onChange(this.cache);
      return { ok: true, preset: stored };
    } catch (err) {
      this.cache = previous; // roll back the optimistic insert
      this.onChange(this.cache);
      if (err instanceof ApiError && err.status === 409) {
        return { ok: false, duplicate: true };
      }
      const message = err instanceof Error ? err.message : String(err);
      return { ok: false, duplicate: false, message };
    }
  }

  async load(name: string): Promise<PresetDoc> {
    return this.api.getPreset(name);
  }

  async remove(name: string): Promise<boolean> {
    const previous = this.cache;
    this.cache = previous.filter((p) => p.name !== name);
    this.onChange(this.cache);
    try {
      await this.api.deletePreset(name);
      return true;
    } catch {
      this.cache = previous; // roll back the optimistic removal
      this.onChange(this.cache);
      return false;
    }
  }
}

/** Restore every control from a stored preset document. */
export function paramsFromPreset(preset: PresetDoc, base: ParamDoc): ParamDoc {
  const { name: _name, ...stored } = preset;
  return { ...base, ...stored };
}
