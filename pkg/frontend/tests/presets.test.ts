import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { PresetManager, paramsFromPreset } from "../src/presets.js";
import { defaultParams, type PresetDoc } from "../src/types.js";

/** In-memory /presets endpoint speaking the service's wire protocol. */
function fakePresetService(failNext: { value: boolean } = { value: false }) {
  const store = new Map<string, PresetDoc>();
  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    if (failNext.value) {
      failNext.value = false;
      return new Response(JSON.stringify({ error: "boom", message: "synthetic failure" }), { status: 500 });
    }
    const match = url.match(/\/presets(?:\/([^?]+))?(\?overwrite=true)?$/);
    const name = match?.[1] ? decodeURIComponent(match[1]) : null;
    const method = init?.method ?? "GET";
    if (method === "GET" && !name) {
      return Response.json({ presets: [...store.values()] });
    }
    if (method === "GET") {
      const doc = store.get(name!);
      return doc ? Response.json(doc) : new Response("{}", { status: 404 });
    }
    if (method === "PUT") {
      if (store.has(name!) && !match?.[2]) {
        return new Response(JSON.stringify({ detail: "preset exists" }), { status: 409 });
      }
      const doc = { ...(JSON.parse(init!.body as string) as PresetDoc), name: name! };
      store.set(name!, doc);
      return Response.json(doc);
    }
    if (method === "DELETE") {
      if (!store.delete(name!)) return new Response("{}", { status: 404 });
      return Response.json({ deleted: name });
    }
    return new Response("{}", { status: 405 });
  };
  return { store, fetchImpl };
}

describe("PresetManager", () => {
  it("saves, lists, loads, and deletes", async () => {
    const { fetchImpl } = fakePresetService();
    const mgr = new PresetManager(new ApiClient("http://svc", fetchImpl));
    const outcome = await mgr.save("warm", { ...defaultParams(), alpha: 0.26 });
    expect(outcome.ok).toBe(true);
    expect(mgr.presets.map((p) => p.name)).toEqual(["warm"]);

    const loaded = await mgr.load("warm");
    expect(loaded.alpha).toBe(0.26);

    expect(await mgr.remove("warm")).toBe(true);
    expect(mgr.presets).toEqual([]);
  });

  it("reports a duplicate save as a rename prompt", async () => {
    const { fetchImpl } = fakePresetService();
    const mgr = new PresetManager(new ApiClient("http://svc", fetchImpl));
    await mgr.save("a", defaultParams());
    const dup = await mgr.save("a", { ...defaultParams(), alpha: 0.5 });
    expect(dup).toEqual({ ok: false, duplicate: true });
    // rollback: the stored version stays the original
    const kept = await mgr.load("a");
    expect(kept.alpha).toBe(1.0);

    const replaced = await mgr.save("a", { ...defaultParams(), alpha: 0.5 }, true);
    expect(replaced.ok).toBe(true);
    expect((await mgr.load("a")).alpha).toBe(0.5);
  });

  it("rolls back the optimistic insert when the service fails", async () => {
    const failNext = { value: false };
    const { fetchImpl } = fakePresetService(failNext);
    const mgr = new PresetManager(new ApiClient("http://svc", fetchImpl));
    await mgr.save("keep", defaultParams());

    const views: string[][] = [];
    const watched = new PresetManager(new ApiClient("http://svc", fetchImpl), (list) =>
      views.push(list.map((p) => p.name ?? "")),
    );
    await watched.refresh();
    failNext.value = true;
    const outcome = await watched.save("doomed", defaultParams());
    expect(outcome.ok).toBe(false);
    // optimistic insert appeared, then rolled back
    expect(views.some((v) => v.includes("doomed"))).toBe(true);
    expect(watched.presets.map((p) => p.name)).toEqual(["keep"]);
  });

  it("rolls back an optimistic delete on failure", async () => {
    const failNext = { value: false };
    const { fetchImpl } = fakePresetService(failNext);
    const mgr = new PresetManager(new ApiClient("http://svc", fetchImpl));
    await mgr.save("sticky", defaultParams());
    failNext.value = true;
    expect(await mgr.remove("sticky")).toBe(false);
    expect(mgr.presets.map((p) => p.name)).toEqual(["sticky"]);
  });

  it("paramsFromPreset restores every stored control", () => {
    const base = defaultParams();
    const preset: PresetDoc = {
      name: "x",
      dither: "mtpdf",
      alpha: 0.26,
      subtractive: true,
      shaping: { order: 128, iterations: 10, relax: 0.2, select: "best", redraw_dither: false },
    };
    const restored = paramsFromPreset(preset, base);
    expect(restored.dither).toBe("mtpdf");
    expect(restored.alpha).toBe(0.26);
    expect(restored.subtractive).toBe(true);
    expect(restored.shaping?.order).toBe(128);
    expect(restored.bits).toBe(base.bits); // untouched controls keep defaults
    expect("name" in restored).toBe(false);
  });
});
