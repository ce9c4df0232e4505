"""Local HTTP service exposing the pipeline to the browser console.

Endpoints:
  POST /process            WAV upload + parameter document -> metrics,
                           processed audio (base64 WAV), decimated spectra.
  GET/PUT/DELETE /presets  CRUD over an on-disk preset store (atomic writes).
  POST /sweep              async sweep job; GET /sweep/{id} for status,
                           POST /sweep/{id}/cancel to stop early.

Loopback-only by default, no auth: this is a local operator tool. One sweep
runs at a time; further submissions queue FIFO.
"""

from __future__ import annotations

import base64
import json
import os
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .metrics import metric_row
from .quantizer import DITHER_KINDS, DitherSpec, QuantConfig, run_pipeline
from .shaping import ContourTable, ShapingConfig, ShapingDivergence, default_contour, shape
from .signal_io import Signal, WavFormatError, normalize_peak, read_wav_bytes, wav_bytes
from .sweep import SweepConfig, report_csv, run_sweep
from .cli import _sweep_config, ConfigError, CONFIG_KEYS

MAX_PAYLOAD = 50 * 1024 * 1024
SPECTRUM_POINTS = 2048


def _decimate_spectrum(x: np.ndarray, sample_rate: int) -> dict:
    """Magnitude spectrum (dB) decimated to at most SPECTRUM_POINTS bins."""
    spec = np.abs(np.fft.rfft(x * np.hanning(len(x))))
    freqs = np.fft.rfftfreq(len(x), 1.0 / sample_rate)
    if len(spec) > SPECTRUM_POINTS:
        # max-pool so narrow peaks survive decimation
        edge = len(spec) - len(spec) % SPECTRUM_POINTS
        pooled = spec[:edge].reshape(SPECTRUM_POINTS, -1).max(axis=1)
        fstep = freqs[edge - 1] / (SPECTRUM_POINTS - 1)
        freqs = np.arange(SPECTRUM_POINTS) * fstep
        spec = pooled
    db = 20.0 * np.log10(np.maximum(spec, 1e-12))
    return {"freq_hz": freqs.round(3).tolist(), "mag_db": db.round(4).tolist()}


def _parse_params(doc: dict) -> tuple[DitherSpec, QuantConfig, ShapingConfig | None, bool, bool]:
    known = {
        "dither", "alpha", "seed", "bits", "full_scale", "subtractive",
        "normalize", "shaping", "fundamental_hz",
    }
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
    kind = doc.get("dither", "tpdf")
    if kind not in DITHER_KINDS:
        raise ValueError(f"dither must be one of {DITHER_KINDS}")
    spec = DitherSpec(kind=kind, alpha=float(doc.get("alpha", 1.0)), seed=int(doc.get("seed", 0)))
    cfg = QuantConfig(bits=int(doc.get("bits", 3)), full_scale=float(doc.get("full_scale", 1.0)))
    shaping_doc = doc.get("shaping")
    shaping = None
    if shaping_doc is not None:
        contour = shaping_doc.get("contour")
        table = ContourTable(tuple((p[0], p[1]) for p in contour)) if contour else None
        shaping = ShapingConfig(
            contour=table,
            order=int(shaping_doc.get("order", 512)),
            iterations=int(shaping_doc.get("iterations", 100)),
            relax=float(shaping_doc.get("relax", 0.2)),
            select=shaping_doc.get("select", "best"),
            redraw_dither=bool(shaping_doc.get("redraw_dither", False)),
        )
    return spec, cfg, shaping, bool(doc.get("subtractive", False)), bool(doc.get("normalize", True))


class PresetStore:
    """Single-directory JSON preset store; writes go through one lock."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, name: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_ ." else "_" for c in name)
        return self.root / f"{safe}.json"

    def list(self) -> list[dict]:
        docs = []
        for path in sorted(self.root.glob("*.json")):
            with open(path) as fh:
                docs.append(json.load(fh))
        return docs

    def get(self, name: str) -> dict | None:
        path = self._path(name)
        if not path.exists():
            return None
        with open(path) as fh:
            return json.load(fh)

    def put(self, name: str, doc: dict, overwrite: bool = False) -> bool:
        with self._lock:
            path = self._path(name)
            if path.exists() and not overwrite:
                return False
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
            os.replace(tmp, path)
            return True

    def delete(self, name: str) -> bool:
        with self._lock:
            path = self._path(name)
            if not path.exists():
                return False
            path.unlink()
            return True


class SweepJobs:
    """FIFO sweep-job runner: one sweep in flight, the rest queue."""

    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, dict] = {}
        self._queue: list[str] = []
        self._running = False

    def submit(self, signal: Signal, cfg: SweepConfig) -> str:
        job_id = uuid.uuid4().hex
        with self._lock:
            self._jobs[job_id] = {
                "status": "queued",
                "done": 0,
                "total": cfg.alpha_count * len(cfg.conditions),
                "cancel": False,
                "signal": signal,
                "config": cfg,
                "report": None,
                "error": None,
            }
            self._queue.append(job_id)
        self._maybe_start()
        return job_id

    def _maybe_start(self):
        with self._lock:
            if self._running or not self._queue:
                return
            job_id = self._queue.pop(0)
            self._running = True
        threading.Thread(target=self._run, args=(job_id,), daemon=True).start()

    def _run(self, job_id: str):
        job = self._jobs[job_id]
        job["status"] = "running"

        def progress(done, total):
            job["done"] = done
            job["total"] = total

        try:
            report = run_sweep(
                job.pop("signal"),
                job["config"],
                progress=progress,
                cancelled=lambda: job["cancel"],
            )
            job["report"] = report
            job["status"] = "cancelled" if job["cancel"] else "done"
        except Exception as exc:  # surfaced via status
            job["status"] = "error"
            job["error"] = str(exc)
        finally:
            with self._lock:
                self._running = False
            self._maybe_start()

    def get(self, job_id: str) -> dict | None:
        return self._jobs.get(job_id)

    def cancel(self, job_id: str) -> bool:
        job = self._jobs.get(job_id)
        if job is None:
            return False
        job["cancel"] = True
        return True


def create_app(preset_dir=None) -> FastAPI:
    app = FastAPI(title="ditherlab service")
    store = PresetStore(Path(preset_dir or os.environ.get("DITHERLAB_PRESETS", "presets")))
    jobs = SweepJobs()
    app.state.presets = store
    app.state.jobs = jobs

    def bad_request(code: str, message: str):
        return JSONResponse(status_code=400, content={"error": code, "message": message})

    @app.post("/process")
    async def process(request: Request):
        form = await request.form()
        upload = form.get("audio")
        if upload is None:
            return bad_request("missing_audio", "multipart field 'audio' required")
        payload = await upload.read()
        if len(payload) > MAX_PAYLOAD:
            return JSONResponse(status_code=413, content={"error": "payload_too_large"})
        try:
            x = read_wav_bytes(payload)
        except WavFormatError as exc:
            return bad_request(exc.code, str(exc))
        try:
            params = json.loads(form.get("params", "{}"))
            spec, cfg, shaping, subtractive, normalize = _parse_params(params)
            if normalize:
                x = normalize_peak(x)
            if shaping is not None:
                result, _ = shape(x, spec, cfg, shaping, subtractive)
            else:
                result = run_pipeline(x, spec, cfg, subtractive)
        except ShapingDivergence as exc:
            return JSONResponse(status_code=500, content={"error": "divergence", "message": str(exc)})
        except (ValueError, json.JSONDecodeError) as exc:
            return bad_request("bad_params", str(exc))
        row = metric_row(
            x, result, cfg.levels, spec.alpha,
            contour=shaping.contour if shaping else None,
            fundamental_hz=params.get("fundamental_hz"),
        )
        return {
            "metrics": {k: (None if isinstance(v, float) and np.isnan(v) else v)
                        for k, v in row.as_dict().items()},
            "audio_wav_base64": base64.b64encode(wav_bytes(result.output, 16)).decode(),
            "sample_rate": x.sample_rate,
            "spectrum": {
                "original": _decimate_spectrum(x.samples, x.sample_rate),
                "processed": _decimate_spectrum(result.output.samples, x.sample_rate),
            },
        }

    @app.get("/presets")
    def list_presets():
        return {"presets": store.list()}

    @app.get("/presets/{name}")
    def get_preset(name: str):
        doc = store.get(name)
        if doc is None:
            raise HTTPException(404, "unknown preset")
        return doc

    @app.put("/presets/{name}")
    async def put_preset(name: str, request: Request, overwrite: bool = False):
        doc = await request.json()
        doc["name"] = name
        if not store.put(name, doc, overwrite=overwrite):
            raise HTTPException(409, "preset exists; pass overwrite=true to replace")
        return doc

    @app.delete("/presets/{name}")
    def delete_preset(name: str):
        if not store.delete(name):
            raise HTTPException(404, "unknown preset")
        return {"deleted": name}

    @app.post("/sweep")
    async def submit_sweep(request: Request):
        body = await request.json()
        unknown = set(body) - (CONFIG_KEYS | {"signal"})
        if unknown:
            return bad_request("bad_config", f"unknown keys: {sorted(unknown)}")
        sig = body.get("signal")
        if sig is None or "wav_base64" not in sig:
            return bad_request("missing_signal", "body needs signal.wav_base64")
        try:
            x = read_wav_bytes(base64.b64decode(sig["wav_base64"]))
            if not body.get("no_normalize", False):
                x = normalize_peak(x)
            cfg = _sweep_config(body, body.get("fundamental_hz"))
        except (WavFormatError, ConfigError, ValueError) as exc:
            return bad_request("bad_config", str(exc))
        job_id = jobs.submit(x, cfg)
        return {"job_id": job_id}

    @app.get("/sweep/{job_id}")
    def sweep_status(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(404, "unknown job")
        out = {
            "status": job["status"],
            "done": job["done"],
            "total": job["total"],
            "error": job["error"],
        }
        if job["report"] is not None:
            out["csv"] = report_csv(job["report"])
            out["optimal"] = [vars(o) for o in job["report"].optimal]
            out["provenance"] = job["report"].provenance
        return out

    @app.post("/sweep/{job_id}/cancel")
    def cancel_sweep(job_id: str):
        if not jobs.cancel(job_id):
            raise HTTPException(404, "unknown job")
        return {"cancelled": job_id}

    return app


def main():  # pragma: no cover
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="ditherlab local service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=int(os.environ.get("DITHERLAB_PORT", 8787)))
    parser.add_argument("--presets", default=None)
    args = parser.parse_args()
    uvicorn.run(create_app(args.presets), host=args.host, port=args.port)


if __name__ == "__main__":  # pragma: no cover
    main()
