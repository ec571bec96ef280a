"""HTTP service exposing interactive sessions, versioned under /v1.

Bundles are preloaded from a data directory at startup. Each session is
single-writer: concurrent clicks on the same session get a 409. The service
adds no segmentation semantics of its own; every click response is the
library-level add_prompt result.
"""

import io
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from PIL import Image
from pydantic import BaseModel

from . import rle
from .errors import OutOfBounds, PointsegError
from .evaluator import iou, reproject_mask
from .segmenter import PipelineConfig, PromptPoint, Session
from .tensor_io import load_bundle

IDLE_TIMEOUT_DEFAULT = 3600.0


class CreateSession(BaseModel):
    bundle_id: str
    gt_id: Optional[str] = None


class Click(BaseModel):
    x: int
    y: int
    label: int


class _SessionSlot:
    def __init__(self, session, bundle_id, gt_id):
        self.session = session
        self.bundle_id = bundle_id
        self.gt_id = gt_id
        self.lock = threading.Lock()
        self.last_access = time.monotonic()


def create_app(data_dir, config: Optional[PipelineConfig] = None,
               idle_timeout: float = IDLE_TIMEOUT_DEFAULT,
               static_dir=None) -> FastAPI:
    app = FastAPI(title="pointseg")
    config = config or PipelineConfig()
    bundles = {}
    data_dir = Path(data_dir)
    if data_dir.is_dir():
        for d in sorted(data_dir.iterdir()):
            if d.is_dir() and (d / "meta.json").exists():
                bundles[d.name] = load_bundle(d)
    sessions = {}
    sessions_lock = threading.Lock()

    def _expire():
        now = time.monotonic()
        stale = [sid for sid, slot in sessions.items()
                 if now - slot.last_access > idle_timeout]
        for sid in stale:
            del sessions[sid]

    def _payload(slot, result=None):
        seg = slot.session.prev_seg
        out = {
            "mask_rle": rle.encode(seg.mask),
            "area": seg.area,
            "height": seg.mask.shape[0],
            "width": seg.mask.shape[1],
            "fallback_used": bool(result.fallback_used) if result else False,
            "pass2_triggered": bool(result.pass2_triggered) if result else False,
        }
        if slot.gt_id is not None:
            gt = slot.session.bundle.gt_masks[slot.gt_id]
            out["iou"] = iou(reproject_mask(seg.mask, gt.shape), gt)
        return out

    @app.get("/v1/bundles")
    def list_bundles():
        return {"bundles": [
            {"bundle_id": bid,
             "height": b.dims[0], "width": b.dims[1],
             "gt_ids": sorted(b.gt_masks)}
            for bid, b in sorted(bundles.items())
        ]}

    @app.post("/v1/sessions", status_code=201)
    def create_session(req: CreateSession):
        if req.bundle_id not in bundles:
            return JSONResponse({"error": "unknown bundle"}, status_code=404)
        bundle = bundles[req.bundle_id]
        if req.gt_id is not None and req.gt_id not in bundle.gt_masks:
            return JSONResponse({"error": "unknown gt mask"}, status_code=404)
        sid = uuid.uuid4().hex
        with sessions_lock:
            _expire()
            sessions[sid] = _SessionSlot(Session(bundle, config),
                                         req.bundle_id, req.gt_id)
        H, W = bundle.dims
        return {"session_id": sid,
                "image_meta": {"height": H, "width": W,
                               "bundle_id": req.bundle_id,
                               "gt_id": req.gt_id}}

    def _slot(sid):
        with sessions_lock:
            _expire()
            slot = sessions.get(sid)
            if slot:
                slot.last_access = time.monotonic()
            return slot

    @app.post("/v1/sessions/{sid}/clicks")
    def add_click(sid: str, click: Click):
        slot = _slot(sid)
        if slot is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        if not slot.lock.acquire(blocking=False):
            return JSONResponse({"error": "session busy"}, status_code=409)
        try:
            result = slot.session.add_prompt(
                PromptPoint(x=click.x, y=click.y, label=click.label))
        except OutOfBounds as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        except PointsegError as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        finally:
            slot.lock.release()
        return _payload(slot, result)

    @app.post("/v1/sessions/{sid}/undo")
    def undo(sid: str):
        slot = _slot(sid)
        if slot is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        if not slot.lock.acquire(blocking=False):
            return JSONResponse({"error": "session busy"}, status_code=409)
        try:
            slot.session.undo()
        except PointsegError as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        finally:
            slot.lock.release()
        return _payload(slot)

    @app.get("/v1/sessions/{sid}/mask.png")
    def mask_png(sid: str):
        slot = _slot(sid)
        if slot is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        mask = slot.session.prev_seg.mask
        buf = io.BytesIO()
        Image.fromarray(mask.astype(np.uint8) * 255, mode="L").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.get("/v1/sessions/{sid}/image.png")
    def image_png(sid: str):
        slot = _slot(sid)
        if slot is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        img = slot.session.bundle.image
        buf = io.BytesIO()
        img8 = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(img8, mode="RGB").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.delete("/v1/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        with sessions_lock:
            if sid not in sessions:
                return JSONResponse({"error": "unknown session"}, status_code=404)
            del sessions[sid]
        return Response(status_code=204)

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
