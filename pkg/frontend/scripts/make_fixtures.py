"""Regenerate the UI fidelity fixtures from the real HTTP service.

Each fixture records, for a short click/undo script, the raw API responses,
the pixels of the server's PNG mask endpoint after every step, and the mask
produced by replaying the surviving clicks in a fresh session. The TypeScript
tests then check that client-side RLE decoding reproduces the PNG exactly and
that undo leaves the same state as a replay.

Run from the repo root: python3 frontend/scripts/make_fixtures.py
"""

import io
import json
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient
from PIL import Image

from pointseg.server import create_app
from pointseg.synth import make_suite

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

SCRIPTS = [
    ("scene_000", "obj0", [(16, 24, 1), (30, 22, 0)], 1),
    ("scene_000", "obj1", [(34, 26, 1)], 0),
    ("scene_001", "obj0", [(15, 25, 1), (40, 40, 0), (18, 20, 1)], 2),
    ("scene_002", "obj1", [(33, 24, 1), (20, 24, 0)], 1),
    ("scene_003", None, [(16, 24, 1), (36, 30, 1)], 1),
]


def _png_pixels(client, sid):
    r = client.get(f"/v1/sessions/{sid}/mask.png")
    r.raise_for_status()
    arr = np.asarray(Image.open(io.BytesIO(r.content)).convert("L")) > 0
    return ["".join("1" if v else "0" for v in row) for row in arr]


def main():
    import tempfile
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as data_dir:
        make_suite(data_dir, n_scenes=4, kind="overlap-same-class", seed=2000,
                   dims=(48, 48), coarse_dims=(12, 12))
        client = TestClient(create_app(data_dir))
        for i, (bundle_id, gt_id, clicks, n_undo) in enumerate(SCRIPTS):
            body = {"bundle_id": bundle_id}
            if gt_id:
                body["gt_id"] = gt_id
            sid = client.post("/v1/sessions", json=body).json()["session_id"]
            steps = []
            for x, y, label in clicks:
                res = client.post(f"/v1/sessions/{sid}/clicks",
                                  json={"x": x, "y": y, "label": label}).json()
                steps.append({"action": "click", "x": x, "y": y, "label": label,
                              "response": res,
                              "png_pixels": _png_pixels(client, sid)})
            for _ in range(n_undo):
                res = client.post(f"/v1/sessions/{sid}/undo").json()
                steps.append({"action": "undo", "response": res,
                              "png_pixels": _png_pixels(client, sid)})

            # library-level replay of the clicks that survive the undos
            sid2 = client.post("/v1/sessions", json=body).json()["session_id"]
            replay_rle = []
            for x, y, label in clicks[:len(clicks) - n_undo]:
                replay_rle = client.post(
                    f"/v1/sessions/{sid2}/clicks",
                    json={"x": x, "y": y, "label": label}).json()["mask_rle"]
            assert replay_rle == steps[-1]["response"]["mask_rle"] if steps else True

            fixture = {
                "name": f"{bundle_id}_{gt_id or 'plain'}",
                "height": 48, "width": 48,
                "clicks": [list(c) for c in clicks],
                "undos": n_undo,
                "steps": steps,
                "replay_rle": replay_rle,
            }
            out = FIXTURE_DIR / f"fixture_{i}.json"
            out.write_text(json.dumps(fixture, indent=1, sort_keys=True))
            print("wrote", out)


if __name__ == "__main__":
    main()
