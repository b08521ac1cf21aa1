"""Thin local HTTP facade for interactive gamma tuning over a loaded scene.

The contribution matrix is precomputed by the CLI; /assign only re-runs
the closed-form assignment, so slider interaction costs milliseconds.
Assignment tokens are content hashes of (gamma, mode): repeated slider
positions are cache hits, and /mask, /remove address results by token.
"""

from __future__ import annotations

import hashlib
import io
import threading
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from PIL import Image

from .contributions import ContributionMatrix
from .editing import remove_objects
from .maskrender import DEFAULT_TAU, render_binary_mask, render_scene_mask
from .ply import export_ply
from .rasterizer import render_view
from .scene import CameraView, GaussianScene
from .solver import Assignment, assign_binary, assign_scene

# DC spherical-harmonics basis constant for the color preview.
_SH_C0 = 0.28209479177387814


def assignment_token(mode: str, gamma: float) -> str:
    key = f"{mode}:{float(gamma)!r}".encode("ascii")
    return hashlib.sha256(key).hexdigest()[:16]


class ServiceState:
    """Immutable scene/matrix plus a guarded token -> assignment cache."""

    def __init__(
        self,
        scene: GaussianScene,
        views: Sequence[CameraView],
        matrix: Optional[ContributionMatrix],
        output_dir: str | Path = ".",
    ) -> None:
        self.scene = scene
        self.views = {v.view_id: v for v in views}
        self.matrix = matrix
        self.output_dir = Path(output_dir)
        self.assignments: dict[str, Assignment] = {}
        self._lock = threading.Lock()

    def get_or_compute(self, mode: str, gamma: float) -> tuple[str, Assignment]:
        token = assignment_token(mode, gamma)
        with self._lock:
            cached = self.assignments.get(token)
        if cached is not None:
            return token, cached
        assignment = (assign_binary(self.matrix, gamma) if mode == "binary"
                      else assign_scene(self.matrix, gamma))
        with self._lock:
            self.assignments.setdefault(token, assignment)
        return token, assignment


def _png_response(image: Image.Image) -> Response:
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return Response(content=buf.getvalue(), media_type="image/png")


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(
    scene: GaussianScene,
    views: Sequence[CameraView],
    matrix: Optional[ContributionMatrix] = None,
    output_dir: str | Path = ".",
) -> FastAPI:
    state = ServiceState(scene, views, matrix, output_dir)
    app = FastAPI(title="splatlift service")
    app.state.service = state

    @app.get("/scene")
    def scene_info():
        return {
            "num_gaussians": len(state.scene),
            "num_objects": None if state.matrix is None
            else state.matrix.num_objects,
            "views": [
                {"view_id": v.view_id, "width": v.width, "height": v.height}
                for v in state.views.values()
            ],
        }

    @app.post("/assign")
    async def assign(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "body must be JSON")
        if not isinstance(payload, dict):
            return _error(400, "body must be a JSON object")
        mode = payload.get("mode", "binary")
        gamma = payload.get("gamma")
        if mode not in ("binary", "scene"):
            return _error(400, f"unknown mode {mode!r}")
        if not isinstance(gamma, (int, float)) or isinstance(gamma, bool):
            return _error(400, "gamma must be a number")
        if not -1.0 <= float(gamma) <= 1.0:
            return _error(400, f"gamma {gamma} outside [-1, 1]")
        if state.matrix is None:
            return _error(409, "no contribution matrix loaded")
        if mode == "binary" and state.matrix.num_objects != 2:
            return _error(400, "binary mode requires a matrix with E=2")
        token, assignment = state.get_or_compute(mode, float(gamma))
        return {
            "token": token,
            "mode": mode,
            "gamma": float(gamma),
            "member_counts": assignment.member_counts(),
        }

    @app.get("/mask")
    def mask(view: int, token: str, tau: float = DEFAULT_TAU):
        cam = state.views.get(view)
        if cam is None:
            return _error(404, f"unknown view {view}")
        assignment = state.assignments.get(token)
        if assignment is None:
            return _error(404, f"unknown assignment token {token}")
        if not 0.0 < tau < 1.0:
            return _error(400, f"tau {tau} outside (0, 1)")
        if assignment.mode == "binary":
            rendered = render_binary_mask(state.scene, assignment, cam, tau)
        else:
            rendered = render_scene_mask(state.scene, assignment, cam, tau)
        return _png_response(Image.fromarray(rendered.labels.astype(np.uint16)))

    @app.get("/preview")
    def preview(view: int):
        cam = state.views.get(view)
        if cam is None:
            return _error(404, f"unknown view {view}")
        if state.scene.colors_dc is not None:
            channel = np.clip(0.5 + _SH_C0 * state.scene.colors_dc, 0.0, 1.0)
        else:
            channel = np.full((len(state.scene), 3), 0.7)
        out = render_view(state.scene, cam, channel)
        rgb = np.clip(out.value, 0.0, 1.0)
        return _png_response(
            Image.fromarray((rgb * 255.0 + 0.5).astype(np.uint8), mode="RGB"))

    @app.post("/remove")
    async def remove(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "body must be JSON")
        if not isinstance(payload, dict):
            return _error(400, "body must be a JSON object")
        token = payload.get("token")
        object_ids = payload.get("object_ids")
        if not isinstance(token, str):
            return _error(400, "token must be a string")
        if (not isinstance(object_ids, list)
                or not all(isinstance(i, int) for i in object_ids)):
            return _error(400, "object_ids must be a list of integers")
        assignment = state.assignments.get(token)
        if assignment is None:
            return _error(404, f"unknown assignment token {token}")
        try:
            edited, kept = remove_objects(state.scene, assignment, object_ids)
        except ValueError as exc:
            return _error(400, str(exc))
        state.output_dir.mkdir(parents=True, exist_ok=True)
        ids = "-".join(str(i) for i in sorted(set(object_ids))) or "none"
        path = state.output_dir / f"removed_{token}_{ids}.ply"
        export_ply(edited, path)
        return {"path": str(path), "kept": len(kept),
                "removed": len(state.scene) - len(kept)}

    return app
