"""Reading and writing Gaussian splat checkpoints in binary PLY form.

The on-disk layout follows the de-facto splat checkpoint format: raw
(pre-activation) parameters as float32 vertex properties.  Loading applies
the activations (logistic opacity, exp scale, quaternion normalization);
export applies their inverses so load/export round-trips.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .scene import GaussianScene, SceneDataError, SceneFormatError

REQUIRED_PROPERTIES = (
    "x", "y", "z",
    "nx", "ny", "nz",
    "f_dc_0", "f_dc_1", "f_dc_2",
    "opacity",
    "scale_0", "scale_1", "scale_2",
    "rot_0", "rot_1", "rot_2", "rot_3",
)

_FLOAT_NAMES = {"float", "float32"}


def _parse_header(fh) -> tuple[int, list[str]]:
    line = fh.readline().strip()
    if line != b"ply":
        raise SceneFormatError("not a PLY file (missing 'ply' magic)")
    vertex_count = None
    properties: list[str] = []
    in_vertex = False
    while True:
        raw = fh.readline()
        if not raw:
            raise SceneFormatError("unterminated PLY header")
        line = raw.decode("ascii", errors="replace").strip()
        if line == "end_header":
            break
        if line.startswith("format"):
            if "binary_little_endian" not in line:
                raise SceneFormatError(
                    f"unsupported PLY format: {line!r} (need binary_little_endian)")
        elif line.startswith("element"):
            parts = line.split()
            in_vertex = parts[1] == "vertex"
            if in_vertex:
                vertex_count = int(parts[2])
        elif line.startswith("property") and in_vertex:
            parts = line.split()
            if parts[1] not in _FLOAT_NAMES:
                raise SceneFormatError(
                    f"unsupported property type {parts[1]!r} for {parts[2]!r}")
            properties.append(parts[2])
    if vertex_count is None:
        raise SceneFormatError("PLY header has no vertex element")
    return vertex_count, properties


def load_scene_ply(path: str | Path) -> GaussianScene:
    """Load a splat checkpoint and apply parameter activations.

    Raises SceneFormatError when a required vertex property is absent and
    SceneDataError when any vertex carries non-finite values.  Higher-order
    SH coefficients (f_rest_*) are read and discarded.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        count, props = _parse_header(fh)
        for name in REQUIRED_PROPERTIES:
            if name not in props:
                raise SceneFormatError(
                    f"{path}: missing required vertex property '{name}'")
        if count < 1:
            raise SceneDataError(f"{path}: scene has no vertices")
        dtype = np.dtype([(p, "<f4") for p in props])
        data = np.fromfile(fh, dtype=dtype, count=count)
    if data.shape[0] != count:
        raise SceneFormatError(
            f"{path}: truncated payload ({data.shape[0]}/{count} vertices)")

    def col(*names: str) -> np.ndarray:
        return np.stack([data[n].astype(np.float64) for n in names], axis=1)

    checked = np.stack([data[p] for p in REQUIRED_PROPERTIES], axis=1)
    finite_rows = np.isfinite(checked).all(axis=1)
    if not finite_rows.all():
        bad = int(np.flatnonzero(~finite_rows)[0])
        raise SceneDataError(f"{path}: non-finite values at vertex {bad}")

    means = col("x", "y", "z")
    scales = np.exp(col("scale_0", "scale_1", "scale_2"))
    opacities = 1.0 / (1.0 + np.exp(-data["opacity"].astype(np.float64)))
    rotations = col("rot_0", "rot_1", "rot_2", "rot_3")
    colors = col("f_dc_0", "f_dc_1", "f_dc_2")
    return GaussianScene(
        means=means,
        rotations=rotations,
        scales=scales,
        opacities=opacities,
        colors_dc=colors,
        source_path=str(path),
    )


def export_ply(scene: GaussianScene, path: str | Path) -> None:
    """Write a scene back to checkpoint form (inverse activations applied)."""
    path = Path(path)
    n = len(scene)
    props = list(REQUIRED_PROPERTIES)
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {n}"]
    header += [f"property float {p}" for p in props]
    header.append("end_header")

    out = np.zeros(n, dtype=np.dtype([(p, "<f4") for p in props]))
    out["x"], out["y"], out["z"] = scene.means.T.astype(np.float32)
    if scene.colors_dc is not None:
        out["f_dc_0"], out["f_dc_1"], out["f_dc_2"] = (
            scene.colors_dc.T.astype(np.float32))
    # Inverse activations; opacity is clamped away from {0, 1} so the
    # logit stays finite.
    o = np.clip(scene.opacities, 1e-7, 1.0 - 1e-7)
    out["opacity"] = np.log(o / (1.0 - o)).astype(np.float32)
    logs = np.log(scene.scales)
    out["scale_0"], out["scale_1"], out["scale_2"] = logs.T.astype(np.float32)
    out["rot_0"], out["rot_1"], out["rot_2"], out["rot_3"] = (
        scene.rotations.T.astype(np.float32))

    try:
        with open(path, "wb") as fh:
            fh.write(("\n".join(header) + "\n").encode("ascii"))
            out.tofile(fh)
    except OSError as exc:
        raise OSError(f"cannot write scene to {path}: {exc}") from exc
