"""Scene manifest JSON: cameras, normalization, and asset file references.

The manifest ties a generated or reconstructed scene together: which camera
saw which image/pointmap file, how the scene was normalized, and where the
exported splat assets live. File references are relative to the manifest's
directory and must exist when the manifest is read.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..geometry.camera import CameraIntrinsics, CameraPose
from ..geometry.normalize import SceneNormalization

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class SceneManifest:
    """Catalog of one scene's cameras, normalization, and files."""

    cameras: tuple[tuple[CameraIntrinsics, CameraPose], ...]
    normalization: SceneNormalization | None = None
    images: tuple[str, ...] = ()
    pointmaps: tuple[str, ...] = ()
    assets: tuple[str, ...] = ()
    path_parameters: dict | None = None
    version: int = MANIFEST_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(self, "cameras", tuple(self.cameras))
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "pointmaps", tuple(self.pointmaps))
        object.__setattr__(self, "assets", tuple(self.assets))
        if self.version != MANIFEST_VERSION:
            raise ValueError(f"unrecognized manifest version {self.version}")

    def file_references(self) -> tuple[str, ...]:
        return self.images + self.pointmaps + self.assets


def _pose_to_json(pose: CameraPose) -> dict:
    return {
        "rotation": pose.rotation.tolist(),
        "translation": pose.translation.tolist(),
    }


def _pose_from_json(obj: dict) -> CameraPose:
    return CameraPose(
        np.array(obj["rotation"], dtype=np.float64),
        np.array(obj["translation"], dtype=np.float64),
    )


def _intrinsics_to_json(intr: CameraIntrinsics) -> dict:
    return {
        "fx": intr.fx,
        "fy": intr.fy,
        "cx": intr.cx,
        "cy": intr.cy,
        "width": intr.width,
        "height": intr.height,
    }


def _intrinsics_from_json(obj: dict) -> CameraIntrinsics:
    return CameraIntrinsics(
        fx=float(obj["fx"]),
        fy=float(obj["fy"]),
        cx=float(obj["cx"]),
        cy=float(obj["cy"]),
        width=int(obj["width"]),
        height=int(obj["height"]),
    )


def manifest_to_json(manifest: SceneManifest) -> str:
    """Renders the manifest as canonical JSON (sorted keys, 2-space indent)."""

    payload = {
        "version": manifest.version,
        "cameras": [
            {"intrinsics": _intrinsics_to_json(intr), "pose": _pose_to_json(pose)}
            for intr, pose in manifest.cameras
        ],
        "normalization": (
            None
            if manifest.normalization is None
            else {
                "scale": manifest.normalization.scale,
                "reference": _pose_to_json(manifest.normalization.reference),
            }
        ),
        "files": {
            "images": list(manifest.images),
            "pointmaps": list(manifest.pointmaps),
            "assets": list(manifest.assets),
        },
        "path_parameters": manifest.path_parameters,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def manifest_from_json(text: str) -> SceneManifest:
    """Parses canonical manifest JSON (no file existence checks)."""

    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"manifest is not valid JSON: {exc}") from None
    if not isinstance(payload, dict) or "version" not in payload:
        raise ValueError("manifest JSON lacks a version field")
    if payload["version"] != MANIFEST_VERSION:
        raise ValueError(f"unrecognized manifest version {payload['version']}")
    norm = payload.get("normalization")
    files = payload.get("files", {})
    return SceneManifest(
        cameras=tuple(
            (_intrinsics_from_json(cam["intrinsics"]), _pose_from_json(cam["pose"]))
            for cam in payload.get("cameras", [])
        ),
        normalization=(
            None
            if norm is None
            else SceneNormalization(
                scale=float(norm["scale"]),
                reference=_pose_from_json(norm["reference"]),
            )
        ),
        images=tuple(files.get("images", [])),
        pointmaps=tuple(files.get("pointmaps", [])),
        assets=tuple(files.get("assets", [])),
        path_parameters=payload.get("path_parameters"),
        version=payload["version"],
    )


def write_manifest(manifest: SceneManifest, path: str | Path) -> None:
    Path(path).write_text(manifest_to_json(manifest), encoding="utf-8")


def read_manifest(path: str | Path, check_files: bool = True) -> SceneManifest:
    """Loads a manifest; by default verifies referenced files exist.

    File references are resolved relative to the manifest's directory.
    """

    path = Path(path)
    manifest = manifest_from_json(path.read_text(encoding="utf-8"))
    if check_files:
        missing = [
            ref
            for ref in manifest.file_references()
            if not (path.parent / ref).exists()
        ]
        if missing:
            raise FileNotFoundError(
                f"manifest references missing files: {', '.join(missing)}"
            )
    return manifest
