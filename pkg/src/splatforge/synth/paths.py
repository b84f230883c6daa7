"""Camera path sampling for novel target views.

Three path families are supported, all deterministic in their inputs:
circular orbits at the median radius/height of the input cameras, small
forward-facing offsets around the first camera, and a centripetal spline
through the input camera centers with orientation slerp.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

from .scenes import SCENE_CENTER
from ..geometry.camera import CameraPose, look_at_pose

PATH_KINDS = ("circular", "forward-facing", "spline")

DEFAULT_NUM_VIEWS = 16
DEFAULT_UP = np.array([0.0, 1.0, 0.0])

# Forward-facing loop shape: lateral circle plus a gentle depth wobble,
# all scaled by offset_scale in the base camera's frame.
_FF_LATERAL = 1.0
_FF_VERTICAL = 0.5
_FF_DEPTH = 0.25


@dataclass(frozen=True)
class CameraPath:
    """An ordered sequence of target camera poses."""

    poses: tuple[CameraPose, ...]
    kind: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "poses", tuple(self.poses))
        if len(self.poses) < 1:
            raise ValueError("a camera path needs at least one pose")
        if self.kind not in PATH_KINDS:
            raise ValueError(f"unknown path kind {self.kind!r}; expected {PATH_KINDS}")
        for pose in self.poses:
            if not isinstance(pose, CameraPose):
                raise TypeError(f"poses must be CameraPose, got {type(pose)!r}")


def _unit(vec: np.ndarray, name: str) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64).reshape(3)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError(f"{name} must be nonzero")
    return vec / norm


def _orthogonal_to(axis: np.ndarray) -> np.ndarray:
    """Any unit vector perpendicular to axis (deterministic choice)."""

    trial = np.array([1.0, 0.0, 0.0])
    if abs(axis[0]) > 0.9:
        trial = np.array([0.0, 0.0, 1.0])
    out = np.cross(trial, axis)
    return out / np.linalg.norm(out)


def _circular_path(
    input_cameras: Sequence[CameraPose],
    num_views: int,
    up: np.ndarray,
    scene_center: np.ndarray,
) -> list[CameraPose]:
    centers = np.stack([pose.translation for pose in input_cameras])
    rel = centers - scene_center
    heights = rel @ up
    radial = rel - heights[:, None] * up
    radius = float(np.median(np.linalg.norm(radial, axis=1)))
    height = float(np.median(heights))

    # Anchor the starting angle at the first camera so rotating the inputs
    # about the axis rotates the whole path with them.
    first = radial[0]
    first_norm = np.linalg.norm(first)
    e1 = first / first_norm if first_norm > 1e-12 else _orthogonal_to(up)
    e2 = np.cross(up, e1)

    poses = []
    for i in range(num_views):
        angle = 2.0 * np.pi * i / num_views
        eye = (
            scene_center
            + radius * (np.cos(angle) * e1 + np.sin(angle) * e2)
            + height * up
        )
        poses.append(look_at_pose(eye, scene_center, up))
    return poses


def _forward_facing_path(
    input_cameras: Sequence[CameraPose],
    num_views: int,
    offset_scale: float,
) -> list[CameraPose]:
    base = input_cameras[0]
    poses = []
    for i in range(num_views):
        phase = 2.0 * np.pi * i / num_views
        offset_cam = offset_scale * np.array(
            [
                _FF_LATERAL * np.cos(phase),
                _FF_VERTICAL * np.sin(phase),
                -_FF_DEPTH * np.sin(phase),
            ]
        )
        poses.append(
            CameraPose(base.rotation, base.translation + base.rotation @ offset_cam)
        )
    return poses


def _centripetal_knots(points: np.ndarray) -> np.ndarray:
    deltas = np.linalg.norm(np.diff(points, axis=0), axis=1)
    # Coincident control points would collapse knots; keep them distinct.
    increments = np.maximum(np.sqrt(deltas), 1e-9)
    return np.concatenate([[0.0], np.cumsum(increments)])


def _catmull_rom(
    points: np.ndarray, knots: np.ndarray, params: np.ndarray
) -> np.ndarray:
    """Centripetal Catmull-Rom evaluation (Barry-Goldman pyramid).

    End segments use reflected phantom control points so the curve
    interpolates the first and last input points.
    """

    padded = np.concatenate(
        [
            [2.0 * points[0] - points[1]],
            points,
            [2.0 * points[-1] - points[-2]],
        ]
    )
    pad_lo = knots[0] - max(np.sqrt(np.linalg.norm(padded[0] - points[0])), 1e-9)
    pad_hi = knots[-1] + max(np.sqrt(np.linalg.norm(padded[-1] - points[-1])), 1e-9)
    t = np.concatenate([[pad_lo], knots, [pad_hi]])

    seg = np.clip(np.searchsorted(knots, params, side="right") - 1, 0, len(knots) - 2)
    out = np.empty((params.size, points.shape[1]))
    for j, (i, x) in enumerate(zip(seg, params)):
        # Control points p[i-1..i+2] in padded indexing i..i+3.
        p = padded[i : i + 4]
        k = t[i : i + 4]
        a1 = ((k[1] - x) * p[0] + (x - k[0]) * p[1]) / (k[1] - k[0])
        a2 = ((k[2] - x) * p[1] + (x - k[1]) * p[2]) / (k[2] - k[1])
        a3 = ((k[3] - x) * p[2] + (x - k[2]) * p[3]) / (k[3] - k[2])
        b1 = ((k[2] - x) * a1 + (x - k[0]) * a2) / (k[2] - k[0])
        b2 = ((k[3] - x) * a2 + (x - k[1]) * a3) / (k[3] - k[1])
        out[j] = ((k[2] - x) * b1 + (x - k[1]) * b2) / (k[2] - k[1])
    return out


def _spline_path(
    input_cameras: Sequence[CameraPose], num_views: int
) -> list[CameraPose]:
    if len(input_cameras) == 1:
        return [input_cameras[0]] * num_views
    centers = np.stack([pose.translation for pose in input_cameras])
    knots = _centripetal_knots(centers)
    params = np.linspace(knots[0], knots[-1], num_views) if num_views > 1 else knots[:1]
    positions = _catmull_rom(centers, knots, params)
    rotations = Slerp(
        knots, Rotation.from_matrix(np.stack([p.rotation for p in input_cameras]))
    )(params)
    return [
        CameraPose(rot, pos)
        for rot, pos in zip(rotations.as_matrix(), positions)
    ]


def sample_camera_path(
    kind: str,
    input_cameras: Sequence[CameraPose],
    num_views: int = DEFAULT_NUM_VIEWS,
    *,
    up: np.ndarray = DEFAULT_UP,
    scene_center: np.ndarray = SCENE_CENTER,
    offset_scale: float = 0.05,
) -> CameraPath:
    """Samples target camera poses from the input camera arrangement.

    circular: an orbit around the up axis through the scene center, at the
    median radius and median height of the inputs, every pose looking at the
    scene center; the starting angle follows the first input camera.
    forward-facing: the first camera translated along a small loop in its
    own frame (orientation unchanged); offset_scale 0 repeats it verbatim.
    spline: centripetal interpolating spline through the input camera
    centers with orientation slerp.

    Args:
        kind: one of PATH_KINDS.
        input_cameras: camera-to-world poses; must be non-empty.
        num_views: number of output poses (>= 1).
        up: world up direction for circular orbits (nonzero).
        scene_center: look-at target for circular orbits.
        offset_scale: loop size for forward-facing paths.

    Returns:
        CameraPath with num_views poses.
    """

    if kind not in PATH_KINDS:
        raise ValueError(f"unknown path kind {kind!r}; expected {PATH_KINDS}")
    if num_views < 1:
        raise ValueError(f"num_views must be >= 1, got {num_views}")
    if len(input_cameras) == 0:
        raise ValueError("input_cameras must be non-empty")
    up = _unit(up, "up")
    scene_center = np.asarray(scene_center, dtype=np.float64).reshape(3)

    if kind == "circular":
        poses = _circular_path(input_cameras, num_views, up, scene_center)
    elif kind == "forward-facing":
        poses = _forward_facing_path(input_cameras, num_views, offset_scale)
    else:
        poses = _spline_path(input_cameras, num_views)
    return CameraPath(poses=tuple(poses), kind=kind)
