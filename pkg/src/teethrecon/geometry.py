"""Camera poses, rays, projections and voxel/frustum geometry.

Conventions used throughout the package:

* World frame: right-handed, +z up. A spherical pose (elevation, azimuth,
  radius) places the camera at ``r * (cos e cos a, cos e sin a, sin e)``,
  looking at the world origin. Camera up is the projection of world +z onto
  the image plane; at the poles (elevation = +-90 deg) the fallback up
  vector is +x.
* Camera frame: x right, y down, z forward (depth is the +z coordinate).
* Normal maps are stored per view in a "view" frame with x right, y up and
  z pointing toward the viewer, so a surface element facing the camera reads
  (0, 0, 1). ``world_normal_to_view`` / ``view_normal_to_world`` convert.
* Pixel coordinates are continuous; the center of pixel (i, j) of a WxH
  image is (i + 0.5, j + 0.5) and the principal point defaults to the image
  center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_POLE_EPS = 1e-8


@dataclass(frozen=True)
class ViewPose:
    """Spherical look-at-origin camera pose (angles in degrees)."""

    elevation: float
    azimuth: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def center(self) -> np.ndarray:
        e = math.radians(self.elevation)
        a = math.radians(self.azimuth)
        return self.radius * np.array(
            [math.cos(e) * math.cos(a), math.cos(e) * math.sin(a), math.sin(e)]
        )

    def to_dict(self) -> dict:
        return {
            "elevation": float(self.elevation),
            "azimuth": float(self.azimuth),
            "radius": float(self.radius),
        }

    @staticmethod
    def from_dict(d: dict) -> "ViewPose":
        return ViewPose(d["elevation"], d["azimuth"], d["radius"])


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixel units (square pixels, no distortion)."""

    width: int
    height: int
    focal: float
    cx: float
    cy: float

    def __post_init__(self):
        if not self.focal > 0:
            raise ValueError("focal must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point outside the image")

    @staticmethod
    def default(width: int, height: int | None = None, focal_scale: float = 1.2) -> "CameraIntrinsics":
        """Default pinhole: focal = focal_scale * width, principal point at center."""
        height = width if height is None else height
        return CameraIntrinsics(width, height, focal_scale * width, width / 2.0, height / 2.0)

    def scaled(self, width: int, height: int) -> "CameraIntrinsics":
        """Intrinsics for the same camera rendered at a different resolution."""
        sx = width / self.width
        sy = height / self.height
        return CameraIntrinsics(width, height, self.focal * sx, self.cx * sx, self.cy * sy)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "focal": float(self.focal),
            "cx": float(self.cx),
            "cy": float(self.cy),
        }

    @staticmethod
    def from_dict(d: dict) -> "CameraIntrinsics":
        return CameraIntrinsics(d["width"], d["height"], d["focal"], d["cx"], d["cy"])


@dataclass
class Ray:
    origin: np.ndarray
    direction: np.ndarray  # unit norm


@dataclass(frozen=True)
class VoxelGridSpec:
    """Cubic voxel grid over [-bound, bound]^3; nodes lie on the boundary."""

    resolution: int = 16
    bound: float = 1.05

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")
        if not self.bound > 0:
            raise ValueError("bound must be positive")

    def centers(self) -> np.ndarray:
        """(R, R, R, 3) array of node positions; axis order (x, y, z)."""
        axis = np.linspace(-self.bound, self.bound, self.resolution)
        gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
        return np.stack([gx, gy, gz], axis=-1)


def pose_to_extrinsics(pose: ViewPose) -> tuple[np.ndarray, np.ndarray]:
    """World-to-camera rigid transform (R, t) with x_cam = R @ x_world + t.

    The camera center maps to (0,0,0) and the world origin lands on the
    positive z (view) axis at depth ``pose.radius``.
    """
    center = pose.center
    forward = -center / np.linalg.norm(center)
    up_world = np.array([0.0, 0.0, 1.0])
    up_proj = up_world - np.dot(up_world, forward) * forward
    if np.linalg.norm(up_proj) < _POLE_EPS:
        # looking straight up/down: fall back to +x as the up direction
        up_world = np.array([1.0, 0.0, 0.0])
        up_proj = up_world - np.dot(up_world, forward) * forward
    up = up_proj / np.linalg.norm(up_proj)
    down = -up
    right = np.cross(down, forward)
    rot = np.stack([right, down, forward])  # rows
    trans = -rot @ center
    return rot, trans


def generate_rays(pose: ViewPose, intr: CameraIntrinsics, pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rays through continuous pixel coordinates.

    Args:
        pixels: (N, 2) array of (u, v) positions inside [0, W] x [0, H].

    Returns:
        (origins, directions): (N, 3) each, directions unit-norm. All origins
        equal the camera center.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2 or pixels.shape[1] != 2:
        raise ValueError("pixels must be an (N, 2) array")
    u, v = pixels[:, 0], pixels[:, 1]
    if np.any(u < 0) or np.any(u > intr.width) or np.any(v < 0) or np.any(v > intr.height):
        raise ValueError("pixel outside image bounds")
    rot, _ = pose_to_extrinsics(pose)
    d_cam = np.stack([(u - intr.cx) / intr.focal, (v - intr.cy) / intr.focal, np.ones_like(u)], axis=-1)
    d_world = d_cam @ rot  # R^T applied row-wise
    d_world /= np.linalg.norm(d_world, axis=-1, keepdims=True)
    origins = np.broadcast_to(pose.center, d_world.shape).copy()
    return origins, d_world


def pixel_grid(width: int, height: int) -> np.ndarray:
    """(H*W, 2) pixel-center coordinates in row-major (v-fast-last) order."""
    us = (np.arange(width) + 0.5).astype(np.float64)
    vs = (np.arange(height) + 0.5).astype(np.float64)
    uu, vv = np.meshgrid(us, vs)  # (H, W)
    return np.stack([uu.ravel(), vv.ravel()], axis=-1)


def relative_view_embedding(cond_pose: ViewPose, target_pose: ViewPose) -> np.ndarray:
    """(d_elev_deg, sin d_azim, cos d_azim, d_radius); identity gives (0,0,1,0)."""
    de = target_pose.elevation - cond_pose.elevation
    da = math.radians(target_pose.azimuth - cond_pose.azimuth)
    dr = target_pose.radius - cond_pose.radius
    return np.array([de, math.sin(da), math.cos(da), dr], dtype=np.float64)


def project_point(points: np.ndarray, pose: ViewPose, intr: CameraIntrinsics,
                  eps: float = 1e-9) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Pinhole projection of world points.

    Returns:
        (u, v, depth, valid). ``valid`` is False for points at or behind the
        camera plane (depth <= eps); their u/v are zero-filled.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    rot, trans = pose_to_extrinsics(pose)
    cam = pts @ rot.T + trans
    depth = cam[:, 2]
    valid = depth > eps
    safe = np.where(valid, depth, 1.0)
    u = intr.cx + intr.focal * cam[:, 0] / safe
    v = intr.cy + intr.focal * cam[:, 1] / safe
    u = np.where(valid, u, 0.0)
    v = np.where(valid, v, 0.0)
    return u, v, depth, valid


def world_normal_to_view(pose: ViewPose, normals: np.ndarray) -> np.ndarray:
    """World-frame normals -> per-view normal-map frame (x right, y up, z to viewer)."""
    rot, _ = pose_to_extrinsics(pose)
    n_cam = np.atleast_2d(normals) @ rot.T
    return np.stack([n_cam[:, 0], -n_cam[:, 1], -n_cam[:, 2]], axis=-1)


def view_normal_to_world(pose: ViewPose, normals: np.ndarray) -> np.ndarray:
    """Inverse of :func:`world_normal_to_view`."""
    n = np.atleast_2d(normals)
    n_cam = np.stack([n[:, 0], -n[:, 1], -n[:, 2]], axis=-1)
    rot, _ = pose_to_extrinsics(pose)
    return n_cam @ rot


def ray_box_span(origins: np.ndarray, dirs: np.ndarray, bound: float,
                 eps: float = 1e-12) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Entry/exit distances of rays against the cube [-bound, bound]^3.

    Returns (t_entry, t_exit, hit); non-hitting rays (including tangencies)
    have hit=False. Entries are clamped to t >= 0.
    """
    origins = np.atleast_2d(origins)
    dirs = np.atleast_2d(dirs)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
    t_lo = (-bound - origins) * inv
    t_hi = (bound - origins) * inv
    near = np.where(np.isfinite(t_lo), np.minimum(t_lo, t_hi), -np.inf)
    far = np.where(np.isfinite(t_hi), np.maximum(t_lo, t_hi), np.inf)
    # axes with zero direction: inside slab -> (-inf, inf), outside -> miss
    zero = np.abs(dirs) < eps
    inside = np.abs(origins) <= bound
    near = np.where(zero, np.where(inside, -np.inf, np.inf), near)
    far = np.where(zero, np.where(inside, np.inf, -np.inf), far)
    t0 = np.maximum(near.max(axis=-1), 0.0)
    t1 = far.min(axis=-1)
    hit = t1 - t0 > eps
    return t0, t1, hit


def frustum_samples(pose: ViewPose, intr: CameraIntrinsics, grid: VoxelGridSpec,
                    hw: tuple[int, int], depth_samples: int
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel depth samples of the view frustum inside the voxel cube.

    For each of H'xW' pixel centers (of the full image plane resampled to
    H'xW'), returns ``depth_samples`` points uniformly spaced between the
    ray's entry and exit of the grid bounds, inclusive.

    Returns:
        points: (H', W', D, 3) world-space sample positions (zero where the
            ray misses the cube).
        valid: (H', W') bool mask; False marks rays that miss the cube.
    """
    if depth_samples < 2:
        raise ValueError("depth_samples must be >= 2")
    hp, wp = hw
    sub = intr.scaled(wp, hp)
    pixels = pixel_grid(wp, hp)
    origins, dirs = generate_rays(pose, sub, pixels)
    t0, t1, hit = ray_box_span(origins, dirs, grid.bound)
    frac = np.linspace(0.0, 1.0, depth_samples)
    t = t0[:, None] + (t1 - t0)[:, None] * frac[None, :]
    pts = origins[:, None, :] + t[..., None] * dirs[:, None, :]
    pts[~hit] = 0.0
    return pts.reshape(hp, wp, depth_samples, 3), hit.reshape(hp, wp)
