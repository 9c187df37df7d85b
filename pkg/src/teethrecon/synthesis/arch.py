"""Procedural tooth-arch meshes: blended superellipsoid lobes on a parabolic arc.

Generated in millimeter units and normalized to a unit bounding sphere; the
mm scale survives on ``TriMesh.mm_per_unit``.
"""

from __future__ import annotations

import numpy as np
from skimage import measure

from ..meshes import TriMesh, drop_degenerate_faces, normalize_mesh

_JAW_SALT = {"lower": 0, "upper": 1}


class _Lobe:
    """One convex superellipsoid in its own rotated local frame."""

    def __init__(self, center, semi_axes, yaw, exponent):
        self.center = np.asarray(center, dtype=np.float64)
        self.semi = np.asarray(semi_axes, dtype=np.float64)
        c, s = np.cos(yaw), np.sin(yaw)
        self.rot = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
        self.exponent = float(exponent)

    def field(self, points: np.ndarray) -> np.ndarray:
        """Pseudo-distance: negative inside, ~0 on the surface."""
        local = (points - self.center) @ self.rot.T / self.semi
        e = self.exponent
        r = np.power(np.abs(local) + 1e-12, e).sum(axis=-1)
        return np.power(r, 1.0 / e) - 1.0


def _arch_lobes(rng: np.random.Generator) -> list[_Lobe]:
    n = int(rng.integers(10, 15))  # 10..14 teeth per arch
    half_w = rng.uniform(22.0, 26.0)   # mm
    depth = rng.uniform(24.0, 30.0)
    lobes = []
    us = np.linspace(-1.0, 1.0, n)
    for u in us:
        x = half_w * u
        y = depth * (1.0 - u * u) - 0.55 * depth
        # tangent of the parabola gives each tooth its yaw
        yaw = np.arctan2(-2.0 * depth * u / half_w, 1.0) + np.pi / 2.0
        molar = abs(u)  # 0 at the incisors, 1 at the arch ends
        width = 2.6 + 2.6 * molar + rng.uniform(-0.3, 0.3)
        thick = 3.0 + 2.0 * molar + rng.uniform(-0.3, 0.3)
        height = 5.5 - 1.2 * molar + rng.uniform(-0.5, 0.5)
        cz = rng.uniform(-0.4, 0.4)
        exponent = rng.uniform(2.6, 4.2)
        lobes.append(_Lobe((x, y, cz), (width, thick, height), yaw, exponent))
    return lobes


def _blend_field(points: np.ndarray, lobes: list[_Lobe], sharpness: float) -> np.ndarray:
    """Log-sum-exp smooth union of the lobe fields (negative inside)."""
    vals = np.stack([lb.field(points) for lb in lobes], axis=0)
    m = vals.min(axis=0)
    return m - np.log(np.exp(-sharpness * (vals - m)).sum(axis=0)) / sharpness


def _sample_volume(lobes: list[_Lobe], sharpness: float, resolution: int
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Field values on a grid that provably contains the blended isosurface.

    The log-sum-exp union inflates the surface outward by up to
    log(n_lobes)/sharpness in normalized lobe units, so the box margin is
    grown until the field is positive on every boundary face.
    """
    centers = np.stack([lb.center for lb in lobes])
    spans = np.stack([lb.semi for lb in lobes])
    margin = 2.0 + spans.max() * np.log(len(lobes) + 1.0) / sharpness
    for _ in range(6):
        lo = (centers - spans).min(axis=0) - margin
        hi = (centers + spans).max(axis=0) + margin
        probe = 24
        axes_p = [np.linspace(lo[k], hi[k], probe) for k in range(3)]
        gx, gy, gz = np.meshgrid(*axes_p, indexing="ij")
        shell = np.zeros((probe,) * 3, dtype=bool)
        shell[[0, -1]] = shell[:, [0, -1]] = shell[:, :, [0, -1]] = True
        boundary = np.stack([gx[shell], gy[shell], gz[shell]], axis=-1)
        if _blend_field(boundary, lobes, sharpness).min() > 0:
            break
        margin *= 1.7
    axes = [np.linspace(lo[k], hi[k], resolution) for k in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([gx, gy, gz], axis=-1).reshape(-1, 3)
    vol = np.empty(len(pts), dtype=np.float64)
    chunk = 1 << 17
    for i in range(0, len(pts), chunk):
        vol[i:i + chunk] = _blend_field(pts[i:i + chunk], lobes, sharpness)
    return vol.reshape(resolution, resolution, resolution), lo, hi


def synth_teeth_mesh(seed: int, jaw: str = "lower", resolution: int = 80,
                     blend_sharpness: float = 4.0) -> TriMesh:
    """Deterministic watertight tooth arch, normalized to a unit bounding sphere.

    Faces carry a per-lobe albedo in ``face_colors``. The upper jaw is the
    mirrored arch (crowns facing -z) drawn from its own random stream.
    """
    if jaw not in _JAW_SALT:
        raise ValueError(f"jaw must be 'upper' or 'lower', got {jaw!r}")
    rng = np.random.default_rng([int(seed), _JAW_SALT[jaw]])
    lobes = _arch_lobes(rng)
    albedos = 0.78 + 0.14 * rng.random((len(lobes), 3))

    centers = np.stack([lb.center for lb in lobes])
    vol, lo, hi = _sample_volume(lobes, blend_sharpness, resolution)

    spacing = tuple((hi[k] - lo[k]) / (resolution - 1) for k in range(3))
    verts, faces, _, _ = measure.marching_cubes(vol, level=0.0, spacing=spacing)
    mesh = TriMesh(verts + lo, faces.astype(np.int64))
    mesh = drop_degenerate_faces(mesh)
    if mesh.signed_volume() < 0:
        mesh.faces = mesh.faces[:, ::-1].copy()

    if jaw == "upper":
        mesh.vertices = mesh.vertices * np.array([1.0, 1.0, -1.0])
        mesh.faces = mesh.faces[:, ::-1].copy()
        centers = centers * np.array([1.0, 1.0, -1.0])

    # normalize in place so the lobe centers share the exact transform
    centroid = mesh.vertices.mean(axis=0)
    mesh.vertices = mesh.vertices - centroid
    r = float(np.linalg.norm(mesh.vertices, axis=-1).max())
    mesh.vertices = mesh.vertices / r
    mesh.mm_per_unit = r

    tri_centroids = mesh.triangles().mean(axis=1)
    norm_centers = (centers - centroid) / r
    d2 = ((tri_centroids[:, None, :] - norm_centers[None, :, :]) ** 2).sum(axis=-1)
    mesh.face_colors = albedos[np.argmin(d2, axis=1)]
    return mesh


def make_two_lobe_mesh(resolution: int = 96, separation: float = 0.62,
                       radii: tuple[float, float] = (0.55, 0.45),
                       blend_sharpness: float = 5.0) -> TriMesh:
    """Two smoothly blended spheres, normalized; a nonconvex test fixture."""
    lobes = [
        _Lobe((-separation, 0.0, 0.0), (radii[0],) * 3, 0.0, 2.0),
        _Lobe((separation, 0.05, 0.12), (radii[1],) * 3, 0.0, 2.0),
    ]
    vol, lo, hi = _sample_volume(lobes, blend_sharpness, resolution)
    spacing = tuple((hi[k] - lo[k]) / (resolution - 1) for k in range(3))
    verts, faces, _, _ = measure.marching_cubes(vol, level=0.0, spacing=spacing)
    mesh = TriMesh(verts + lo, faces.astype(np.int64))
    mesh = drop_degenerate_faces(mesh)
    if mesh.signed_volume() < 0:
        mesh.faces = mesh.faces[:, ::-1].copy()
    mesh = normalize_mesh(mesh)
    mesh.face_colors = np.tile(np.array([[0.82, 0.78, 0.72]]), (mesh.n_faces, 1))
    return mesh
