"""Deterministic software ray caster: BVH, Lambertian headlight, normal maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from ..geometry import CameraIntrinsics, ViewPose, generate_rays, pixel_grid, pose_to_extrinsics
from ..meshes import TriMesh

_LEAF_SIZE = 8
_EPS = 1e-9
BACKGROUND_COLOR = 1.0  # white
FRONT_FACING_EPS = 1e-3


@dataclass
class RenderedView:
    """One rendered view: color, view-frame normals, mask and the pose."""

    color: np.ndarray   # (H, W, 3) in [0, 1]
    normal: np.ndarray  # (H, W, 3) unit view-frame normals on mask, 0 elsewhere
    mask: np.ndarray    # (H, W) float {0, 1}
    pose: ViewPose
    intrinsics: CameraIntrinsics
    domain: str | None = None  # {color | normal} for single-domain payloads

    def encoded_normal(self) -> np.ndarray:
        """Normals mapped to [0,1] as (n+1)/2; background encodes to 0.5."""
        return (self.normal + 1.0) / 2.0


class BVH:
    """Median-split bounding volume hierarchy with wavefront traversal."""

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        tri = mesh.triangles()
        self.v0 = tri[:, 0]
        self.e1 = tri[:, 1] - tri[:, 0]
        self.e2 = tri[:, 2] - tri[:, 0]
        lo = tri.min(axis=1)
        hi = tri.max(axis=1)
        centroids = tri.mean(axis=1)

        n_tris = len(tri)
        order = np.arange(n_tris)
        node_min, node_max, node_left, node_start, node_count = [], [], [], [], []

        # ranges of `order` to process: (start, end, node index)
        stack = [(0, n_tris)]
        node_slots = [None]
        while stack:
            start, end = stack.pop()
            idx = order[start:end]
            slot = node_slots.pop()
            bmin = lo[idx].min(axis=0)
            bmax = hi[idx].max(axis=0)
            me = len(node_min)
            node_min.append(bmin)
            node_max.append(bmax)
            if slot is not None:
                node_left[slot] = me
            if end - start <= _LEAF_SIZE:
                node_left.append(-1)
                node_start.append(start)
                node_count.append(end - start)
                continue
            axis = int(np.argmax(bmax - bmin))
            key = centroids[idx, axis]
            half = (end - start) // 2
            part = np.argpartition(key, half)
            order[start:end] = idx[part]
            node_left.append(0)  # patched when the left child is created
            node_start.append(-1)
            node_count.append(0)
            mid = start + half
            # right child processed first so the left lands at node_left slot
            stack.append((mid, end))
            node_slots.append(None)
            stack.append((start, mid))
            node_slots.append(me)

        # right child of an inner node is always left + (subtree size of left);
        # recover it by a second pass using start/count layout
        self.node_min = np.array(node_min)
        self.node_max = np.array(node_max)
        self.node_left = np.array(node_left, dtype=np.int64)
        self.node_start = np.array(node_start, dtype=np.int64)
        self.node_count = np.array(node_count, dtype=np.int64)
        self.node_right = np.full_like(self.node_left, -1)
        self._fix_right_children()
        self.order = order
        self.max_leaf = int(self.node_count.max()) if len(self.node_count) else 0

    def _fix_right_children(self):
        # left children were appended immediately after their parent chain;
        # compute right = the node following the left subtree in DFS order.
        n = len(self.node_left)
        subtree = np.ones(n, dtype=np.int64)
        for i in range(n - 1, -1, -1):
            if self.node_left[i] >= 0:
                left = self.node_left[i]
                subtree[i] = 1 + subtree[left]
                right = left + subtree[left]
                self.node_right[i] = right
                subtree[i] += subtree[right]

    def _aabb_hit(self, o, inv_d, nodes, t_best):
        bmin = self.node_min[nodes]
        bmax = self.node_max[nodes]
        t1 = (bmin - o) * inv_d
        t2 = (bmax - o) * inv_d
        tmin = np.minimum(t1, t2).max(axis=-1)
        tmax = np.maximum(t1, t2).min(axis=-1)
        return (tmax >= np.maximum(tmin, 0.0) - _EPS) & (tmin <= t_best)

    def intersect(self, origins: np.ndarray, dirs: np.ndarray):
        """First hit per ray.

        Returns (t, face_index, bary_u, bary_v); misses have face_index = -1
        and t = inf.
        """
        origins = np.ascontiguousarray(origins, dtype=np.float64)
        dirs = np.ascontiguousarray(dirs, dtype=np.float64)
        n_rays = len(origins)
        with np.errstate(divide="ignore"):
            inv_d = np.where(np.abs(dirs) > _EPS, 1.0 / dirs, 1.0 / np.where(dirs >= 0, _EPS, -_EPS))

        best_t = np.full(n_rays, np.inf)
        best_face = np.full(n_rays, -1, dtype=np.int64)
        best_u = np.zeros(n_rays)
        best_v = np.zeros(n_rays)

        rays = np.arange(n_rays)
        nodes = np.zeros(n_rays, dtype=np.int64)
        alive = self._aabb_hit(origins, inv_d, nodes, best_t[rays])
        rays, nodes = rays[alive], nodes[alive]

        leaf_pad = np.arange(self.max_leaf)
        while len(rays):
            is_leaf = self.node_left[nodes] < 0
            if np.any(is_leaf):
                lr = rays[is_leaf]
                ln = nodes[is_leaf]
                start = self.node_start[ln]
                count = self.node_count[ln]
                slot = start[:, None] + leaf_pad[None, :]
                valid = leaf_pad[None, :] < count[:, None]
                tri_idx = self.order[np.minimum(slot, len(self.order) - 1)]
                t, u, v, hit = _moller_trumbore(
                    origins[lr], dirs[lr], self.v0[tri_idx], self.e1[tri_idx], self.e2[tri_idx])
                hit &= valid
                t = np.where(hit, t, np.inf)
                k = np.argmin(t, axis=1)
                rows = np.arange(len(lr))
                tt = t[rows, k]
                better = tt < best_t[lr]
                upd = lr[better]
                best_t[upd] = tt[better]
                best_face[upd] = tri_idx[rows[better], k[better]]
                best_u[upd] = u[rows[better], k[better]]
                best_v[upd] = v[rows[better], k[better]]

            inner = ~is_leaf
            rays = np.concatenate([rays[inner], rays[inner]])
            nodes = np.concatenate([self.node_left[nodes[inner]], self.node_right[nodes[inner]]])
            if not len(rays):
                break
            ok = self._aabb_hit(origins[rays], inv_d[rays], nodes, best_t[rays])
            rays, nodes = rays[ok], nodes[ok]

        return best_t, best_face, best_u, best_v


def _moller_trumbore(o, d, v0, e1, e2):
    """Vectorized triangle intersection; o,d are (P,3); v0,e1,e2 are (P,K,3)."""
    o = o[:, None, :]
    d = d[:, None, :]
    pvec = np.cross(d, e2)
    det = np.einsum("pkj,pkj->pk", e1, pvec)
    ok = np.abs(det) > 1e-12
    inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = o - v0
    u = np.einsum("pkj,pkj->pk", tvec, pvec) * inv_det
    qvec = np.cross(tvec, e1)
    v = np.einsum("pkj,pkj->pk", d, qvec) * inv_det
    t = np.einsum("pkj,pkj->pk", e2, qvec) * inv_det
    hit = ok & (u >= -1e-10) & (v >= -1e-10) & (u + v <= 1.0 + 1e-10) & (t > 1e-7)
    return t, u, v, hit


def render_view(mesh: TriMesh, pose: ViewPose, intr: CameraIntrinsics,
                bvh: BVH | None = None, ambient: float = 0.15) -> RenderedView:
    """Ray-cast Lambertian headlight render with camera-frame normal map.

    The light is co-located with the camera, so shading is
    ``albedo * (ambient + (1-ambient) * cos)``; interpolated normals are
    nudged to stay strictly front-facing (cos(view dir, normal) < 0).
    """
    if bvh is None:
        bvh = BVH(mesh)
    h, w = intr.height, intr.width
    origins, dirs = generate_rays(pose, intr, pixel_grid(w, h))
    t, face, bu, bv = bvh.intersect(origins, dirs)
    hit = face >= 0

    color = np.full((h * w, 3), BACKGROUND_COLOR, dtype=np.float64)
    normal = np.zeros((h * w, 3), dtype=np.float64)
    mask = hit.astype(np.float64)

    if np.any(hit):
        if mesh.vertex_normals is None:
            mesh.compute_vertex_normals()
        fidx = face[hit]
        tris = mesh.faces[fidx]
        vn = mesh.vertex_normals[tris]  # (M, 3, 3)
        u, v = bu[hit][:, None], bv[hit][:, None]
        n = vn[:, 0] * (1 - u - v) + vn[:, 1] * u + vn[:, 2] * v
        n /= np.maximum(np.linalg.norm(n, axis=-1, keepdims=True), 1e-20)
        d = dirs[hit]
        cos = np.einsum("ij,ij->i", d, n)
        # enforce strict front-facing: shift the normal against the ray
        bad = cos > -FRONT_FACING_EPS
        if np.any(bad):
            n[bad] = n[bad] - (cos[bad] + FRONT_FACING_EPS)[:, None] * d[bad]
            n[bad] /= np.linalg.norm(n[bad], axis=-1, keepdims=True)
            cos = np.einsum("ij,ij->i", d, n)

        if mesh.face_colors is not None:
            albedo = mesh.face_colors[fidx]
        else:
            albedo = np.full((len(fidx), 3), 0.8)
        shade = ambient + (1.0 - ambient) * np.clip(-cos, 0.0, 1.0)
        color[hit] = np.clip(albedo * shade[:, None], 0.0, 1.0)

        rot, _ = pose_to_extrinsics(pose)
        n_cam = n @ rot.T
        normal[hit] = np.stack([n_cam[:, 0], -n_cam[:, 1], -n_cam[:, 2]], axis=-1)

    return RenderedView(
        color=color.reshape(h, w, 3),
        normal=normal.reshape(h, w, 3),
        mask=mask.reshape(h, w),
        pose=pose,
        intrinsics=intr,
    )


def pad_and_resize(image: np.ndarray, target: int = 256, background: float = 1.0,
                   is_mask: bool = False) -> np.ndarray:
    """Pad to a square with the background value, then area-resample to target.

    Masks are resampled with nearest-neighbor so they stay binary.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.size == 0:
        raise ValueError("empty image")
    h, w = img.shape[:2]
    side = max(h, w)
    pad_y = (side - h) // 2
    pad_x = (side - w) // 2
    if img.ndim == 2:
        canvas = np.full((side, side), background, dtype=np.float64)
        canvas[pad_y:pad_y + h, pad_x:pad_x + w] = img
        channels = [canvas]
    else:
        canvas = np.full((side, side, img.shape[2]), background, dtype=np.float64)
        canvas[pad_y:pad_y + h, pad_x:pad_x + w] = img
        channels = [canvas[..., c] for c in range(img.shape[2])]

    method = Image.Resampling.NEAREST if is_mask else Image.Resampling.BOX
    out = [np.asarray(Image.fromarray(ch.astype(np.float32), mode="F").resize((target, target), method))
           for ch in channels]
    if img.ndim == 2:
        return out[0].astype(np.float64)
    return np.stack(out, axis=-1).astype(np.float64)
