"""Triangle meshes: container, normals, normalization, PLY/OBJ IO, fixtures."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class TriMesh:
    """Indexed triangle mesh. ``vertices`` (V,3) float64, ``faces`` (F,3) int."""

    vertices: np.ndarray
    faces: np.ndarray
    vertex_normals: np.ndarray | None = None
    face_colors: np.ndarray | None = None  # (F, 3) in [0,1], used by the renderer
    mm_per_unit: float = 1.0  # persisted normalization scale

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise ValueError("face indices out of range")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def triangles(self) -> np.ndarray:
        """(F, 3, 3) triangle corner positions."""
        return self.vertices[self.faces]

    def face_normals(self, normalized: bool = True) -> np.ndarray:
        tri = self.triangles()
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        if normalized:
            ln = np.linalg.norm(n, axis=-1, keepdims=True)
            n = n / np.maximum(ln, 1e-20)
        return n

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_normals(normalized=False), axis=-1)

    def compute_vertex_normals(self) -> np.ndarray:
        """Area-weighted vertex normals (cached on the instance)."""
        fn = self.face_normals(normalized=False)  # area-weighted
        vn = np.zeros_like(self.vertices)
        for k in range(3):
            np.add.at(vn, self.faces[:, k], fn)
        ln = np.linalg.norm(vn, axis=-1, keepdims=True)
        vn = vn / np.maximum(ln, 1e-20)
        self.vertex_normals = vn
        return vn

    def signed_volume(self) -> float:
        """Divergence-theorem volume; positive for outward-oriented faces."""
        tri = self.triangles()
        return float(np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2])).sum() / 6.0)

    def is_watertight(self) -> bool:
        """Every directed edge must be matched by its reverse exactly once."""
        if not len(self.faces):
            return False
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        fwd = {}
        for a, b in e:
            key = (int(a), int(b))
            fwd[key] = fwd.get(key, 0) + 1
        for (a, b), c in fwd.items():
            if c != 1 or fwd.get((b, a), 0) != 1:
                return False
        return True

    def copy(self) -> "TriMesh":
        return TriMesh(
            self.vertices.copy(), self.faces.copy(),
            None if self.vertex_normals is None else self.vertex_normals.copy(),
            None if self.face_colors is None else self.face_colors.copy(),
            self.mm_per_unit,
        )


def drop_degenerate_faces(mesh: TriMesh, min_area: float = 1e-14) -> TriMesh:
    tri = mesh.triangles()
    area = 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=-1)
    keep = area > min_area
    out = mesh.copy()
    out.faces = mesh.faces[keep]
    if out.face_colors is not None:
        out.face_colors = out.face_colors[keep]
    out.vertex_normals = None
    return out


def normalize_mesh(mesh: TriMesh, source_mm_per_unit: float = 1.0) -> TriMesh:
    """Translate to the centroid and scale the bounding sphere to radius 1.

    The mm-per-scene-unit factor is persisted on the result so metrics can be
    reported in millimeters.
    """
    out = mesh.copy()
    centroid = out.vertices.mean(axis=0)
    out.vertices = out.vertices - centroid
    r = np.linalg.norm(out.vertices, axis=-1).max()
    if r <= 0:
        raise ValueError("degenerate mesh: zero bounding radius")
    out.vertices = out.vertices / r
    out.mm_per_unit = source_mm_per_unit * r
    out.vertex_normals = None
    return out


def make_icosphere(subdivisions: int = 3, radius: float = 1.0) -> TriMesh:
    """Unit icosphere fixture (subdivided icosahedron)."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=np.float64)
    verts /= np.linalg.norm(verts, axis=-1, keepdims=True)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)
    for _ in range(subdivisions):
        edge_mid: dict[tuple[int, int], int] = {}
        new_faces = []
        vlist = list(verts)

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in edge_mid:
                m = vlist[a] + vlist[b]
                m /= np.linalg.norm(m)
                edge_mid[key] = len(vlist)
                vlist.append(m)
            return edge_mid[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        verts = np.array(vlist)
        faces = np.array(new_faces, dtype=np.int64)
    return TriMesh(verts * radius, faces)


def make_box(half_extents=(0.5, 0.5, 0.5), center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box with outward orientation."""
    hx, hy, hz = half_extents
    cx, cy, cz = center
    v = np.array([[sx * hx + cx, sy * hy + cy, sz * hz + cz]
                  for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=np.float64)
    # index bits: x*4 + y*2 + z
    quads = [
        (0, 1, 3, 2),  # -x
        (4, 6, 7, 5),  # +x
        (0, 4, 5, 1),  # -y
        (2, 3, 7, 6),  # +y
        (0, 2, 6, 4),  # -z
        (1, 5, 7, 3),  # +z
    ]
    faces = []
    for a, b, c, d in quads:
        faces += [[a, b, c], [a, c, d]]
    mesh = TriMesh(v, np.array(faces, dtype=np.int64))
    if mesh.signed_volume() < 0:
        mesh.faces = mesh.faces[:, ::-1]
    return mesh


def save_ply(mesh: TriMesh, path: str | Path, binary: bool = True) -> None:
    path = Path(path)
    n_v, n_f = mesh.n_vertices, mesh.n_faces
    fmt = "binary_little_endian" if binary else "ascii"
    header = (
        "ply\n"
        f"format {fmt} 1.0\n"
        f"comment mm_per_unit {mesh.mm_per_unit!r}\n"
        f"element vertex {n_v}\n"
        "property float x\nproperty float y\nproperty float z\n"
        f"element face {n_f}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        if binary:
            f.write(mesh.vertices.astype("<f4").tobytes())
            body = b"".join(
                struct.pack("<B3i", 3, *face) for face in mesh.faces.astype(np.int32)
            )
            f.write(body)
        else:
            for x, y, z in mesh.vertices:
                f.write(f"{x:.9g} {y:.9g} {z:.9g}\n".encode("ascii"))
            for a, b, c in mesh.faces:
                f.write(f"3 {a} {b} {c}\n".encode("ascii"))


def load_ply(path: str | Path) -> TriMesh:
    path = Path(path)
    with open(path, "rb") as f:
        data = f.read()
    head_end = data.find(b"end_header\n")
    if head_end < 0:
        raise ValueError(f"{path}: not a PLY file")
    header = data[:head_end].decode("ascii").splitlines()
    body = data[head_end + len(b"end_header\n"):]
    fmt = None
    n_v = n_f = 0
    mm = 1.0
    for line in header:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element" and parts[1] == "vertex":
            n_v = int(parts[2])
        elif parts[0] == "element" and parts[1] == "face":
            n_f = int(parts[2])
        elif parts[0] == "comment" and len(parts) >= 3 and parts[1] == "mm_per_unit":
            mm = float(parts[2])
    if fmt == "ascii":
        rows = body.decode("ascii").split("\n")
        verts = np.array([[float(x) for x in rows[i].split()] for i in range(n_v)])
        faces = np.array([[int(x) for x in rows[n_v + i].split()[1:4]] for i in range(n_f)])
    elif fmt == "binary_little_endian":
        verts = np.frombuffer(body, dtype="<f4", count=3 * n_v).reshape(n_v, 3).astype(np.float64)
        off = 12 * n_v
        faces = np.empty((n_f, 3), dtype=np.int64)
        for i in range(n_f):
            cnt = body[off]
            if cnt != 3:
                raise ValueError("only triangle PLY faces are supported")
            faces[i] = struct.unpack_from("<3i", body, off + 1)
            off += 13
    else:
        raise ValueError(f"unsupported PLY format: {fmt}")
    return TriMesh(verts, faces, mm_per_unit=mm)


def save_obj(mesh: TriMesh, path: str | Path) -> None:
    with open(path, "w") as f:
        f.write(f"# mm_per_unit {mesh.mm_per_unit!r}\n")
        for x, y, z in mesh.vertices:
            f.write(f"v {x:.9g} {y:.9g} {z:.9g}\n")
        for a, b, c in mesh.faces:
            f.write(f"f {a + 1} {b + 1} {c + 1}\n")


def load_mesh(path: str | Path) -> TriMesh:
    path = Path(path)
    if path.suffix.lower() == ".ply":
        return load_ply(path)
    if path.suffix.lower() == ".obj":
        verts, faces = [], []
        mm = 1.0
        for line in open(path):
            if line.startswith("# mm_per_unit"):
                mm = float(line.split()[-1])
            elif line.startswith("v "):
                verts.append([float(x) for x in line.split()[1:4]])
            elif line.startswith("f "):
                faces.append([int(tok.split("/")[0]) - 1 for tok in line.split()[1:4]])
        return TriMesh(np.array(verts), np.array(faces, dtype=np.int64), mm_per_unit=mm)
    raise ValueError(f"unsupported mesh format: {path.suffix}")
