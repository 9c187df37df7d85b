"""Synthetic training cases: paired conditioning photos and target renders.

Case directory layout::

    case_<id>/
      cond/<k>_color.png  <k>_normal.png  <k>_mask.png     (k = 0..3)
      target/<k>_color.png  <k>_normal.png  <k>_mask.png   (k = 0..7)
      meta.json

Color and normal PNGs are 8-bit RGB, normals encoded as (n+1)/2; masks are
8-bit grayscale {0, 255}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..geometry import CameraIntrinsics, ViewPose
from ..meshes import TriMesh
from .arch import synth_teeth_mesh
from .render import BVH, RenderedView, render_view
from .views import make_condition_viewpoints, make_viewpoints

SCHEMA_VERSION = 1
N_COND = 4
N_TARGET = 8


@dataclass
class SyntheticCase:
    case_id: str
    jaw: str
    cond: list[RenderedView]
    targets: list[RenderedView]
    mm_per_unit: float
    seed: int | None = None

    def __post_init__(self):
        if len(self.cond) != N_COND:
            raise ValueError(f"expected {N_COND} conditioning views, got {len(self.cond)}")
        if len(self.targets) != N_TARGET:
            raise ValueError(f"expected {N_TARGET} target views, got {len(self.targets)}")


def generate_case(seed: int, jaw: str, resolution: int = 64,
                  mesh: TriMesh | None = None, radius: float = 2.0,
                  mesh_resolution: int = 80, focal_scale: float = 1.2,
                  upper_mode: str = "negate") -> SyntheticCase:
    """Render one mesh into 4 conditioning + 8 target views."""
    if mesh is None:
        mesh = synth_teeth_mesh(seed, jaw, resolution=mesh_resolution)
    intr = CameraIntrinsics.default(resolution, focal_scale=focal_scale)
    bvh = BVH(mesh)
    cond = [render_view(mesh, p, intr, bvh=bvh)
            for p in make_condition_viewpoints(jaw, radius=radius)]
    targets = [render_view(mesh, p, intr, bvh=bvh)
               for p in make_viewpoints(jaw, radius=radius, upper_mode=upper_mode)]
    return SyntheticCase(
        case_id=f"{seed:06d}_{jaw}", jaw=jaw, cond=cond, targets=targets,
        mm_per_unit=mesh.mm_per_unit, seed=seed,
    )


def _save_png(path: Path, array: np.ndarray) -> None:
    arr = np.round(np.clip(array, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(arr).save(path)


def _load_png(path: Path) -> np.ndarray:
    return np.asarray(Image.open(path), dtype=np.float64) / 255.0


def save_view(view: RenderedView, directory: Path, index: int,
              with_mask: bool = True) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    _save_png(directory / f"{index}_color.png", view.color)
    _save_png(directory / f"{index}_normal.png", view.encoded_normal())
    if with_mask:
        _save_png(directory / f"{index}_mask.png", view.mask)


def load_view(directory: Path, index: int, pose: ViewPose,
              intr: CameraIntrinsics) -> RenderedView:
    color = _load_png(directory / f"{index}_color.png")
    normal = _load_png(directory / f"{index}_normal.png") * 2.0 - 1.0
    mask_path = directory / f"{index}_mask.png"
    if mask_path.exists():
        mask = (_load_png(mask_path) > 0.5).astype(np.float64)
    else:
        mask = None
    return RenderedView(color=color, normal=normal, mask=mask, pose=pose, intrinsics=intr)


def save_case(case: SyntheticCase, root: Path | str) -> Path:
    root = Path(root)
    case_dir = root / f"case_{case.case_id}"
    for k, view in enumerate(case.cond):
        save_view(view, case_dir / "cond", k)
    for k, view in enumerate(case.targets):
        save_view(view, case_dir / "target", k)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "case_id": case.case_id,
        "jaw": case.jaw,
        "seed": case.seed,
        "mm_per_unit": case.mm_per_unit,
        "intrinsics": case.targets[0].intrinsics.to_dict(),
        "cond_poses": [v.pose.to_dict() for v in case.cond],
        "target_poses": [v.pose.to_dict() for v in case.targets],
    }
    (case_dir / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return case_dir


def load_case(case_dir: Path | str) -> SyntheticCase:
    case_dir = Path(case_dir)
    meta = json.loads((case_dir / "meta.json").read_text())
    intr = CameraIntrinsics.from_dict(meta["intrinsics"])
    cond = [load_view(case_dir / "cond", k, ViewPose.from_dict(p), intr)
            for k, p in enumerate(meta["cond_poses"])]
    targets = [load_view(case_dir / "target", k, ViewPose.from_dict(p), intr)
               for k, p in enumerate(meta["target_poses"])]
    return SyntheticCase(
        case_id=meta["case_id"], jaw=meta["jaw"], cond=cond, targets=targets,
        mm_per_unit=meta["mm_per_unit"], seed=meta.get("seed"),
    )


def generate_dataset(root: Path | str, n_cases: int, master_seed: int,
                     resolution: int = 64, jaws: tuple[str, ...] = ("lower", "upper"),
                     **case_kwargs) -> dict:
    """Write ``n_cases`` cases under ``root`` and return the manifest dict."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(n_cases):
        jaw = jaws[i % len(jaws)]
        seed = master_seed * 1000 + i
        case = generate_case(seed, jaw, resolution=resolution, **case_kwargs)
        case_dir = save_case(case, root)
        entries.append({"case_id": case.case_id, "path": case_dir.name, "jaw": jaw, "seed": seed})
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "master_seed": master_seed,
        "resolution": resolution,
        "n_cases": n_cases,
        "cases": entries,
    }
    (root / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


def list_cases(root: Path | str) -> list[Path]:
    root = Path(root)
    manifest_path = root / "manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        return [root / e["path"] for e in manifest["cases"]]
    return sorted(p for p in root.glob("case_*") if (p / "meta.json").exists())
