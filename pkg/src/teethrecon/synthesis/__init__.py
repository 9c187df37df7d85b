from .arch import make_two_lobe_mesh, synth_teeth_mesh
from .cases import SyntheticCase, generate_case, generate_dataset, list_cases, load_case, save_case
from .render import BVH, RenderedView, pad_and_resize, render_view
from .views import make_condition_viewpoints, make_viewpoints

__all__ = [
    "BVH",
    "RenderedView",
    "SyntheticCase",
    "generate_case",
    "generate_dataset",
    "list_cases",
    "load_case",
    "make_condition_viewpoints",
    "make_two_lobe_mesh",
    "make_viewpoints",
    "pad_and_resize",
    "render_view",
    "save_case",
    "synth_teeth_mesh",
]
