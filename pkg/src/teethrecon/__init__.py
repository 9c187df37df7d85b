"""Sparse-view dental 3D reconstruction.

Two stages: a pose-conditioned multiview cross-domain diffusion model that
turns four segmented photos into 8 posed color images and normal maps, and a
neural SDF surface reconstructor with a geometry-gated normal loss that turns
those views into a watertight mesh. Ships with a synthetic data generator, a
metric suite (HD/CD/IoU/PSNR/SSIM) and a CLI.
"""

__version__ = "0.1.0"
