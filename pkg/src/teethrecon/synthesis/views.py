"""Target and conditioning viewpoint protocols."""

from __future__ import annotations

from ..geometry import ViewPose

TARGET_ELEVATIONS_LOWER = (45.0, 67.5)
TARGET_AZIMUTHS = (30.0, 60.0, 120.0, 150.0)
DEFAULT_RADIUS = 2.0


def make_viewpoints(jaw: str, radius: float = DEFAULT_RADIUS,
                    upper_mode: str = "negate") -> list[ViewPose]:
    """The eight target viewpoints for one jaw.

    Lower jaw: elevations {45, 67.5} x azimuths {30, 60, 120, 150}. For the
    upper jaw the default is negated elevations (viewing from below);
    ``upper_mode='swap'`` instead swaps which azimuths get which elevation,
    keeping all views above the equator.
    """
    if jaw not in ("upper", "lower"):
        raise ValueError(f"jaw must be 'upper' or 'lower', got {jaw!r}")
    poses = []
    for ei, elev in enumerate(TARGET_ELEVATIONS_LOWER):
        for az in TARGET_AZIMUTHS:
            e = elev
            if jaw == "upper":
                if upper_mode == "negate":
                    e = -elev
                elif upper_mode == "swap":
                    e = TARGET_ELEVATIONS_LOWER[1 - ei]
                else:
                    raise ValueError(f"unknown upper_mode {upper_mode!r}")
            poses.append(ViewPose(e, az, radius))
    return poses


def make_condition_viewpoints(jaw: str, radius: float = DEFAULT_RADIUS) -> list[ViewPose]:
    """Four fixed photo-like conditioning poses.

    Frontal, left buccal, right buccal and occlusal; the occlusal view looks
    down on the lower jaw (+85 deg) and up at the upper jaw (-85 deg).
    """
    if jaw not in ("upper", "lower"):
        raise ValueError(f"jaw must be 'upper' or 'lower', got {jaw!r}")
    occlusal_elev = 85.0 if jaw == "lower" else -85.0
    return [
        ViewPose(10.0, 90.0, radius),    # frontal
        ViewPose(10.0, 160.0, radius),   # left buccal
        ViewPose(10.0, 20.0, radius),    # right buccal
        ViewPose(occlusal_elev, 90.0, radius),
    ]
