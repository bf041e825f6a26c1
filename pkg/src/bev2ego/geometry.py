"""Pinhole camera mathematics for BEV and EGO views.

Coordinate convention: right-handed scene frame with x right, y up,
z forward.  The EGO camera sits at (0, h_c, -standoff) with identity
rotation and looks along +z; the BEV camera sits at (0, h_c, 0) rotated
90 degrees about the x-axis so it looks straight down (world -y maps to
camera +z, giving ground points positive depth h_c).  Projected (u, v)
are image-plane units with v = f*y_cam/z_cam; rasterizers flip v when
converting to pixel rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CoincidentError, DepthError, DomainError

# Depth guard: reject points this close to (or behind) the pinhole plane.
EPS_DEPTH = 1e-6

# Clamp range of the object polar viewing angle, degrees.
POLAR_MIN_DEG = 5.0
POLAR_MAX_DEG = 15.0
_POLAR_NUMERATOR = 30.0


class ViewMode(Enum):
    BEV = "bev"
    EGO = "ego"


# Looking straight down: world -y becomes camera +z (forward).
_R_BEV = np.array([[1.0, 0.0, 0.0],
                   [0.0, 0.0, 1.0],
                   [0.0, -1.0, 0.0]])


@dataclass(frozen=True)
class CameraModel:
    """Simplified pinhole camera: K = diag(f, f, 1), no skew or offsets.

    focal_length and height are in scene units; standoff places the EGO
    camera at z = -standoff (ignored in BEV mode, where the camera sits
    above the origin).
    """

    focal_length: float
    height: float
    standoff: float = 0.0
    view_mode: ViewMode = ViewMode.EGO

    def __post_init__(self):
        if not self.focal_length > 0:
            raise ValueError(f"focal_length must be > 0, got {self.focal_length}")
        if not self.height > 0:
            raise ValueError(f"height must be > 0, got {self.height}")
        if self.standoff < 0:
            raise ValueError(f"standoff must be >= 0, got {self.standoff}")

    @property
    def rotation(self) -> np.ndarray:
        if self.view_mode is ViewMode.BEV:
            return _R_BEV.copy()
        return np.eye(3)

    @property
    def position(self) -> np.ndarray:
        """Camera center C in world coordinates."""
        if self.view_mode is ViewMode.BEV:
            return np.array([0.0, self.height, 0.0])
        return np.array([0.0, self.height, -self.standoff])

    @property
    def ground_position(self) -> tuple[float, float]:
        """(x, z) of the pinhole dropped onto the ground plane."""
        pos = self.position
        return float(pos[0]), float(pos[2])


def calibration_matrix(focal_length: float) -> np.ndarray:
    return np.diag([focal_length, focal_length, 1.0])


def camera_matrix(cam: CameraModel) -> np.ndarray:
    """3x4 projection matrix P = K (R | -R C)."""
    K = calibration_matrix(cam.focal_length)
    R = cam.rotation
    C = cam.position
    return K @ np.hstack([R, (-R @ C).reshape(3, 1)])


def camera_depth(cam: CameraModel, point: np.ndarray | tuple) -> float:
    """Distance of a world point along the camera's viewing axis."""
    p = np.asarray(point, dtype=float)
    return float((cam.rotation @ (p - cam.position))[2])


def project(cam: CameraModel, point: np.ndarray | tuple) -> tuple[float, float]:
    """Project a world point to image-plane (u, v).

    Raises DepthError when the point is at or behind the pinhole
    (depth <= EPS_DEPTH), where dehomogenization is meaningless.
    """
    p = np.asarray(point, dtype=float)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise ValueError(f"expected a finite 3-vector, got {point!r}")
    x = camera_matrix(cam) @ np.append(p, 1.0)
    if x[2] <= EPS_DEPTH:
        raise DepthError(f"point {tuple(p)} has depth {x[2]:.3g} <= {EPS_DEPTH}")
    return float(x[0] / x[2]), float(x[1] / x[2])


def wrap_degrees(angle: float) -> float:
    """Wrap an angle into (-180, 180]; exact no-op for in-range values."""
    if -180.0 < angle <= 180.0:
        return angle
    return 180.0 - (180.0 - angle) % 360.0


@dataclass(frozen=True)
class PoseOnGround:
    """An object's footprint pose on the ground plane y = 0.

    heading is the rotation about the y-axis in degrees, wrapped into
    (-180, 180]; original_height is the object's unprojected height.
    """

    center_x: float
    center_z: float
    heading_deg: float
    original_height: float

    def __post_init__(self):
        if not (-180.0 < self.heading_deg <= 180.0):
            raise ValueError(f"heading_deg must lie in (-180, 180], got {self.heading_deg}")
        if not self.original_height > 0:
            raise ValueError(f"original_height must be > 0, got {self.original_height}")


def bearing_degrees(center_x: float, center_z: float,
                    cam_x: float, cam_z: float) -> float:
    """Horizontal angle of the object center as seen from the pinhole.

    Zero for an object straight ahead (+z), positive to the right (+x).
    """
    dx = center_x - cam_x
    dz = center_z - cam_z
    if dx == 0.0 and dz == 0.0:
        raise CoincidentError("object center coincides with camera ground position")
    return math.degrees(math.atan2(dx, dz))


def azimuth_hat(pose: PoseOnGround, cam_ground: tuple[float, float]) -> float:
    """View azimuth of a translated object: wrap(heading + bearing).

    A centered object (bearing 0) is seen under its own heading; an
    object translated sideways is seen under heading plus the bearing
    from the pinhole to its center.
    """
    b = bearing_degrees(pose.center_x, pose.center_z, cam_ground[0], cam_ground[1])
    return wrap_degrees(pose.heading_deg + b)


def scaled_height(original_height: float, focal_length: float, depth: float) -> float:
    """Projected object height: h0 * f / max(1, depth)."""
    if not original_height > 0:
        raise ValueError(f"original_height must be > 0, got {original_height}")
    if not focal_length > 0:
        raise ValueError(f"focal_length must be > 0, got {focal_length}")
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    return original_height * focal_length / max(1.0, depth)


def polar_angle(depth: float) -> float:
    """Vertical viewing angle heuristic, clamped to [5, 15] degrees."""
    if depth <= 0:
        raise DomainError(f"depth must be > 0, got {depth}")
    return min(POLAR_MAX_DEG,
               max(POLAR_MIN_DEG, math.degrees(math.atan(_POLAR_NUMERATOR / depth))))
