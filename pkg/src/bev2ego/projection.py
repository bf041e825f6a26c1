"""Image-space car footprints and occlusion geometry.

Without 3D meshes every car is a camera-facing billboard: a rectangle
whose height follows the pinhole scaling heuristic and whose width is
the height times a per-type aspect ratio interpolated between front and
side views.  Visible regions are computed front-to-back: a car's
footprint minus the union of all strictly nearer footprints.
"""

from __future__ import annotations

from dataclasses import dataclass

from shapely.geometry import Polygon
from shapely.ops import unary_union

from .errors import DegenerateFootprint, DepthError
from .geometry import (EPS_DEPTH, CameraModel, PoseOnGround, ViewMode,
                       azimuth_hat, camera_depth, polar_angle, project,
                       scaled_height)
from .scene import CarSpec, SceneConfig, aspect_ratio

# Camera placements that keep every grid position (including second-car
# offsets, which reach 45 units past the grid) strictly in front of the lens.
DEFAULT_EGO_CAMERA = CameraModel(focal_length=2.0, height=15.0, standoff=260.0)
DEFAULT_BEV_CAMERA = CameraModel(focal_length=1.0, height=200.0,
                                 view_mode=ViewMode.BEV)


@dataclass(frozen=True)
class ProjectedCar:
    """One car's image-plane geometry for a given camera."""

    index: int
    car: CarSpec
    depth: float
    azimuth_deg: float
    polar_deg: float
    height: float            # image-plane units, height_factor applied
    width: float
    anchor_u: float          # projected ground center
    anchor_v: float
    footprint: Polygon
    visible_region: Polygon  # footprint minus nearer footprints

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        """(u_min, v_min, u_max, v_max) of the full footprint."""
        return self.footprint.bounds

    @property
    def visible_bbox(self) -> tuple[float, float, float, float] | None:
        if self.visible_region.is_empty:
            return None
        return self.visible_region.bounds


def footprint_polygon(anchor_u: float, anchor_v: float,
                      height: float, width: float) -> Polygon:
    """Billboard rectangle standing on its projected ground anchor.

    v grows upward in image-plane units, so the car spans
    [anchor_v, anchor_v + height].
    """
    half_w = width / 2.0
    return Polygon([
        (anchor_u - half_w, anchor_v),
        (anchor_u + half_w, anchor_v),
        (anchor_u + half_w, anchor_v + height),
        (anchor_u - half_w, anchor_v + height),
    ])


def project_car(car: CarSpec, cam: CameraModel, index: int = 0) -> ProjectedCar:
    center = (car.center_x, 0.0, car.center_z)
    depth = camera_depth(cam, center)
    if depth <= EPS_DEPTH:
        raise DepthError(f"car {index} at {center} has depth {depth:.3g}")
    pose = PoseOnGround(car.center_x, car.center_z, car.heading_deg,
                        car.original_height)
    azimuth = azimuth_hat(pose, cam.ground_position)
    height = scaled_height(car.original_height, cam.focal_length, depth) \
        * car.height_factor
    width = height * aspect_ratio(car.car_type, azimuth)
    u, v = project(cam, center)
    footprint = footprint_polygon(u, v, height, width)
    return ProjectedCar(
        index=index, car=car, depth=depth,
        azimuth_deg=azimuth, polar_deg=polar_angle(depth),
        height=height, width=width, anchor_u=u, anchor_v=v,
        footprint=footprint, visible_region=footprint,
    )


def project_scene(scene: SceneConfig, cam: CameraModel) -> list[ProjectedCar]:
    """Project every car and carve visible regions by depth order.

    Returned list parallels scene.cars.  Cars at strictly smaller depth
    occlude cars behind them; equal depths do not occlude each other.
    """
    cars = [project_car(c, cam, i) for i, c in enumerate(scene.cars)]
    out: list[ProjectedCar] = []
    for pc in cars:
        nearer = [q.footprint for q in cars if q.depth < pc.depth]
        visible = pc.footprint.difference(unary_union(nearer)) if nearer \
            else pc.footprint
        out.append(ProjectedCar(
            index=pc.index, car=pc.car, depth=pc.depth,
            azimuth_deg=pc.azimuth_deg, polar_deg=pc.polar_deg,
            height=pc.height, width=pc.width,
            anchor_u=pc.anchor_u, anchor_v=pc.anchor_v,
            footprint=pc.footprint, visible_region=visible,
        ))
    return out


def occlusion_rate(car: ProjectedCar) -> float:
    """Fraction of the footprint hidden behind nearer cars, in [0, 1]."""
    area = car.footprint.area
    if area <= 0.0:
        raise DegenerateFootprint(f"car {car.index} footprint has zero area")
    rate = 1.0 - car.visible_region.area / area
    return min(1.0, max(0.0, rate))
