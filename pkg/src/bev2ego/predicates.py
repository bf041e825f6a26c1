"""Attribute predicates over scene sidecars.

A predicate is a conjunction of up to three conditions.  Car-level
conditions (type, color, occlusion band, rotation bin) must hold on the
same car; scene-level conditions (background) on the scene.  A scene
matches when some car satisfies all car-level conditions and the scene
satisfies the scene-level ones.  The same type drives planted
mock-detector rules and the systematic-error mining search, so a
planted rule is recoverable by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .metrics.mms import rotation_bin, rotation_bin_label


@dataclass(frozen=True)
class AttributePredicate:
    car_type: str | None = None
    color: str | None = None
    background: str | None = None
    occlusion_gt: float | None = None
    rotation_bin: int | None = None

    @property
    def depth(self) -> int:
        return sum(v is not None for v in (self.car_type, self.color,
                                           self.background, self.occlusion_gt,
                                           self.rotation_bin))

    def matches_car(self, car: dict, scene: dict) -> bool:
        if self.background is not None and scene.get("background") != self.background:
            return False
        if self.car_type is not None and car.get("car_type") != self.car_type:
            return False
        if self.color is not None and car.get("color") != self.color:
            return False
        if self.occlusion_gt is not None and not car.get("occlusion", 0.0) > self.occlusion_gt:
            return False
        if self.rotation_bin is not None and \
                rotation_bin(car.get("azimuth_deg", 0.0)) != self.rotation_bin:
            return False
        return True

    def matches_scene(self, scene: dict) -> bool:
        cars = scene.get("cars", [])
        return any(self.matches_car(car, scene) for car in cars)

    def describe(self) -> str:
        parts = []
        if self.car_type is not None:
            parts.append(f"car_type={self.car_type}")
        if self.color is not None:
            parts.append(f"color={self.color}")
        if self.background is not None:
            parts.append(f"background={self.background}")
        if self.occlusion_gt is not None:
            parts.append(f"occlusion>{self.occlusion_gt:g}")
        if self.rotation_bin is not None:
            parts.append(f"rotation={rotation_bin_label(self.rotation_bin)}")
        return " & ".join(parts) if parts else "(any)"
