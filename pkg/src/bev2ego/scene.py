"""Scene data model: crossroad layout, attribute grid, constrained samplers.

The attribute grid (car types, colors, backgrounds, angle/position steps,
height factors, resolution scales) is the discrete space every sampled
scene is drawn from.  Second-car attributes deliberately leave the grid:
their heading is continuous within +/-20 degrees of the first car and
their center is offset by a continuous band, matching the two-car
constraint used for error mining.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import SamplingError, SchemaError
from .geometry import wrap_degrees

SCENE_SCHEMA = "scene/v1"

# -- attribute grid -----------------------------------------------------------

CAR_TYPES = ("sedan", "sports car", "smart car", "coupe car", "SUV")

COLORS = ("white", "black", "grey", "yellow", "red", "blue",
          "green", "brown", "pink", "orange", "purple")

BACKGROUNDS = ("in forest", "on beach", "in city",
               "on snowy street", "on highway", "near lake")

PLACEMENTS = ("vertical", "horizontal")

ROTATION_GRID = tuple(float(a) for a in range(-90, 91, 10))      # 19 values
HEIGHT_FACTORS = (0.8, 0.9, 1.0, 1.1, 1.2)
SCALES = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)

# Integer center grids per placement: (x_lo, x_hi, z_lo, z_hi).
CENTER_RANGES = {
    "horizontal": (-100, 100, -30, 0),
    "vertical": (-30, 30, -100, 0),
}

# Second-car center offset band |delta| in [15, 45] on both axes.
NEIGHBOR_OFFSET_MIN = 15.0
NEIGHBOR_OFFSET_MAX = 45.0
NEIGHBOR_HEADING_SPREAD = 20.0

DEFAULT_SEED_COUNT = 9
DEFAULT_ORIGINAL_HEIGHT = 10.0
THREE_CAR_SIZE_BOOST = 0.2

PROMPT_TEMPLATE = "cars are driving {background}, high resolution, high definition, high quality"

# Aspect ratios (side view / front view) of the billboard silhouettes.
# Only the ordering matters for tests; values are configurable plumbing.
ASPECT_RATIOS = {
    "sedan": (2.4, 1.0),
    "SUV": (2.2, 1.1),
    "coupe car": (2.3, 0.95),
    "sports car": (2.5, 0.9),
    "smart car": (1.6, 1.0),
}


def aspect_ratio(car_type: str, azimuth_deg: float) -> float:
    """Billboard width/height ratio, interpolated in |sin(azimuth)|.

    Azimuth 0 shows the front (narrow), +/-90 the side (wide).
    """
    side, front = ASPECT_RATIOS[car_type]
    t = abs(np.sin(np.radians(azimuth_deg)))
    return front + (side - front) * t


# -- road layout --------------------------------------------------------------

@dataclass(frozen=True)
class RoadLayout:
    """Crossroad: two axis-aligned rectangular arms intersecting at the origin.

    The vertical arm runs along z, the horizontal arm along x; each is
    arm_length long and arm_width wide.
    """

    arm_length: float = 400.0
    arm_width: float = 100.0

    @property
    def half_length(self) -> float:
        return self.arm_length / 2.0

    @property
    def half_width(self) -> float:
        return self.arm_width / 2.0

    def contains(self, x: float, z: float) -> bool:
        hl, hw = self.half_length, self.half_width
        on_vertical = abs(x) <= hw and abs(z) <= hl
        on_horizontal = abs(x) <= hl and abs(z) <= hw
        return on_vertical or on_horizontal

    def fits(self, x: float, z: float, half_extent: float) -> bool:
        """True if the axis-aligned square of the given half side fits on-road.

        Corner containment is sufficient for this plus-shaped union: the
        deepest square point inside any excluded corner notch is always a
        square corner.
        """
        r = half_extent
        return all(self.contains(x + sx * r, z + sz * r)
                   for sx in (-1.0, 1.0) for sz in (-1.0, 1.0))

    def lane_sign(self, placement: str, x: float, z: float) -> int:
        """Which half of the arm a center lies in, split along the arm axis."""
        lateral = x if placement == "vertical" else z
        return 1 if lateral >= 0 else -1


# -- car and scene records ----------------------------------------------------

@dataclass(frozen=True)
class CarSpec:
    car_type: str
    color: str
    center_x: float
    center_z: float
    heading_deg: float
    height_factor: float
    placement: str
    original_height: float = DEFAULT_ORIGINAL_HEIGHT

    def __post_init__(self):
        if self.car_type not in CAR_TYPES:
            raise ValueError(f"unknown car type {self.car_type!r}")
        if self.color not in COLORS:
            raise ValueError(f"unknown color {self.color!r}")
        if self.placement not in PLACEMENTS:
            raise ValueError(f"unknown placement {self.placement!r}")
        if not (-180.0 < self.heading_deg <= 180.0):
            raise ValueError(f"heading_deg must lie in (-180, 180], got {self.heading_deg}")
        if not self.original_height > 0:
            raise ValueError("original_height must be > 0")

    @property
    def ground_half_extent(self) -> float:
        """Conservative on-road footprint radius: half the side-view length."""
        side, _ = ASPECT_RATIOS[self.car_type]
        return side * self.original_height * self.height_factor / 2.0


@dataclass(frozen=True)
class SceneConfig:
    cars: tuple[CarSpec, ...]
    background: str
    scale: float
    seeds: tuple[int, ...] = tuple(range(DEFAULT_SEED_COUNT))
    prompt_template: str = PROMPT_TEMPLATE
    scene_id: str = ""

    def __post_init__(self):
        if not 1 <= len(self.cars) <= 3:
            raise ValueError(f"scene must contain 1..3 cars, got {len(self.cars)}")
        if self.background not in BACKGROUNDS:
            raise ValueError(f"unknown background {self.background!r}")
        if self.scale not in SCALES:
            raise ValueError(f"scale {self.scale} not on the grid {SCALES}")
        if len(self.seeds) == 0:
            raise ValueError("at least one seed required")

    @property
    def prompt(self) -> str:
        return self.prompt_template.format(background=self.background)

    def with_id(self, scene_id: str) -> "SceneConfig":
        return replace(self, scene_id=scene_id)


# -- serialization (scene/v1) -------------------------------------------------

_CAR_FIELDS = ("car_type", "color", "center_x", "center_z", "heading_deg",
               "height_factor", "placement", "original_height")


def scene_to_dict(scene: SceneConfig) -> dict:
    """Canonical scene/v1 document: fixed key order, degrees, scene units."""
    return {
        "schema": SCENE_SCHEMA,
        "scene_id": scene.scene_id,
        "background": scene.background,
        "scale": scene.scale,
        "seeds": list(scene.seeds),
        "prompt_template": scene.prompt_template,
        "cars": [{k: getattr(car, k) for k in _CAR_FIELDS} for car in scene.cars],
    }


def scene_from_dict(doc: dict) -> SceneConfig:
    if not isinstance(doc, dict):
        raise SchemaError("scene document must be a mapping")
    if doc.get("schema") != SCENE_SCHEMA:
        raise SchemaError(f"expected schema {SCENE_SCHEMA!r}, got {doc.get('schema')!r}")
    try:
        cars = tuple(
            CarSpec(car_type=car["car_type"], color=car["color"],
                    center_x=float(car["center_x"]),
                    center_z=float(car["center_z"]),
                    heading_deg=float(car["heading_deg"]),
                    height_factor=float(car["height_factor"]),
                    placement=car["placement"],
                    original_height=float(car["original_height"]))
            for car in doc["cars"])
        return SceneConfig(
            cars=cars,
            background=doc["background"],
            scale=float(doc["scale"]),
            seeds=tuple(int(s) for s in doc["seeds"]),
            prompt_template=doc["prompt_template"],
            scene_id=doc.get("scene_id", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed scene document: {exc}") from exc


def dumps_scene(scene: SceneConfig) -> str:
    return json.dumps(scene_to_dict(scene), indent=2) + "\n"


def loads_scene(text: str) -> SceneConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    return scene_from_dict(doc)


# -- samplers -----------------------------------------------------------------

MAX_PLACEMENT_ATTEMPTS = 100


@dataclass
class SceneSampler:
    """Deterministic sampler over the attribute grid.

    Owns a seeded RNG; one instance per thread.  Primary cars are uniform
    over the grid; neighbor cars follow the offset-band constraints.
    """

    seed: int
    layout: RoadLayout = field(default_factory=RoadLayout)
    original_height: float = DEFAULT_ORIGINAL_HEIGHT

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)

    # attribute-level draws

    def _choice(self, options):
        return options[int(self.rng.integers(len(options)))]

    def _grid_center(self, placement: str) -> tuple[float, float]:
        x_lo, x_hi, z_lo, z_hi = CENTER_RANGES[placement]
        x = float(self.rng.integers(x_lo, x_hi + 1))
        z = float(self.rng.integers(z_lo, z_hi + 1))
        return x, z

    def sample_primary_car(self, placement: str | None = None,
                           height_factors=HEIGHT_FACTORS) -> CarSpec:
        """Uniform draw over the grid, rejecting centers whose footprint exits the road."""
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            pl = placement or self._choice(PLACEMENTS)
            x, z = self._grid_center(pl)
            car = CarSpec(
                car_type=self._choice(CAR_TYPES),
                color=self._choice(COLORS),
                center_x=x,
                center_z=z,
                heading_deg=self._choice(ROTATION_GRID),
                height_factor=self._choice(height_factors),
                placement=pl,
                original_height=self.original_height,
            )
            if self.layout.fits(x, z, car.ground_half_extent):
                return car
        raise SamplingError("could not place primary car on the road")

    def _offset(self) -> float:
        """Uniform over [-45, -15] u [15, 45]; halves are equal length."""
        mag = self.rng.uniform(NEIGHBOR_OFFSET_MIN, NEIGHBOR_OFFSET_MAX)
        sign = 1.0 if self.rng.random() < 0.5 else -1.0
        return sign * mag

    def sample_second_car(self, first: CarSpec) -> CarSpec:
        """A car near the first: heading within +/-20 deg (maybe flipped 180),
        center offset by 15..45 units on each axis."""
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            heading = first.heading_deg + self.rng.uniform(
                -NEIGHBOR_HEADING_SPREAD, NEIGHBOR_HEADING_SPREAD)
            if self.rng.random() < 0.5:
                heading += 180.0
            x = first.center_x + self._offset()
            z = first.center_z + self._offset()
            car = CarSpec(
                car_type=self._choice(CAR_TYPES),
                color=self._choice(COLORS),
                center_x=x,
                center_z=z,
                heading_deg=wrap_degrees(heading),
                height_factor=self._choice(HEIGHT_FACTORS),
                placement=first.placement,
                original_height=self.original_height,
            )
            if self.layout.fits(x, z, car.ground_half_extent):
                return car
        raise SamplingError("could not place second car on the road")

    def sample_scene(self, n_cars: int = 2,
                     seeds: tuple[int, ...] | None = None) -> SceneConfig:
        if n_cars == 3:
            return self.sample_three_car_scene(seeds=seeds)
        first = self.sample_primary_car()
        cars = [first]
        if n_cars == 2:
            cars.append(self.sample_second_car(first))
        return SceneConfig(
            cars=tuple(cars),
            background=self._choice(BACKGROUNDS),
            scale=self._choice(SCALES),
            seeds=seeds if seeds is not None else tuple(range(DEFAULT_SEED_COUNT)),
        )

    # three-car scenes: two cars follow each other in one lane, the third
    # drives the opposite direction in the adjacent lane; all cars enlarged.

    def _lane_center(self, placement: str, lane: int) -> tuple[float, float]:
        """Center in one lane: lanes are the two arm halves split along the arm axis.

        The lateral coordinate is drawn from 1..30 on the lane's side; the
        longitudinal coordinate spans the grid range of its axis.
        """
        lateral = float(self.rng.integers(1, 31)) * lane
        if placement == "vertical":
            z_lo, z_hi = CENTER_RANGES["vertical"][2:]
            return lateral, float(self.rng.integers(z_lo, z_hi + 1))
        x_lo, x_hi = CENTER_RANGES["horizontal"][:2]
        return float(self.rng.integers(x_lo, x_hi + 1)), lateral

    def sample_three_car_scene(self, size_boost: float = THREE_CAR_SIZE_BOOST,
                               seeds: tuple[int, ...] | None = None) -> SceneConfig:
        boosted = tuple(round(h + size_boost, 10) for h in HEIGHT_FACTORS)
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            placement = self._choice(PLACEMENTS)
            lane = 1 if self.rng.random() < 0.5 else -1
            x1, z1 = self._lane_center(placement, lane)
            heading1 = self._choice(ROTATION_GRID)
            lead = CarSpec(
                car_type=self._choice(CAR_TYPES), color=self._choice(COLORS),
                center_x=x1, center_z=z1, heading_deg=heading1,
                height_factor=self._choice(boosted), placement=placement,
                original_height=self.original_height,
            )
            # follower: same lane, heading within +/-20 deg, longitudinal
            # separation inside the two-car band
            sep = self._offset()
            if placement == "vertical":
                x2, z2 = x1, z1 + sep
            else:
                x2, z2 = x1 + sep, z1
            follower = CarSpec(
                car_type=self._choice(CAR_TYPES), color=self._choice(COLORS),
                center_x=x2, center_z=z2,
                heading_deg=wrap_degrees(heading1 + self.rng.uniform(
                    -NEIGHBOR_HEADING_SPREAD, NEIGHBOR_HEADING_SPREAD)),
                height_factor=self._choice(boosted), placement=placement,
                original_height=self.original_height,
            )
            x3, z3 = self._lane_center(placement, -lane)
            opposing = CarSpec(
                car_type=self._choice(CAR_TYPES), color=self._choice(COLORS),
                center_x=x3, center_z=z3,
                heading_deg=wrap_degrees(heading1 + 180.0 + self.rng.uniform(
                    -NEIGHBOR_HEADING_SPREAD, NEIGHBOR_HEADING_SPREAD)),
                height_factor=self._choice(boosted), placement=placement,
                original_height=self.original_height,
            )
            cars = (lead, follower, opposing)
            if all(self.layout.fits(c.center_x, c.center_z, c.ground_half_extent)
                   for c in cars):
                return SceneConfig(
                    cars=cars,
                    background=self._choice(BACKGROUNDS),
                    scale=self._choice(SCALES),
                    seeds=seeds if seeds is not None else tuple(range(DEFAULT_SEED_COUNT)),
                )
        raise SamplingError("could not place three-car scene on the road")

    def sample_scenes(self, count: int, n_cars: int = 2,
                      seeds: tuple[int, ...] | None = None) -> list[SceneConfig]:
        return [self.sample_scene(n_cars, seeds=seeds).with_id(f"scene-{i:05d}")
                for i in range(count)]
