"""Synthetic urban scenes: box buildings, candidate sites, visibility, gains.

A scene is a flat ground plane with axis-aligned box buildings and a list of
candidate station sites standing on open ground.  Propagation uses free-space
spreading with a fixed per-blockage penalty: one base loss for losing line of
sight plus a per-wall loss for every building face the ray crosses.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import kernels


class SceneGenerationError(RuntimeError):
    """Raised when random placement cannot satisfy the layout constraints."""


@dataclass(frozen=True)
class Building:
    """Axis-aligned box building standing on the ground plane."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    height: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("building footprint must have positive extent")
        if self.height <= 0.0:
            raise ValueError("building height must be positive")

    def contains(self, p: Sequence[float], margin: float = 0.0) -> bool:
        x, y, z = p
        return (
            self.x_min - margin <= x <= self.x_max + margin
            and self.y_min - margin <= y <= self.y_max + margin
            and z <= self.height
        )


@dataclass(frozen=True)
class Scene:
    """Ground area with buildings and candidate station sites."""

    bounds: tuple[float, float, float, float]
    buildings: tuple[Building, ...]
    sites: tuple[tuple[float, float, float], ...]
    seed: int = 0

    def __post_init__(self):
        x0, y0, x1, y1 = self.bounds
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"degenerate scene bounds {self.bounds}")
        if not self.sites:
            raise ValueError("scene needs at least one candidate site")
        for idx, site in enumerate(self.sites):
            x, y, z = site
            if not (x0 <= x <= x1 and y0 <= y <= y1):
                raise ValueError(f"site {idx} at {site} outside scene bounds")
            if z <= 0.0:
                raise ValueError(f"site {idx} must be above ground, got z={z}")
            for b in self.buildings:
                if b.contains(site):
                    raise ValueError(f"site {idx} at {site} is inside a building")

    @property
    def num_sites(self) -> int:
        return len(self.sites)

    def boxes(self) -> np.ndarray:
        """Buildings as an (B, 6) array of [xmin, ymin, zmin, xmax, ymax, zmax]."""
        if not self.buildings:
            return np.zeros((0, 6), dtype=np.float64)
        return np.array(
            [[b.x_min, b.y_min, 0.0, b.x_max, b.y_max, b.height] for b in self.buildings],
            dtype=np.float64,
        )

    def site_array(self) -> np.ndarray:
        return np.array(self.sites, dtype=np.float64)


@dataclass(frozen=True)
class SceneGenConfig:
    """Knobs for the random scene generator."""

    bounds: tuple[float, float, float, float] = (0.0, 0.0, 500.0, 500.0)
    building_count: int = 40
    footprint_min: float = 20.0
    footprint_max: float = 60.0
    height_min: float = 10.0
    height_max: float = 60.0
    clearance: float = 5.0
    site_count: int = 30
    site_height: float = 25.0
    seed: int = 0
    max_tries: int = 500

    def __post_init__(self):
        x0, y0, x1, y1 = self.bounds
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"degenerate bounds {self.bounds}")
        if self.building_count < 0:
            raise ValueError("building_count must be non-negative")
        if self.site_count < 1:
            raise ValueError("site_count must be at least 1")
        if not (0.0 < self.footprint_min <= self.footprint_max):
            raise ValueError("need 0 < footprint_min <= footprint_max")
        if not (0.0 < self.height_min <= self.height_max):
            raise ValueError("need 0 < height_min <= height_max")
        if self.footprint_max > (x1 - x0) or self.footprint_max > (y1 - y0):
            raise ValueError("footprint_max exceeds the scene extent")
        if self.site_height <= 0.0:
            raise ValueError("site_height must be positive")
        if self.clearance < 0.0:
            raise ValueError("clearance must be non-negative")


def _overlaps(a: Building, b: Building, gap: float) -> bool:
    return not (
        a.x_max + gap <= b.x_min
        or b.x_max + gap <= a.x_min
        or a.y_max + gap <= b.y_min
        or b.y_max + gap <= a.y_min
    )


def generate_scene(cfg: SceneGenConfig) -> Scene:
    """Rejection-sample a scene; deterministic for a given config.

    Buildings are drawn first (uniform footprint, position, and height) and
    kept pairwise separated by ``clearance``; sites are then dropped on open
    ground at ``site_height``.  Raises SceneGenerationError when a placement
    cannot be found within ``max_tries`` draws.
    """
    rng = np.random.default_rng(cfg.seed)
    x0, y0, x1, y1 = cfg.bounds

    buildings: list[Building] = []
    for idx in range(cfg.building_count):
        placed = None
        for _ in range(cfg.max_tries):
            w = float(rng.uniform(cfg.footprint_min, cfg.footprint_max))
            l = float(rng.uniform(cfg.footprint_min, cfg.footprint_max))
            bx = float(rng.uniform(x0, x1 - w))
            by = float(rng.uniform(y0, y1 - l))
            h = float(rng.uniform(cfg.height_min, cfg.height_max))
            cand = Building(bx, by, bx + w, by + l, h)
            if all(not _overlaps(cand, other, cfg.clearance) for other in buildings):
                placed = cand
                break
        if placed is None:
            raise SceneGenerationError(
                f"could not place building {idx + 1}/{cfg.building_count} "
                f"after {cfg.max_tries} tries; lower the density or clearance"
            )
        buildings.append(placed)

    sites: list[tuple[float, float, float]] = []
    for idx in range(cfg.site_count):
        placed = None
        for _ in range(cfg.max_tries):
            sx = float(rng.uniform(x0, x1))
            sy = float(rng.uniform(y0, y1))
            p = (sx, sy, cfg.site_height)
            if all(not b.contains(p, margin=cfg.clearance) for b in buildings):
                placed = p
                break
        if placed is None:
            raise SceneGenerationError(
                f"could not place site {idx + 1}/{cfg.site_count} on open ground "
                f"after {cfg.max_tries} tries"
            )
        sites.append(placed)

    return Scene(bounds=cfg.bounds, buildings=tuple(buildings), sites=tuple(sites), seed=cfg.seed)


@dataclass(frozen=True)
class GainModel:
    """Free-space gain with an additive dB penalty when the path is blocked.

    The blocked penalty is ``wall_loss_base_db + wall_loss_per_wall_db * n``
    where n is the number of building faces the ray crosses.
    """

    wavelength: float
    wall_loss_base_db: float = 20.0
    wall_loss_per_wall_db: float = 10.0

    def __post_init__(self):
        if self.wavelength <= 0.0:
            raise ValueError("wavelength must be positive")
        if self.wall_loss_base_db < 0.0 or self.wall_loss_per_wall_db < 0.0:
            raise ValueError("wall losses must be non-negative")


def free_space_gain(distance, wavelength: float):
    """(lambda / 4 pi d)^2, elementwise on arrays."""
    d = np.asarray(distance, dtype=np.float64)
    out = (wavelength / (4.0 * np.pi * d)) ** 2
    return out if out.ndim else float(out)


def segment_blockage(site: Sequence[float], p: Sequence[float], scene: Scene) -> tuple[bool, int]:
    """(blocked, wall count) for the straight segment site -> p."""
    blocked, walls = kernels.segment_walls(
        np.asarray(site, dtype=np.float64),
        np.asarray(p, dtype=np.float64).reshape(1, 3),
        scene.boxes(),
    )
    return bool(blocked[0]), int(walls[0])


def los_visible(site: Sequence[float], p: Sequence[float], scene: Scene) -> bool:
    """True when no building touches the closed segment site -> p."""
    blocked, _ = segment_blockage(site, p, scene)
    return not blocked


def point_gain(site: Sequence[float], p: Sequence[float], scene: Scene, model: GainModel) -> float:
    """Channel power gain between a site and a point under the scene."""
    site = np.asarray(site, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    d = float(np.sqrt(((p - site) ** 2).sum()))
    if d == 0.0:
        raise ValueError("gain is undefined at zero distance")
    g = free_space_gain(d, model.wavelength)
    blocked, walls = segment_blockage(site, p, scene)
    if blocked:
        g *= 10.0 ** (-(model.wall_loss_base_db + model.wall_loss_per_wall_db * walls) / 10.0)
    return g


def scene_to_dict(scene: Scene) -> dict:
    return {
        "bounds": list(scene.bounds),
        "seed": scene.seed,
        "buildings": [asdict(b) for b in scene.buildings],
        "sites": [list(s) for s in scene.sites],
    }


def scene_from_dict(data: dict) -> Scene:
    try:
        buildings = tuple(Building(**b) for b in data["buildings"])
        sites = tuple((float(x), float(y), float(z)) for x, y, z in data["sites"])
        return Scene(
            bounds=tuple(float(v) for v in data["bounds"]),
            buildings=buildings,
            sites=sites,
            seed=int(data.get("seed", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scene data: {exc}") from None


def save_scene(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_to_dict(scene), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        return scene_from_dict(json.load(fh))
