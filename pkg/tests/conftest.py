"""Shared fixtures: deterministic scene/stats instances at two sizes.

"tiny" (n=8, m=4, 6 sites) keeps unit tests fast; "desk" (n=24, m=6,
8 sites) matches the scale the acceptance suite runs end to end.
Instances are cached per parameter set for the whole session.
"""

from dataclasses import dataclass

import pytest

from skylane import chanmap, planner
from skylane.chanmap import ChannelMap, SampleLattice, StatsGrid
from skylane.grid import CoarseSpec, GridSpec
from skylane.metrics import CostWeights, RadioParams
from skylane.scene import GainModel, Scene, SceneGenConfig, generate_scene


@dataclass(frozen=True)
class Instance:
    scene: Scene
    grid: GridSpec
    coarse: CoarseSpec
    lattice: SampleLattice
    gain: GainModel
    radio: RadioParams
    maps: tuple[ChannelMap, ...]
    coarse_stats: StatsGrid
    fine_stats: StatsGrid
    config: planner.PlanConfig


PROFILES = {
    "tiny": dict(
        side_m=80.0,
        n=8,
        m=4,
        sites=6,
        buildings=5,
        footprint=(6.0, 14.0),
        heights=(8.0, 25.0),
        clearance=3.0,
        bs_height=10.0,
        altitude=40.0,
        dz=8.0,
        samples=2,
        vsamples=2,
        sense_dbm=-95.0,
        sinr_db=1.0,
    ),
    "desk": dict(
        side_m=480.0,
        n=24,
        m=6,
        sites=8,
        buildings=20,
        footprint=(20.0, 60.0),
        heights=(10.0, 50.0),
        clearance=5.0,
        bs_height=25.0,
        altitude=60.0,
        dz=10.0,
        samples=2,
        vsamples=2,
        sense_dbm=-93.0,
        sinr_db=3.0,
    ),
}


def build_instance(profile: str = "tiny", seed: int = 0, **overrides) -> Instance:
    p = dict(PROFILES[profile])
    p.update(overrides)

    scene = generate_scene(
        SceneGenConfig(
            bounds=(0.0, 0.0, p["side_m"], p["side_m"]),
            building_count=p["buildings"],
            footprint_min=p["footprint"][0],
            footprint_max=p["footprint"][1],
            height_min=p["heights"][0],
            height_max=p["heights"][1],
            clearance=p["clearance"],
            site_count=p["sites"],
            site_height=p["bs_height"],
            seed=seed,
        )
    )
    cell = p["side_m"] / p["n"]
    grid = GridSpec(
        origin_x=0.0,
        origin_y=0.0,
        altitude=p["altitude"],
        n=p["n"],
        dx=cell,
        dy=cell,
        dz=p["dz"],
    )
    coarse = CoarseSpec.for_grid(grid, p["m"])
    radio = RadioParams.from_db(
        tx_power_dbm=30.0,
        tx_gain_db=12.0,
        noise_dbm=-110.0,
        carrier_hz=1.0e9,
        rcs_m2=1.0,
        sense_threshold_dbm=p["sense_dbm"],
        sinr_threshold_db=p["sinr_db"],
    )
    lattice = SampleLattice(
        samples_per_edge=p["samples"], vertical_samples=p["vsamples"]
    )
    gain = GainModel(wavelength=radio.wavelength)
    maps = tuple(
        chanmap.build_channel_map(k, scene, grid, lattice, gain)
        for k in range(p["sites"])
    )
    cs = chanmap.coarse_stats(maps, scene, grid, coarse, radio)
    fs = chanmap.fine_stats(maps, scene, grid, radio)
    config = planner.PlanConfig(weights=CostWeights(), radio=radio)
    return Instance(
        scene=scene,
        grid=grid,
        coarse=coarse,
        lattice=lattice,
        gain=gain,
        radio=radio,
        maps=maps,
        coarse_stats=cs,
        fine_stats=fs,
        config=config,
    )


_CACHE: dict = {}


def cached_instance(profile: str = "tiny", seed: int = 0, **overrides) -> Instance:
    key = (profile, seed, tuple(sorted(overrides.items())))
    if key not in _CACHE:
        _CACHE[key] = build_instance(profile, seed, **overrides)
    return _CACHE[key]


@pytest.fixture(scope="session")
def tiny_instance() -> Instance:
    return cached_instance("tiny", 7)


@pytest.fixture(scope="session")
def desk_instance() -> Instance:
    return cached_instance("desk", 0)


@pytest.fixture(scope="session")
def make_instance():
    return cached_instance
