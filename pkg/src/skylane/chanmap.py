"""Channel maps on a regular sample lattice and their per-cell reductions.

A channel map stores, for one site, the power gain and line-of-sight flag at
every point of a sample lattice covering the corridor grid: s x s horizontal
samples per cell starting at each cell's south-west edge, and nz vertical
levels spanning the altitude band endpoints.  Maps serialize to a compact
little-endian binary format (magic "CKM1") whose round trip is bit-exact.

Per-cell reductions turn a set of maps into the min/max gain (optionally
trimmed), LoS indicator, and worst-case echo power used by the planners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .grid import Cell, CoarseSpec, GridSpec
from .metrics import CellStatsView, RadioParams, echo_power
from .scene import GainModel, Scene

MAGIC = b"CKM1"
_HEADER = 4 + 4 * 4 + 8 * 6  # magic, site/shape u32s, origin/step f64s

LOS_RULES = ("all", "any")


class CkmFormatError(ValueError):
    """Raised when a channel-map file does not parse as CKM1."""


@dataclass(frozen=True)
class SampleLattice:
    """Sampling density: s x s points per cell footprint, nz levels of height."""

    samples_per_edge: int = 4
    vertical_samples: int = 2

    def __post_init__(self):
        if self.samples_per_edge < 2:
            raise ValueError("need at least 2 horizontal samples per cell edge")
        if self.vertical_samples < 2:
            raise ValueError("need at least 2 vertical samples to cover the band")


def lattice_axes(grid: GridSpec, lattice: SampleLattice) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample coordinates along x, y, z for the whole grid."""
    s = lattice.samples_per_edge
    nz = lattice.vertical_samples
    xs = grid.origin_x + np.arange(grid.n * s, dtype=np.float64) * (grid.dx / s)
    ys = grid.origin_y + np.arange(grid.n * s, dtype=np.float64) * (grid.dy / s)
    zs = grid.altitude + np.arange(nz, dtype=np.float64) * (grid.dz / (nz - 1))
    return xs, ys, zs


def lattice_points(grid: GridSpec, lattice: SampleLattice) -> np.ndarray:
    """All sample points as an (nx*ny*nz, 3) array in C order over (x, y, z)."""
    xs, ys, zs = lattice_axes(grid, lattice)
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)


@dataclass(frozen=True, eq=False)
class ChannelMap:
    """Gains and LoS flags of one site over the sample lattice.

    ``gains[ix, iy, iz]`` follows the lattice axes; both arrays are read-only.
    """

    site_index: int
    origin: tuple[float, float, float]
    step: tuple[float, float, float]
    gains: np.ndarray
    los: np.ndarray

    def __post_init__(self):
        gains = np.ascontiguousarray(self.gains, dtype=np.float64)
        los = np.ascontiguousarray(self.los, dtype=bool)
        if gains.ndim != 3 or gains.shape != los.shape:
            raise ValueError("gains and los must be equal 3-d arrays")
        if self.site_index < 0:
            raise ValueError("site_index must be non-negative")
        if any(st <= 0.0 for st in self.step):
            raise ValueError("lattice steps must be positive")
        gains.setflags(write=False)
        los.setflags(write=False)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "los", los)
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "step", tuple(float(v) for v in self.step))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.gains.shape

    def _index_of(self, p: Sequence[float]) -> tuple[int, int, int]:
        idx = []
        for ax in range(3):
            t = int(np.rint((p[ax] - self.origin[ax]) / self.step[ax]))
            if not 0 <= t < self.gains.shape[ax]:
                raise ValueError(f"point {tuple(p)} outside the sample lattice")
            idx.append(t)
        return tuple(idx)

    def gain_at(self, p: Sequence[float]) -> float:
        """Gain at the nearest lattice sample."""
        return float(self.gains[self._index_of(p)])

    def los_at(self, p: Sequence[float]) -> bool:
        return bool(self.los[self._index_of(p)])

    def save(self, path) -> None:
        """Write the CKM1 binary layout (little-endian, C order, packed bits)."""
        nx, ny, nz = self.gains.shape
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(np.array([self.site_index, nx, ny, nz], dtype="<u4").tobytes())
            fh.write(np.array(list(self.origin) + list(self.step), dtype="<f8").tobytes())
            fh.write(self.gains.astype("<f8", copy=False).tobytes(order="C"))
            fh.write(np.packbits(self.los.reshape(-1)).tobytes())

    @classmethod
    def load(cls, path) -> "ChannelMap":
        with open(path, "rb") as fh:
            buf = fh.read()
        if len(buf) < _HEADER or buf[:4] != MAGIC:
            raise CkmFormatError(f"{path}: not a CKM1 channel map")
        head = np.frombuffer(buf, dtype="<u4", count=4, offset=4)
        site_index, nx, ny, nz = (int(v) for v in head)
        geo = np.frombuffer(buf, dtype="<f8", count=6, offset=20)
        total = nx * ny * nz
        want = _HEADER + 8 * total + math.ceil(total / 8)
        if len(buf) != want:
            raise CkmFormatError(
                f"{path}: truncated or oversized CKM1 payload "
                f"(expected {want} bytes, got {len(buf)})"
            )
        gains = (
            np.frombuffer(buf, dtype="<f8", count=total, offset=_HEADER)
            .reshape(nx, ny, nz)
            .copy()
        )
        packed = np.frombuffer(buf, dtype=np.uint8, offset=_HEADER + 8 * total)
        los = np.unpackbits(packed)[:total].astype(bool).reshape(nx, ny, nz)
        return cls(
            site_index=site_index,
            origin=tuple(geo[:3]),
            step=tuple(geo[3:]),
            gains=gains,
            los=los,
        )


def build_channel_map(
    site_index: int,
    scene: Scene,
    grid: GridSpec,
    lattice: SampleLattice,
    model: GainModel,
) -> ChannelMap:
    """Evaluate one site's gain and visibility over the whole lattice."""
    site = np.asarray(scene.sites[site_index], dtype=np.float64)
    pts = lattice_points(grid, lattice)
    d = np.sqrt(((pts - site) ** 2).sum(axis=1))
    if not (d > 0.0).all():
        raise ValueError(f"site {site_index} coincides with a lattice sample")
    blocked, walls = kernels.segment_walls(site, pts, scene.boxes())
    base = (model.wavelength / (4.0 * np.pi * d)) ** 2
    penalty = np.where(
        blocked.astype(bool),
        10.0 ** (-(model.wall_loss_base_db + model.wall_loss_per_wall_db * walls) / 10.0),
        1.0,
    )
    s = lattice.samples_per_edge
    nz = lattice.vertical_samples
    shape = (grid.n * s, grid.n * s, nz)
    xs, ys, zs = lattice_axes(grid, lattice)
    return ChannelMap(
        site_index=site_index,
        origin=(float(xs[0]), float(ys[0]), float(zs[0])),
        step=(grid.dx / s, grid.dy / s, grid.dz / (nz - 1)),
        gains=(base * penalty).reshape(shape),
        los=~blocked.astype(bool).reshape(shape),
    )


@dataclass(frozen=True)
class CellChannelStats:
    """Reduction of one site's samples inside one cell."""

    h_min: float
    h_max: float
    h_min_trim: float
    h_max_trim: float
    los_indicator: int
    echo_min: float


def _trim_index(count: int, trim_fraction: float) -> int:
    if not 0.0 <= trim_fraction < 0.5:
        raise ValueError(f"trim_fraction must lie in [0, 0.5), got {trim_fraction}")
    return int(trim_fraction * count)


def cell_stats(
    cmap: ChannelMap,
    scene: Scene,
    grid: GridSpec,
    cell: Cell,
    radio: RadioParams,
    trim_fraction: float = 0.0,
    los_rule: str = "all",
) -> CellChannelStats:
    """Straightforward single-cell reduction (the reference code path).

    ``los_rule`` "all" requires every sample of the cell to be visible for
    the cell to count as LoS; "any" requires one.
    """
    if los_rule not in LOS_RULES:
        raise ValueError(f"los_rule must be one of {LOS_RULES}")
    nx, ny, nz = cmap.shape
    s = nx // grid.n
    if s * grid.n != nx or nx != ny:
        raise ValueError("channel map lattice does not tile the grid")
    site = np.asarray(scene.sites[cmap.site_index], dtype=np.float64)

    sl_x = slice((cell.j - 1) * s, cell.j * s)
    sl_y = slice((cell.i - 1) * s, cell.i * s)
    g = cmap.gains[sl_x, sl_y, :].reshape(-1)
    los = cmap.los[sl_x, sl_y, :].reshape(-1)

    srt = np.sort(g)
    t = _trim_index(g.size, trim_fraction)
    los_flag = bool(los.all()) if los_rule == "all" else bool(los.any())

    xs = cmap.origin[0] + np.arange(nx, dtype=np.float64)[sl_x] * cmap.step[0]
    ys = cmap.origin[1] + np.arange(ny, dtype=np.float64)[sl_y] * cmap.step[1]
    zs = cmap.origin[2] + np.arange(nz, dtype=np.float64) * cmap.step[2]
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    d = np.sqrt(((pts - site) ** 2).sum(axis=1))
    echo = float(np.min(echo_power(d, radio))) if los_flag else 0.0

    return CellChannelStats(
        h_min=float(srt[0]),
        h_max=float(srt[-1]),
        h_min_trim=float(srt[t]),
        h_max_trim=float(srt[g.size - 1 - t]),
        los_indicator=int(los_flag),
        echo_min=echo,
    )


@dataclass(frozen=True, eq=False)
class StatsGrid:
    """Per-cell channel statistics for every site, on one lattice side.

    Arrays are (num_sites, side, side) indexed by ``[k, i-1, j-1]``.
    ``h_min``/``h_max`` are the effective (trimmed) extremes; the raw ones
    are kept alongside.  ``echo`` is zero where the LoS indicator is off.
    """

    side: int
    trim_fraction: float
    los_rule: str
    h_min: np.ndarray
    h_max: np.ndarray
    h_min_raw: np.ndarray
    h_max_raw: np.ndarray
    los: np.ndarray
    echo: np.ndarray

    def __post_init__(self):
        for name in ("h_min", "h_max", "h_min_raw", "h_max_raw", "los", "echo"):
            arr = getattr(self, name)
            if arr.shape != (self.num_sites, self.side, self.side):
                raise ValueError(f"stats array {name} has shape {arr.shape}")
            arr.setflags(write=False)

    @property
    def num_sites(self) -> int:
        return int(self.h_min.shape[0])

    def cell(self, cell: Cell) -> CellStatsView:
        i, j = cell.i - 1, cell.j - 1
        return CellStatsView(
            h_min=self.h_min[:, i, j],
            h_max=self.h_max[:, i, j],
            h_min_raw=self.h_min_raw[:, i, j],
            h_max_raw=self.h_max_raw[:, i, j],
            los=self.los[:, i, j],
            echo=self.echo[:, i, j],
        )

    def stats(self, k: int, cell: Cell) -> CellChannelStats:
        i, j = cell.i - 1, cell.j - 1
        return CellChannelStats(
            h_min=float(self.h_min_raw[k, i, j]),
            h_max=float(self.h_max_raw[k, i, j]),
            h_min_trim=float(self.h_min[k, i, j]),
            h_max_trim=float(self.h_max[k, i, j]),
            los_indicator=int(self.los[k, i, j]),
            echo_min=float(self.echo[k, i, j]),
        )


def reduce_stats(
    maps: Sequence[ChannelMap],
    scene: Scene,
    grid: GridSpec,
    radio: RadioParams,
    side: int,
    trim_fraction: float = 0.0,
    los_rule: str = "all",
) -> StatsGrid:
    """Aggregate channel maps into per-cell statistics on a side x side grid.

    ``side`` is either the fine side n or a coarse side dividing it; coarse
    cell statistics are taken over the union of the fine samples, so a
    coarse reduction equals a reduction over full coarse blocks.
    """
    if los_rule not in LOS_RULES:
        raise ValueError(f"los_rule must be one of {LOS_RULES}")
    if len(maps) != scene.num_sites:
        raise ValueError(f"got {len(maps)} maps for {scene.num_sites} sites")
    nx, ny, nz = maps[0].shape
    if nx != ny or nx % side != 0:
        raise ValueError(f"lattice side {nx} does not tile {side} cells")
    blk = nx // side
    cnt = blk * blk * nz
    t = _trim_index(cnt, trim_fraction)

    k_tot = len(maps)
    h_min_raw = np.empty((k_tot, side, side))
    h_max_raw = np.empty((k_tot, side, side))
    h_min = np.empty((k_tot, side, side))
    h_max = np.empty((k_tot, side, side))
    los = np.empty((k_tot, side, side), dtype=bool)
    echo = np.empty((k_tot, side, side))

    for k, cmap in enumerate(maps):
        if cmap.site_index != k:
            raise ValueError(f"map {k} carries site_index {cmap.site_index}")
        if cmap.shape != (nx, ny, nz):
            raise ValueError("channel maps disagree on lattice shape")
        # [ix, iy, iz] -> [i_cell, j_cell, sample]
        cells = (
            cmap.gains.reshape(side, blk, side, blk, nz)
            .transpose(2, 0, 1, 3, 4)
            .reshape(side, side, cnt)
        )
        srt = np.sort(cells, axis=2)
        h_min_raw[k] = srt[:, :, 0]
        h_max_raw[k] = srt[:, :, cnt - 1]
        h_min[k] = srt[:, :, t]
        h_max[k] = srt[:, :, cnt - 1 - t]
        lcells = (
            cmap.los.reshape(side, blk, side, blk, nz)
            .transpose(2, 0, 1, 3, 4)
            .reshape(side, side, cnt)
        )
        los[k] = lcells.all(axis=2) if los_rule == "all" else lcells.any(axis=2)

        site = np.asarray(scene.sites[k], dtype=np.float64)
        xs = cmap.origin[0] + np.arange(nx, dtype=np.float64) * cmap.step[0]
        ys = cmap.origin[1] + np.arange(ny, dtype=np.float64) * cmap.step[1]
        zs = cmap.origin[2] + np.arange(nz, dtype=np.float64) * cmap.step[2]
        gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
        d = np.sqrt(((pts - site) ** 2).sum(axis=1)).reshape(nx, ny, nz)
        d_cells = (
            d.reshape(side, blk, side, blk, nz)
            .transpose(2, 0, 1, 3, 4)
            .reshape(side, side, cnt)
        )
        d_max = d_cells.max(axis=2)
        echo[k] = np.where(los[k], echo_power(d_max, radio), 0.0)

    return StatsGrid(
        side=side,
        trim_fraction=trim_fraction,
        los_rule=los_rule,
        h_min=h_min,
        h_max=h_max,
        h_min_raw=h_min_raw,
        h_max_raw=h_max_raw,
        los=los,
        echo=echo,
    )


def fine_stats(
    maps: Sequence[ChannelMap],
    scene: Scene,
    grid: GridSpec,
    radio: RadioParams,
    trim_fraction: float = 0.0,
    los_rule: str = "all",
) -> StatsGrid:
    return reduce_stats(maps, scene, grid, radio, grid.n, trim_fraction, los_rule)


def coarse_stats(
    maps: Sequence[ChannelMap],
    scene: Scene,
    grid: GridSpec,
    coarse: CoarseSpec,
    radio: RadioParams,
    trim_fraction: float = 0.10,
    los_rule: str = "all",
) -> StatsGrid:
    if coarse.m * coarse.factor != grid.n:
        raise ValueError("coarse spec does not match the grid")
    return reduce_stats(maps, scene, grid, radio, coarse.m, trim_fraction, los_rule)
