"""Fine/coarse lattice geometry, corridor masks, and path utilities.

Cells are addressed with 1-based ``(i, j)`` pairs; ``i`` grows to the north
(larger y) and ``j`` grows to the east (larger x).  A corridor is a binary
mask over the lattice whose active cells form a single 4-connected simple
path between two fixed endpoint cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class Cell(NamedTuple):
    """1-based (row, column) lattice index."""

    i: int
    j: int


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the square fine lattice at a fixed altitude band.

    The lattice covers ``n`` x ``n`` axis-aligned boxes of size
    ``dx`` x ``dy`` x ``dz``; the box of cell (1, 1) has its south-west
    ground corner at ``(origin_x, origin_y)`` and its floor at ``altitude``.
    """

    origin_x: float
    origin_y: float
    altitude: float
    n: int
    dx: float
    dy: float
    dz: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"grid needs at least 2 cells per side, got n={self.n}")
        if min(self.dx, self.dy, self.dz) <= 0.0:
            raise ValueError("cell resolutions dx, dy, dz must be positive")
        if self.altitude < 0.0:
            raise ValueError(f"altitude must be non-negative, got {self.altitude}")

    def contains(self, cell: Cell) -> bool:
        return 1 <= cell.i <= self.n and 1 <= cell.j <= self.n

    @property
    def extent_x(self) -> float:
        return self.n * self.dx

    @property
    def extent_y(self) -> float:
        return self.n * self.dy


def cell_region(spec: GridSpec, cell: Cell) -> tuple[tuple[float, float], ...]:
    """Axis-aligned box of a cell as ((x0, x1), (y0, y1), (z0, z1)).

    Column j spans x, row i spans y, and every cell spans the same altitude
    band [altitude, altitude + dz].
    """
    if not spec.contains(cell):
        raise ValueError(f"cell {tuple(cell)} outside {spec.n}x{spec.n} grid")
    x0 = spec.origin_x + (cell.j - 1) * spec.dx
    y0 = spec.origin_y + (cell.i - 1) * spec.dy
    z0 = spec.altitude
    return ((x0, x0 + spec.dx), (y0, y0 + spec.dy), (z0, z0 + spec.dz))


def cell_center(spec: GridSpec, cell: Cell) -> tuple[float, float, float]:
    (x0, x1), (y0, y1), (z0, z1) = cell_region(spec, cell)
    return ((x0 + x1) / 2.0, (y0 + y1) / 2.0, (z0 + z1) / 2.0)


@dataclass(frozen=True)
class CoarseSpec:
    """Aggregation of the fine lattice into an m x m coarse lattice.

    Each coarse cell is an exact ``factor`` x ``factor`` block of fine cells,
    so the fine side must be an integer multiple of ``m``.
    """

    m: int
    factor: int
    coarse_dx: float
    coarse_dy: float

    @classmethod
    def for_grid(cls, spec: GridSpec, m: int) -> "CoarseSpec":
        if m < 2:
            raise ValueError(f"coarse side must be at least 2, got m={m}")
        if spec.n % m != 0:
            raise ValueError(
                f"fine side n={spec.n} is not an integer multiple of coarse side m={m}"
            )
        f = spec.n // m
        return cls(m=m, factor=f, coarse_dx=spec.dx * f, coarse_dy=spec.dy * f)


def coarse_cell_of(cell: Cell, factor: int) -> Cell:
    """Coarse cell containing a fine cell."""
    return Cell((cell.i - 1) // factor + 1, (cell.j - 1) // factor + 1)


def to_global(coarse_cell: Cell, local: Cell, factor: int) -> Cell:
    """Map a block-local fine index (1..factor) to the global fine index."""
    return Cell((coarse_cell.i - 1) * factor + local.i, (coarse_cell.j - 1) * factor + local.j)


def neighbors4(cell: Cell, side: int) -> list[Cell]:
    """In-bounds 4-neighborhood, in (south, north, west, east) order."""
    out = []
    for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        ni, nj = cell.i + di, cell.j + dj
        if 1 <= ni <= side and 1 <= nj <= side:
            out.append(Cell(ni, nj))
    return out


@dataclass(frozen=True, eq=False)
class CorridorMask:
    """Immutable binary occupancy of a side x side lattice with endpoints.

    ``bits[i-1, j-1]`` holds cell (i, j).  Construction normalizes the array
    to read-only uint8; corridor legality is checked separately by
    :func:`validate_corridor`.
    """

    side: int
    bits: np.ndarray
    departure: Cell
    destination: Cell

    def __init__(self, bits, departure: Cell, destination: Cell):
        arr = np.array(bits, dtype=np.uint8, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"mask must be square, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise ValueError("mask side must be at least 2")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("mask entries must be 0 or 1")
        side = int(arr.shape[0])
        departure = Cell(*departure)
        destination = Cell(*destination)
        for name, c in (("departure", departure), ("destination", destination)):
            if not (1 <= c.i <= side and 1 <= c.j <= side):
                raise ValueError(f"{name} cell {tuple(c)} outside {side}x{side} mask")
        arr.setflags(write=False)
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "bits", arr)
        object.__setattr__(self, "departure", departure)
        object.__setattr__(self, "destination", destination)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CorridorMask):
            return NotImplemented
        return (
            self.side == other.side
            and self.departure == other.departure
            and self.destination == other.destination
            and bool(np.array_equal(self.bits, other.bits))
        )

    def __hash__(self):
        return hash((self.side, self.departure, self.destination, self.bits.tobytes()))

    def is_active(self, cell: Cell) -> bool:
        return bool(self.bits[cell.i - 1, cell.j - 1])

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def active_cells(self) -> list[Cell]:
        """Active cells in row-major order."""
        rows, cols = np.nonzero(self.bits)
        return [Cell(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols)]

    def to_text(self) -> str:
        """Rows of '0'/'1' characters, row 1 first, newline-separated."""
        return "\n".join("".join(str(int(v)) for v in row) for row in self.bits)

    @classmethod
    def from_text(cls, text: str, departure: Cell, destination: Cell) -> "CorridorMask":
        rows = [line.strip() for line in text.strip().splitlines()]
        try:
            bits = [[int(ch) for ch in row] for row in rows]
        except ValueError as exc:
            raise ValueError(f"mask text must contain only '0'/'1': {exc}") from None
        return cls(np.array(bits), departure, destination)

    @classmethod
    def from_cells(
        cls,
        cells: Iterable[Cell],
        side: int,
        departure: Cell | None = None,
        destination: Cell | None = None,
    ) -> "CorridorMask":
        """Mask from an iterable of cells; endpoints default to first/last."""
        cells = [Cell(*c) for c in cells]
        if not cells:
            raise ValueError("cannot build a mask from an empty cell list")
        bits = np.zeros((side, side), dtype=np.uint8)
        for c in cells:
            bits[c.i - 1, c.j - 1] = 1
        return cls(bits, departure or cells[0], destination or cells[-1])


@dataclass(frozen=True)
class RuleViolation:
    """A single corridor-rule breach: which rule, and where."""

    rule: str
    subject: tuple


@dataclass(frozen=True)
class CorridorReport:
    ok: bool
    violations: tuple[RuleViolation, ...] = field(default_factory=tuple)


def _neighbor_counts(bits: np.ndarray) -> np.ndarray:
    padded = np.pad(bits.astype(np.int32), 1)
    return (
        padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
    )


def validate_corridor(mask: CorridorMask) -> CorridorReport:
    """Check the structural corridor rules on a mask.

    Rules, with the violation labels used in the report:

    - "endpoint-inactive": departure and destination cells must be active.
    - "degree-low": an active non-endpoint cell needs at least 2 active
      neighbors; an active endpoint needs at least 1.
    - "degree-high": no cell (active or not) may have more than 2 active
      neighbors, which is what keeps the corridor one cell wide.
    - "row-empty"/"col-empty": every row and every column must contain at
      least one active cell.
    """
    bits = mask.bits
    side = mask.side
    violations: list[RuleViolation] = []

    endpoints = {mask.departure, mask.destination}
    for c in (mask.departure, mask.destination):
        if not mask.is_active(c):
            violations.append(RuleViolation("endpoint-inactive", tuple(c)))

    counts = _neighbor_counts(bits)
    for r, c in zip(*np.nonzero(counts > 2)):
        violations.append(RuleViolation("degree-high", (int(r) + 1, int(c) + 1)))
    for r, c in zip(*np.nonzero(bits)):
        cell = Cell(int(r) + 1, int(c) + 1)
        need = 1 if cell in endpoints else 2
        if counts[r, c] < need:
            violations.append(RuleViolation("degree-low", tuple(cell)))

    row_any = bits.any(axis=1)
    col_any = bits.any(axis=0)
    for r in np.nonzero(~row_any)[0]:
        violations.append(RuleViolation("row-empty", (int(r) + 1,)))
    for c in np.nonzero(~col_any)[0]:
        violations.append(RuleViolation("col-empty", (int(c) + 1,)))

    return CorridorReport(ok=not violations, violations=tuple(violations))


def extract_path(mask: CorridorMask) -> list[Cell]:
    """Walk the active set from departure to destination as a simple path.

    Raises ValueError when the active set is not a single simple path
    covering every active cell (branching, gaps, detached cycles, or a walk
    that ends before the destination all fail).
    """
    total = mask.count
    if not mask.is_active(mask.departure) or not mask.is_active(mask.destination):
        raise ValueError("endpoints are not active; mask is not a corridor")
    path = [mask.departure]
    prev: Cell | None = None
    cur = mask.departure
    while cur != mask.destination:
        nxt = [c for c in neighbors4(cur, mask.side) if mask.is_active(c) and c != prev]
        if len(nxt) != 1:
            raise ValueError(
                f"active set is not a simple path: cell {tuple(cur)} has "
                f"{len(nxt)} ways forward"
            )
        prev, cur = cur, nxt[0]
        path.append(cur)
        if len(path) > total:
            raise ValueError("walk revisits cells; active set contains a cycle")
    if len(path) != total:
        raise ValueError(
            f"walk covers {len(path)} of {total} active cells; "
            "mask contains cells detached from the path"
        )
    return path


class SegmentEndpoints(NamedTuple):
    """Block-local start/dest cells for one coarse cell of a coarse path."""

    start: Cell
    dest: Cell


def _edge_cell(direction: Cell, factor: int) -> Cell:
    """Midpoint cell of the block edge facing a neighbor offset direction."""
    mid = (factor + 1) // 2
    di, dj = direction
    if di == -1:
        return Cell(1, mid)
    if di == 1:
        return Cell(factor, mid)
    if dj == -1:
        return Cell(mid, 1)
    if dj == 1:
        return Cell(mid, factor)
    raise ValueError(f"direction {tuple(direction)} is not a unit grid step")


def segment_endpoints(
    coarse_path: Sequence[Cell], cell: Cell, factor: int
) -> SegmentEndpoints:
    """Start/dest cells of a block, given its position along the coarse path.

    The first block starts at local (1, 1) and the last ends at local
    (factor, factor); interior transitions use the midpoint cell of the
    shared block edge, so consecutive blocks meet at facing cells.  For
    factor <= 2 a turning block can map both endpoints to the same corner
    cell, which degenerates to a single-cell sub-path.
    """
    cell = Cell(*cell)
    path = [Cell(*c) for c in coarse_path]
    try:
        idx = path.index(cell)
    except ValueError:
        raise ValueError(f"coarse cell {tuple(cell)} is not on the coarse path") from None

    if idx == 0:
        start = Cell(1, 1)
    else:
        p = path[idx - 1]
        start = _edge_cell(Cell(p.i - cell.i, p.j - cell.j), factor)
    if idx == len(path) - 1:
        dest = Cell(factor, factor)
    else:
        s = path[idx + 1]
        dest = _edge_cell(Cell(s.i - cell.i, s.j - cell.j), factor)
    if start == dest and factor > 2:
        raise ValueError(
            f"degenerate endpoints {tuple(start)} in a factor-{factor} block"
        )
    return SegmentEndpoints(start=start, dest=dest)
