"""Radio bookkeeping: unit conversions, link formulas, feasibility checks.

All internal math is in linear units (watts, linear gains); dB/dBm appear
only at the API boundary via the conversion helpers.  Threshold comparisons
use >= with a 1e-12 relative slack so that values crossing a threshold
within roundoff count as satisfied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, NamedTuple

import numpy as np

if TYPE_CHECKING:
    from .grid import Cell, CorridorMask, CorridorReport

SPEED_OF_LIGHT = 299792458.0
FOUR_PI_CUBED = (4.0 * math.pi) ** 3
REL_TOL = 1e-12

# Minimum number of deployed stations that must see a corridor cell.
LOS_COVER_COUNT = 3


def db_to_linear(value_db):
    """Power ratio from dB; works elementwise on arrays."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value):
    """Power ratio to dB; works elementwise on arrays."""
    return 10.0 * np.log10(value)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    return 10.0 * math.log10(value_w) + 30.0


def meets(value: float, threshold: float) -> bool:
    """Threshold predicate with 1e-12 relative slack (thresholds > 0)."""
    return value >= threshold * (1.0 - REL_TOL)


@dataclass(frozen=True)
class RadioParams:
    """Link-budget constants shared by sensing and communication checks.

    ``big_m`` is the constant used to deactivate indicator rows in the
    integer models; None means "derive a safe value per instance".
    """

    tx_power: float
    tx_gain: float
    noise: float
    wavelength: float
    rcs: float
    sense_threshold: float
    sinr_threshold: float
    big_m: float | None = None

    def __post_init__(self):
        for name in ("tx_power", "tx_gain", "noise", "wavelength", "rcs",
                     "sense_threshold", "sinr_threshold"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive finite number, got {v}")
        # directional transmit gain; unity would mean no beamforming at all
        if self.tx_gain <= 1.0:
            raise ValueError(f"tx_gain must exceed 1, got {self.tx_gain}")
        if self.big_m is not None and not (self.big_m > 0.0 and math.isfinite(self.big_m)):
            raise ValueError(f"big_m must be positive when given, got {self.big_m}")

    @classmethod
    def from_db(
        cls,
        tx_power_dbm: float = 30.0,
        tx_gain_db: float = 12.0,
        noise_dbm: float = -110.0,
        carrier_hz: float = 1.0e9,
        rcs_m2: float = 1.0,
        sense_threshold_dbm: float = -75.0,
        sinr_threshold_db: float = 3.0,
        big_m: float | None = None,
    ) -> "RadioParams":
        return cls(
            tx_power=dbm_to_watts(tx_power_dbm),
            tx_gain=db_to_linear(tx_gain_db),
            noise=dbm_to_watts(noise_dbm),
            wavelength=SPEED_OF_LIGHT / carrier_hz,
            rcs=rcs_m2,
            sense_threshold=dbm_to_watts(sense_threshold_dbm),
            sinr_threshold=db_to_linear(sinr_threshold_db),
            big_m=big_m,
        )


@dataclass(frozen=True)
class CostWeights:
    """Objective weights for corridor length and station count."""

    alpha_length: float = 0.5
    alpha_sites: float = 0.5

    def __post_init__(self):
        if self.alpha_length < 0.0 or self.alpha_sites < 0.0:
            raise ValueError("cost weights must be non-negative")
        if abs(self.alpha_length + self.alpha_sites - 1.0) > 1e-9:
            raise ValueError("cost weights must sum to 1")


@dataclass(frozen=True)
class Deployment:
    """Binary on/off pattern over the candidate station sites."""

    flags: tuple[int, ...]

    def __post_init__(self):
        if not self.flags:
            raise ValueError("deployment needs at least one candidate site")
        if any(f not in (0, 1) for f in self.flags):
            raise ValueError("deployment flags must be 0 or 1")

    @classmethod
    def from_sites(cls, site_indices: Iterable[int], num_sites: int) -> "Deployment":
        flags = [0] * num_sites
        for k in site_indices:
            if not 0 <= k < num_sites:
                raise ValueError(f"site index {k} outside 0..{num_sites - 1}")
            flags[k] = 1
        return cls(tuple(flags))

    @property
    def count(self) -> int:
        return sum(self.flags)

    @property
    def deployed_sites(self) -> tuple[int, ...]:
        return tuple(k for k, f in enumerate(self.flags) if f)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.flags, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class CellStatsView:
    """Per-cell channel statistics over all sites, ready for the predicates.

    ``h_min``/``h_max`` are the effective (possibly trimmed) extremes used by
    the worst-case SINR; the raw untrimmed extremes are kept alongside for
    diagnostics.  ``echo`` is the minimum monostatic echo power seen anywhere
    in the cell (zero where the site has no line of sight), and ``los`` the
    per-site visibility indicator.
    """

    h_min: np.ndarray
    h_max: np.ndarray
    h_min_raw: np.ndarray
    h_max_raw: np.ndarray
    los: np.ndarray
    echo: np.ndarray

    @property
    def num_sites(self) -> int:
        return int(self.h_min.shape[0])


def echo_power(distance, params: RadioParams):
    """Monostatic echo power at a given range (works elementwise)."""
    d = np.asarray(distance, dtype=np.float64)
    num = params.tx_power * params.tx_gain * params.wavelength**2 * params.rcs
    out = num / (FOUR_PI_CUBED * d**4)
    return out if out.ndim else float(out)


def point_sinr(k: int, gains, deployment: Deployment, params: RadioParams) -> float:
    """Downlink SINR from site k at one point, given per-site gains there."""
    gains = np.asarray(gains, dtype=np.float64)
    delta = deployment.as_array()
    if delta.shape != gains.shape:
        raise ValueError("deployment size does not match gain vector")
    if not deployment.flags[k]:
        return 0.0
    interference = float(np.dot(delta, gains) - delta[k] * gains[k]) * params.tx_power
    signal = params.tx_power * params.tx_gain * gains[k]
    return signal / (interference + params.noise)


def worst_case_sinr(
    k: int, view: CellStatsView, deployment: Deployment, params: RadioParams
) -> float:
    """Pessimistic cell-level SINR from site k: weakest signal sample
    against the strongest sample of every active interferer."""
    if not deployment.flags[k]:
        return 0.0
    delta = deployment.as_array()
    interference = float(np.dot(delta, view.h_max) - delta[k] * view.h_max[k])
    signal = params.tx_power * params.tx_gain * view.h_min[k]
    return signal / (params.tx_power * interference + params.noise)


def cell_best_sinr(view: CellStatsView, deployment: Deployment, params: RadioParams) -> float:
    """Best worst-case SINR over the deployed sites (0 if none deployed)."""
    best = 0.0
    for k in deployment.deployed_sites:
        best = max(best, worst_case_sinr(k, view, deployment, params))
    return best


class FeasibilityFlags(NamedTuple):
    sensing_ok: bool
    los_ok: bool
    sinr_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.sensing_ok and self.los_ok and self.sinr_ok


def cell_feasible(
    view: CellStatsView, deployment: Deployment, params: RadioParams
) -> FeasibilityFlags:
    """The three per-cell corridor requirements under a given deployment."""
    delta = deployment.as_array()
    sensing = float(np.dot(delta, view.echo))
    los = int(np.dot(delta, view.los.astype(np.float64)))
    return FeasibilityFlags(
        sensing_ok=meets(sensing, params.sense_threshold),
        los_ok=los >= LOS_COVER_COUNT,
        sinr_ok=meets(cell_best_sinr(view, deployment, params), params.sinr_threshold),
    )


@dataclass(frozen=True)
class SolutionReport:
    """Outcome of verifying a corridor/deployment pair against the rules."""

    ok: bool
    corridor: "CorridorReport"
    radio_violations: tuple[tuple["Cell", str], ...]


def verify_solution(
    mask: "CorridorMask", deployment: Deployment, stats, params: RadioParams
) -> SolutionReport:
    """Re-check every corridor rule and every active cell's radio needs.

    ``stats`` is a per-cell statistics source exposing ``cell(cell) ->
    CellStatsView`` over the same lattice side as the mask.
    """
    from .grid import validate_corridor

    corridor = validate_corridor(mask)
    radio: list[tuple] = []
    for cell in mask.active_cells():
        flags = cell_feasible(stats.cell(cell), deployment, params)
        if not flags.sensing_ok:
            radio.append((cell, "sensing"))
        if not flags.los_ok:
            radio.append((cell, "los"))
        if not flags.sinr_ok:
            radio.append((cell, "sinr"))
    return SolutionReport(
        ok=corridor.ok and not radio,
        corridor=corridor,
        radio_violations=tuple(radio),
    )


def solution_cost(mask: "CorridorMask", deployment: Deployment, weights: CostWeights) -> float:
    """Weighted sum of corridor cell count and deployed station count."""
    return weights.alpha_length * mask.count + weights.alpha_sites * deployment.count


def safe_big_m(stats, params: RadioParams) -> float:
    """Smallest deactivation constant that can never cut a feasible point.

    For every (site, cell) pair the indicator row's left side is at most
    ``sinr_threshold * (P * sum of all other sites' strongest gains + noise)``
    minus a positive term, so the maximum of that expression over pairs is a
    safe row deactivation bound.  ``stats`` must expose ``h_max`` with shape
    (num_sites, side, side).

    The exact maximum sits on the feasibility boundary of the binding row,
    where summation order decides the comparison; a hair of headroom keeps
    the deactivated row satisfiable under any evaluation order.
    """
    h_max = np.asarray(stats.h_max, dtype=np.float64)
    total = h_max.sum(axis=0)
    worst_interf = total - h_max.min(axis=0)
    worst = float(
        params.sinr_threshold * (params.tx_power * worst_interf.max() + params.noise)
    )
    return worst * (1.0 + 1e-9)
