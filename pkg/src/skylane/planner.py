"""Coarse-to-fine corridor/deployment planning and comparison baselines.

The joint planner first solves a coarse grid model that picks a corridor and
a deployment together, then refines each coarse cell into a fine sub-path and
re-optimizes the deployment, alternating the two fine steps until the pair
stops changing.  Two baselines bound the comparison: a sequential design
(shortest corridor first, then deployment) and a random-deployment search.
"""

from __future__ import annotations

import heapq
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ilp, metrics
from .chanmap import LOS_RULES, StatsGrid
from .grid import (
    Cell,
    CoarseSpec,
    CorridorMask,
    SegmentEndpoints,
    extract_path,
    neighbors4,
    segment_endpoints,
)
from .metrics import CostWeights, Deployment, RadioParams

logger = logging.getLogger(__name__)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
BUDGET_EXHAUSTED = "budget_exhausted"
FAILED = "failed"


@dataclass(frozen=True)
class PlanConfig:
    """Planner knobs: objective weights, radio constants, solver budgets."""

    weights: CostWeights
    radio: RadioParams
    coarse_trim: float = 0.10
    fine_trim: float = 0.0
    los_rule: str = "all"
    max_ao_iterations: int = 10
    coarse_node_budget: int = 5_000_000
    block_node_budget: int = 500_000
    deploy_node_budget: int = 1_000_000
    corridor_node_budget: int = 2_000_000
    baseline_trials_per_size: int = 50
    path_retry_limit: int = 25
    mps_dir: str | None = None

    def __post_init__(self):
        for name in (
            "max_ao_iterations",
            "coarse_node_budget",
            "block_node_budget",
            "deploy_node_budget",
            "corridor_node_budget",
            "baseline_trials_per_size",
            "path_retry_limit",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("coarse_trim", "fine_trim"):
            v = getattr(self, name)
            if not 0.0 <= v < 0.5:
                raise ValueError(f"{name} must lie in [0, 0.5), got {v}")
        if self.los_rule not in LOS_RULES:
            raise ValueError(f"los_rule must be one of {LOS_RULES}")


@dataclass(frozen=True)
class SubproblemStat:
    """Solver outcome of one assembled model, for result bundles."""

    name: str
    status: str
    nodes: int
    objective: float | None

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "nodes": self.nodes,
            "objective": self.objective,
        }


@dataclass(frozen=True)
class PlanResult:
    """Outcome of one planning run (joint or baseline)."""

    method: str
    status: str
    mask: CorridorMask | None = None
    deployment: Deployment | None = None
    coarse_mask: CorridorMask | None = None
    coarse_deployment: Deployment | None = None
    cost_trace: tuple[float, ...] = ()
    final_cost: float | None = None
    iterations: int = 0
    subproblems: tuple[SubproblemStat, ...] = ()
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == FEASIBLE


def _maybe_dump(model: ilp.IlpModel, config: PlanConfig, name: str) -> None:
    if config.mps_dir:
        out = Path(config.mps_dir)
        out.mkdir(parents=True, exist_ok=True)
        ilp.write_mps(model, out / f"{name}.mps")


# --- feasibility under a fixed deployment -----------------------------------


@dataclass(frozen=True, eq=False)
class FeasibilityGrid:
    """Per-cell requirement flags over a stats grid for one deployment."""

    sensing: np.ndarray
    los: np.ndarray
    sinr: np.ndarray

    @property
    def all_ok(self) -> np.ndarray:
        return self.sensing & self.los & self.sinr


def feasible_cell_mask(
    deployment: Deployment, stats: StatsGrid, radio: RadioParams
) -> FeasibilityGrid:
    """Vectorized version of metrics.cell_feasible over a whole stats grid."""
    delta = deployment.as_array()
    if delta.shape[0] != stats.num_sites:
        raise ValueError("deployment size does not match the stats grid")
    rel = 1.0 - metrics.REL_TOL

    sensing_sum = np.einsum("k,kij->ij", delta, stats.echo)
    sensing = sensing_sum >= radio.sense_threshold * rel

    los_sum = np.einsum("k,kij->ij", delta, stats.los.astype(np.float64))
    los = los_sum >= metrics.LOS_COVER_COUNT

    dep_total = np.einsum("k,kij->ij", delta, stats.h_max)
    signal = radio.tx_power * radio.tx_gain * stats.h_min
    interference = dep_total[None, :, :] - delta[:, None, None] * stats.h_max
    ratio = signal / (radio.tx_power * interference + radio.noise)
    ratio = np.where(delta[:, None, None] > 0.0, ratio, 0.0)
    sinr = ratio.max(axis=0) >= radio.sinr_threshold * rel

    return FeasibilityGrid(sensing=sensing, los=los, sinr=sinr)


# --- corridor models ---------------------------------------------------------


def build_corridor_model(
    side: int,
    start: Cell,
    dest: Cell,
    allowed: np.ndarray | None = None,
    row_span: tuple[int, int] | None = None,
    col_span: tuple[int, int] | None = None,
    external_links: dict[Cell, int] | None = None,
    name: str = "corridor",
) -> tuple[ilp.IlpModel, np.ndarray]:
    """Shortest-corridor model on a side x side grid.

    The active set must form a simple path: endpoint cells are pinned on,
    every cell may touch at most 2 active neighbors, active interior cells
    need at least 2 (endpoints 1), and every row/column index in the given
    spans (defaults: the full range between the endpoint rows/columns) must
    hold at least one active cell.  ``allowed`` masks cells that may be
    active at all.

    ``external_links`` switches the grid into window mode for block
    refinement: it gives, per cell, how many active neighbors the assembled
    global corridor contributes from outside the window (a terminal endpoint
    of the whole corridor also counts as one consumed link).  Both degree
    rows shrink by that amount, so a cell continuing into the next block
    needs one local neighbor instead of two and may not take a second one.

    Returns the model and the (side, side) variable-index grid.
    """
    model = ilp.IlpModel(name)
    var = np.empty((side, side), dtype=np.int64)
    for i in range(1, side + 1):
        for j in range(1, side + 1):
            var[i - 1, j - 1] = model.add_binary(f"B_{i}_{j}")
    model.set_objective({int(v): 1.0 for v in var.reshape(-1)})

    endpoints = {Cell(*start), Cell(*dest)}
    for c in endpoints:
        model.add_constraint({int(var[c.i - 1, c.j - 1]): 1.0}, "==", 1.0)

    links = {Cell(*c): int(v) for c, v in (external_links or {}).items()}
    for i in range(1, side + 1):
        for j in range(1, side + 1):
            cell = Cell(i, j)
            nbrs = [int(var[c.i - 1, c.j - 1]) for c in neighbors4(cell, side)]
            ext = links.get(cell, 0)
            model.add_constraint({v: 1.0 for v in nbrs}, "<=", 2.0 - ext)
            own = int(var[i - 1, j - 1])
            if external_links is None:
                need = 1.0 if cell in endpoints else 2.0
            else:
                need = max(2.0 - ext, 0.0)
            if need > 0.0:
                coeffs = {v: 1.0 for v in nbrs}
                coeffs[own] = -need
                model.add_constraint(coeffs, ">=", 0.0)

    if row_span is None:
        row_span = (min(start.i, dest.i), max(start.i, dest.i))
    if col_span is None:
        col_span = (min(start.j, dest.j), max(start.j, dest.j))
    for i in range(row_span[0], row_span[1] + 1):
        model.add_constraint({int(v): 1.0 for v in var[i - 1, :]}, ">=", 1.0)
    for j in range(col_span[0], col_span[1] + 1):
        model.add_constraint({int(v): 1.0 for v in var[:, j - 1]}, ">=", 1.0)

    if allowed is not None:
        allowed = np.asarray(allowed, dtype=bool)
        if allowed.shape != (side, side):
            raise ValueError("allowed mask shape does not match the grid side")
        for i, j in zip(*np.nonzero(~allowed)):
            model.add_constraint({int(var[i, j]): 1.0}, "==", 0.0)

    return model, var


def _no_good_cut(model: ilp.IlpModel, var: np.ndarray, bits: np.ndarray) -> None:
    """Exclude exactly this 0/1 pattern of the given variables."""
    coeffs = {}
    active = 0
    for idx, b in zip(var.reshape(-1), bits.reshape(-1)):
        if b:
            coeffs[int(idx)] = -1.0
            active += 1
        else:
            coeffs[int(idx)] = 1.0
    model.add_constraint(coeffs, ">=", 1.0 - active)


def _solve_corridor(
    model: ilp.IlpModel,
    var: np.ndarray,
    start: Cell,
    dest: Cell,
    budget: int,
    retry_limit: int,
) -> tuple[CorridorMask | None, str, int]:
    """Solve a corridor model and insist on a single simple path.

    Cycle-carrying incumbents can only appear when the budget cuts the
    search short (a detached cycle always costs extra cells); each one is
    excluded with a no-good cut and the model is re-solved.
    """
    nodes = 0
    for _ in range(retry_limit):
        res = ilp.solve(model, node_budget=budget)
        nodes += res.nodes
        if res.values is None:
            return None, res.status, nodes
        bits = res.values[var]
        mask = CorridorMask(bits, start, dest)
        try:
            extract_path(mask)
        except ValueError:
            logger.info("corridor incumbent was not a simple path; excluding it")
            _no_good_cut(model, var, bits)
            continue
        return mask, res.status, nodes
    raise RuntimeError(
        f"corridor search produced {retry_limit} non-path incumbents in a row"
    )


# --- coarse joint model ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class P2Layout:
    """Variable-index bookkeeping for the coarse joint model."""

    cell: np.ndarray
    site: np.ndarray
    z: np.ndarray
    w: np.ndarray
    big_m: float


def _resolve_big_m(stats: StatsGrid, radio: RadioParams) -> float:
    safe = metrics.safe_big_m(stats, radio)
    if radio.big_m is None:
        return safe
    if radio.big_m < safe:
        msg = (
            f"configured big_m {radio.big_m:g} is below the safe bound "
            f"{safe:g} for this instance and would cut feasible deployments"
        )
        logger.warning(msg)
        raise ValueError(msg)
    return radio.big_m


def build_p2(stats: StatsGrid, config: PlanConfig) -> tuple[ilp.IlpModel, P2Layout]:
    """Joint corridor+deployment model on the coarse grid.

    Corridor structure rows come from build_corridor_model's rules inlined
    on the coarse side; per-cell requirements couple the corridor bits with
    the deployment through indicator variables: z picks the serving site of
    a cell and w linearizes (site on) AND (cell on) for interference terms.
    """
    radio = config.radio
    m = stats.side
    k_tot = stats.num_sites
    zeta = _resolve_big_m(stats, radio)
    model = ilp.IlpModel("joint-coarse")

    cell = np.empty((m, m), dtype=np.int64)
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            cell[a - 1, b - 1] = model.add_binary(f"B_{a}_{b}")
    site = np.array([model.add_binary(f"S_{k}") for k in range(k_tot)], dtype=np.int64)
    z = np.empty((k_tot, m, m), dtype=np.int64)
    w = np.empty((k_tot, m, m), dtype=np.int64)
    for k in range(k_tot):
        for a in range(1, m + 1):
            for b in range(1, m + 1):
                z[k, a - 1, b - 1] = model.add_binary(f"Z_{k}_{a}_{b}")
    for k in range(k_tot):
        for a in range(1, m + 1):
            for b in range(1, m + 1):
                w[k, a - 1, b - 1] = model.add_binary(f"W_{k}_{a}_{b}")

    obj = {int(v): config.weights.alpha_length for v in cell.reshape(-1)}
    obj.update({int(v): config.weights.alpha_sites for v in site})
    model.set_objective(obj)

    start, dest = Cell(1, 1), Cell(m, m)
    for c in (start, dest):
        model.add_constraint({int(cell[c.i - 1, c.j - 1]): 1.0}, "==", 1.0)
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            cc = Cell(a, b)
            nbrs = [int(cell[c.i - 1, c.j - 1]) for c in neighbors4(cc, m)]
            model.add_constraint({v: 1.0 for v in nbrs}, "<=", 2.0)
            need = 1.0 if cc in (start, dest) else 2.0
            coeffs = {v: 1.0 for v in nbrs}
            coeffs[int(cell[a - 1, b - 1])] = -need
            model.add_constraint(coeffs, ">=", 0.0)
    for a in range(m):
        model.add_constraint({int(v): 1.0 for v in cell[a, :]}, ">=", 1.0)
    for b in range(m):
        model.add_constraint({int(v): 1.0 for v in cell[:, b]}, ">=", 1.0)

    p = radio.tx_power
    for a in range(m):
        for b in range(m):
            own = int(cell[a, b])
            # enough total echo power and enough watching sites
            coeffs = {int(site[k]): float(stats.echo[k, a, b]) for k in range(k_tot)}
            coeffs[own] = -radio.sense_threshold
            model.add_constraint(coeffs, ">=", 0.0)
            coeffs = {int(site[k]): float(stats.los[k, a, b]) for k in range(k_tot)}
            coeffs[own] = -float(metrics.LOS_COVER_COUNT)
            model.add_constraint(coeffs, ">=", 0.0)
            # some deployed site must pass the worst-case SINR test
            model.add_constraint(
                {int(z[k, a, b]): 1.0 for k in range(k_tot)} | {own: -1.0},
                ">=",
                0.0,
            )
            for k in range(k_tot):
                model.add_constraint(
                    {int(z[k, a, b]): 1.0, int(site[k]): -1.0}, "<=", 0.0
                )
                # w = site AND cell, used by the interference terms
                model.add_constraint(
                    {int(w[k, a, b]): 1.0, int(site[k]): -1.0}, "<=", 0.0
                )
                model.add_constraint({int(w[k, a, b]): 1.0, own: -1.0}, "<=", 0.0)
                model.add_constraint(
                    {int(w[k, a, b]): 1.0, int(site[k]): -1.0, own: -1.0},
                    ">=",
                    -1.0,
                )
            for k in range(k_tot):
                # deactivated (z=0) rows lean on zeta being per-instance safe
                coeffs = {
                    int(w[kk, a, b]): radio.sinr_threshold * p * float(stats.h_max[kk, a, b])
                    for kk in range(k_tot)
                    if kk != k
                }
                coeffs[own] = radio.sinr_threshold * radio.noise
                coeffs[int(z[k, a, b])] = zeta
                coeffs[int(site[k])] = -p * radio.tx_gain * float(stats.h_min[k, a, b])
                model.add_constraint(coeffs, "<=", zeta)

    return model, P2Layout(cell=cell, site=site, z=z, w=w, big_m=zeta)


@dataclass(frozen=True)
class CoarseResult:
    status: str
    mask: CorridorMask | None
    deployment: Deployment | None
    objective: float | None
    nodes: int


def solve_coarse(stats: StatsGrid, config: PlanConfig) -> CoarseResult:
    """Solve the coarse joint model to a corridor/deployment pair."""
    model, layout = build_p2(stats, config)
    _maybe_dump(model, config, "coarse-joint")
    m = stats.side
    nodes = 0
    for _ in range(config.path_retry_limit):
        res = ilp.solve(model, node_budget=config.coarse_node_budget)
        nodes += res.nodes
        if res.values is None:
            return CoarseResult(res.status, None, None, None, nodes)
        bits = res.values[layout.cell]
        mask = CorridorMask(bits, Cell(1, 1), Cell(m, m))
        try:
            extract_path(mask)
        except ValueError:
            logger.info("coarse incumbent corridor was not a simple path; excluding it")
            _no_good_cut(model, layout.cell, bits)
            continue
        deployment = Deployment(tuple(int(res.values[v]) for v in layout.site))
        status = FEASIBLE if res.status == "optimal" else res.status
        return CoarseResult(status, mask, deployment, res.objective, nodes)
    raise RuntimeError("coarse search kept returning non-path corridors")


# --- fine refinement ---------------------------------------------------------


def build_p3_1(
    feas_block: np.ndarray,
    endpoints: SegmentEndpoints,
    pred_dir: Cell | None,
    succ_dir: Cell | None,
    name: str = "block",
) -> tuple[ilp.IlpModel, np.ndarray]:
    """Length-minimal sub-path model inside one coarse block.

    ``feas_block`` flags which fine cells of the block are usable under the
    current deployment.  On an edge shared with the previous (next) block
    only the designated start (dest) cell may be active, so independently
    solved blocks always chain into a legal global corridor.  Each crossing
    into an adjacent block (or corridor terminal) consumes one degree slot
    of the start/dest cell via the window-mode degree rows.
    """
    f = feas_block.shape[0]
    allowed = np.asarray(feas_block, dtype=bool).copy()
    # both endpoints stay allowed on a banned edge: with factor 2 the dest
    # midpoint of a turning block lands on the pred edge (and vice versa),
    # and the facing cells across the boundary are banned by the neighbor
    # block's own edge rule, so no unplanned adjacency can form
    keep = {endpoints.start, endpoints.dest}

    def ban_edge(direction: Cell) -> None:
        di, dj = direction
        if di == -1:
            line = [Cell(1, j) for j in range(1, f + 1)]
        elif di == 1:
            line = [Cell(f, j) for j in range(1, f + 1)]
        elif dj == -1:
            line = [Cell(i, 1) for i in range(1, f + 1)]
        else:
            line = [Cell(i, f) for i in range(1, f + 1)]
        for c in line:
            if c not in keep:
                allowed[c.i - 1, c.j - 1] = False

    if pred_dir is not None:
        ban_edge(pred_dir)
    if succ_dir is not None:
        ban_edge(succ_dir)

    links: dict[Cell, int] = {endpoints.start: 1}
    links[endpoints.dest] = links.get(endpoints.dest, 0) + 1

    return build_corridor_model(
        side=f,
        start=endpoints.start,
        dest=endpoints.dest,
        allowed=allowed,
        external_links=links,
        name=name,
    )


def build_p3_2(
    mask: CorridorMask, stats: StatsGrid, config: PlanConfig
) -> tuple[ilp.IlpModel, np.ndarray]:
    """Minimal-deployment model for a fixed fine corridor.

    Serving-site indicators are only created for (site, cell) pairs that
    could pass the SINR test with zero interference; any pair failing that
    test can never carry the indicator, so the presolve is lossless.
    """
    radio = config.radio
    k_tot = stats.num_sites
    zeta = _resolve_big_m(stats, radio)
    model = ilp.IlpModel("deploy-fine")
    site = np.array([model.add_binary(f"S_{k}") for k in range(k_tot)], dtype=np.int64)
    model.set_objective({int(v): 1.0 for v in site})

    p = radio.tx_power
    for cellpos in mask.active_cells():
        a, b = cellpos.i - 1, cellpos.j - 1
        model.add_constraint(
            {int(site[k]): float(stats.echo[k, a, b]) for k in range(k_tot)},
            ">=",
            radio.sense_threshold,
        )
        model.add_constraint(
            {int(site[k]): float(stats.los[k, a, b]) for k in range(k_tot)},
            ">=",
            float(metrics.LOS_COVER_COUNT),
        )
        kept = [
            k
            for k in range(k_tot)
            if metrics.meets(
                p * radio.tx_gain * float(stats.h_min[k, a, b]),
                radio.sinr_threshold * radio.noise,
            )
        ]
        if not kept:
            # no site can serve this cell even alone; make it explicit
            model.add_constraint({}, ">=", 1.0)
            continue
        zvars = {}
        for k in kept:
            zk = model.add_binary(f"Z_{k}_{cellpos.i}_{cellpos.j}")
            zvars[k] = zk
            model.add_constraint({zk: 1.0, int(site[k]): -1.0}, "<=", 0.0)
            coeffs = {
                int(site[kk]): radio.sinr_threshold * p * float(stats.h_max[kk, a, b])
                for kk in range(k_tot)
                if kk != k
            }
            coeffs[zk] = zeta
            coeffs[int(site[k])] = (
                coeffs.get(int(site[k]), 0.0)
                - p * radio.tx_gain * float(stats.h_min[k, a, b])
            )
            model.add_constraint(coeffs, "<=", zeta - radio.sinr_threshold * radio.noise)
        model.add_constraint({zk: 1.0 for zk in zvars.values()}, ">=", 1.0)

    return model, site


def _solve_deployment(
    mask: CorridorMask,
    stats: StatsGrid,
    config: PlanConfig,
    name: str,
    stats_log: list[SubproblemStat],
) -> Deployment | None:
    model, site = build_p3_2(mask, stats, config)
    _maybe_dump(model, config, name)
    res = ilp.solve(model, node_budget=config.deploy_node_budget)
    stats_log.append(SubproblemStat(name, res.status, res.nodes, res.objective))
    if res.values is None:
        return None
    return Deployment(tuple(int(res.values[v]) for v in site))


def _assemble_fine(
    blocks: dict[Cell, np.ndarray], n: int, factor: int
) -> CorridorMask:
    bits = np.zeros((n, n), dtype=np.uint8)
    for ccell, sub in blocks.items():
        r0 = (ccell.i - 1) * factor
        c0 = (ccell.j - 1) * factor
        bits[r0 : r0 + factor, c0 : c0 + factor] = sub
    return CorridorMask(bits, Cell(1, 1), Cell(n, n))


def alternate_optimize(
    coarse: CoarseResult,
    fine_stats: StatsGrid,
    coarse_spec: CoarseSpec,
    config: PlanConfig,
) -> PlanResult:
    """Refine a coarse solution on the fine grid by alternating updates.

    Each iteration re-solves every coarse block's sub-path under the current
    deployment, then re-solves the deployment for the assembled corridor.  A
    new deployment is kept only if the total cost does not increase, and a
    re-solved block only if strictly shorter than its previous sub-path, so
    the recorded cost trace never increases even when node budgets truncate
    a sub-solve.
    """
    if coarse.mask is None or coarse.deployment is None:
        raise ValueError("alternating refinement needs a solved coarse result")
    n = fine_stats.side
    factor = coarse_spec.factor
    coarse_path = extract_path(coarse.mask)
    stats_log: list[SubproblemStat] = []
    trace: list[float] = []

    delta = coarse.deployment
    blocks: dict[Cell, np.ndarray] = {}
    mask: CorridorMask | None = None
    iterations = 0

    for it in range(1, config.max_ao_iterations + 1):
        iterations = it
        feas = feasible_cell_mask(delta, fine_stats, config.radio).all_ok
        new_blocks: dict[Cell, np.ndarray] = {}
        for pos, ccell in enumerate(coarse_path):
            ends = segment_endpoints(coarse_path, ccell, factor)
            pred = coarse_path[pos - 1] if pos > 0 else None
            succ = coarse_path[pos + 1] if pos < len(coarse_path) - 1 else None
            pred_dir = Cell(pred.i - ccell.i, pred.j - ccell.j) if pred else None
            succ_dir = Cell(succ.i - ccell.i, succ.j - ccell.j) if succ else None
            r0 = (ccell.i - 1) * factor
            c0 = (ccell.j - 1) * factor
            sub_feas = feas[r0 : r0 + factor, c0 : c0 + factor]
            name = f"refine-{it}-block-{ccell.i}-{ccell.j}"
            model, var = build_p3_1(sub_feas, ends, pred_dir, succ_dir, name=name)
            _maybe_dump(model, config, name)
            sub, status, nodes = _solve_corridor(
                model, var, ends.start, ends.dest,
                config.block_node_budget, config.path_retry_limit,
            )
            stats_log.append(
                SubproblemStat(name, status, nodes, None if sub is None else float(sub.bits.sum()))
            )
            if sub is None:
                if ccell in blocks:
                    new_blocks[ccell] = blocks[ccell]
                    continue
                return PlanResult(
                    method="joint",
                    status=FAILED,
                    coarse_mask=coarse.mask,
                    coarse_deployment=coarse.deployment,
                    cost_trace=tuple(trace),
                    iterations=it,
                    subproblems=tuple(stats_log),
                    message=(
                        f"block {tuple(ccell)} has no feasible sub-path under "
                        "the coarse deployment"
                    ),
                )
            sub_bits = sub.bits
            if ccell in blocks and blocks[ccell].sum() <= sub_bits.sum():
                new_blocks[ccell] = blocks[ccell]
            else:
                new_blocks[ccell] = sub_bits
        blocks = new_blocks
        new_mask = _assemble_fine(blocks, n, factor)
        trace.append(metrics.solution_cost(new_mask, delta, config.weights))

        cand = _solve_deployment(
            new_mask, fine_stats, config, f"deploy-{it}", stats_log
        )
        if cand is not None and metrics.solution_cost(
            new_mask, cand, config.weights
        ) <= metrics.solution_cost(new_mask, delta, config.weights):
            new_delta = cand
        else:
            new_delta = delta
        trace.append(metrics.solution_cost(new_mask, new_delta, config.weights))

        converged = mask is not None and new_mask == mask and new_delta == delta
        mask = new_mask
        delta = new_delta
        if converged:
            break

    report = metrics.verify_solution(mask, delta, fine_stats, config.radio)
    if not report.ok:
        return PlanResult(
            method="joint",
            status=FAILED,
            mask=mask,
            deployment=delta,
            coarse_mask=coarse.mask,
            coarse_deployment=coarse.deployment,
            cost_trace=tuple(trace),
            iterations=iterations,
            subproblems=tuple(stats_log),
            message=f"refined solution failed verification: {report}",
        )
    return PlanResult(
        method="joint",
        status=FEASIBLE,
        mask=mask,
        deployment=delta,
        coarse_mask=coarse.mask,
        coarse_deployment=coarse.deployment,
        cost_trace=tuple(trace),
        final_cost=metrics.solution_cost(mask, delta, config.weights),
        iterations=iterations,
        subproblems=tuple(stats_log),
    )


def plan_joint(
    coarse_stats: StatsGrid,
    fine_stats: StatsGrid,
    coarse_spec: CoarseSpec,
    config: PlanConfig,
) -> PlanResult:
    """Full coarse-to-fine pipeline."""
    coarse = solve_coarse(coarse_stats, config)
    if coarse.mask is None:
        return PlanResult(
            method="joint",
            status=coarse.status,
            subproblems=(
                SubproblemStat("coarse-joint", coarse.status, coarse.nodes, None),
            ),
            message="coarse joint model found no corridor/deployment pair",
        )
    result = alternate_optimize(coarse, fine_stats, coarse_spec, config)
    stats_log = (
        SubproblemStat("coarse-joint", coarse.status, coarse.nodes, coarse.objective),
    ) + result.subproblems
    return PlanResult(
        method=result.method,
        status=result.status,
        mask=result.mask,
        deployment=result.deployment,
        coarse_mask=result.coarse_mask,
        coarse_deployment=result.coarse_deployment,
        cost_trace=result.cost_trace,
        final_cost=result.final_cost,
        iterations=result.iterations,
        subproblems=stats_log,
        message=result.message,
    )


# --- baselines ---------------------------------------------------------------


def _astar_path(n: int) -> list[Cell]:
    """Deterministic shortest 4-connected path from (1,1) to (n,n)."""
    start, goal = Cell(1, 1), Cell(n, n)
    best_g: dict[Cell, int] = {start: 0}
    parent: dict[Cell, Cell] = {}
    heap: list[tuple[int, int, int, Cell]] = []
    heapq.heappush(heap, (2 * (n - 1), 1, 1, start))
    while heap:
        _, _, _, cur = heapq.heappop(heap)
        if cur == goal:
            path = [cur]
            while cur in parent:
                cur = parent[cur]
                path.append(cur)
            return path[::-1]
        g = best_g[cur]
        for nb in neighbors4(cur, n):
            ng = g + 1
            if ng < best_g.get(nb, 1 << 30):
                best_g[nb] = ng
                parent[nb] = cur
                h = abs(goal.i - nb.i) + abs(goal.j - nb.j)
                heapq.heappush(heap, (ng + h, nb.i, nb.j, nb))
    raise RuntimeError("no path on an open grid; unreachable")


def baseline_astar(fine_stats: StatsGrid, config: PlanConfig) -> PlanResult:
    """Sequential design: shortest corridor first, deployment second."""
    n = fine_stats.side
    path = _astar_path(n)
    mask = CorridorMask.from_cells(path, n)
    stats_log: list[SubproblemStat] = []
    delta = _solve_deployment(mask, fine_stats, config, "astar-deploy", stats_log)
    if delta is None:
        return PlanResult(
            method="astar",
            status=INFEASIBLE if stats_log[-1].status == "infeasible" else BUDGET_EXHAUSTED,
            mask=mask,
            subproblems=tuple(stats_log),
            message="no deployment covers the shortest corridor",
        )
    report = metrics.verify_solution(mask, delta, fine_stats, config.radio)
    cost = metrics.solution_cost(mask, delta, config.weights)
    return PlanResult(
        method="astar",
        status=FEASIBLE if report.ok else FAILED,
        mask=mask,
        deployment=delta,
        cost_trace=(cost,),
        final_cost=cost,
        subproblems=tuple(stats_log),
    )


def _reachable(allowed: np.ndarray, start: Cell, dest: Cell) -> bool:
    n = allowed.shape[0]
    if not allowed[start.i - 1, start.j - 1] or not allowed[dest.i - 1, dest.j - 1]:
        return False
    seen = np.zeros_like(allowed, dtype=bool)
    seen[start.i - 1, start.j - 1] = True
    dq = deque([start])
    while dq:
        cur = dq.popleft()
        if cur == dest:
            return True
        for nb in neighbors4(cur, n):
            if allowed[nb.i - 1, nb.j - 1] and not seen[nb.i - 1, nb.j - 1]:
                seen[nb.i - 1, nb.j - 1] = True
                dq.append(nb)
    return False


def baseline_random(
    fine_stats: StatsGrid, config: PlanConfig, seed: int = 0
) -> PlanResult:
    """Random-deployment search: grow the deployment size until some random
    draw leaves a connected feasible corridor, then take its shortest one."""
    n = fine_stats.side
    k_tot = fine_stats.num_sites
    rng = np.random.default_rng(seed)
    start, dest = Cell(1, 1), Cell(n, n)
    stats_log: list[SubproblemStat] = []
    trials_run = 0
    for size in range(1, k_tot + 1):
        for trial in range(config.baseline_trials_per_size):
            picked = rng.choice(k_tot, size=size, replace=False)
            delta = Deployment.from_sites((int(v) for v in picked), k_tot)
            trials_run += 1
            allowed = feasible_cell_mask(delta, fine_stats, config.radio).all_ok
            if not _reachable(allowed, start, dest):
                continue
            name = f"random-corridor-{size}-{trial}"
            model, var = build_corridor_model(n, start, dest, allowed, name=name)
            _maybe_dump(model, config, name)
            mask, status, nodes = _solve_corridor(
                model, var, start, dest,
                config.corridor_node_budget, config.path_retry_limit,
            )
            stats_log.append(
                SubproblemStat(name, status, nodes, None if mask is None else float(mask.count))
            )
            if mask is None:
                continue
            report = metrics.verify_solution(mask, delta, fine_stats, config.radio)
            cost = metrics.solution_cost(mask, delta, config.weights)
            return PlanResult(
                method="random",
                status=FEASIBLE if report.ok else FAILED,
                mask=mask,
                deployment=delta,
                cost_trace=(cost,),
                final_cost=cost,
                subproblems=tuple(stats_log),
                message=f"accepted after {trials_run} random draws",
            )
    return PlanResult(
        method="random",
        status=INFEASIBLE,
        subproblems=tuple(stats_log),
        message=f"no random deployment of any size worked in {trials_run} draws",
    )
