"""Command-line front end.

Verbs cover the full workflow: generate a scene, precompute per-site channel
maps, run the planner (or a baseline), export results, and sweep a parameter.
Every verb reads one scenario JSON file so a run is reproducible from the
config echo embedded in its output bundle.

Exit codes: 0 solved, 1 usage or input errors, 2 infeasible (or a run that
failed verification), 3 solver budget exhausted without a solution.
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import chanmap, ilp, metrics, planner
from .chanmap import ChannelMap, SampleLattice
from .grid import Cell, CoarseSpec, CorridorMask, GridSpec, extract_path
from .metrics import CostWeights, Deployment, RadioParams
from .scene import (
    GainModel,
    Scene,
    SceneGenConfig,
    SceneGenerationError,
    generate_scene,
    load_scene,
    save_scene,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_BUDGET = 3

BUNDLE_FORMAT = "skylane-plan-bundle"
MANIFEST_FORMAT = "skylane-ckm-manifest"

SWEEP_PARAMS = ("sense_threshold_dbm", "sinr_threshold_db", "alpha_length")


class CliError(Exception):
    """Bad usage or bad input files; maps to exit code 1."""


class ScenarioError(CliError):
    """Scenario config problem, message names the offending field."""


# --- scenario config ----------------------------------------------------------

_DEFAULTS: dict = {
    "scene": {
        "bounds": [0.0, 0.0, 500.0, 500.0],
        "building_count": 40,
        "footprint": [20.0, 60.0],
        "height": [10.0, 60.0],
        "clearance": 5.0,
        "sites": 30,
        "bs_height": 25.0,
        "seed": 0,
        "max_tries": 500,
    },
    "grid": {
        "n": 100,
        "origin": [0.0, 0.0],
        "altitude": 150.0,
        "cell": [5.0, 5.0, 5.0],
    },
    "coarse": {"m": 10},
    "lattice": {"samples_per_edge": 4, "vertical_samples": 2},
    "channel": {
        "wall_loss_base_db": 20.0,
        "wall_loss_per_wall_db": 10.0,
        "cell_los_rule": "all",
    },
    "radio": {
        "tx_power_dbm": 30.0,
        "tx_gain_db": 12.0,
        "noise_dbm": -110.0,
        "carrier_hz": 1.0e9,
        "rcs_m2": 1.0,
        "sense_threshold_dbm": -75.0,
        "sinr_threshold_db": 3.0,
        "big_m": "auto",
    },
    "plan": {
        "alpha_length": 0.5,
        "alpha_sites": 0.5,
        "trim_fraction": 0.10,
        "fine_trim_fraction": 0.0,
        "max_ao_iterations": 10,
        "coarse_node_budget": 5_000_000,
        "block_node_budget": 500_000,
        "deploy_node_budget": 1_000_000,
        "corridor_node_budget": 2_000_000,
        "baseline_trials_per_size": 50,
        "path_retry_limit": 25,
    },
}


def _merge_defaults(data: dict) -> dict:
    """Overlay user values on the defaults; reject unknown keys by path."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario config must be a JSON object")
    out = copy.deepcopy(_DEFAULTS)
    for section, values in data.items():
        if section not in out:
            raise ScenarioError(f"unknown config section {section!r}")
        if not isinstance(values, dict):
            raise ScenarioError(f"{section} must be a JSON object")
        for key, value in values.items():
            if key not in out[section]:
                raise ScenarioError(f"unknown config field {section}.{key}")
            out[section][key] = value
    return out


def _num(resolved: dict, section: str, key: str, lo=None, hi=None) -> float:
    value = resolved[section][key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{section}.{key} must be a number")
    value = float(value)
    if lo is not None and value < lo:
        raise ScenarioError(f"{section}.{key} must be >= {lo}")
    if hi is not None and value > hi:
        raise ScenarioError(f"{section}.{key} must be <= {hi}")
    return value


def _int(resolved: dict, section: str, key: str, lo=None) -> int:
    value = resolved[section][key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{section}.{key} must be an integer")
    if lo is not None and value < lo:
        raise ScenarioError(f"{section}.{key} must be >= {lo}")
    return value


def _pair(resolved: dict, section: str, key: str) -> tuple[float, float]:
    value = resolved[section][key]
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        raise ScenarioError(f"{section}.{key} must be a pair of numbers")
    return float(value[0]), float(value[1])


class Scenario:
    """Resolved scenario: typed objects plus the raw dict for echoing."""

    def __init__(self, resolved: dict):
        self.raw = resolved

        bounds = resolved["scene"]["bounds"]
        if not isinstance(bounds, (list, tuple)) or len(bounds) != 4:
            raise ScenarioError("scene.bounds must have 4 numbers")
        fp = _pair(resolved, "scene", "footprint")
        hh = _pair(resolved, "scene", "height")
        try:
            self.scene_cfg = SceneGenConfig(
                bounds=tuple(float(v) for v in bounds),
                building_count=_int(resolved, "scene", "building_count", lo=0),
                footprint_min=fp[0],
                footprint_max=fp[1],
                height_min=hh[0],
                height_max=hh[1],
                clearance=_num(resolved, "scene", "clearance", lo=0.0),
                site_count=_int(resolved, "scene", "sites", lo=1),
                site_height=_num(resolved, "scene", "bs_height", lo=0.0),
                seed=_int(resolved, "scene", "seed", lo=0),
                max_tries=_int(resolved, "scene", "max_tries", lo=1),
            )
        except ValueError as exc:
            raise ScenarioError(f"scene: {exc}") from None

        origin = _pair(resolved, "grid", "origin")
        cell = resolved["grid"]["cell"]
        if not isinstance(cell, (list, tuple)) or len(cell) != 3:
            raise ScenarioError("grid.cell must have 3 numbers (dx, dy, dz)")
        try:
            self.grid = GridSpec(
                origin_x=origin[0],
                origin_y=origin[1],
                altitude=_num(resolved, "grid", "altitude", lo=0.0),
                n=_int(resolved, "grid", "n", lo=2),
                dx=float(cell[0]),
                dy=float(cell[1]),
                dz=float(cell[2]),
            )
        except ValueError as exc:
            raise ScenarioError(f"grid: {exc}") from None

        try:
            self.coarse = CoarseSpec.for_grid(self.grid, _int(resolved, "coarse", "m", lo=2))
        except ValueError as exc:
            raise ScenarioError(f"coarse.m: {exc}") from None

        try:
            self.lattice = SampleLattice(
                samples_per_edge=_int(resolved, "lattice", "samples_per_edge", lo=2),
                vertical_samples=_int(resolved, "lattice", "vertical_samples", lo=2),
            )
        except ValueError as exc:
            raise ScenarioError(f"lattice: {exc}") from None

        big_m = resolved["radio"]["big_m"]
        if big_m == "auto":
            big_m_value = None
        elif isinstance(big_m, (int, float)) and not isinstance(big_m, bool):
            big_m_value = float(big_m)
        else:
            raise ScenarioError('radio.big_m must be "auto" or a number')
        try:
            self.radio = RadioParams.from_db(
                tx_power_dbm=_num(resolved, "radio", "tx_power_dbm"),
                tx_gain_db=_num(resolved, "radio", "tx_gain_db"),
                noise_dbm=_num(resolved, "radio", "noise_dbm"),
                carrier_hz=_num(resolved, "radio", "carrier_hz", lo=1.0),
                rcs_m2=_num(resolved, "radio", "rcs_m2"),
                sense_threshold_dbm=_num(resolved, "radio", "sense_threshold_dbm"),
                sinr_threshold_db=_num(resolved, "radio", "sinr_threshold_db"),
                big_m=big_m_value,
            )
        except ValueError as exc:
            raise ScenarioError(f"radio: {exc}") from None

        self.gain_model = GainModel(
            wavelength=self.radio.wavelength,
            wall_loss_base_db=_num(resolved, "channel", "wall_loss_base_db", lo=0.0),
            wall_loss_per_wall_db=_num(resolved, "channel", "wall_loss_per_wall_db", lo=0.0),
        )
        self.los_rule = resolved["channel"]["cell_los_rule"]
        if self.los_rule not in chanmap.LOS_RULES:
            raise ScenarioError(
                f"channel.cell_los_rule must be one of {chanmap.LOS_RULES}"
            )

        try:
            weights = CostWeights(
                alpha_length=_num(resolved, "plan", "alpha_length", lo=0.0, hi=1.0),
                alpha_sites=_num(resolved, "plan", "alpha_sites", lo=0.0, hi=1.0),
            )
            self.plan = planner.PlanConfig(
                weights=weights,
                radio=self.radio,
                coarse_trim=_num(resolved, "plan", "trim_fraction", lo=0.0, hi=0.49),
                fine_trim=_num(resolved, "plan", "fine_trim_fraction", lo=0.0, hi=0.49),
                los_rule=self.los_rule,
                max_ao_iterations=_int(resolved, "plan", "max_ao_iterations", lo=1),
                coarse_node_budget=_int(resolved, "plan", "coarse_node_budget", lo=1),
                block_node_budget=_int(resolved, "plan", "block_node_budget", lo=1),
                deploy_node_budget=_int(resolved, "plan", "deploy_node_budget", lo=1),
                corridor_node_budget=_int(resolved, "plan", "corridor_node_budget", lo=1),
                baseline_trials_per_size=_int(
                    resolved, "plan", "baseline_trials_per_size", lo=1
                ),
                path_retry_limit=_int(resolved, "plan", "path_retry_limit", lo=1),
            )
        except ValueError as exc:
            raise ScenarioError(f"plan: {exc}") from None


def load_scenario(path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}") from None
    return Scenario(_merge_defaults(data))


# --- shared file helpers ------------------------------------------------------


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_json(path, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {what} {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{what} {path} is not valid JSON: {exc}") from None


def _load_scene(path) -> Scene:
    try:
        return load_scene(path)
    except OSError as exc:
        raise CliError(f"cannot read scene {path}: {exc}") from None
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CliError(f"scene {path} is invalid: {exc}") from None


def _map_name(site_index: int) -> str:
    return f"site_{site_index:03d}.ckm"


def load_maps(maps_dir, expected: int) -> list[ChannelMap]:
    """Load site_*.ckm files for sites 0..expected-1 from a directory."""
    maps = []
    for k in range(expected):
        path = Path(maps_dir) / _map_name(k)
        if not path.exists():
            raise CliError(f"missing channel map {path}")
        try:
            maps.append(ChannelMap.load(path))
        except chanmap.CkmFormatError as exc:
            raise CliError(f"channel map {path} is corrupt: {exc}") from None
    return maps


def _build_stats(
    scenario: Scenario, scene: Scene, maps: Sequence[ChannelMap]
) -> tuple:
    coarse = chanmap.coarse_stats(
        maps,
        scene,
        scenario.grid,
        scenario.coarse,
        scenario.radio,
        trim_fraction=scenario.plan.coarse_trim,
        los_rule=scenario.los_rule,
    )
    fine = chanmap.fine_stats(
        maps,
        scene,
        scenario.grid,
        scenario.radio,
        trim_fraction=scenario.plan.fine_trim,
        los_rule=scenario.los_rule,
    )
    return coarse, fine


# --- result bundles -----------------------------------------------------------


def _mask_to_dict(mask: CorridorMask | None) -> dict | None:
    if mask is None:
        return None
    return {
        "side": mask.side,
        "departure": list(mask.departure),
        "destination": list(mask.destination),
        "rows": mask.to_text().split("\n"),
    }


def _mask_from_dict(data: dict) -> CorridorMask:
    return CorridorMask.from_text(
        "\n".join(data["rows"]),
        Cell(*data["departure"]),
        Cell(*data["destination"]),
    )


def result_bundle(
    scenario: Scenario,
    result: planner.PlanResult,
    scene_path,
    maps_dir,
    seed: int | None,
) -> dict:
    return {
        "format": BUNDLE_FORMAT,
        "version": 1,
        "method": result.method,
        "status": result.status,
        "seed": seed,
        "config": scenario.raw,
        "inputs": {
            "scene_path": str(scene_path),
            "scene_sha256": _sha256(scene_path),
            "maps_dir": str(maps_dir),
        },
        "result": {
            "final_cost": result.final_cost,
            "iterations": result.iterations,
            "cost_trace": list(result.cost_trace),
            "corridor": _mask_to_dict(result.mask),
            "deployment": list(result.deployment.flags) if result.deployment else None,
            "coarse_corridor": _mask_to_dict(result.coarse_mask),
            "coarse_deployment": (
                list(result.coarse_deployment.flags)
                if result.coarse_deployment
                else None
            ),
            "subproblems": [s.as_dict() for s in result.subproblems],
            "message": result.message,
        },
    }


def _status_exit(status: str) -> int:
    if status == planner.FEASIBLE:
        return EXIT_OK
    if status == planner.BUDGET_EXHAUSTED:
        return EXIT_BUDGET
    return EXIT_INFEASIBLE


# --- verbs --------------------------------------------------------------------


def cmd_scene_gen(args) -> int:
    scenario = load_scenario(args.config)
    try:
        scene = generate_scene(scenario.scene_cfg)
    except SceneGenerationError as exc:
        raise CliError(str(exc)) from None
    save_scene(scene, args.out)
    print(
        f"scene: {len(scene.buildings)} buildings, {len(scene.sites)} candidate "
        f"sites, seed {scene.seed} -> {args.out}"
    )
    return EXIT_OK


def cmd_ckm_build(args) -> int:
    scenario = load_scenario(args.config)
    scene = _load_scene(args.scene)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for k in range(len(scene.sites)):
        cmap = chanmap.build_channel_map(
            k, scene, scenario.grid, scenario.lattice, scenario.gain_model
        )
        path = out_dir / _map_name(k)
        cmap.save(path)
        entries.append({"site": k, "file": path.name, "sha256": _sha256(path)})
        logger.info("wrote %s", path)

    manifest = {
        "format": MANIFEST_FORMAT,
        "version": 1,
        "scene_sha256": _sha256(args.scene),
        "grid": scenario.raw["grid"],
        "lattice": scenario.raw["lattice"],
        "channel": scenario.raw["channel"],
        "maps": entries,
    }
    _write_json(out_dir / "manifest.json", manifest)
    print(f"channel maps: {len(entries)} files -> {out_dir}")
    return EXIT_OK


def _run_method(
    scenario: Scenario, scene: Scene, maps: Sequence[ChannelMap],
    method: str, seed: int, mps_dir=None,
) -> planner.PlanResult:
    coarse_stats, fine_stats = _build_stats(scenario, scene, maps)
    config = scenario.plan
    if mps_dir is not None:
        config = dataclasses.replace(config, mps_dir=str(mps_dir))
    if method == "joint":
        return planner.plan_joint(coarse_stats, fine_stats, scenario.coarse, config)
    if method == "astar":
        return planner.baseline_astar(fine_stats, config)
    if method == "random":
        return planner.baseline_random(fine_stats, config, seed=seed)
    raise CliError(f"unknown method {method!r}")


def cmd_plan(args) -> int:
    scenario = load_scenario(args.config)
    scene = _load_scene(args.scene)
    maps = load_maps(args.maps, len(scene.sites))
    result = _run_method(
        scenario, scene, maps, args.method, args.seed, mps_dir=args.mps_dir
    )
    bundle = result_bundle(scenario, result, args.scene, args.maps, args.seed)
    if args.out:
        _write_json(args.out, bundle)
    cells = result.mask.count if result.mask is not None else "-"
    sites = result.deployment.count if result.deployment is not None else "-"
    cost = "-" if result.final_cost is None else f"{result.final_cost:g}"
    print(
        f"{args.method}: {result.status} (cells {cells}, sites {sites}, cost {cost})"
    )
    if result.message:
        print(result.message)
    return _status_exit(result.status)


def _heatmap_values(kind: str, scenario: Scenario, deployment, fine_stats) -> np.ndarray:
    delta = deployment.as_array()
    radio = scenario.radio
    with np.errstate(divide="ignore"):
        if kind == "sensing-heatmap":
            total = np.einsum("k,kij->ij", delta, fine_stats.echo)
            return metrics.linear_to_db(total / 1e-3)
        dep_total = np.einsum("k,kij->ij", delta, fine_stats.h_max)
        signal = radio.tx_power * radio.tx_gain * fine_stats.h_min
        interf = dep_total[None, :, :] - delta[:, None, None] * fine_stats.h_max
        ratio = signal / (radio.tx_power * interf + radio.noise)
        ratio = np.where(delta[:, None, None] > 0.0, ratio, 0.0)
        return metrics.linear_to_db(ratio.max(axis=0))


def _write_matrix_csv(path, values: np.ndarray) -> None:
    lines = [",".join(f"{v:.6g}" for v in row) for row in values]
    Path(path).write_text("\n".join(lines) + "\n")


def _write_pgm(path, values: np.ndarray, vmin: float, vmax: float) -> None:
    """8-bit grayscale, row 1 of the grid on top, dB range clipped."""
    with np.errstate(invalid="ignore"):
        scaled = np.clip((values - vmin) / (vmax - vmin), 0.0, 1.0)
    pixels = np.rint(np.nan_to_num(scaled, nan=0.0) * 255.0).astype(np.uint8)
    h, w = pixels.shape
    rows = [" ".join(str(int(v)) for v in row) for row in pixels]
    Path(path).write_text("\n".join(["P2", f"{w} {h}", "255", *rows]) + "\n")


def cmd_export(args) -> int:
    bundle = _read_json(args.bundle, "bundle")
    if bundle.get("format") != BUNDLE_FORMAT:
        raise CliError(f"{args.bundle} is not a plan bundle")
    result = bundle["result"]
    out = Path(args.out)

    if args.kind == "corridor-csv":
        if result["corridor"] is None:
            raise CliError("bundle holds no corridor to export")
        mask = _mask_from_dict(result["corridor"])
        try:
            cells = extract_path(mask)
        except ValueError:
            cells = mask.active_cells()
        lines = ["i,j"] + [f"{c.i},{c.j}" for c in cells]
        out.write_text("\n".join(lines) + "\n")
    elif args.kind == "deployment-csv":
        if result["deployment"] is None:
            raise CliError("bundle holds no deployment to export")
        flags = result["deployment"]
        if args.scene:
            scene = _load_scene(args.scene)
            if len(scene.sites) != len(flags):
                raise CliError("scene site count does not match the bundle")
            lines = ["site,deployed,x,y,z"] + [
                f"{k},{f},{x:g},{y:g},{z:g}"
                for k, (f, (x, y, z)) in enumerate(zip(flags, scene.sites))
            ]
        else:
            lines = ["site,deployed"] + [f"{k},{f}" for k, f in enumerate(flags)]
        out.write_text("\n".join(lines) + "\n")
    elif args.kind in ("sensing-heatmap", "sinr-heatmap"):
        if not args.scene or not args.maps:
            raise CliError(f"{args.kind} needs --scene and --maps")
        if result["deployment"] is None:
            raise CliError("bundle holds no deployment to export")
        scenario = Scenario(_merge_defaults(bundle["config"]))
        scene = _load_scene(args.scene)
        maps = load_maps(args.maps, len(scene.sites))
        _, fine_stats = _build_stats(scenario, scene, maps)
        deployment = Deployment(tuple(int(f) for f in result["deployment"]))
        values = _heatmap_values(args.kind, scenario, deployment, fine_stats)
        if args.kind == "sensing-heatmap":
            vmin = -110.0 if args.db_min is None else args.db_min
            vmax = -60.0 if args.db_max is None else args.db_max
        else:
            vmin = -10.0 if args.db_min is None else args.db_min
            vmax = 30.0 if args.db_max is None else args.db_max
        _write_matrix_csv(out.with_suffix(".csv"), values)
        _write_pgm(out.with_suffix(".pgm"), values, vmin, vmax)
    else:
        raise CliError(f"unknown export kind {args.kind!r}")
    print(f"export {args.kind} -> {out}")
    return EXIT_OK


def _apply_sweep_value(raw: dict, param: str, value: float) -> dict:
    data = copy.deepcopy(raw)
    if param == "alpha_length":
        data["plan"]["alpha_length"] = value
        data["plan"]["alpha_sites"] = 1.0 - value
    else:
        data["radio"][param] = value
    return data


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.config)
    scene = _load_scene(args.scene)
    maps = load_maps(args.maps, len(scene.sites))
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise CliError("--values must be a comma-separated list of numbers") from None
    if not values:
        raise CliError("--values must name at least one value")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ("joint", "astar", "random"):
            raise CliError(f"unknown method {m!r} in --methods")

    lines = ["param,value,method,status,cells,sites,cost"]
    for value in values:
        swept = Scenario(_merge_defaults(_apply_sweep_value(scenario.raw, args.param, value)))
        for method in methods:
            result = _run_method(swept, scene, maps, method, args.seed)
            cells = "" if result.mask is None else result.mask.count
            sites = "" if result.deployment is None else result.deployment.count
            cost = "" if result.final_cost is None else f"{result.final_cost:g}"
            lines.append(
                f"{args.param},{value:g},{method},{result.status},{cells},{sites},{cost}"
            )
            logger.info("sweep %s=%g %s: %s", args.param, value, method, result.status)
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"sweep {args.param} over {len(values)} values -> {args.out}")
    return EXIT_OK


def cmd_mps_export(args) -> int:
    scenario = load_scenario(args.config)
    scene = _load_scene(args.scene)
    maps = load_maps(args.maps, len(scene.sites))
    coarse_stats, _ = _build_stats(scenario, scene, maps)
    model, _ = planner.build_p2(coarse_stats, scenario.plan)
    ilp.write_mps(model, args.out)
    print(f"coarse joint model ({model.num_variables} variables) -> {args.out}")
    return EXIT_OK


# --- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="skylane", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("scene-gen", help="generate a random scene file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scene_gen)

    p = sub.add_parser("ckm-build", help="precompute per-site channel maps")
    p.add_argument("--config", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_ckm_build)

    p = sub.add_parser("plan", help="run the planner or a baseline")
    p.add_argument("--config", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--maps", required=True)
    p.add_argument("--method", choices=("joint", "astar", "random"), default="joint")
    p.add_argument("--seed", type=int, default=0, help="random-baseline seed")
    p.add_argument("--out", default=None, help="write a result bundle JSON")
    p.add_argument("--mps-dir", default=None, help="dump every solved model as MPS")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("export", help="export artifacts from a result bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument(
        "--kind",
        required=True,
        choices=("corridor-csv", "deployment-csv", "sensing-heatmap", "sinr-heatmap"),
    )
    p.add_argument("--out", required=True)
    p.add_argument("--scene", default=None)
    p.add_argument("--maps", default=None)
    p.add_argument("--db-min", type=float, default=None)
    p.add_argument("--db-max", type=float, default=None)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("sweep", help="re-plan over a parameter range")
    p.add_argument("--config", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--maps", required=True)
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, help="comma-separated numbers")
    p.add_argument("--methods", default="joint,astar,random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mps-export", help="write the coarse joint model as MPS")
    p.add_argument("--config", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--maps", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mps_export)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
