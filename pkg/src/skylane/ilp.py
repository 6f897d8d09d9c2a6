"""0-1 integer linear models: containers, exact search, MPS round trip.

Models hold binary variables only.  The solver is an exact depth-first
branch-and-bound with activity-bound propagation (see the kernel backends);
it proves optimality or infeasibility unless the node budget runs out, in
which case the best incumbent found so far is returned with a
"budget_exhausted" status.

Rows are solved in a normalized all-"<=" form: each constraint is scaled by
its largest absolute coefficient and equalities become two inequalities.
Feasibility comparisons use a 1e-9 absolute tolerance on those normalized
rows.
"""

from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels

SENSES = ("<=", ">=", "==")
_SENSE_ALIASES = {"<": "<=", ">": ">=", "=": "==", "<=": "<=", ">=": ">=", "==": "=="}

DEFAULT_NODE_BUDGET = 10_000_000

STATUS_NAMES = {
    kernels.STATUS_OPTIMAL: "optimal",
    kernels.STATUS_INFEASIBLE: "infeasible",
    kernels.STATUS_BUDGET: "budget_exhausted",
}


@dataclass(frozen=True)
class Constraint:
    """One linear row: sum(coef * x)` sense `rhs, over variable indices."""

    terms: tuple[tuple[int, float], ...]
    sense: str
    rhs: float


class IlpModel:
    """A 0-1 linear model built incrementally.

    Variables and constraints keep declaration order; that order fixes the
    solver's tie-breaking and the MPS export layout.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        self.constraints: list[Constraint] = []
        self._objective: dict[int, float] = {}

    @property
    def num_variables(self) -> int:
        return len(self._names)

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def add_binary(self, name: str) -> int:
        if not name:
            raise ValueError("variable name must be non-empty")
        if name in self._index:
            raise ValueError(f"duplicate variable name {name!r}")
        idx = len(self._names)
        self._names.append(name)
        self._index[name] = idx
        return idx

    def index_of(self, name: str) -> int:
        return self._index[name]

    def _clean_terms(self, coeffs) -> tuple[tuple[int, float], ...]:
        if isinstance(coeffs, Mapping):
            items = coeffs.items()
        else:
            items = list(coeffs)
        seen: dict[int, float] = {}
        for idx, coef in items:
            idx = int(idx)
            coef = float(coef)
            if not 0 <= idx < len(self._names):
                raise ValueError(f"variable index {idx} out of range")
            if not np.isfinite(coef):
                raise ValueError(f"non-finite coefficient {coef} on variable {idx}")
            if idx in seen:
                raise ValueError(f"variable {idx} appears twice in one row")
            seen[idx] = coef
        return tuple((i, c) for i, c in seen.items() if c != 0.0)

    def add_constraint(self, coeffs, sense: str, rhs: float) -> int:
        """Append a row; returns its index.  Zero coefficients are dropped."""
        if sense not in _SENSE_ALIASES:
            raise ValueError(f"unknown sense {sense!r}")
        rhs = float(rhs)
        if not np.isfinite(rhs):
            raise ValueError(f"non-finite right-hand side {rhs}")
        self.constraints.append(
            Constraint(self._clean_terms(coeffs), _SENSE_ALIASES[sense], rhs)
        )
        return len(self.constraints) - 1

    def set_objective(self, coeffs) -> None:
        """Minimization objective as {variable index: coefficient}."""
        self._objective = dict(self._clean_terms(coeffs))

    def objective_vector(self) -> np.ndarray:
        out = np.zeros(len(self._names), dtype=np.float64)
        for idx, coef in self._objective.items():
            out[idx] = coef
        return out

    def objective_value(self, values: np.ndarray) -> float:
        return float(np.dot(self.objective_vector(), np.asarray(values, dtype=np.float64)))


@dataclass(frozen=True)
class SolveResult:
    status: str
    objective: float | None
    assignment: dict[str, int] | None
    nodes: int
    values: np.ndarray | None = field(repr=False, default=None)

    @property
    def feasible(self) -> bool:
        return self.values is not None


def _normalized_le_rows(model: IlpModel):
    """Expand to scaled "<=" rows; yields (cols, vals, rhs) triples."""
    for con in model.constraints:
        cols = np.array([i for i, _ in con.terms], dtype=np.int32)
        vals = np.array([c for _, c in con.terms], dtype=np.float64)
        scale = float(np.max(np.abs(vals))) if vals.size else 1.0
        if scale == 0.0:
            scale = 1.0
        vals = vals / scale
        rhs = con.rhs / scale
        if con.sense in ("<=", "=="):
            yield cols, vals, rhs
        if con.sense in (">=", "=="):
            yield cols, -vals, -rhs


def _compile(model: IlpModel):
    n = model.num_variables
    rows = list(_normalized_le_rows(model))
    m = len(rows)
    row_ptr = np.zeros(m + 1, dtype=np.int64)
    row_rhs = np.zeros(m, dtype=np.float64)
    for r, (_, vals, rhs) in enumerate(rows):
        row_ptr[r + 1] = row_ptr[r] + len(vals)
        row_rhs[r] = rhs
    nnz = int(row_ptr[m])
    row_cols = np.zeros(nnz, dtype=np.int64)
    row_vals = np.zeros(nnz, dtype=np.float64)
    for r, (cols, vals, _) in enumerate(rows):
        row_cols[row_ptr[r] : row_ptr[r + 1]] = cols
        row_vals[row_ptr[r] : row_ptr[r + 1]] = vals

    counts = np.zeros(n + 1, dtype=np.int64)
    for c in row_cols:
        counts[c + 1] += 1
    var_ptr = np.cumsum(counts)
    cursor = var_ptr[:-1].copy()
    var_rows = np.zeros(nnz, dtype=np.int64)
    var_vals = np.zeros(nnz, dtype=np.float64)
    for r in range(m):
        for t in range(int(row_ptr[r]), int(row_ptr[r + 1])):
            j = int(row_cols[t])
            var_rows[cursor[j]] = r
            var_vals[cursor[j]] = row_vals[t]
            cursor[j] += 1
    return model.objective_vector(), row_ptr, row_cols, row_vals, row_rhs, var_ptr, var_rows, var_vals


def check_assignment(model: IlpModel, values: Sequence[int]) -> bool:
    """Feasibility of a full assignment under the normalized tolerance."""
    x = np.asarray(values, dtype=np.float64)
    if x.shape != (model.num_variables,):
        raise ValueError("assignment length does not match the model")
    if not np.isin(x, (0.0, 1.0)).all():
        return False
    for cols, vals, rhs in _normalized_le_rows(model):
        if vals.size and float(np.dot(vals, x[cols])) > rhs + kernels.FEAS_TOL:
            return False
        if not vals.size and 0.0 > rhs + kernels.FEAS_TOL:
            return False
    return True


def solve(
    model: IlpModel,
    node_budget: int = DEFAULT_NODE_BUDGET,
    disable_pruning: bool = False,
) -> SolveResult:
    """Exact search; deterministic for a fixed model and budget."""
    if node_budget < 1:
        raise ValueError("node_budget must be positive")
    arrays = _compile(model)
    code, values, nodes = kernels.bnb_search(
        *arrays, np.int64(node_budget), bool(disable_pruning)
    )
    status = STATUS_NAMES[int(code)]
    if values is None:
        return SolveResult(status=status, objective=None, assignment=None, nodes=int(nodes))
    values = np.asarray(values, dtype=np.int8)
    if not check_assignment(model, values):
        raise RuntimeError("solver returned an infeasible assignment; this is a bug")
    names = model.variable_names
    assignment = {names[j]: int(values[j]) for j in range(len(names))}
    return SolveResult(
        status=status,
        objective=model.objective_value(values),
        assignment=assignment,
        nodes=int(nodes),
        values=values,
    )


# --- MPS round trip ---------------------------------------------------------
#
# Layout: systematic names (V0.., R0.. in declaration order), one coefficient
# per line at fixed field offsets, all variables declared integer via an
# INTORG/INTEND marker pair plus BV bounds.  Values print with repr(), which
# round-trips IEEE doubles exactly.

_OBJ_ROW = "OBJ"
_SENSE_TO_MPS = {"<=": "L", ">=": "G", "==": "E"}
_MPS_TO_SENSE = {v: k for k, v in _SENSE_TO_MPS.items()}


def _fmt(*fields: str) -> str:
    out = "    "
    for f in fields[:-1]:
        out += f"{f:<10}"
    return out + fields[-1]


def export_mps(model: IlpModel) -> str:
    """Serialize to MPS text; byte-stable for a given model."""
    lines = [f"NAME          {model.name}"]
    lines.append("ROWS")
    lines.append(f" N  {_OBJ_ROW}")
    for r, con in enumerate(model.constraints):
        lines.append(f" {_SENSE_TO_MPS[con.sense]}  R{r}")

    by_var: dict[int, list[tuple[str, float]]] = {j: [] for j in range(model.num_variables)}
    for r, con in enumerate(model.constraints):
        for j, coef in con.terms:
            by_var[j].append((f"R{r}", coef))
    obj = model.objective_vector()

    lines.append("COLUMNS")
    lines.append(_fmt("MARKER", "'MARKER'", "'INTORG'"))
    for j in range(model.num_variables):
        lines.append(_fmt(f"V{j}", _OBJ_ROW, repr(float(obj[j]))))
        for row_name, coef in by_var[j]:
            lines.append(_fmt(f"V{j}", row_name, repr(coef)))
    lines.append(_fmt("MARKER", "'MARKER'", "'INTEND'"))

    lines.append("RHS")
    for r, con in enumerate(model.constraints):
        lines.append(_fmt("RHS", f"R{r}", repr(con.rhs)))

    lines.append("BOUNDS")
    for j in range(model.num_variables):
        lines.append(f" BV BND       V{j}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def write_mps(model: IlpModel, path) -> None:
    Path(path).write_bytes(export_mps(model).encode("ascii"))


class MpsFormatError(ValueError):
    """Raised when MPS text cannot be parsed back into a model."""


def parse_mps(text: str) -> IlpModel:
    """Read the MPS subset produced by export_mps (binary models only).

    Variable identity maps by order of first appearance; names are kept
    verbatim, so export -> parse -> export is byte-stable.
    """
    model = IlpModel()
    section = None
    obj_row: str | None = None
    senses: dict[str, str] = {}
    row_order: list[str] = []
    entries: dict[str, list[tuple[str, float]]] = {}
    rhs: dict[str, float] = {}
    bounded: set[str] = set()
    objective: dict[str, float] = {}
    var_order: list[str] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        head = raw[:1].strip()
        tokens = raw.split()
        if head or tokens[0] == "ENDATA":
            section = tokens[0]
            if section == "NAME":
                model.name = tokens[1] if len(tokens) > 1 else "model"
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS"):
                raise MpsFormatError(f"line {lineno}: unsupported section {section}")
            continue
        if section == "ROWS":
            kind, name = tokens
            if kind == "N":
                if obj_row is not None:
                    raise MpsFormatError(f"line {lineno}: second objective row {name}")
                obj_row = name
            elif kind in _MPS_TO_SENSE:
                senses[name] = _MPS_TO_SENSE[kind]
                row_order.append(name)
                entries[name] = []
            else:
                raise MpsFormatError(f"line {lineno}: unknown row kind {kind}")
        elif section == "COLUMNS":
            if "'MARKER'" in tokens:
                continue
            var, row, value = tokens
            if var not in model._index:
                model.add_binary(var)
                var_order.append(var)
            if row == obj_row:
                if var in objective:
                    raise MpsFormatError(f"line {lineno}: duplicate objective entry {var}")
                objective[var] = float(value)
            elif row in entries:
                entries[row].append((var, float(value)))
            else:
                raise MpsFormatError(f"line {lineno}: unknown row {row}")
        elif section == "RHS":
            _, row, value = tokens
            if row not in senses:
                raise MpsFormatError(f"line {lineno}: RHS for unknown row {row}")
            rhs[row] = float(value)
        elif section == "BOUNDS":
            kind, _, var = tokens
            if kind != "BV":
                raise MpsFormatError(f"line {lineno}: only BV bounds are supported")
            if var not in model._index:
                raise MpsFormatError(f"line {lineno}: bound on unknown variable {var}")
            bounded.add(var)
        else:
            raise MpsFormatError(f"line {lineno}: data outside any section")

    if obj_row is None:
        raise MpsFormatError("missing objective (N) row")
    missing = [v for v in var_order if v not in bounded]
    if missing:
        raise MpsFormatError(f"variables without BV bounds: {missing[:5]}")
    for row_name in row_order:
        seen = set()
        for var, _ in entries[row_name]:
            if var in seen:
                raise MpsFormatError(f"duplicate entry for {var} in row {row_name}")
            seen.add(var)
        model.add_constraint(
            {model.index_of(var): coef for var, coef in entries[row_name]},
            senses[row_name],
            rhs.get(row_name, 0.0),
        )
    model.set_objective({model.index_of(v): c for v, c in objective.items()})
    return model


def read_mps(path) -> IlpModel:
    return parse_mps(Path(path).read_text(encoding="ascii"))


def solve_with_external(
    model: IlpModel,
    command: Sequence[str],
    workdir=None,
    timeout: float | None = None,
) -> SolveResult:
    """Hand the model to an external solver executable.

    The command is invoked as ``command... model.mps solution.txt`` and must
    write one "variable value" pair per line using the exported variable
    names (V0, V1, ...); unmentioned variables default to 0.  The returned
    assignment is feasibility-checked here, but the external optimality
    claim is taken at face value.
    """
    if not command:
        raise ValueError("empty external solver command")

    def _run(dirpath: Path) -> SolveResult:
        mps_path = dirpath / "model.mps"
        sol_path = dirpath / "solution.txt"
        write_mps(model, mps_path)
        proc = subprocess.run(
            [*command, str(mps_path), str(sol_path)],
            capture_output=True,
            text=True,
            timeout=timeout,
        )
        if proc.returncode != 0:
            raise RuntimeError(
                f"external solver exited with {proc.returncode}: {proc.stderr.strip()}"
            )
        values = np.zeros(model.num_variables, dtype=np.int8)
        for line in sol_path.read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, value = line.split()
            v = float(value)
            if abs(v - round(v)) > 1e-6 or round(v) not in (0, 1):
                raise RuntimeError(f"external solver returned non-binary {name}={value}")
            # solutions name variables per the exported layout (V0, V1, ...)
            if name.startswith("V") and name[1:].isdigit():
                idx = int(name[1:])
            else:
                raise RuntimeError(f"external solver named an unknown variable {name!r}")
            if not 0 <= idx < model.num_variables:
                raise RuntimeError(f"external solver named an unknown variable {name!r}")
            values[idx] = int(round(v))
        if not check_assignment(model, values):
            raise RuntimeError("external solver returned an infeasible assignment")
        names = model.variable_names
        return SolveResult(
            status="optimal",
            objective=model.objective_value(values),
            assignment={names[j]: int(values[j]) for j in range(len(names))},
            nodes=0,
            values=values,
        )

    if workdir is not None:
        return _run(Path(workdir))
    with tempfile.TemporaryDirectory(prefix="skylane-mps-") as tmp:
        return _run(Path(tmp))
