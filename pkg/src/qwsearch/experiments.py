"""End-to-end experiment driver: build a graph, mark vertices, solve for a
stationary assignment, evaluate ceilings, simulate, and emit CSV + JSON.

Config document (strict JSON; unknown keys are rejected)::

    {
      "graph":  exactly one of
                {"family": "cycle", "n": 5}
                {"family": "torus2d", "rows": 16, "cols": 16}
                {"family": "complete", "n": 8}
                {"family": "random_regular", "n": 60, "d": 3, "seed": 7}
                {"edge_list": "path/to/graph.txt"},
      "marked": exactly one of
                {"vertices": [3, 4]}
                {"block": {"rows": 2, "cols": 2, "row_offset": 1, "col_offset": 1}}
                {"pairs": {"k": 3, "seed": 11}},
      "t_max": 2000,                 # optional; default 10 * diameter^2, capped at 10^4
      "assignment": "min_norm",      # optional (default); or {"file": "assignment.txt"}
      "csv": "steps.csv",            # optional output-name overrides,
      "report": "report.json"        # resolved inside the output directory
    }

Relative input paths are resolved against the config file's directory.
The block pattern addresses torus2d graphs row-major, so it is only valid
with the torus2d family.  The pairs pattern marks k pairwise
non-adjacent adjacent-vertex pairs, chosen deterministically from the seed.

Exit statuses: 0 = dominance and stationarity checks passed, 1 = input
error, 2 = infeasible stationary request, 3 = a check failed.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bounds as bounds_mod
from .graphs import Graph, generate, marked_components, read_edge_list
from .stationary import (
    InfeasibleComponentError,
    assignments_from_coefficients,
    build_state,
    exists_stationary,
    merged_coefficients,
    normalization_scale,
    read_assignment_file,
    solve_min_norm,
    verify_stationary,
)
from .walk import evolve, initial_state, marked_probability

__all__ = [
    "ExperimentConfig",
    "ExperimentOutcome",
    "load_config",
    "run_experiment",
    "execute",
    "sweep",
    "format_sweep_table",
    "select_disjoint_pairs",
    "REPORT_SCHEMA",
    "EXIT_OK",
    "EXIT_INPUT_ERROR",
    "EXIT_INFEASIBLE",
    "EXIT_CHECK_FAILED",
    "DOMINANCE_SLACK",
    "RESIDUAL_LIMIT",
]

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_CHECK_FAILED = 3

# Numerical slack for the dominance verdict and the stationarity residual.
DOMINANCE_SLACK = 1e-9
RESIDUAL_LIMIT = 1e-10

_GRAPH_FAMILY_KEYS = {
    "cycle": {"n"},
    "torus2d": {"rows", "cols"},
    "complete": {"n"},
    "random_regular": {"n", "d", "seed"},
}


@dataclass(frozen=True)
class GraphSpec:
    family: str | None
    params: dict
    edge_list: str | None


@dataclass(frozen=True)
class MarkedSpec:
    kind: str  # "vertices" | "block" | "pairs"
    payload: object


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphSpec
    marked: MarkedSpec
    t_max: int | None
    assignment_mode: str  # "min_norm" | "file"
    assignment_file: str | None
    csv_name: str | None
    report_name: str | None
    base_dir: Path
    name: str


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ValueError(f"{where}: unknown keys {unknown}")


def _parse_graph_spec(obj) -> GraphSpec:
    if not isinstance(obj, dict):
        raise ValueError("'graph' must be an object")
    _reject_unknown(obj, {"family", "n", "rows", "cols", "d", "seed", "edge_list"}, "graph")
    has_family = "family" in obj
    has_edge_list = "edge_list" in obj
    if has_family == has_edge_list:
        raise ValueError("graph: exactly one of 'family' and 'edge_list' is required")
    if has_edge_list:
        return GraphSpec(family=None, params={}, edge_list=str(obj["edge_list"]))
    family = obj["family"]
    if family not in _GRAPH_FAMILY_KEYS:
        raise ValueError(f"graph: unknown family {family!r}")
    wanted = _GRAPH_FAMILY_KEYS[family]
    given = set(obj) - {"family"}
    if given != wanted:
        raise ValueError(f"graph: family {family!r} takes keys {sorted(wanted)}, got {sorted(given)}")
    return GraphSpec(family=family, params={k: int(obj[k]) for k in wanted}, edge_list=None)


def _parse_marked_spec(obj) -> MarkedSpec:
    if not isinstance(obj, dict):
        raise ValueError("'marked' must be an object")
    _reject_unknown(obj, {"vertices", "block", "pairs"}, "marked")
    if len(obj) != 1:
        raise ValueError("marked: exactly one of 'vertices', 'block', 'pairs' is required")
    kind, payload = next(iter(obj.items()))
    if kind == "vertices":
        if not isinstance(payload, list):
            raise ValueError("marked.vertices must be a list of vertex ids")
        return MarkedSpec("vertices", tuple(int(v) for v in payload))
    if kind == "block":
        _reject_unknown(payload, {"rows", "cols", "row_offset", "col_offset"}, "marked.block")
        if "rows" not in payload or "cols" not in payload:
            raise ValueError("marked.block requires 'rows' and 'cols'")
        block = {
            "rows": int(payload["rows"]),
            "cols": int(payload["cols"]),
            "row_offset": int(payload.get("row_offset", 0)),
            "col_offset": int(payload.get("col_offset", 0)),
        }
        if block["rows"] < 1 or block["cols"] < 1:
            raise ValueError("marked.block dimensions must be positive")
        return MarkedSpec("block", block)
    _reject_unknown(payload, {"k", "seed"}, "marked.pairs")
    if "k" not in payload or "seed" not in payload:
        raise ValueError("marked.pairs requires 'k' and 'seed'")
    pairs = {"k": int(payload["k"]), "seed": int(payload["seed"])}
    if pairs["k"] < 0:
        raise ValueError("marked.pairs.k must be nonnegative")
    return MarkedSpec("pairs", pairs)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as err:
        raise ValueError(f"cannot read config {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ValueError(f"{path}: invalid JSON: {err}") from None
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    _reject_unknown(obj, {"graph", "marked", "t_max", "assignment", "csv", "report"}, str(path))
    for required in ("graph", "marked"):
        if required not in obj:
            raise ValueError(f"{path}: missing required key {required!r}")
    t_max = obj.get("t_max")
    if t_max is not None:
        t_max = int(t_max)
        if t_max < 0:
            raise ValueError(f"{path}: t_max must be nonnegative, got {t_max}")
    assignment = obj.get("assignment", "min_norm")
    if assignment == "min_norm":
        mode, afile = "min_norm", None
    elif isinstance(assignment, dict) and set(assignment) == {"file"}:
        mode, afile = "file", str(assignment["file"])
    else:
        raise ValueError(f"{path}: 'assignment' must be \"min_norm\" or {{\"file\": path}}")
    return ExperimentConfig(
        graph=_parse_graph_spec(obj["graph"]),
        marked=_parse_marked_spec(obj["marked"]),
        t_max=t_max,
        assignment_mode=mode,
        assignment_file=afile,
        csv_name=str(obj["csv"]) if "csv" in obj else None,
        report_name=str(obj["report"]) if "report" in obj else None,
        base_dir=path.parent,
        name=path.stem,
    )


def build_graph_from_spec(cfg: ExperimentConfig) -> Graph:
    spec = cfg.graph
    if spec.edge_list is not None:
        return read_edge_list(_resolve(cfg.base_dir, spec.edge_list))
    return generate(spec.family, **spec.params)


def _resolve(base: Path, p: str) -> Path:
    path = Path(p)
    return path if path.is_absolute() else base / path


def select_disjoint_pairs(g: Graph, k: int, seed: int) -> list[int]:
    """Mark k adjacent pairs whose components stay exactly those pairs.

    Edges are tried in a seeded random order; a pair is accepted only when
    neither endpoint is adjacent to an already marked vertex.
    """
    rng = np.random.default_rng(seed)
    edges = g.edge_list()
    order = rng.permutation(len(edges))
    marked: set[int] = set()
    chosen = 0
    for i in order:
        if chosen == k:
            break
        u, v = edges[i]
        if u in marked or v in marked:
            continue
        if any(int(w) in marked for w in g.neighbors(u)) or any(
            int(w) in marked for w in g.neighbors(v)
        ):
            continue
        marked.update((u, v))
        chosen += 1
    if chosen != k:
        raise ValueError(f"could not place {k} non-adjacent marked pairs (placed {chosen})")
    return sorted(marked)


def build_marked_from_spec(cfg: ExperimentConfig, g: Graph) -> list[int]:
    spec = cfg.marked
    if spec.kind == "vertices":
        return sorted({int(v) for v in spec.payload})
    if spec.kind == "block":
        if cfg.graph.family != "torus2d":
            raise ValueError("marked.block requires the torus2d graph family")
        rows, cols = cfg.graph.params["rows"], cfg.graph.params["cols"]
        blk = spec.payload
        verts = {
            ((blk["row_offset"] + i) % rows) * cols + ((blk["col_offset"] + j) % cols)
            for i in range(blk["rows"])
            for j in range(blk["cols"])
        }
        return sorted(verts)
    return select_disjoint_pairs(g, spec.payload["k"], spec.payload["seed"])


@dataclass(frozen=True)
class ExperimentOutcome:
    exit_code: int
    report: dict | None
    csv_path: Path | None
    json_path: Path | None
    message: str


def _component_entry(comp, assignment, exists: bool, bound: float) -> dict:
    return {
        "vertices": list(comp.vertices),
        "internal_edges": [list(e) for e in comp.internal_edges],
        "internal_degrees": [[v, comp.internal_degree[v]] for v in comp.vertices],
        "outgoing_degrees": [[v, comp.outgoing_degree[v]] for v in comp.vertices],
        "total_outgoing": comp.total_outgoing,
        "bipartition": [list(s) for s in comp.bipartition] if comp.bipartition else None,
        "exists_stationary": exists,
        "coefficients": [[i, j, c] for (i, j), c in assignment.coefficients.items()],
        "sum_sq_directed": assignment.sum_sq_directed,
        "bound": bound,
    }


def run_experiment(cfg: ExperimentConfig, out_dir) -> ExperimentOutcome:
    """Run one configured experiment, writing its CSV and JSON artifacts.

    Raises ValueError for input problems and InfeasibleComponentError when
    a stationary assignment is requested for a component that has none;
    :func:`execute` maps those to exit statuses.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    g = build_graph_from_spec(cfg)
    marked = build_marked_from_spec(cfg, g)
    if g.arc_count == 0:
        raise ValueError("graph has no arcs; nothing to simulate")
    comps = marked_components(g, marked)
    existence = [exists_stationary(c) for c in comps]

    if cfg.assignment_mode == "min_norm":
        assignments = [solve_min_norm(c) for c in comps]
        source = "min_norm"
    else:
        coeffs, _file_scale = read_assignment_file(_resolve(cfg.base_dir, cfg.assignment_file))
        assignments = assignments_from_coefficients(comps, coeffs)
        source = "injected"

    state = build_state(g, assignments)
    scale = normalization_scale(g, assignments)
    check = verify_stationary(g, marked, state)
    stationary_p = marked_probability(state, marked)
    report_bounds = bounds_mod.total_bound(assignments, edge_count=g.edge_count,
                                           assignment_source=source)

    t_max = cfg.t_max if cfg.t_max is not None else bounds_mod.default_step_budget(g)
    rows: list[tuple[int, float]] = []
    best_p, best_t = -1.0, 0

    def observe(t: int, p: float) -> None:
        nonlocal best_p, best_t
        rows.append((t, p))
        if p > best_p:
            best_p, best_t = p, t

    evolve(initial_state(g), marked, t_max, observer=observe)

    dominance = best_p <= report_bounds.total_bound + DOMINANCE_SLACK
    residual_ok = check.residual <= RESIDUAL_LIMIT and not check.failed_conditions
    checks_passed = dominance and residual_ok

    report = {
        "config": cfg.name,
        "graph": {
            "n": g.n,
            "m": g.edge_count,
            "arc_count": g.arc_count,
            "source": cfg.graph.family or "edge_list",
        },
        "marked": list(marked),
        "t_max": t_max,
        "assignment_source": source,
        "scale": scale,
        "components": [
            _component_entry(c, a, e, bt.bound)
            for c, a, e, bt in zip(comps, assignments, existence, report_bounds.per_component)
        ],
        "stationarity": {
            "residual": check.residual,
            "unmarked_amplitude_spread": check.unmarked_amplitude_spread,
            "max_marked_vertex_sum": check.max_marked_vertex_sum,
            "max_reverse_mismatch": check.max_reverse_mismatch,
            "failed_conditions": list(check.failed_conditions),
            "stationary_probability": stationary_p,
        },
        "bound_total": report_bounds.total_bound,
        "p_initial": rows[0][1] if rows else 0.0,
        "observed_max_p": best_p,
        "observed_argmax_t": best_t,
        "margin": report_bounds.total_bound - best_p,
        "dominance": dominance,
        "checks_passed": checks_passed,
    }

    csv_path = out_dir / (cfg.csv_name or f"{cfg.name}.csv")
    json_path = out_dir / (cfg.report_name or f"{cfg.name}.json")
    csv_lines = ["t,p_marked"]
    csv_lines.extend(f"{t},{p:.17g}" for t, p in rows)
    csv_path.write_text("\n".join(csv_lines) + "\n")
    json_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")

    code = EXIT_OK if checks_passed else EXIT_CHECK_FAILED
    msg = "ok" if checks_passed else (
        "dominance failed" if not dominance else "stationarity residual too large"
    )
    return ExperimentOutcome(code, report, csv_path, json_path, msg)


def execute(config_path, out_dir, *, t_max=None, seed=None, assignment=None) -> ExperimentOutcome:
    """Load, override, and run one config, mapping errors to exit statuses."""
    try:
        cfg = load_config(config_path)
        cfg = apply_overrides(cfg, t_max=t_max, seed=seed, assignment=assignment)
        return run_experiment(cfg, out_dir)
    except InfeasibleComponentError as err:
        return ExperimentOutcome(EXIT_INFEASIBLE, None, None, None, str(err))
    except (ValueError, OSError) as err:
        return ExperimentOutcome(EXIT_INPUT_ERROR, None, None, None, str(err))


def apply_overrides(cfg: ExperimentConfig, *, t_max=None, seed=None, assignment=None) -> ExperimentConfig:
    if t_max is not None:
        if t_max < 0:
            raise ValueError(f"t_max must be nonnegative, got {t_max}")
        cfg = replace(cfg, t_max=int(t_max))
    if seed is not None:
        graph = cfg.graph
        if graph.family == "random_regular":
            graph = replace(graph, params={**graph.params, "seed": int(seed)})
            cfg = replace(cfg, graph=graph)
        if cfg.marked.kind == "pairs":
            payload = dict(cfg.marked.payload)
            payload["seed"] = int(seed)
            cfg = replace(cfg, marked=MarkedSpec("pairs", payload))
    if assignment is not None:
        cfg = replace(cfg, assignment_mode="file", assignment_file=str(assignment))
    return cfg


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def _worker_count(n_jobs: int) -> int:
    env = os.environ.get("QWALK_THREADS")
    if env is not None:
        cap = int(env)
        if cap < 1:
            raise ValueError(f"QWALK_THREADS must be positive, got {env!r}")
    else:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def sweep(config_paths: Sequence, out_dir, *, t_max=None, seed=None) -> tuple[list[dict], int]:
    """Run several configs (possibly concurrently) and summarize them.

    Returns one summary row per config, in input order, plus the overall
    exit status (0 only if every run passed).  QWALK_THREADS caps the
    worker count.
    """
    paths = [Path(p) for p in config_paths]
    if not paths:
        return [], EXIT_OK
    out_dir = Path(out_dir)

    def one(path: Path) -> ExperimentOutcome:
        return execute(path, out_dir / path.stem, t_max=t_max, seed=seed)

    with ThreadPoolExecutor(max_workers=_worker_count(len(paths))) as pool:
        outcomes = list(pool.map(one, paths))

    rows = []
    worst = EXIT_OK
    for path, outcome in zip(paths, outcomes):
        worst = max(worst, outcome.exit_code)
        if outcome.report is None:
            rows.append({
                "config": path.name,
                "status": f"error({outcome.exit_code}): {outcome.message}",
            })
        else:
            r = outcome.report
            rows.append({
                "config": path.name,
                "n": r["graph"]["n"],
                "m": r["graph"]["m"],
                "marked": len(r["marked"]),
                "bound": r["bound_total"],
                "observed_max": r["observed_max_p"],
                "margin": r["margin"],
                "status": "ok" if outcome.exit_code == EXIT_OK else outcome.message,
            })
    return rows, worst


def format_sweep_table(rows: list[dict]) -> str:
    header = f"{'config':<32} {'n':>6} {'m':>7} {'|M|':>4} {'bound':>12} {'observed':>12} {'margin':>12} status"
    lines = [header]
    for row in rows:
        if "n" not in row:
            lines.append(f"{row['config']:<32} {'-':>6} {'-':>7} {'-':>4} {'-':>12} {'-':>12} {'-':>12} {row['status']}")
            continue
        lines.append(
            f"{row['config']:<32} {row['n']:>6} {row['m']:>7} {row['marked']:>4} "
            f"{row['bound']:>12.6g} {row['observed_max']:>12.6g} {row['margin']:>12.6g} {row['status']}"
        )
    return "\n".join(lines)


# JSON schema for the run report (kept in sync with run_experiment).
REPORT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": [
        "config", "graph", "marked", "t_max", "assignment_source", "scale",
        "components", "stationarity", "bound_total", "p_initial",
        "observed_max_p", "observed_argmax_t", "margin", "dominance", "checks_passed",
    ],
    "properties": {
        "config": {"type": "string"},
        "graph": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n", "m", "arc_count", "source"],
            "properties": {
                "n": {"type": "integer", "minimum": 0},
                "m": {"type": "integer", "minimum": 0},
                "arc_count": {"type": "integer", "minimum": 0},
                "source": {"type": "string"},
            },
        },
        "marked": {"type": "array", "items": {"type": "integer"}},
        "t_max": {"type": "integer", "minimum": 0},
        "assignment_source": {"enum": ["min_norm", "injected"]},
        "scale": {"type": "number"},
        "components": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": [
                    "vertices", "internal_edges", "internal_degrees", "outgoing_degrees",
                    "total_outgoing", "bipartition", "exists_stationary",
                    "coefficients", "sum_sq_directed", "bound",
                ],
                "properties": {
                    "vertices": {"type": "array", "items": {"type": "integer"}},
                    "internal_edges": {"type": "array"},
                    "internal_degrees": {"type": "array"},
                    "outgoing_degrees": {"type": "array"},
                    "total_outgoing": {"type": "integer"},
                    "bipartition": {"type": ["array", "null"]},
                    "exists_stationary": {"type": "boolean"},
                    "coefficients": {"type": "array"},
                    "sum_sq_directed": {"type": "number"},
                    "bound": {"type": "number"},
                },
            },
        },
        "stationarity": {
            "type": "object",
            "additionalProperties": False,
            "required": [
                "residual", "unmarked_amplitude_spread", "max_marked_vertex_sum",
                "max_reverse_mismatch", "failed_conditions", "stationary_probability",
            ],
            "properties": {
                "residual": {"type": "number"},
                "unmarked_amplitude_spread": {"type": "number"},
                "max_marked_vertex_sum": {"type": "number"},
                "max_reverse_mismatch": {"type": "number"},
                "failed_conditions": {"type": "array", "items": {"type": "string"}},
                "stationary_probability": {"type": "number"},
            },
        },
        "bound_total": {"type": "number"},
        "p_initial": {"type": "number"},
        "observed_max_p": {"type": "number"},
        "observed_argmax_t": {"type": "integer"},
        "margin": {"type": "number"},
        "dominance": {"type": "boolean"},
        "checks_passed": {"type": "boolean"},
    },
}
