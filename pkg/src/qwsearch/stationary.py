"""Stationary assignments for marked components and state assembly.

A state is fixed by one search step exactly when (i) arcs leaving unmarked
vertices all share one amplitude, (ii) every marked vertex's arc amplitudes
sum to zero, and (iii) every arc equals its reverse arc.  Such a state is
determined, up to the overall scale ``a``, by one coefficient per edge
inside a marked component: the internal arc (i, j) carries ``c[i, j] * a``
(symmetric in i and j), every other arc carries ``a``, and condition (ii)
pins each marked vertex's coefficient sum to minus its count of edges
leaving the marked set.

Feasibility of those per-vertex constraints is a bipartite balance
condition: a non-bipartite component is always solvable, a bipartite one
is solvable exactly when its two sides carry equal outgoing-degree totals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graphs import Graph, MarkedComponent
from .walk import WalkState, step

__all__ = [
    "CONSTRAINT_TOL",
    "StationaryAssignment",
    "InfeasibleComponentError",
    "StationarityCheck",
    "exists_stationary",
    "solve_min_norm",
    "make_assignment",
    "assignments_from_coefficients",
    "merged_coefficients",
    "normalization_scale",
    "build_state",
    "verify_stationary",
    "overlap",
    "write_assignment_file",
    "read_assignment_file",
]

# A least-squares solution counts as feasible when its constraint residual
# is below this times max(1, |b|); disagreement with the bipartite balance
# test would be a defect, not a tolerance question.
CONSTRAINT_TOL = 1e-8


class InfeasibleComponentError(ValueError):
    """No coefficient assignment satisfies the component's vertex-sum constraints."""


@dataclass(frozen=True)
class StationaryAssignment:
    """Per-edge coefficients solving one marked component.

    ``coefficients`` maps each unordered internal edge (i, j), i < j, to
    the shared value c of both directed arcs.  ``scale`` is the common
    amplitude ``a`` that normalizes the assembled state when this is the
    only assignment on its graph; assembling several components recomputes
    one joint scale (see :func:`normalization_scale`).
    """

    component: MarkedComponent
    coefficients: Mapping[tuple[int, int], float]
    scale: float

    @property
    def sum_sq(self) -> float:
        """Sum of squared coefficients over unordered edges."""
        return float(sum(c * c for c in self.coefficients.values()))

    @property
    def sum_sq_directed(self) -> float:
        """Sum of squared coefficients over directed internal arcs."""
        return 2.0 * self.sum_sq

    @property
    def coefficient_sum_directed(self) -> float:
        return 2.0 * float(sum(self.coefficients.values()))


def exists_stationary(comp: MarkedComponent) -> bool:
    """Whether the component admits any stationary assignment.

    Non-bipartite components always do; bipartite ones do exactly when the
    two sides have equal outgoing-degree totals.  A single marked vertex is
    bipartite with one empty side, so it qualifies only when isolated.
    """
    sums = comp.bipartite_outgoing_sums()
    if sums is None:
        return True
    return sums[0] == sums[1]


def _infeasible(comp: MarkedComponent, residual: float | None = None) -> InfeasibleComponentError:
    sums = comp.bipartite_outgoing_sums()
    if sums is not None:
        return InfeasibleComponentError(
            f"no stationary state for component {comp.vertices}: bipartite side sums {sums[0]} != {sums[1]}"
        )
    return InfeasibleComponentError(
        f"no stationary state for component {comp.vertices}: constraint residual {residual:.3e}"
    )


def _finish(comp: MarkedComponent, coefficients: dict[tuple[int, int], float]) -> StationaryAssignment:
    unscaled_sq = comp.graph.arc_count - 2 * len(coefficients) + 2.0 * sum(
        c * c for c in coefficients.values()
    )
    return StationaryAssignment(
        component=comp,
        coefficients=dict(sorted(coefficients.items())),
        scale=1.0 / math.sqrt(unscaled_sq),
    )


def solve_min_norm(comp: MarkedComponent) -> StationaryAssignment:
    """Coefficients with the smallest sum of squares meeting every constraint.

    Solves the equality-constrained least-squares problem on the unoriented
    incidence matrix of the component's internal edges; the minimizer is
    unique.  Raises InfeasibleComponentError when no assignment exists,
    naming the violated bipartite balance condition.
    """
    verts = comp.vertices
    edges = comp.internal_edges
    targets = -np.array([comp.outgoing_degree[v] for v in verts], dtype=np.float64)
    if not edges:
        if np.any(targets != 0.0):
            raise _infeasible(comp)
        return _finish(comp, {})
    incidence = np.zeros((len(verts), len(edges)))
    row = {v: i for i, v in enumerate(verts)}
    for j, (u, w) in enumerate(edges):
        incidence[row[u], j] = 1.0
        incidence[row[w], j] = 1.0
    coeffs = np.linalg.lstsq(incidence, targets, rcond=None)[0]
    residual = float(np.max(np.abs(incidence @ coeffs - targets)))
    if residual > CONSTRAINT_TOL * max(1.0, float(np.linalg.norm(targets))):
        raise _infeasible(comp, residual)
    return _finish(comp, {e: float(c) for e, c in zip(edges, coeffs)})


def make_assignment(
    comp: MarkedComponent,
    coefficients: Mapping[tuple[int, int], float],
    tol: float = CONSTRAINT_TOL,
) -> StationaryAssignment:
    """Wrap externally chosen coefficients, enforcing the vertex constraints.

    The mapping must cover every internal edge of the component exactly;
    per-vertex sums off by more than ``tol`` raise InfeasibleComponentError.
    """
    coeffs: dict[tuple[int, int], float] = {}
    for e, c in coefficients.items():
        i, j = sorted(int(v) for v in e)
        coeffs[(i, j)] = float(c)
    expected = set(comp.internal_edges)
    got = set(coeffs)
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise ValueError(
            f"coefficients do not match the component's internal edges"
            f" (missing {missing}, extra {extra})"
        )
    for v in comp.vertices:
        total = sum(c for e, c in coeffs.items() if v in e)
        required = -comp.outgoing_degree[v]
        if abs(total - required) > tol:
            raise InfeasibleComponentError(
                f"coefficient sum at vertex {v} is {total}, constraint requires {required}"
            )
    return _finish(comp, coeffs)


def assignments_from_coefficients(
    components: Sequence[MarkedComponent],
    coefficients: Mapping[tuple[int, int], float],
    tol: float = CONSTRAINT_TOL,
) -> list[StationaryAssignment]:
    """Split one flat edge->coefficient mapping across several components."""
    remaining = {tuple(sorted(int(v) for v in e)): float(c) for e, c in coefficients.items()}
    out = []
    for comp in components:
        sub = {}
        for e in comp.internal_edges:
            if e not in remaining:
                raise ValueError(f"assignment is missing internal edge {e}")
            sub[e] = remaining.pop(e)
        out.append(make_assignment(comp, sub, tol=tol))
    if remaining:
        raise ValueError(f"assignment has edges outside the marked components: {sorted(remaining)}")
    return out


def merged_coefficients(assignments: Iterable[StationaryAssignment]) -> dict[tuple[int, int], float]:
    merged: dict[tuple[int, int], float] = {}
    for asg in assignments:
        merged.update(asg.coefficients)
    return dict(sorted(merged.items()))


def normalization_scale(g: Graph, assignments: Sequence[StationaryAssignment]) -> float:
    """Common amplitude ``a`` making the assembled state unit norm.

    One scale is shared by all components: a = 1/sqrt(2m - 2*E + S) with E
    the total internal edge count and S the directed sum of squared
    coefficients, both summed over the given assignments.
    """
    if g.arc_count == 0:
        raise ValueError("graph has no arcs")
    total = float(g.arc_count)
    for asg in assignments:
        total += asg.sum_sq_directed - 2.0 * len(asg.coefficients)
    return 1.0 / math.sqrt(total)


def build_state(g: Graph, assignments: Sequence[StationaryAssignment]) -> WalkState:
    """Assemble the unit state with amplitude ``a`` on every arc except the
    internal marked arcs, which carry their coefficient times ``a``.

    With no assignments this is exactly the uniform starting state.
    """
    used: set[int] = set()
    for asg in assignments:
        if asg.component.graph is not g:
            raise ValueError("assignment solves a component of a different graph")
        clash = used.intersection(asg.component.vertices)
        if clash:
            raise ValueError(f"components overlap at vertices {sorted(clash)}")
        used.update(asg.component.vertices)
    if g.arc_count == 0:
        raise ValueError("graph has no arcs")
    unscaled = np.ones(g.arc_count)
    for asg in assignments:
        for (i, j), c in asg.coefficients.items():
            unscaled[g.arc_between(i, j)] = c
            unscaled[g.arc_between(j, i)] = c
    amps = unscaled / math.sqrt(float(np.dot(unscaled, unscaled)))
    return WalkState(amps, g)


@dataclass(frozen=True)
class StationarityCheck:
    """Result of checking a state against one walk step.

    ``residual`` is the max-norm difference between the state and its
    one-step image; the remaining fields measure the three amplitude
    conditions that characterize fixed points.
    """

    residual: float
    unmarked_amplitude_spread: float
    max_marked_vertex_sum: float
    max_reverse_mismatch: float
    tolerance: float

    @property
    def failed_conditions(self) -> tuple[str, ...]:
        failures = []
        if self.unmarked_amplitude_spread > self.tolerance:
            failures.append("unmarked amplitudes not all equal")
        if self.max_marked_vertex_sum > self.tolerance:
            failures.append("marked vertex amplitudes do not sum to zero")
        if self.max_reverse_mismatch > self.tolerance:
            failures.append("reverse-arc amplitudes differ")
        return tuple(failures)

    @property
    def is_stationary(self) -> bool:
        return self.residual <= self.tolerance


def verify_stationary(
    g: Graph,
    marked: Iterable[int],
    state: WalkState,
    tolerance: float = 1e-10,
) -> StationarityCheck:
    """Measure how far a unit state is from being fixed by one search step."""
    if state.graph is not g:
        raise ValueError("state lives on a different graph")
    marked_set = {int(v) for v in marked}
    amps = state.amplitudes
    advanced = step(state, marked_set)
    residual = float(np.max(np.abs(advanced.amplitudes - amps))) if amps.size else 0.0
    if marked_set:
        unmarked_mask = ~np.isin(g.arc_source, sorted(marked_set))
    else:
        unmarked_mask = np.ones(amps.size, dtype=bool)
    unmarked = amps[unmarked_mask]
    spread = float(unmarked.max() - unmarked.min()) if unmarked.size else 0.0
    vertex_sum = 0.0
    for v in marked_set:
        vertex_sum = max(vertex_sum, abs(float(amps[g.offsets[v] : g.offsets[v + 1]].sum())))
    mismatch = float(np.max(np.abs(amps - amps[g.reverse]))) if amps.size else 0.0
    return StationarityCheck(
        residual=residual,
        unmarked_amplitude_spread=spread,
        max_marked_vertex_sum=vertex_sum,
        max_reverse_mismatch=mismatch,
        tolerance=tolerance,
    )


def overlap(s1: WalkState, s2: WalkState) -> float:
    """Standard inner product of two states on the same graph."""
    if s1.amplitudes.size != s2.amplitudes.size:
        raise ValueError(
            f"dimension mismatch: {s1.amplitudes.size} vs {s2.amplitudes.size} amplitudes"
        )
    return float(np.dot(s1.amplitudes, s2.amplitudes))


# ---------------------------------------------------------------------------
# Assignment file format: one "i j c" line per unordered internal edge,
# then a trailing "a <value>" line with the normalization scale.
# ---------------------------------------------------------------------------


def write_assignment_file(path, coefficients: Mapping[tuple[int, int], float], scale: float) -> None:
    lines = [f"{i} {j} {c:.17e}" for (i, j), c in sorted(coefficients.items())]
    lines.append(f"a {scale:.17e}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_assignment_file(path) -> tuple[dict[tuple[int, int], float], float]:
    coefficients: dict[tuple[int, int], float] = {}
    scale: float | None = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "a":
            if len(parts) != 2 or scale is not None:
                raise ValueError(f"{path}:{lineno}: malformed or repeated scale line {line!r}")
            scale = float(parts[1])
            continue
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'i j c', got {line!r}")
        i, j = sorted((int(parts[0]), int(parts[1])))
        if (i, j) in coefficients:
            raise ValueError(f"{path}:{lineno}: duplicate edge ({i}, {j})")
        coefficients[(i, j)] = float(parts[2])
    if scale is None:
        raise ValueError(f"{path}: missing trailing 'a <value>' line")
    return coefficients, scale
