"""Target generation: distribute cycle slack onto arcs, then cut cycles.

Slacks are nonpositive. A target arc weight is ``weight - slack``, so
every target is at least as tight as the constraint it came from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .constraint_graph import Arc, ConstraintGraph, Cycle, enumerate_cycles
from .models import EdgeRef, Kind

ArcKey = tuple[EdgeRef, EdgeRef]


class SlackOvershootError(ValueError):
    """The slack heuristic produced a target with a positive cycle."""

    def __init__(self, message: str, cycles: Sequence[Cycle] = ()):
        super().__init__(message)
        self.cycles = tuple(cycles)


@dataclass(frozen=True)
class SlackAssignment:
    slack_ps: dict[ArcKey, int]
    avg_slack: tuple[Fraction, ...]
    remaining_slack: tuple[Fraction, ...]


def _toward_zero(x: Fraction) -> int:
    return math.trunc(x)


def assign_slacks(g: ConstraintGraph, cycles: Sequence[Cycle], default_slack_ps: int) -> SlackAssignment:
    """Choose a slack for every arc of ``g``.

    1. cycle length (sum of weights), 2. average slack = length / nodes,
    3. in-cycle separation arcs take max(default, averages of their cycles),
    4. remaining slack = length minus those separation slacks,
    5. in-cycle high/duration arcs take the max over their cycles of
       remaining / (high-like arcs in the cycle),
    6. arcs on no cycle take max(default, every cycle average).

    ``avg_slack`` and ``remaining_slack`` are indexed like ``cycles``.
    Per-arc values are exact rationals until the final truncation toward
    zero, and are clamped to be nonpositive.
    """
    if default_slack_ps > 0:
        raise ValueError("default slack must not be positive")
    default = Fraction(default_slack_ps)
    avg = tuple(Fraction(c.length_ps, c.n_nodes) for c in cycles)

    containing: dict[ArcKey, list[int]] = {a.key: [] for a in g.arcs}
    for j, c in enumerate(cycles):
        for a in c.arcs:
            containing[a.key].append(j)

    exact: dict[ArcKey, Fraction] = {}
    for a in g.arcs:
        if a.kind is Kind.MIN_SEP and containing[a.key]:
            exact[a.key] = max([default] + [avg[j] for j in containing[a.key]])

    remaining = tuple(
        Fraction(c.length_ps) - sum((exact[a.key] for a in c.arcs if a.kind is Kind.MIN_SEP), Fraction(0))
        for c in cycles)
    for j, c in enumerate(cycles):
        if c.n_minhilike == 0 and remaining[j] > 0:
            raise SlackOvershootError(
                f"cycle {c} has remaining slack {remaining[j]} and no high/duration arc to absorb it; "
                f"use a smaller default slack", [c])

    for a in g.arcs:
        if a.kind.hilike and containing[a.key]:
            exact[a.key] = max(remaining[j] / cycles[j].n_minhilike for j in containing[a.key])

    fallback = max([default] + list(avg))
    for a in g.arcs:
        exact.setdefault(a.key, fallback)

    slack = {k: min(0, _toward_zero(v)) for k, v in exact.items()}
    return SlackAssignment(slack, avg, remaining)


@dataclass(frozen=True)
class TargetGraph:
    graph: ConstraintGraph
    slacks: SlackAssignment

    @property
    def arcs(self) -> tuple[Arc, ...]:
        return self.graph.arcs

    @property
    def nodes(self) -> tuple[EdgeRef, ...]:
        return self.graph.nodes


def build_target_graph(g: ConstraintGraph, slacks: SlackAssignment, check: bool = True) -> TargetGraph:
    """Tighten every arc by its slack; with ``check`` reject positive target cycles."""
    missing = [a for a in g.arcs if a.key not in slacks.slack_ps]
    if missing:
        raise ValueError(f"no slack for arcs {', '.join(str(a) for a in missing)}")
    target = g.with_weights({a.key: a.weight_ps - slacks.slack_ps[a.key] for a in g.arcs})
    if check:
        bad = [c for c in enumerate_cycles(target) if c.length_ps > 0]
        if bad:
            raise SlackOvershootError(
                "target is infeasible on cycle(s) " + "; ".join(f"{c} (sum {c.length_ps})" for c in bad),
                bad)
    return TargetGraph(target, slacks)


@dataclass(frozen=True)
class AcyclicTargetGraph:
    nodes: tuple[EdgeRef, ...]
    kept_arcs: tuple[Arc, ...]
    dropped_arcs: tuple[Arc, ...]

    def as_graph(self) -> ConstraintGraph:
        return ConstraintGraph(self.nodes, self.kept_arcs)


def break_cycles(t: TargetGraph | ConstraintGraph) -> AcyclicTargetGraph:
    """Depth-first cut of back arcs.

    Every node starts a DFS in ascending order; an arc into a node that is
    on the active DFS path would close a cycle and is dropped, every other
    arc is kept in the order the search meets it.
    """
    g = t.graph if isinstance(t, TargetGraph) else t
    succ = g.successors()
    visited: set[EdgeRef] = set()
    on_path: set[EdgeRef] = set()
    kept: list[Arc] = []

    def dfs(node: EdgeRef):
        if node in visited:
            return
        visited.add(node)
        on_path.add(node)
        for arc in succ[node]:
            if arc.dst not in on_path:
                kept.append(arc)
                dfs(arc.dst)
        on_path.discard(node)

    for node in g.nodes:
        dfs(node)
    kept_keys = {a.key for a in kept}
    dropped = tuple(a for a in g.arcs if a.key not in kept_keys)
    return AcyclicTargetGraph(g.nodes, tuple(kept), dropped)
