"""Place every clock edge on the time axis from the acyclic target graph.

The search alternates discovery and scheduling passes driven by a FIFO
root list. A pass in direction +1 walks successors and times a node as
the minimum of ``t(succ) - w`` over its timed successors; a pass in
direction -1 walks predecessors and takes the maximum of ``t(pred) + w``.
A node with no children in the pass direction is queued for a pass in
the opposite direction.

Example: with arcs a->b (100) and b->c (-50) and reference a, the first
two passes find nothing timed downstream, c is queued backwards, and the
backward pass from c sets b = 100 and c = 50.
"""

from __future__ import annotations

import sys
from collections import deque
from typing import Iterable

from .constraint_graph import Arc, ConstraintGraph
from .models import CheckRow, Constraint, EdgeRef, Schedule, VerificationReport
from .target_gen import AcyclicTargetGraph


class ScheduleError(ValueError):
    """The scheduler could not produce a consistent schedule."""


class DisconnectedError(ScheduleError):
    def __init__(self, untimed: Iterable[EdgeRef]):
        self.untimed = tuple(sorted(untimed))
        super().__init__("no path to the reference edge from " + ", ".join(map(str, self.untimed)))


class CrossArcError(ScheduleError):
    """Kept arcs between nodes timed in different passes are violated."""

    def __init__(self, schedule: Schedule, violated: Iterable[Arc]):
        self.schedule = schedule
        self.violated = tuple(violated)
        detail = "; ".join(
            f"{a} (got {schedule[a.dst] - schedule[a.src]})" for a in self.violated)
        super().__init__(f"schedule violates kept arc(s) {detail}; adjust the default slack")


def default_reference(nodes: Iterable[EdgeRef]) -> EdgeRef:
    """Rising edge of the lowest-numbered phase, else the smallest edge."""
    nodes = sorted(nodes)
    if not nodes:
        raise ValueError("graph has no nodes")
    low = nodes[0].phase_no
    return EdgeRef.rise(low) if EdgeRef.rise(low) in nodes else nodes[0]


def schedule_nodes(a: AcyclicTargetGraph | ConstraintGraph, node0: EdgeRef | None = None,
                   check: bool = True) -> Schedule:
    g = a.as_graph() if isinstance(a, AcyclicTargetGraph) else a
    if node0 is None:
        node0 = default_reference(g.nodes)
    if node0 not in g.nodes:
        raise ValueError(f"reference {node0} is not a node of the graph")

    children = {+1: {n: [(x.dst, x.weight_ps) for x in arcs] for n, arcs in g.successors().items()},
                -1: {n: [(x.src, x.weight_ps) for x in arcs] for n, arcs in g.predecessors().items()}}
    visited = dict.fromkeys(g.nodes, 0)
    time: dict[EdgeRef, int | None] = dict.fromkeys(g.nodes)
    time[node0] = 0
    roots = deque([(node0, +1), (node0, -1)])
    queued = set(roots)
    flag = 0

    def dfs(node: EdgeRef, d: int):
        if visited[node] == flag:
            return
        if time[node] is not None and node != node0:
            return
        visited[node] = flag
        kids = children[d][node]
        if not kids and (node, -d) not in queued:
            queued.add((node, -d))
            roots.append((node, -d))
        best = None
        for child, w in kids:
            dfs(child, d)
            if time[child] is None:
                continue
            # w is the arc weight whichever way the pass walks it
            tmp = time[child] - d * w
            if best is None or d * tmp < d * best:
                best = tmp
        if best is not None and node != node0:
            time[node] = best

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * len(g.nodes) + 100))
    try:
        while roots:
            flag += 1
            node, d = roots.popleft()
            dfs(node, d)
    finally:
        sys.setrecursionlimit(limit)

    untimed = [n for n, t in time.items() if t is None]
    if untimed:
        raise DisconnectedError(untimed)
    s = Schedule({n: time[n] for n in g.nodes}, node0)
    if check:
        bad = [x for x in g.arcs if s[x.dst] - s[x.src] < x.weight_ps]
        if bad:
            raise CrossArcError(s, bad)
    return s


def normalize(s: Schedule, mode: str = "none") -> Schedule:
    """``"none"`` returns ``s``; ``"shift_min_to_zero"`` shifts so the earliest edge sits at 0."""
    if mode == "none":
        return s
    if mode != "shift_min_to_zero":
        raise ValueError(f"unknown normalize mode {mode!r}")
    if not s.times:
        return s
    shift = -min(s.times.values())
    return Schedule({e: t + shift for e, t in s.times.items()}, s.reference)


def verify_schedule(s: Schedule, constraints: Iterable[Constraint]) -> VerificationReport:
    rows = []
    for c in constraints:
        for e in (c.src, c.dst):
            if e not in s.times:
                raise KeyError(f"schedule has no time for {e}")
        rows.append(CheckRow(c, s[c.dst] - s[c.src]))
    return VerificationReport(tuple(rows))
