"""Constraint digraph: classification, corner projection, cycles, feasibility."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .models import Config, Constraint, EdgeRef, Kind, KindSource, PhaseDef, Polarity


class ProjectionWarning(UserWarning):
    """A positive min-high/min-duration bound was left unprojected."""


def classify(src: EdgeRef, dst: EdgeRef, bound_ps: int, defs: Sequence[PhaseDef] | None = None) -> Kind:
    """Infer the kind of ``t(dst) - t(src) >= bound_ps``.

    Same-phase r->f is min-high; across phases a negative bound means the
    two phases must overlap for a while (min-duration), otherwise it is a
    separation.
    """
    if defs is not None:
        known = {d.phase_no for d in defs}
        for edge in (src, dst):
            if edge.phase_no not in known:
                raise ValueError(f"unknown phase {edge.phase_no} in {src} -> {dst}")
    if src.phase_no == dst.phase_no:
        if src.polarity is Polarity.RISING and dst.polarity is Polarity.FALLING:
            return Kind.MIN_HI
        raise ValueError(f"unsupported same-phase constraint {src} -> {dst}")
    return Kind.MIN_DUR if bound_ps < 0 else Kind.MIN_SEP


def round_half_away(x: Fraction) -> int:
    n, d = x.numerator, x.denominator
    q, r = divmod(abs(n), d)
    if 2 * r >= d:
        q += 1
    return q if n >= 0 else -q


def project_to_fast(constraints: Iterable[Constraint], cfg: Config) -> list[Constraint]:
    """Scale negative min-high/min-duration bounds from the slow corner to the fast one.

    Separation bounds are already smallest at the fast corner and pass
    through. Positive high/duration bounds are kept and trigger a
    ``ProjectionWarning``.
    """
    if cfg.k_fs < 1:
        raise ValueError("k_fs must be >= 1")
    out = []
    for c in constraints:
        if c.kind.hilike and c.bound_ps < 0:
            bound = round_half_away(Fraction(c.bound_ps) / Fraction(cfg.k_fs))
            c = Constraint(c.src, c.dst, bound, c.kind, c.kind_source)
        elif c.kind.hilike and c.bound_ps > 0:
            warnings.warn(f"{c}: positive {c.kind.value} bound left unprojected", ProjectionWarning,
                          stacklevel=2)
        out.append(c)
    return out


@dataclass(frozen=True)
class Arc:
    src: EdgeRef
    dst: EdgeRef
    weight_ps: int
    kind: Kind

    @property
    def key(self) -> tuple[EdgeRef, EdgeRef]:
        return (self.src, self.dst)

    def __str__(self) -> str:
        return f"{self.src} {self.dst} {self.weight_ps}"


@dataclass(frozen=True)
class ConstraintGraph:
    nodes: tuple[EdgeRef, ...]
    arcs: tuple[Arc, ...]

    def __post_init__(self):
        nodes = set(self.nodes)
        seen = set()
        for a in self.arcs:
            if a.src not in nodes or a.dst not in nodes:
                raise ValueError(f"arc {a} has an endpoint outside the graph")
            if a.src == a.dst:
                raise ValueError(f"self-loop on {a.src}")
            if a.key in seen:
                raise ValueError(f"duplicate arc {a.src} -> {a.dst}")
            seen.add(a.key)

    def arc(self, src: EdgeRef, dst: EdgeRef) -> Arc:
        for a in self.arcs:
            if a.src == src and a.dst == dst:
                return a
        raise KeyError((src, dst))

    def successors(self) -> dict[EdgeRef, list[Arc]]:
        succ: dict[EdgeRef, list[Arc]] = {n: [] for n in self.nodes}
        for a in self.arcs:
            succ[a.src].append(a)
        for out in succ.values():
            out.sort(key=lambda a: a.dst)
        return succ

    def predecessors(self) -> dict[EdgeRef, list[Arc]]:
        pred: dict[EdgeRef, list[Arc]] = {n: [] for n in self.nodes}
        for a in self.arcs:
            pred[a.dst].append(a)
        for inc in pred.values():
            inc.sort(key=lambda a: a.src)
        return pred

    def with_weights(self, weights: dict[tuple[EdgeRef, EdgeRef], int]) -> ConstraintGraph:
        return ConstraintGraph(self.nodes, tuple(
            Arc(a.src, a.dst, weights[a.key], a.kind) for a in self.arcs))

    def to_constraints(self) -> list[Constraint]:
        return [Constraint(a.src, a.dst, a.weight_ps, a.kind) for a in self.arcs]


def build_graph(constraints: Iterable[Constraint]) -> ConstraintGraph:
    """One node per mentioned edge, one arc per constraint.

    Repeated (src, dst) pairs collapse to the largest bound.
    """
    merged: dict[tuple[EdgeRef, EdgeRef], Arc] = {}
    nodes: set[EdgeRef] = set()
    for c in constraints:
        if c.src == c.dst:
            raise ValueError(f"self-loop on {c.src}")
        nodes.update((c.src, c.dst))
        prev = merged.get((c.src, c.dst))
        if prev is None or c.bound_ps > prev.weight_ps:
            merged[(c.src, c.dst)] = Arc(c.src, c.dst, c.bound_ps, c.kind)
    arcs = tuple(sorted(merged.values(), key=lambda a: a.key))
    return ConstraintGraph(tuple(sorted(nodes)), arcs)


@dataclass(frozen=True)
class Cycle:
    arcs: tuple[Arc, ...]

    @property
    def nodes(self) -> tuple[EdgeRef, ...]:
        return tuple(a.src for a in self.arcs)

    @property
    def length_ps(self) -> int:
        return sum(a.weight_ps for a in self.arcs)

    @property
    def n_nodes(self) -> int:
        return len(self.arcs)

    @property
    def n_minsep(self) -> int:
        return sum(a.kind is Kind.MIN_SEP for a in self.arcs)

    @property
    def n_minhilike(self) -> int:
        return sum(a.kind.hilike for a in self.arcs)

    def __str__(self) -> str:
        return " -> ".join(str(n) for n in self.nodes + self.nodes[:1])


def _circuits(succ: dict[EdgeRef, list[EdgeRef]]) -> list[list[EdgeRef]]:
    # Johnson's algorithm: for each start node s (ascending), find the
    # circuits through s in the subgraph induced by nodes >= s.
    order = sorted(succ)
    found = []
    for i, s in enumerate(order):
        allowed = set(order[i:])
        comp = _scc_containing(s, succ, allowed)
        if not any(w in comp for w in succ[s]):
            continue
        blocked: set[EdgeRef] = set()
        bmap: dict[EdgeRef, set[EdgeRef]] = {n: set() for n in comp}
        path = [s]
        blocked.add(s)

        def unblock(u):
            stack = [u]
            while stack:
                v = stack.pop()
                if v in blocked:
                    blocked.discard(v)
                    stack.extend(bmap[v])
                    bmap[v].clear()

        # iterative circuit search, frames are (node, child iterator, closed-a-circuit)
        frames = [(s, iter([w for w in succ[s] if w in comp]), [False])]
        while frames:
            v, children, closed = frames[-1]
            w = next(children, None)
            if w is not None:
                if w == s:
                    found.append(list(path))
                    closed[0] = True
                elif w not in blocked:
                    path.append(w)
                    blocked.add(w)
                    frames.append((w, iter([x for x in succ[w] if x in comp]), [False]))
                continue
            frames.pop()
            if closed[0]:
                unblock(v)
            else:
                for x in succ[v]:
                    if x in comp:
                        bmap[x].add(v)
            path.pop()
            if frames and closed[0]:
                frames[-1][2][0] = True
    return found


def _scc_containing(s, succ, allowed) -> set:
    fwd = _reach(s, lambda n: succ[n], allowed)
    pred: dict = {n: [] for n in allowed}
    for n in allowed:
        for m in succ[n]:
            if m in allowed:
                pred[m].append(n)
    back = _reach(s, lambda n: pred[n], allowed)
    return fwd & back


def _reach(s, nbrs, allowed) -> set:
    seen = {s}
    stack = [s]
    while stack:
        n = stack.pop()
        for m in nbrs(n):
            if m in allowed and m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def enumerate_cycles(g: ConstraintGraph) -> list[Cycle]:
    """All elementary circuits of ``g``, each once.

    Every cycle starts at its smallest node; the list is sorted by the
    node sequence so the result does not depend on arc order.
    """
    succ = {n: [a.dst for a in arcs] for n, arcs in g.successors().items()}
    by_key = {a.key: a for a in g.arcs}
    cycles = []
    for path in _circuits(succ):
        arcs = tuple(by_key[(path[i], path[(i + 1) % len(path)])] for i in range(len(path)))
        cycles.append(Cycle(arcs))
    cycles.sort(key=lambda c: c.nodes)
    return cycles


@dataclass(frozen=True)
class FeasibilityReport:
    cycles: tuple[Cycle, ...]
    offending: tuple[Cycle, ...] = field(default_factory=tuple)

    @property
    def feasible(self) -> bool:
        return not self.offending

    def format(self) -> str:
        lines = [f"cycles: {len(self.cycles)}"]
        for i, c in enumerate(self.cycles, 1):
            flag = "  POSITIVE" if c.length_ps > 0 else ""
            lines.append(f"cycle {i}: length {c.length_ps} nodes {c.n_nodes}: {c}{flag}")
        lines.append("feasible" if self.feasible else "infeasible")
        return "\n".join(lines) + "\n"


def check_feasibility(g: ConstraintGraph, cycles: Sequence[Cycle] | None = None) -> FeasibilityReport:
    """Difference constraints are satisfiable iff no cycle has positive length."""
    if cycles is None:
        cycles = enumerate_cycles(g)
    return FeasibilityReport(tuple(cycles), tuple(c for c in cycles if c.length_ps > 0))


def with_kind(constraints: Iterable[Constraint], src: EdgeRef, dst: EdgeRef, kind: Kind) -> list[Constraint]:
    """Return ``constraints`` with the (src, dst) constraint retagged explicitly as ``kind``."""
    return [Constraint(c.src, c.dst, c.bound_ps, kind, KindSource.EXPLICIT)
            if (c.src, c.dst) == (src, dst) else c for c in constraints]
