"""Turn a schedule into periodic waveforms and text artifacts.

Nominally phase ``p`` with duty ``d`` and period ``q`` (half-period units)
rises at ``k*q*half`` and falls at ``(k*q + d)*half``. The schedule moves
each rising edge by ``t(p r)`` and each falling edge by ``t(p f)``.
Phases flagged ``inv`` are emitted complemented; constraint edges always
refer to the un-inverted phase.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .constraint_graph import ConstraintGraph, round_half_away
from .models import (CheckRow, Config, Constraint, Corner, EdgeRef, Kind, PhaseDef, Polarity,
                     Schedule, VerificationReport)
from .target_gen import AcyclicTargetGraph, TargetGraph


class WaveformError(ValueError):
    pass


class Level(enum.IntEnum):
    LOW = 0
    HIGH = 1


@dataclass(frozen=True)
class Pulse:
    index: int
    rise_ps: int
    fall_ps: int


@dataclass(frozen=True)
class WaveformTrace:
    phase_no: int
    name: str
    events: tuple[tuple[int, Level], ...]
    span_ps: int
    initial_level: Level = Level.LOW
    inverted: bool = False
    period_ps: int = 0
    high_ps: int = 0
    # un-inverted pulses, including a guard band on both sides of [0, span)
    pulses: tuple[Pulse, ...] = ()

    def __post_init__(self):
        level = self.initial_level
        last = None
        for t, lvl in self.events:
            if last is not None and t <= last:
                raise WaveformError(f"{self.name}: event times not increasing at {t}")
            if lvl == level:
                raise WaveformError(f"{self.name}: levels do not alternate at {t}")
            last, level = t, lvl

    def edge_times(self, polarity: Polarity, window_only: bool = False) -> list[int]:
        pulses = self.window_pulses() if window_only else self.pulses
        return [p.rise_ps if polarity is Polarity.RISING else p.fall_ps for p in pulses]

    def window_pulses(self) -> list[Pulse]:
        return [p for p in self.pulses if 0 <= p.index * self.period_ps < self.span_ps]


def hyperperiod_ps(defs: Iterable[PhaseDef], half_ps: int) -> int:
    return math.lcm(*(d.period * half_ps for d in defs))


def scale_schedule(s: Schedule, factor: Fraction | int) -> Schedule:
    """Multiply every offset by ``factor``, rounding half away from zero."""
    factor = Fraction(factor)
    return Schedule({e: round_half_away(t * factor) for e, t in s.times.items()}, s.reference)


def corner_schedule(s: Schedule, cfg: Config, corner: Corner | None = None) -> Schedule:
    """Approximate the offsets at ``corner`` from a fast-corner schedule."""
    return scale_schedule(s, cfg.corner_factor(corner))


def unroll(s: Schedule, defs: Sequence[PhaseDef], cfg: Config, n_hyperperiods: int = 1,
           phases: Iterable[int] | None = None) -> list[WaveformTrace]:
    """Waveforms over ``n_hyperperiods`` hyperperiods.

    By default every defined phase with at least one scheduled edge is
    emitted; an edge missing from the schedule sits at its nominal time.
    """
    if n_hyperperiods < 1:
        raise ValueError("n_hyperperiods must be >= 1")
    half = cfg.half_ps
    if phases is None:
        scheduled = {e.phase_no for e in s.times}
        chosen = [d for d in defs if d.phase_no in scheduled]
    else:
        wanted = set(phases)
        chosen = [d for d in defs if d.phase_no in wanted]
        missing = wanted - {d.phase_no for d in chosen}
        if missing:
            raise KeyError(f"undefined phases {sorted(missing)}")
    if not chosen:
        return []
    span = n_hyperperiods * hyperperiod_ps(chosen, half)
    return [_unroll_phase(d, s, half, span) for d in sorted(chosen, key=lambda d: d.phase_no)]


def _unroll_phase(d: PhaseDef, s: Schedule, half: int, span: int) -> WaveformTrace:
    period, high = d.period * half, d.duty * half
    tr = s.times.get(EdgeRef.rise(d.phase_no), 0)
    tf = s.times.get(EdgeRef.fall(d.phase_no), 0)
    if not (tr < high + tf < period + tr):
        raise WaveformError(
            f"phase {d.phase_no} ({d.name}): offsets r={tr} f={tf} put an edge past its neighbour "
            f"(high time would be {high + tf - tr} ps of a {period} ps period)")
    guard = 1 + -(-max(abs(tr), abs(tf)) // period)
    pulses = tuple(Pulse(k, k * period + tr, k * period + high + tf)
                   for k in range(-guard, span // period + guard))
    base = sorted([(p.rise_ps, Level.HIGH) for p in pulses] + [(p.fall_ps, Level.LOW) for p in pulses])
    if d.inv:
        base = [(t, Level(1 - lvl)) for t, lvl in base]
    before = [lvl for t, lvl in base if t < 0]
    initial = before[-1] if before else Level(int(d.inv))
    events = tuple((t, lvl) for t, lvl in base if 0 <= t < span)
    return WaveformTrace(d.phase_no, d.name, events, span, initial, d.inv, period, high, pulses)


# -- relationship check on unrolled waveforms ----------------------------

def check_relationships(traces: Iterable[WaveformTrace], constraints: Iterable[Constraint]) -> VerificationReport:
    """Measure each constraint on the waveforms, instance by instance.

    * separation: for every instance of the source edge, the distance to the
      nearest destination edge at or after it; the minimum is reported.
    * high time: shortest pulse minus the nominal high time.
    * duration: for every pair of pulses that overlap nominally, actual
      overlap minus nominal overlap; the minimum is reported.

    High and duration measurements are thus offsets like the bounds they
    are compared with.
    """
    by_no = {t.phase_no: t for t in traces}
    rows = []
    for c in constraints:
        for e in (c.src, c.dst):
            if e.phase_no not in by_no:
                raise KeyError(f"no waveform for phase {e.phase_no} used by {c}")
        src, dst = by_no[c.src.phase_no], by_no[c.dst.phase_no]
        if c.kind is Kind.MIN_SEP:
            measured = _separation(src, c.src.polarity, dst, c.dst.polarity)
        elif c.kind is Kind.MIN_HI:
            measured = min(p.fall_ps - p.rise_ps for p in src.window_pulses()) - src.high_ps
        else:
            measured = _joint_high(src, dst)
        rows.append(CheckRow(c, measured))
    return VerificationReport(tuple(rows))


def _separation(src: WaveformTrace, spol: Polarity, dst: WaveformTrace, dpol: Polarity) -> int:
    targets = sorted(dst.edge_times(dpol))
    best = None
    for a in src.edge_times(spol, window_only=True):
        following = [b for b in targets if b >= a]
        if not following:
            raise WaveformError(f"phase {dst.phase_no} trace too short to follow phase {src.phase_no} at {a}")
        gap = following[0] - a
        best = gap if best is None else min(best, gap)
    return best


def _joint_high(src: WaveformTrace, dst: WaveformTrace) -> int:
    best = None
    for p in src.window_pulses():
        n0, n1 = p.index * src.period_ps, p.index * src.period_ps + src.high_ps
        for q in dst.pulses:
            m0, m1 = q.index * dst.period_ps, q.index * dst.period_ps + dst.high_ps
            nominal = min(n1, m1) - max(n0, m0)
            if nominal <= 0:
                continue
            actual = min(p.fall_ps, q.fall_ps) - max(p.rise_ps, q.rise_ps)
            value = actual - nominal
            best = value if best is None else min(best, value)
    if best is None:
        raise WaveformError(f"phases {src.phase_no} and {dst.phase_no} are never high together")
    return best


# -- PWL ------------------------------------------------------------------

def emit_pwl(traces: Iterable[WaveformTrace], rise_fall_ps: int, vhigh_mv: int = 1800) -> str:
    """SPICE piecewise-linear voltage sources, one stanza per trace.

    Each edge at ``t`` becomes breakpoints ``(t, old)`` and
    ``(t + rise_fall_ps, new)``. A hold point at 0 carries the initial
    level when the first edge comes later.
    """
    if rise_fall_ps < 1:
        raise ValueError("rise_fall_ps must be >= 1")
    volts = {Level.LOW: 0, Level.HIGH: vhigh_mv}
    out = []
    for tr in sorted(traces, key=lambda t: t.phase_no):
        times = [t for t, _ in tr.events]
        gaps = [b - a for a, b in zip(times, times[1:])]
        if gaps and rise_fall_ps >= min(gaps):
            raise WaveformError(f"{tr.name}: rise/fall {rise_fall_ps} ps does not fit in a {min(gaps)} ps gap")
        out.append(f"* {tr.name} phase {tr.phase_no}" + (" inverted" if tr.inverted else "") + "\n")
        out.append(f"V{tr.name} {tr.name} 0 PWL(\n")
        points = []
        level = tr.initial_level
        if tr.events and tr.events[0][0] > 0:
            points.append((0, volts[level]))
        for t, new in tr.events:
            points.append((t, volts[level]))
            points.append((t + rise_fall_ps, volts[new]))
            level = new
        out.extend(f"+ {t}p {v}m\n" for t, v in points)
        out.append("+ )\n")
    return "".join(out)


_PWL_POINT = re.compile(r"^\+\s+(-?\d+)p\s+(\d+)m$")
_PWL_HEAD = re.compile(r"^\*\s+(\S+)\s+phase\s+(\d+)(\s+inverted)?$")


def parse_pwl(text: str) -> dict[str, list[tuple[int, int]]]:
    """Breakpoints per source name from text written by ``emit_pwl``."""
    out: dict[str, list[tuple[int, int]]] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if _PWL_HEAD.match(line):
            continue
        if line.startswith("V") and line.endswith("PWL("):
            current = line.split()[1]
            out[current] = []
        elif line == "+ )":
            current = None
        elif (m := _PWL_POINT.match(line)) and current is not None:
            out[current].append((int(m.group(1)), int(m.group(2))))
        else:
            raise ValueError(f"line {lineno}: unexpected PWL text {line!r}")
    return out


def pwl_events(points: Sequence[tuple[int, int]], vhigh_mv: int = 1800) -> tuple[Level, list[tuple[int, Level]]]:
    """Initial level and logical edges recovered from breakpoints."""
    if not points:
        return Level.LOW, []
    level_of = {0: Level.LOW, vhigh_mv: Level.HIGH}
    events = []
    for (t0, v0), (_, v1) in zip(points, points[1:]):
        if v0 != v1:
            events.append((t0, level_of[v1]))
    return level_of[points[0][1]], events


# -- DOT ------------------------------------------------------------------

def emit_dot(g: ConstraintGraph | TargetGraph | AcyclicTargetGraph, name: str = "constraints") -> str:
    """Graphviz digraph with edge-labelled nodes and weight-labelled arcs.

    Arcs dropped by ``break_cycles`` are drawn dashed.
    """
    dropped = ()
    if isinstance(g, AcyclicTargetGraph):
        nodes, arcs, dropped = g.nodes, g.kept_arcs, g.dropped_arcs
    elif isinstance(g, TargetGraph):
        nodes, arcs = g.graph.nodes, g.graph.arcs
    else:
        nodes, arcs = g.nodes, g.arcs
    lines = [f"digraph {name} {{\n"]
    lines.extend(f'  "{n}";\n' for n in sorted(nodes))
    for a in sorted(arcs, key=lambda a: a.key):
        lines.append(f'  "{a.src}" -> "{a.dst}" [label="{a.weight_ps}"];\n')
    for a in sorted(dropped, key=lambda a: a.key):
        lines.append(f'  "{a.src}" -> "{a.dst}" [label="{a.weight_ps}", style=dashed];\n')
    lines.append("}\n")
    return "".join(lines)
