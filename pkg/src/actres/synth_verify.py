"""Check post-synthesis clock timings against the constraint file.

Each phase may be realized by several variants (one per extrinsic tree
branch, regular ``clk`` and complementary ``xclk``). They are folded into
one composite per phase holding the extreme rising and falling times,
and every constraint is checked with the least favourable pair of edges.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

from .models import (CheckRow, CompositePhase, Constraint, EdgeRef, PhaseDef, Polarity,
                     VariantTiming, VerificationReport)


def fold_variant(v: VariantTiming) -> tuple[int, int]:
    """(phase rise, phase fall) realized by ``v``.

    An xclk variant is the complement of its phase, so its rising
    transition is the phase's falling edge and vice versa.
    """
    if v.flavor == "clk":
        return v.rise_ps, v.fall_ps
    return v.fall_ps, v.rise_ps


def sum_variant_timings(cti: Iterable[VariantTiming], cte: Iterable[VariantTiming]) -> list[VariantTiming]:
    """Add intrinsic-tree and extrinsic-tree delays per variant name.

    Slews are taken from the extrinsic file since that is where the pin sits.
    """
    cti_by_name = {v.name: v for v in cti}
    out = []
    for e in cte:
        i = cti_by_name.pop(e.name, None)
        if i is None:
            raise KeyError(f"variant {e.name} missing from the intrinsic-tree timings")
        out.append(VariantTiming(e.phase_name, e.branch, e.flavor, i.rise_ps + e.rise_ps, e.rise_slew_ps,
                                 i.fall_ps + e.fall_ps, e.fall_slew_ps))
    if cti_by_name:
        raise KeyError(f"variants missing from the extrinsic-tree timings: {', '.join(sorted(cti_by_name))}")
    return out


def build_composites(variants: Iterable[VariantTiming], defs: Sequence[PhaseDef]) -> list[CompositePhase]:
    """One composite per phase that has variants, in phase-number order."""
    by_name = {d.name: d for d in defs}
    rises: dict[str, list[int]] = defaultdict(list)
    falls: dict[str, list[int]] = defaultdict(list)
    for v in variants:
        if v.phase_name not in by_name:
            raise KeyError(f"variant {v.name} names undefined phase {v.phase_name!r}")
        r, f = fold_variant(v)
        rises[v.phase_name].append(r)
        falls[v.phase_name].append(f)
    out = [CompositePhase(by_name[n].phase_no, n, max(rises[n]), min(rises[n]), max(falls[n]), min(falls[n]))
           for n in rises]
    return sorted(out, key=lambda c: c.phase_no)


def _latest(c: CompositePhase, pol: Polarity) -> int:
    return c.r_max if pol is Polarity.RISING else c.f_max


def _earliest(c: CompositePhase, pol: Polarity) -> int:
    return c.r_min if pol is Polarity.RISING else c.f_min


def verify_synthesis(composites: Iterable[CompositePhase], constraints: Iterable[Constraint]) -> VerificationReport:
    """Worst case per constraint: earliest ``dst`` edge minus latest ``src`` edge."""
    by_no = {c.phase_no: c for c in composites}
    rows = []
    for c in constraints:
        for e in (c.src, c.dst):
            if e.phase_no not in by_no:
                raise KeyError(f"no composite for phase {e.phase_no} used by {c}")
        measured = _earliest(by_no[c.dst.phase_no], c.dst.polarity) - _latest(by_no[c.src.phase_no], c.src.polarity)
        rows.append(CheckRow(c, measured))
    return VerificationReport(tuple(rows))


def variant_edge_times(variants: Iterable[VariantTiming], defs: Sequence[PhaseDef]) -> dict[int, list[dict[EdgeRef, int]]]:
    """Per phase number, the folded edge times of each variant."""
    by_name = {d.name: d.phase_no for d in defs}
    out: dict[int, list[dict[EdgeRef, int]]] = defaultdict(list)
    for v in variants:
        no = by_name[v.phase_name]
        r, f = fold_variant(v)
        out[no].append({EdgeRef.rise(no): r, EdgeRef.fall(no): f})
    return dict(out)
