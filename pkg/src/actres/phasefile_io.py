"""Readers and writers for the plain-text interchange files.

Every format is whitespace separated ASCII, one record per line. Lines
whose first non-blank character is ``#`` and blank lines are skipped.
Anything else that does not match the grammar raises ``ParseError``
carrying the 1-based line number.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .constraint_graph import classify
from .models import (CompositePhase, Config, Constraint, Corner, EdgeRef, Kind, KindSource, ParseError,
                     PhaseDef, Schedule, VariantTiming)

_KIND_TOKENS = {k.value: k for k in Kind}


def _records(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped.split()


def _int(token: str, what: str, lineno: int) -> int:
    # int() would also accept "1_000" and "+5"; keep the grammar strict
    body = token[1:] if token[:1] == "-" else token
    if not body.isdigit() or not body.isascii():
        raise ParseError(f"{what} must be an integer, got {token!r}", lineno)
    return int(token)


def _edge(token: str, lineno: int) -> EdgeRef:
    try:
        return EdgeRef.parse(token)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


# -- definition file ----------------------------------------------------

def parse_definitions(text: str) -> list[PhaseDef]:
    defs: list[PhaseDef] = []
    numbers: set[int] = set()
    names: set[str] = set()
    for lineno, tok in _records(text):
        if len(tok) != 5:
            raise ParseError(f"expected '<no> <name> <duty> <period> <inv>', got {len(tok)} fields", lineno)
        phase_no = _int(tok[0], "phase number", lineno)
        name = tok[1]
        duty = _int(tok[2], "duty", lineno)
        period = _int(tok[3], "period", lineno)
        if tok[4] not in ("0", "1"):
            raise ParseError(f"inv must be 0 or 1, got {tok[4]!r}", lineno)
        if phase_no in numbers:
            raise ParseError(f"duplicate phase number {phase_no}", lineno)
        if name in names:
            raise ParseError(f"duplicate phase name {name!r}", lineno)
        try:
            defs.append(PhaseDef(phase_no, name, duty, period, tok[4] == "1"))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        numbers.add(phase_no)
        names.add(name)
    return defs


def write_definitions(defs: Iterable[PhaseDef]) -> str:
    return "".join(f"{d.phase_no} {d.name} {d.duty} {d.period} {int(d.inv)}\n" for d in defs)


# -- constraint / target file -------------------------------------------

def parse_constraints(text: str, defs: Sequence[PhaseDef] | None = None) -> list[Constraint]:
    """Parse ``<p1><r|f> <p2><r|f> <ps> [sep|hi|dur]`` lines.

    Without the optional kind token the kind is inferred by ``classify``.
    When ``defs`` is given every phase number must be defined there.
    """
    known = None if defs is None else {d.phase_no for d in defs}
    out = []
    for lineno, tok in _records(text):
        if len(tok) not in (3, 4):
            raise ParseError(f"expected '<edge> <edge> <ps> [kind]', got {len(tok)} fields", lineno)
        src, dst = _edge(tok[0], lineno), _edge(tok[1], lineno)
        bound = _int(tok[2], "bound", lineno)
        if known is not None:
            for e in (src, dst):
                if e.phase_no not in known:
                    raise ParseError(f"unknown phase {e.phase_no}", lineno)
        try:
            if len(tok) == 4:
                if tok[3] not in _KIND_TOKENS:
                    raise ParseError(f"kind must be one of sep/hi/dur, got {tok[3]!r}", lineno)
                out.append(Constraint(src, dst, bound, _KIND_TOKENS[tok[3]], KindSource.EXPLICIT))
            else:
                out.append(Constraint(src, dst, bound, classify(src, dst, bound)))
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    return out


def write_constraints(constraints: Iterable[Constraint], with_kind: bool | None = None) -> str:
    """Serialize constraints; the kind token is written for explicit kinds
    (``with_kind=None``), always (``True``) or never (``False``)."""
    lines = []
    for c in constraints:
        tag = c.kind_source is KindSource.EXPLICIT if with_kind is None else with_kind
        lines.append(f"{c.src} {c.dst} {c.bound_ps}" + (f" {c.kind.value}" if tag else "") + "\n")
    return "".join(lines)


# -- variant timings and composites --------------------------------------

def _split_variant(name: str, lineno: int) -> tuple[str, str, str]:
    parts = name.rsplit("_", 2)
    if len(parts) != 3 or parts[2] not in ("clk", "xclk") or not parts[0] or not parts[1]:
        raise ParseError(f"variant name {name!r} is not <phase>_<branch>_clk|xclk", lineno)
    return parts[0], parts[1], parts[2]


def parse_variant_timings(text: str) -> list[VariantTiming]:
    """Parse ``<variant> <rise> <rise slew> <fall> <fall slew>`` lines."""
    out = []
    for lineno, tok in _records(text):
        if len(tok) != 5:
            raise ParseError(f"expected 5 fields, got {len(tok)}", lineno)
        phase, branch, flavor = _split_variant(tok[0], lineno)
        rise, rise_slew, fall, fall_slew = (_int(t, "timing", lineno) for t in tok[1:])
        try:
            out.append(VariantTiming(phase, branch, flavor, rise, rise_slew, fall, fall_slew))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    return out


def write_variant_timings(variants: Iterable[VariantTiming]) -> str:
    return "".join(f"{v.name} {v.rise_ps} {v.rise_slew_ps} {v.fall_ps} {v.fall_slew_ps}\n"
                   for v in variants)


def parse_composites(text: str) -> list[CompositePhase]:
    """Parse ``<no> <name> <r_max> <r_min> <f_max> <f_min>`` lines."""
    out = []
    seen: set[int] = set()
    for lineno, tok in _records(text):
        if len(tok) != 6:
            raise ParseError(f"expected 6 fields, got {len(tok)}", lineno)
        phase_no = _int(tok[0], "phase number", lineno)
        if phase_no in seen:
            raise ParseError(f"duplicate composite for phase {phase_no}", lineno)
        seen.add(phase_no)
        try:
            out.append(CompositePhase(phase_no, tok[1], *(_int(t, "time", lineno) for t in tok[2:])))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    return out


def write_composites(composites: Iterable[CompositePhase]) -> str:
    return "".join(f"{c.phase_no} {c.name} {c.r_max} {c.r_min} {c.f_max} {c.f_min}\n"
                   for c in composites)


# -- schedule file --------------------------------------------------------

def write_schedule(s: Schedule) -> str:
    """One ``<edge> <ps>`` line per edge, rising before falling per phase.

    The reference edge is implied when it is the first zero-time edge;
    otherwise it is recorded in a ``# reference <edge|none>`` line.
    """
    edges = s.edges()
    lines = []
    if s.reference != _implied_reference(edges, s.times):
        lines.append(f"# reference {s.reference or 'none'}\n")
    lines.extend(f"{e} {s.times[e]}\n" for e in edges)
    return "".join(lines)


def _implied_reference(edges, times) -> EdgeRef | None:
    return next((e for e in edges if times[e] == 0), None)


def parse_schedule(text: str) -> Schedule:
    times: dict[EdgeRef, int] = {}
    order: list[EdgeRef] = []
    reference = None
    explicit = False
    for lineno, line in enumerate(text.splitlines(), 1):
        tok = line.split()
        if len(tok) == 3 and tok[:2] == ["#", "reference"]:
            explicit = True
            reference = None if tok[2] == "none" else _edge(tok[2], lineno)
    for lineno, tok in _records(text):
        if len(tok) != 2:
            raise ParseError(f"expected '<edge> <ps>', got {len(tok)} fields", lineno)
        edge = _edge(tok[0], lineno)
        if edge in times:
            raise ParseError(f"duplicate entry for {edge}", lineno)
        times[edge] = _int(tok[1], "time", lineno)
        order.append(edge)
    if not explicit:
        reference = _implied_reference(sorted(order), times)
    elif reference is not None and reference not in times:
        raise ParseError(f"reference edge {reference} has no time")
    return Schedule(times, reference)


# -- config file ----------------------------------------------------------

_CONFIG_KEYS = ("t_clk_ps", "k_fs", "k_fn", "default_slack_ps", "corner")


def parse_config(text: str, base: Config | None = None, **overrides) -> Config:
    """Read ``key = value`` lines onto ``base`` (defaults when omitted).

    Keyword ``overrides`` that are not ``None`` win over the file.
    """
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = (s.strip() for s in stripped.partition("="))
        if not sep or key not in _CONFIG_KEYS or not value:
            raise ParseError(f"expected one of {', '.join(_CONFIG_KEYS)} as 'key = value'", lineno)
        values[key] = _config_value(key, value, lineno)
    values.update({k: v for k, v in overrides.items() if v is not None})
    base = base or Config()
    merged = {k: values.get(k, getattr(base, k)) for k in _CONFIG_KEYS}
    for key in ("k_fs", "k_fn"):
        merged[key] = Fraction(merged[key])
    if isinstance(merged["corner"], str):
        merged["corner"] = Corner(merged["corner"])
    try:
        return Config(**merged)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _config_value(key: str, value: str, lineno: int):
    if key in ("t_clk_ps", "default_slack_ps"):
        return _int(value, key, lineno)
    if key == "corner":
        try:
            return Corner(value.lower())
        except ValueError:
            raise ParseError(f"corner must be slow, typical or fast, got {value!r}", lineno) from None
    try:
        frac = Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{key} must be a positive rational, got {value!r}", lineno) from None
    if frac <= 0:
        raise ParseError(f"{key} must be positive", lineno)
    return frac


def write_config(cfg: Config) -> str:
    return (f"t_clk_ps = {cfg.t_clk_ps}\nk_fs = {cfg.k_fs}\nk_fn = {cfg.k_fn}\n"
            f"default_slack_ps = {cfg.default_slack_ps}\ncorner = {cfg.corner.value}\n")
