from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from actres import (Config, Constraint, Corner, EdgeRef, Kind, KindSource, ParseError, PhaseDef, Polarity,
                    Schedule, VariantTiming, parse_composites, parse_config, parse_constraints,
                    parse_definitions, parse_schedule, parse_variant_timings, write_composites,
                    write_constraints, write_definitions, write_schedule, write_variant_timings)
from actres.phasefile_io import write_config

E = EdgeRef.parse


def test_parse_definitions_table_rows():
    assert parse_definitions("2 S2 1 2 0") == [PhaseDef(2, "S2", 1, 2, False)]
    (d,) = parse_definitions("7 DlyOut1 2 4 0")
    assert (d.phase_no, d.duty, d.period) == (7, 2, 4)


def test_parse_definitions_skips_comments_and_blanks():
    assert parse_definitions("# comment\n\n") == []


def test_parse_definitions_crlf():
    assert len(parse_definitions("1 S1 1 2 0\r\n2 S2 1 2 1\r\n")) == 2


@pytest.mark.parametrize("text", [
    "1 A 1 2 0\n1 B 1 2 0",      # duplicate number
    "1 A 1 2 0\n2 A 1 2 0",      # duplicate name
    "1 A x 2 0",
    "1 A 2 2 0",                 # duty == period
    "1 A 3 2 0",
    "1 A 1 2 2",                 # inv not 0/1
    "1 A 1 2",
    "0 A 1 2 0",
])
def test_parse_definitions_rejects(text):
    with pytest.raises(ParseError):
        parse_definitions(text)


def test_parse_error_carries_line_number():
    with pytest.raises(ParseError, match="line 3"):
        parse_definitions("# x\n1 A 1 2 0\n1 B 1 2 0\n")


def test_parse_constraints_examples(adc_defs):
    (c,) = parse_constraints("1f 3r 150", adc_defs)
    assert c == Constraint(E("1f"), E("3r"), 150, Kind.MIN_SEP, KindSource.INFERRED)
    (c,) = parse_constraints("2r 2f -5800", adc_defs)
    assert (c.bound_ps, c.kind) == (-5800, Kind.MIN_HI)
    (c,) = parse_constraints("3r 4f -3300 dur", adc_defs)
    assert (c.kind, c.kind_source) == (Kind.MIN_DUR, KindSource.EXPLICIT)


def test_explicit_kind_overrides_inference(adc_defs):
    (c,) = parse_constraints("3r 4f -1320 sep", adc_defs)
    assert c.kind is Kind.MIN_SEP


@pytest.mark.parametrize("text", [
    "1f 9r 150",        # unknown phase
    "1x 3r 150",
    "f1 3r 150",
    "1f 3r 1.5",
    "1f 3r 150 foo",
    "1f 3r",
    "2f 2r 10",         # same-phase f -> r
    "2r 2r 10",
    "1r 2f 10 hi",      # hi across phases
    "2r 2f 10 sep",     # sep on one phase
])
def test_parse_constraints_rejects(adc_defs, text):
    with pytest.raises(ParseError):
        parse_constraints(text, adc_defs)


def test_parse_variant_timings_examples():
    (v,) = parse_variant_timings("H_L1_clk 3128 38 4474 23")
    assert v == VariantTiming("H", "L1", "clk", 3128, 38, 4474, 23)
    (v,) = parse_variant_timings("S1_L1_xclk 2896 58 4685 42")
    assert (v.phase_name, v.branch, v.flavor) == ("S1", "L1", "xclk")


@pytest.mark.parametrize("text", ["H 1 2 3 4", "H_L1_clkx 1 2 3 4", "H_L1_clk 1 2 3", "H_L1_clk 1 -2 3 4",
                                  "H_L1_clk 1 2 3 4.0"])
def test_parse_variant_timings_rejects(text):
    with pytest.raises(ParseError):
        parse_variant_timings(text)


def test_write_schedule_example():
    s = Schedule({E("1r"): 0, E("1f"): -1828}, E("1r"))
    assert write_schedule(s) == "1r 0\n1f -1828\n"


def test_parse_schedule_example():
    assert parse_schedule("3f -264").times == {E("3f"): -264}


def test_parse_schedule_rejects_duplicates():
    with pytest.raises(ParseError, match="duplicate"):
        parse_schedule("1r 0\n1r 5\n")


def test_schedule_explicit_reference_round_trips():
    s = Schedule({E("1r"): 5, E("2r"): 0, E("3f"): 0}, E("3f"))
    text = write_schedule(s)
    assert text.startswith("# reference 3f\n")
    assert parse_schedule(text) == s


def test_composites_round_trip(adc_composites, fixtures_dir):
    assert len(adc_composites) == 7
    assert parse_composites(write_composites(adc_composites)) == adc_composites


def test_config_file_and_overrides():
    cfg = parse_config("t_clk_ps = 16666\nk_fs = 2.5\nk_fn = 1.6\ndefault_slack_ps = -100\ncorner = fast\n")
    assert cfg == Config()
    assert cfg.k_fs == Fraction(5, 2)
    assert parse_config("corner = slow", corner="typical").corner is Corner.TYPICAL
    assert parse_config(write_config(cfg)) == cfg


@pytest.mark.parametrize("text", ["k_fs = 1.2\nk_fn = 1.6", "default_slack_ps = 5", "foo = 1", "t_clk_ps = x",
                                  "corner = hot", "k_fs"])
def test_config_rejects(text):
    with pytest.raises(ParseError):
        parse_config(text)


# -- round-trip properties -------------------------------------------------

edges = st.builds(EdgeRef, st.integers(1, 30), st.sampled_from(list(Polarity)))
ints = st.integers(-10**6, 10**6)


@st.composite
def constraints(draw):
    src = draw(edges)
    kind = draw(st.sampled_from(list(Kind)))
    if kind is Kind.MIN_HI:
        src, dst = EdgeRef.rise(src.phase_no), EdgeRef.fall(src.phase_no)
    else:
        dst = draw(edges.filter(lambda e: e.phase_no != src.phase_no))
    return Constraint(src, dst, draw(ints), kind, KindSource.EXPLICIT)


@given(st.lists(constraints(), max_size=20))
def test_constraints_round_trip(cs):
    assert parse_constraints(write_constraints(cs)) == cs


@given(st.lists(constraints(), max_size=20))
def test_constraints_round_trip_without_kind_tokens_reinfers(cs):
    inferred = [c for c in cs if c.kind is Kind.MIN_HI or (c.kind is Kind.MIN_DUR) == (c.bound_ps < 0)]
    back = parse_constraints(write_constraints(inferred, with_kind=False))
    assert [(c.src, c.dst, c.bound_ps, c.kind) for c in back] == \
        [(c.src, c.dst, c.bound_ps, c.kind) for c in inferred]


@given(st.dictionaries(edges, ints, max_size=20), st.data())
def test_schedule_round_trip(times, data):
    ref = data.draw(st.sampled_from(sorted(times))) if times and data.draw(st.booleans()) else None
    s = Schedule(times, ref)
    assert parse_schedule(write_schedule(s)) == s


@st.composite
def phase_defs(draw):
    nos = draw(st.lists(st.integers(1, 50), unique=True, max_size=10))
    out = []
    for i, no in enumerate(nos):
        period = draw(st.integers(2, 8))
        out.append(PhaseDef(no, f"P{i}", draw(st.integers(1, period - 1)), period, draw(st.booleans())))
    return out


@given(phase_defs())
def test_definitions_round_trip(defs):
    assert parse_definitions(write_definitions(defs)) == defs


names = st.from_regex(r"[A-Za-z][A-Za-z0-9]{0,5}", fullmatch=True)


@given(st.lists(st.builds(VariantTiming, names, names, st.sampled_from(["clk", "xclk"]), ints,
                          st.integers(0, 500), ints, st.integers(0, 500)), max_size=10))
def test_variant_timings_round_trip(vs):
    assert parse_variant_timings(write_variant_timings(vs)) == vs
