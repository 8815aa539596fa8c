from pathlib import Path

import pytest

from actres import parse_constraints, parse_definitions, parse_schedule, parse_variant_timings, parse_composites

FIXTURES = Path(__file__).parent / "fixtures"


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text()


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def adc_defs():
    return parse_definitions(read_fixture("adc.defs"))


@pytest.fixture(scope="session")
def adc_constraints(adc_defs):
    return parse_constraints(read_fixture("adc.cons"), adc_defs)


@pytest.fixture(scope="session")
def adc_schedule():
    return parse_schedule(read_fixture("adc.sched"))


@pytest.fixture(scope="session")
def adc_variants():
    return parse_variant_timings(read_fixture("adc.variants"))


@pytest.fixture(scope="session")
def adc_composites():
    return parse_composites(read_fixture("adc.composites"))
