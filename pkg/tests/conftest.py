import pytest
from hypothesis import HealthCheck, settings

from hwfuzz.designs import design_source, load_design
from hwfuzz.rtl import extract_spec, parse
from hwfuzz.sim import elaborate

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def build(src, top=None, clock=None, reset=None):
    mods = parse(src)
    spec = extract_spec(mods, top or mods[-1].name, clock, reset)
    return elaborate(mods, spec)


@pytest.fixture(scope="session")
def ks_src():
    return design_source("key_store_debug")


@pytest.fixture(scope="session")
def ks():
    return load_design("key_store_debug")


@pytest.fixture(scope="session")
def designs():
    return {name: load_design(name) for name in ("key_store_debug", "counter8", "fsm_lock", "alu8")}


# -- acceptance summary ----------------------------------------------------------
# test_acceptance.py records one verdict per criterion here; the hook below
# prints them after the run so they show up without -s.
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
