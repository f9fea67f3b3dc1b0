import pytest
from hypothesis import HealthCheck, settings

from ldcforge import decpoly, matchfam
from ldcforge.codec import CodeSpec

settings.register_profile(
    "ldc", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ldc")

# criterion id -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")


@pytest.fixture(scope="session")
def cert511():
    return decpoly.collision_search(511)


@pytest.fixture(scope="session")
def cert2047():
    return decpoly.collision_search(2047)


@pytest.fixture(scope="session")
def spec15():
    fam = matchfam.make_family(15, [(6, 12), (3, 9)])
    return CodeSpec(fam, decpoly.lagrange_polynomial(15))


@pytest.fixture(scope="session")
def spec511(cert511):
    fam = matchfam.greedy_search(511, 2, 2, seed=1)
    return CodeSpec(fam, cert511.polynomial)
