import pytest
from hypothesis import settings

from horseshoe_lab.fixtures import figure4_caption, ref0, ref0_b1
from horseshoe_lab.hmap import build_map

settings.register_profile("lab", max_examples=60, deadline=None)
settings.load_profile("lab")


@pytest.fixture(scope="session")
def ref0_sys():
    return ref0()


@pytest.fixture(scope="session")
def ref0_map(ref0_sys):
    return build_map(ref0_sys)


@pytest.fixture(scope="session")
def b1_sys():
    return ref0_b1()


@pytest.fixture(scope="session")
def fig4_sys():
    return figure4_caption()


ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Store an acceptance outcome; the summary prints one line per criterion."""
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
