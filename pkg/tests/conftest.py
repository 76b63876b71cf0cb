import shutil
import sys
from pathlib import Path

import pytest

from fusion import smtback as B

ROOT = Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "programs"

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


def have_solver() -> bool:
    return B.find_solver() is not None and shutil.which(B.find_solver()) is not None


needs_smt = pytest.mark.skipif(not have_solver(), reason="no SMT solver on PATH")


@pytest.fixture(scope="session")
def solver():
    if not have_solver():
        pytest.skip("no SMT solver on PATH")
    with B.Solver(timeout_ms=10_000) as s:
        yield s


def program(name: str) -> str:
    return (PROGRAMS / name).read_text()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
