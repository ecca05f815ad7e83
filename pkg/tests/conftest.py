import pytest

from homoflow.profile import SolutionParams, solve_profile

ACCEPTANCE = {}


def record(criterion: int, name: str, ok: bool, detail: str = ""):
    """Collect one sub-check of an acceptance criterion for the terminal summary."""
    ACCEPTANCE.setdefault(criterion, {"name": name, "checks": []})["checks"].append((ok, detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[k]
        ok = all(c[0] for c in entry["checks"])
        detail = "; ".join(d for _, d in entry["checks"] if d)
        terminalreporter.write_line(f"criterion {k} [{entry['name']}]: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def sol_small():
    return solve_profile(SolutionParams(0.0, 0.0, 0.1, 0.05))


@pytest.fixture(scope="session")
def sol_zero():
    return solve_profile(SolutionParams(0.0, 0.0, 0.0, 0.0))


@pytest.fixture(scope="session")
def sol_general():
    return solve_profile(SolutionParams(0.3, -0.2, 0.4, 0.2))
