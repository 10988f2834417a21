import pytest

from hwm.types import ContractState, ContractTerms, MarketParams

_criteria = []


@pytest.fixture
def ref_market():
    return MarketParams(r=0.05, v=0.10, y=0.0)


@pytest.fixture
def ref_terms():
    return ContractTerms(gamma=0.08, maturity=10.0, n_observations=12)


@pytest.fixture
def issue_state():
    return ContractState()


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion.

    Usage: ``criterion("5", "sweep shape", ok, detail)``; the lines are printed
    in the terminal summary.
    """

    def record(number, name, ok, detail=""):
        _criteria.append((number, name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(_criteria, key=lambda c: int(c[0])):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {name}  {detail}")
