import pytest

from fermivac.fock import FockSpace
from fermivac.lattice import LatticeConfig

_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def spaces():
    """Fock spaces at the three lattice sizes used throughout, built once."""
    return {n: FockSpace(LatticeConfig(sites=n)) for n in (1, 3, 5)}


@pytest.fixture(scope="session")
def space3(spaces):
    return spaces[3]


@pytest.fixture
def record_criterion(request):
    """Record a one-line PASS/FAIL verdict that is echoed in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number: int, text: str, passed: bool):
        lines.append((number, f"{'PASS' if passed else 'FAIL'} criterion {number}: {text}"))
        print(lines[-1][1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
