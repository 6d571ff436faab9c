import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_log  # noqa: E402
from memanticipation import anticipator, oscillator  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_log.lines():
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fig6():
    return oscillator.FIG6


@pytest.fixture(scope="session")
def T_r(fig6):
    return oscillator.nominal(fig6).T_r


@pytest.fixture(scope="session")
def dt(fig6):
    return oscillator.dt_max(fig6)


@pytest.fixture(scope="session")
def bit_runs():
    """Cached bit-0 and bit-1 training runs: 3 training pulses, gap, 2 test pulses."""
    ant = anticipator.BitAnticipator()
    out = {}
    for b in (0, 1):
        wave, probes = anticipator.training_excitation(ant, [b] * 3, [b] * 2)
        out[b] = (wave, anticipator.run(ant, wave, slot_times=probes))
    return out
