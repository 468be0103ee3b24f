import pytest

from cavity_phase_gate.model import SystemParams


@pytest.fixture(scope="session")
def paper_params():
    """Matched three-qutrit point: Δ₁ = 10.7, Δ = 8.4, μ from the matching condition."""
    return SystemParams.paper_point()


@pytest.fixture(scope="session")
def ideal_run(paper_params):
    from cavity_phase_gate.dynamics import run_gate_ideal

    return run_gate_ideal(paper_params)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
