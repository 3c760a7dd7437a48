import textwrap

import pytest

TINY_CAVITY = """
[run]
name = "tiny"

[model]
kind = "cavity"
n_modes = 3
length = 1
omega = "pi"
coupling = {coupling}
T_S = 0.5
T_E = 2

[switching]
duration = 6
ramp = 1

[observables]
columns = {columns}

[assumptions]
dt = {dt}
samples = 12
"""

TINY_ORACLE = """
[run]
name = "tiny_oracle"

[model]
kind = "cavity"
n_modes = 1
length = "pi"
omega = 1
coupling = 0.05
T_S = 0.5
T_E = 1

[switching]
duration = 10
ramp = 2

[observables]
columns = ["S_S"]

[assumptions]
detector_position = "pi/2"
dt = 1e-3
samples = 10

[oracle]
n_max = 20
dt = 1e-2
"""


@pytest.fixture
def tiny_config(tmp_path):
    """Write a small cavity config and return its path."""

    def make(coupling=0.3, dt=1e-3, columns='["T_eff", "zeta", "D", "MI(S:E)", "MI(S:1)", "MI(1:2+3)", "S_SE"]', name="tiny.toml"):
        path = tmp_path / name
        path.write_text(textwrap.dedent(TINY_CAVITY.format(coupling=coupling, dt=dt, columns=columns)))
        return path

    return make


@pytest.fixture
def tiny_oracle_config(tmp_path):
    path = tmp_path / "oracle.toml"
    path.write_text(TINY_ORACLE)
    return path


_CRITERIA: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    """Store the one-line outcome of an acceptance criterion for the summary."""
    _CRITERIA[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
