import numpy as np
import pytest
from hypothesis import settings

from resilient_coding.games import observation_channel
from resilient_coding.rate import SourceModel

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pd_model(p=0.5, q=0.5) -> SourceModel:
    return SourceModel.from_probs([[p, 1 - p], [q, 1 - q]], [["T", "B"], ["L", "R"]])


@pytest.fixture
def uniform_pd():
    return pd_model()


@pytest.fixture
def half_noise():
    return observation_channel(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
