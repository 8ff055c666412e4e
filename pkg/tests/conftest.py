import numpy as np
import pytest

from shiftfrechet.model import FourierTemplate

_ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_report():
    def report(number, title, ok, detail=""):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
                                 + (f" -- {detail}" if detail else ""))
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


def random_template(rng, K=None) -> FourierTemplate:
    K = int(rng.integers(1, 9)) if K is None else K
    pos = rng.normal(size=K) + 1j * rng.normal(size=K)
    return FourierTemplate(np.concatenate([np.conj(pos[::-1]), [rng.normal()], pos]))
