import math

import pytest

# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(n: int, title: str, ok: bool, detail: str = ""):
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    ACCEPTANCE_LINES[n] = line
    print(line)


@pytest.fixture
def record():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])


def even_ks():
    return [2, 4, 8, 10, 20, 40, 80, 160, 200]


def acceptance_alphas(k: int) -> list[float]:
    """The alpha sample of the certification sweep, clipped to alpha >= -(2k+1)/4."""
    from oscpoly.params import SQRT_7_6, alpha_pm

    am, ap = alpha_pm(k)
    s = SQRT_7_6
    cand = [0.0, 0.5, -0.5, 0.99, -0.99, 1.0, -1.0, 1.05, -1.05, s + 0.01, s - 0.01, -(s + 0.01), -(s - 0.01),
            2.0, 5.0, k / 4, float(k), -(2 * k + 1) / 4, (am + ap) / 2, ap + 1]
    return sorted({a for a in cand if a >= -(2 * k + 1) / 4 and math.isfinite(a)})
