import numpy as np
import pytest

from gaussmetro import metrology

# structural checks run on every QFIReport built during the session
REPORTS_CHECKED = {"count": 0}
ACCEPTANCE_LINES = []


def check_report(report):
    F, J = report.F, report.J
    scale = max(1.0, float(np.max(np.abs(F))))
    assert np.array_equal(F, F.T), "information matrix is not symmetric"
    # floating-point PSD test: eigenvalue rounding grows with the matrix norm
    min_eig = float(np.linalg.eigvalsh(F)[0])
    assert min_eig >= -1e-10 * scale, f"information matrix has eigenvalue {min_eig}"
    assert np.array_equal(J, -J.T), "commutator matrix is not antisymmetric"
    REPORTS_CHECKED["count"] += 1


@pytest.fixture(autouse=True)
def _structural_observer():
    metrology.report_observers.append(check_report)
    yield
    metrology.report_observers.remove(check_report)


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
