import pytest

from pepscan import bench


@pytest.fixture(scope="session")
def work_cells():
    """Full 3 x 4 matrix, work counters only (no wall-clock timing)."""
    return bench.measure_matrix(bench.BenchConfig(repetitions=0, seed=0))


@pytest.fixture(scope="session")
def calibration(work_cells):
    return bench.calibrate(bench.PAPER, work_cells)


@pytest.fixture(scope="session")
def modeled_cells(work_cells, calibration):
    import copy
    return bench.apply_model(copy.deepcopy(work_cells), calibration.model)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
