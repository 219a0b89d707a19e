import numpy as np
import pytest

from comwit.opcore import TensorOperator, TensorSpace

_ACCEPTANCE = {}


def rand_hermitian(n, rng):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return x + x.conj().T


def rand_operator(dims, rng):
    space = TensorSpace(dims)
    return TensorOperator(space, rand_hermitian(space.total, rng))


def rand_density(dims, rng, rank=None):
    n = int(np.prod(dims))
    rank = rank or n
    x = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    m = x @ x.conj().T
    return m / np.trace(m).real


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    name = item.name
    if name.startswith("test_criterion_"):
        if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
            _ACCEPTANCE[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        num, _, slug = name[len("test_criterion_"):].partition("_")
        terminalreporter.write_line(f"ACCEPTANCE criterion {num} {slug}: {_ACCEPTANCE[name]}")
