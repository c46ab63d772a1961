import numpy as np
import pytest

from hetreg.model import random_instance, sample_dataset
from hetreg.numerics import make_stream

# (criterion, passed, detail) lines collected by test_acceptance.py; passed=None marks an info line
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_data():
    def _make(d, n, seed=0, w_norm=1.0, f_norm=1.0, multiplicative=False):
        s = make_stream(777, seed)
        inst = random_instance(d, s, w_norm=w_norm, f_norm=f_norm, multiplicative=multiplicative)
        return inst, sample_dataset(inst, n, s)

    return _make


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        status = "INFO" if ok is None else ("PASS" if ok else "FAIL")
        terminalreporter.write_line(f"{status}  {name}: {detail}")
