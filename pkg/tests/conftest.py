import sys

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    report = getattr(mod, "REPORT", None)
    if not report:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(report):
        cases = report[crit]
        ok = all(c[1] for c in cases)
        detail = " | ".join(f"{c[0]}: {c[2]}" for c in cases)
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
