import numpy as np
import pytest

from nsdeform import Dataset


def random_dataset(rng, n, p=2, scale=1.0):
    return Dataset(rng.uniform(0, scale, (n, p)), rng.normal(size=n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE: dict[int, str] = {}


def report(criterion: int, ok: bool, detail: str, soft: bool = False) -> None:
    """Record one acceptance line; printed in the terminal summary."""
    verdict = "PASS" if ok else ("FAIL (soft)" if soft else "FAIL")
    ACCEPTANCE[criterion] = f"criterion {criterion}: {verdict}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
