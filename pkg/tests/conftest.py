import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_disk_k(rng, size, r_max=0.9, r_min=0.05):
    """Points uniformly spread in the annulus ``r_min <= |k| <= r_max``."""
    r = np.sqrt(rng.uniform(r_min ** 2, r_max ** 2, size))
    return r * np.exp(2j * np.pi * rng.uniform(size=size))


ACCEPTANCE = {}


def record_criterion(number: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = (title, bool(ok), detail)
    print(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}  {detail}")
