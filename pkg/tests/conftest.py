import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.uniform(-1, 1, (dim, dim)) + 1j * rng.uniform(-1, 1, (dim, dim))
    return 0.5 * (a + a.conj().T)


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE: list[tuple[str, str, float]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title, limit): acceptance criterion with a runtime limit")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title, limit = marker.args
    status = "PASS" if report.passed else "FAIL"
    _ACCEPTANCE.append((f"{number}. {title}", status, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, duration in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"[{status}] {label} ({duration:.2f} s)")
