import numpy as np
import pytest

_criteria: dict[int, dict] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "tests": 0})
    entry["tests"] += 1
    if call.excinfo is not None:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(
            f"[{status}] criterion {number}: {entry['title']} ({entry['tests']} checks)"
        )


@pytest.fixture
def rng():
    return np.random.default_rng(20111)


def givens_unitary(rng, dim, n_rotations=None):
    """Random unitary as a product of complex Givens rotations and phases."""
    u = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, dim)))
    for _ in range(n_rotations or 3 * dim * dim):
        i, j = rng.choice(dim, size=2, replace=False)
        th, ph = rng.uniform(0, 2 * np.pi, 2)
        g = np.eye(dim, dtype=complex)
        g[i, i] = np.cos(th)
        g[j, j] = np.cos(th)
        g[i, j] = -np.exp(1j * ph) * np.sin(th)
        g[j, i] = np.exp(-1j * ph) * np.sin(th)
        u = g @ u
    return u


def random_hermitian(rng, dim):
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (x + x.conj().T) / 2


def random_density(rng, dim, rank=None):
    x = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real
