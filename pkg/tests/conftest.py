from collections import OrderedDict

import numpy as np
import pytest

from fibwalk.walkmodel import WalkSpec, validate


def fixture_spec(start=0):
    """Four states, fair interior moves, half absorption at both borders."""
    return WalkSpec(
        p=(0.5, 0.5, 0.5, 0.0),
        q=(0.0, 0.5, 0.5, 0.5),
        r=(0.0, 0.0, 0.0, 0.0),
        s=(0.5, 0.0, 0.0, 0.5),
        start=start,
    )


def random_spec(rng, n_max=40, min_move=0.05, start=None):
    """Absorbing walk whose inward moves are all at least ``min_move``.

    Each border leaks (q_0 > 0 or p_N > 0) in half of the draws.  The
    remaining mass of each row is split at random between r and s.
    """
    n = int(rng.integers(0, n_max + 1))
    moves = rng.uniform(min_move, 0.5, size=(n + 1, 2))
    if n and rng.uniform() < 0.5:
        moves[0, 1] = 0.0
    if n and rng.uniform() < 0.5:
        moves[n, 0] = 0.0
    rest = 1.0 - moves.sum(axis=1)
    r = rest * rng.uniform(size=n + 1)
    s = rest - r
    if start is None:
        start = int(rng.integers(0, n + 1))
    return validate(WalkSpec(moves[:, 0], moves[:, 1], r, s, start=start))


def corpus(seed=2024, size=200, **kwargs):
    rng = np.random.default_rng(seed)
    return [random_spec(rng, **kwargs) for _ in range(size)]


def max_rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = np.maximum(np.abs(a), np.abs(b))
    diff = np.abs(a - b)
    return float(np.max(np.where(diff == 0, 0.0, diff / np.where(scale == 0, 1.0, scale))))


@pytest.fixture
def fixture():
    return fixture_spec()


@pytest.fixture(scope="session")
def spec_corpus():
    return corpus()


# -- acceptance criteria summary ----------------------------------------------

_criteria = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            item.user_properties.append(("criterion", marker.args[0]))


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    ok = _criteria.setdefault(number, True)
    if report.failed or (report.when == "call" and report.skipped):
        _criteria[number] = False
    elif not ok:
        _criteria[number] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if _criteria[number] else 'FAIL'}")
