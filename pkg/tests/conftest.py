import math

import numpy as np
import pytest

from lindblad_osc import BathSpec, InitialStateSpec, OscillatorParams, Scenario


def random_scenario(rng: np.random.Generator, zero_t_fraction: float = 0.1) -> Scenario:
    """Valid scenario with omega = hbar = m = 1.

    lam in [0.01, 0.5], delta log-uniform in [0.2, 5], |r| <= 0.9 and
    coth_eps log-uniform in [1, 50]; mu in [0, 0.9 lam] is redrawn until
    the thermal bath is admissible. A fraction of draws sit at T = 0.
    """
    lam = rng.uniform(0.01, 0.5)
    delta = math.exp(rng.uniform(math.log(0.2), math.log(5.0)))
    r = rng.uniform(-0.9, 0.9)
    if rng.random() < zero_t_fraction:
        return Scenario(OscillatorParams(lam=lam, mu=0.0), BathSpec(1.0), InitialStateSpec(delta, r))
    c = math.exp(rng.uniform(0.0, math.log(50.0)))
    while True:
        mu = rng.uniform(0.0, 0.9 * lam)
        if (lam * lam - mu * mu) * c * c >= lam * lam:
            break
    return Scenario(OscillatorParams(lam=lam, mu=mu), BathSpec(c), InitialStateSpec(delta, r))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rel_err(got, want, floor: float = 0.0) -> float:
    """Largest component-wise relative error; denominators at least ``floor``."""
    got = np.atleast_1d(np.asarray(got, dtype=float))
    want = np.atleast_1d(np.asarray(want, dtype=float))
    den = np.maximum(np.abs(want), floor)
    return float(np.max(np.abs(got - want) / den))


def ulps_apart(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / np.spacing(max(abs(a), abs(b)))


# acceptance reporting: one line per criterion at the end of the run

_criteria: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or rep.failed:
        n, title = mark.args
        _, ok = _criteria.get(n, (title, True))
        _criteria[n] = (title, ok and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, ok = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
