import math

import numpy as np
import pytest

from rabibloch import ChainParams, GaussianPacket, IntegrationSettings, make_initial_state


def random_state(n, seed=0, t=0.0):
    from rabibloch import AmplitudeState

    rng = np.random.default_rng(seed)
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    s = math.sqrt(np.sum(abs(a) ** 2 + abs(b) ** 2))
    return AmplitudeState(t, a / s, b / s)


@pytest.fixture
def small_params():
    return ChainParams(n_sites=24, t_a=0.4, t_b=0.04, bloch=0.04, rabi=0.8)


@pytest.fixture
def small_packet():
    return GaussianPacket(center_site=12, width_sites=4)


@pytest.fixture
def small_state(small_params, small_packet):
    return make_initial_state(small_params, small_packet)


@pytest.fixture
def short_settings():
    return IntegrationSettings(dt=0.01, t_end=2.0, record_every=10)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion and assert it."""
    def check(label, ok, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")
        assert ok, detail
    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
