import math

import numpy as np
import pytest

from rabibloch import ChainParams
from rabibloch.analytics import mean_ro_frequency_rwa, mode_info
from rabibloch.floquet import (fold, label_cost, mean_ro_frequency_floquet, monodromy,
                               predicted_lines, quasi_energies, reduced_hamiltonian,
                               splitting_curve)
from rabibloch.scenarios import load_scenario, preset_names

PHIS = np.linspace(-math.pi, math.pi, 32, endpoint=False)


@pytest.mark.parametrize("name", preset_names())
def test_monodromy_is_unitary(name):
    params = load_scenario(name).params
    for phi in PHIS:
        m = monodromy(phi, params)
        assert np.linalg.norm(m.conj().T @ m - np.eye(2)) < 1e-10


def test_determinant_is_the_trace_phase():
    p = ChainParams(t_a=0.4, t_b=0.04, rabi=0.8)
    for phi in PHIS[::4]:
        mu = (p.t_a + p.t_b) * math.cos(phi)
        assert np.linalg.det(monodromy(phi, p)) == pytest.approx(np.exp(-2j * mu * 2 * math.pi), abs=1e-10)


def test_monodromy_matches_matrix_exponential_product():
    from scipy.linalg import expm

    p = ChainParams(t_a=0.4, t_b=0.04, rabi=0.8)
    n = 4000
    dt = 2 * math.pi / n
    m = np.eye(2, dtype=complex)
    for k in range(n):
        m = expm(-1j * dt * reduced_hamiltonian(0.9, (k + 0.5) * dt, p)) @ m
    assert np.max(abs(monodromy(0.9, p) - m)) < 1e-5


def test_uncoupled_closed_form():
    p = ChainParams(t_a=0.4, t_b=0.04, rabi=0.0)
    for phi in (0.3, 1.3, 2.9):
        q = quasi_energies(phi, p)
        e_a = 0.5 + 2 * p.t_a * math.cos(phi)
        e_b = -0.5 + 2 * p.t_b * math.cos(phi)
        expected = sorted(fold(np.array([e_a, e_b]), 1.0))
        assert sorted([q.nu1, q.nu2]) == pytest.approx(expected, abs=1e-8)


def test_quasi_energies_are_even_in_phase():
    p = ChainParams(t_a=0.4, t_b=0.04, rabi=0.8)
    a, b = quasi_energies(0.8, p), quasi_energies(-0.8, p)
    assert (a.unwrapped1, a.unwrapped2) == pytest.approx((b.unwrapped1, b.unwrapped2), abs=1e-9)


def test_weak_coupling_reduces_to_rotating_wave_theory():
    p = ChainParams(t_a=0.02, t_b=0.0, rabi=0.05)
    floquet = mean_ro_frequency_floquet(p)
    assert floquet == pytest.approx(mean_ro_frequency_rwa(p), rel=0.05)
    q = quasi_energies(0.3, p)
    info = mode_info(0.3, p)
    assert q.unwrapped1 == pytest.approx(info.nu1, abs=0.05 * info.big_omega)
    assert q.unwrapped2 == pytest.approx(info.nu2, abs=0.05 * info.big_omega)


def test_splitting_curve_closes():
    phis, split, degenerate = splitting_curve(ChainParams(), n_phi=64)
    assert phis.size == 64 and split.size == 64
    assert not degenerate.any()


def test_floquet_mean_frequency_frozen_value():
    assert mean_ro_frequency_floquet(ChainParams()) == pytest.approx(0.8999853, abs=1e-6)
    with pytest.raises(ValueError):
        mean_ro_frequency_floquet(ChainParams(), n_phi=16)


def test_fold_range():
    x = np.linspace(-5, 5, 1001)
    y = fold(x, 1.0)
    assert np.all((y > -0.5) & (y <= 0.5))
    assert np.allclose(np.mod(x - y + 1e-12, 1.0), 0, atol=1e-9) or np.allclose(
        np.round(x - y), x - y, atol=1e-9)


def test_predicted_lines_degenerate_comb():
    p = ChainParams(bloch=0.5, rabi=0.5, t_a=5.0, t_b=5.0)
    lines = {round(l.freq, 9): (l.m, l.n, l.p) for l in predicted_lines(p, 0.5)}
    assert lines[1.0] == (1, 0, 0)
    assert lines[0.5] == (0, 1, 0)
    assert lines[1.5] == (1, 1, 0)
    freqs = sorted(lines)
    assert len(freqs) == len(set(freqs))
    assert all(f >= 0 for f in freqs)


def test_degenerate_comb_is_sparser():
    generic = predicted_lines(ChainParams(bloch=0.5), 0.43)
    degenerate = predicted_lines(ChainParams(bloch=0.5), 0.5)
    assert len(degenerate) < len(generic)


def test_label_cost_order():
    assert label_cost(1, 1, 0) < label_cost(1, 0, 1)
    assert label_cost(0, 1, 0) < label_cost(1, -1, 0)
