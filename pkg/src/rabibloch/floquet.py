"""Floquet analysis of the plane-wave reduced, non-RWA two-level problem.

For a_p = a exp(i p phi), b_p = b exp(i p phi) without the dc tilt, the
amplitudes obey i d/dt (a, b) = H(t) (a, b) with

    H(t) = [[ w0/2 + 2 t_a cos phi, -wR cos(w t)],
            [-wR cos(w t),          -w0/2 + 2 t_b cos phi]].

The identity part mu = (t_a + t_b) cos phi commutes with everything and is
applied as an exact phase; RK4 integrates only the traceless remainder, which
keeps the step error independent of the (possibly large) tunneling shift.

Quasi-energies are reported two ways.  ``nu1``/``nu2`` are the lab-frame values
i ln(lambda)/T folded to (-w/2, w/2].  ``unwrapped1``/``unwrapped2`` are
referenced to the rotating frame (shifted by w/2, so they reduce to the RWA
branches at weak coupling) and followed continuously in phi from phi = pi/2,
where branch 1 is the upper one.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numba
import numpy as np

from .core import ChainParams, NumericalFailure

DEFAULT_STEPS = 4096
UNITARITY_LIMIT = 1e-8


@dataclass(frozen=True)
class QuasiEnergyPair:
    phi: float
    nu1: float
    nu2: float
    unwrapped1: float
    unwrapped2: float
    degenerate: bool = False

    @property
    def splitting(self) -> float:
        return self.unwrapped1 - self.unwrapped2


@dataclass(frozen=True, order=True)
class PredictedLine:
    freq: float
    m: int
    n: int
    p: int


def reduced_hamiltonian(phi, t, params: ChainParams) -> np.ndarray:
    c = math.cos(phi)
    drive = -params.rabi * math.cos(params.drive_freq * t)
    return np.array([[params.omega0 / 2 + 2 * params.t_a * c, drive],
                     [drive, -params.omega0 / 2 + 2 * params.t_b * c]], dtype=np.complex128)


@numba.njit(cache=True)
def _traceless_monodromy(h, rabi, omega, period, steps):
    """RK4 propagator of i dM/dt = [[h, g(t)], [g(t), -h]] M over one period."""
    dt = period / steps
    m00 = 1.0 + 0j
    m01 = 0j
    m10 = 0j
    m11 = 1.0 + 0j
    for k in range(steps):
        t = k * dt
        g1 = -rabi * math.cos(omega * t)
        g2 = -rabi * math.cos(omega * (t + 0.5 * dt))
        g4 = -rabi * math.cos(omega * (t + dt))
        # f(M) = -i H M, applied column by column
        a1 = -1j * (h * m00 + g1 * m10)
        b1 = -1j * (g1 * m00 - h * m10)
        c1 = -1j * (h * m01 + g1 * m11)
        d1 = -1j * (g1 * m01 - h * m11)
        x00 = m00 + 0.5 * dt * a1
        x10 = m10 + 0.5 * dt * b1
        x01 = m01 + 0.5 * dt * c1
        x11 = m11 + 0.5 * dt * d1
        a2 = -1j * (h * x00 + g2 * x10)
        b2 = -1j * (g2 * x00 - h * x10)
        c2 = -1j * (h * x01 + g2 * x11)
        d2 = -1j * (g2 * x01 - h * x11)
        x00 = m00 + 0.5 * dt * a2
        x10 = m10 + 0.5 * dt * b2
        x01 = m01 + 0.5 * dt * c2
        x11 = m11 + 0.5 * dt * d2
        a3 = -1j * (h * x00 + g2 * x10)
        b3 = -1j * (g2 * x00 - h * x10)
        c3 = -1j * (h * x01 + g2 * x11)
        d3 = -1j * (g2 * x01 - h * x11)
        x00 = m00 + dt * a3
        x10 = m10 + dt * b3
        x01 = m01 + dt * c3
        x11 = m11 + dt * d3
        a4 = -1j * (h * x00 + g4 * x10)
        b4 = -1j * (g4 * x00 - h * x10)
        c4 = -1j * (h * x01 + g4 * x11)
        d4 = -1j * (g4 * x01 - h * x11)
        m00 += dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        m10 += dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
        m01 += dt / 6.0 * (c1 + 2 * c2 + 2 * c3 + c4)
        m11 += dt / 6.0 * (d1 + 2 * d2 + 2 * d3 + d4)
    out = np.empty((2, 2), np.complex128)
    out[0, 0] = m00
    out[0, 1] = m01
    out[1, 0] = m10
    out[1, 1] = m11
    return out


def _period(params: ChainParams) -> float:
    if params.drive_freq <= 0:
        raise ValueError("Floquet analysis needs drive_freq > 0")
    return 2 * np.pi / params.drive_freq


def _traceless(phi, params: ChainParams, steps: int) -> np.ndarray:
    h = params.omega0 / 2 + (params.t_a - params.t_b) * math.cos(phi)
    m = _traceless_monodromy(h, float(params.rabi), float(params.drive_freq), _period(params), steps)
    defect = np.linalg.norm(m.conj().T @ m - np.eye(2))
    if defect > UNITARITY_LIMIT:
        raise NumericalFailure(f"monodromy not unitary (defect {defect:.2e}); increase steps")
    return m


def monodromy(phi, params: ChainParams, steps_per_period: int = DEFAULT_STEPS) -> np.ndarray:
    """One-period propagator M(T) of the reduced Hamiltonian, M(0) = I."""
    mu = (params.t_a + params.t_b) * math.cos(phi)
    return np.exp(-1j * mu * _period(params)) * _traceless(phi, params, steps_per_period)


def fold(x, omega):
    """Map onto the zone (-omega/2, omega/2]."""
    return omega / 2 - np.mod(omega / 2 - np.asarray(x, dtype=float), omega)


def _track(phis, params: ChainParams, steps: int):
    """Rotating-frame quasi-energies followed continuously along ``phis``.

    ``phis[0]`` is the anchor; branch 1 is the upper one there.  Returns
    (values (K, 2), lab-frame eigenvalue pairs (K, 2), degenerate flags (K,)).
    """
    omega = params.drive_freq
    period = _period(params)
    out = np.empty((len(phis), 2))
    lams = np.empty((len(phis), 2), dtype=np.complex128)
    degenerate = np.zeros(len(phis), dtype=bool)
    prev_vecs = None
    for k, phi in enumerate(phis):
        vals, vecs = np.linalg.eig(_traceless(phi, params, steps))
        degenerate[k] = abs(vals[0] - vals[1]) < 1e-12
        # shift by half a drive quantum: -lambda = lambda * exp(i w T / 2)
        nu = fold(np.real(1j * np.log(-vals) / period), omega)
        if prev_vecs is None:
            order = np.argsort(-nu, kind="stable")
            nu, vecs, vals = nu[order], vecs[:, order], vals[order]
            out[k] = nu
        else:
            overlap = np.abs(prev_vecs.conj().T @ vecs)
            if overlap[0, 1] * overlap[1, 0] > overlap[0, 0] * overlap[1, 1]:
                nu, vecs, vals = nu[::-1], vecs[:, ::-1], vals[::-1]
            out[k] = out[k - 1] + fold(nu - out[k - 1], omega)
        prev_vecs = vecs
        lams[k] = vals * np.exp(-1j * (params.t_a + params.t_b) * math.cos(phi) * period)
    return out, lams, degenerate


def quasi_energies(phi, params: ChainParams, steps_per_period: int = DEFAULT_STEPS,
                   path_points: int = 128) -> QuasiEnergyPair:
    """Floquet quasi-energies at ``phi`` with branches tracked from phi = pi/2."""
    n = max(2, int(np.ceil(abs(phi - np.pi / 2) / (2 * np.pi) * path_points)) + 1)
    path = np.linspace(np.pi / 2, phi, n)
    values, lams, degenerate = _track(path, params, steps_per_period)
    omega = params.drive_freq
    period = _period(params)
    mu = (params.t_a + params.t_b) * math.cos(phi)
    unwrapped = mu + values[-1]
    lab = fold(np.real(1j * np.log(lams[-1]) / period), omega)
    return QuasiEnergyPair(float(phi), float(lab[0]), float(lab[1]),
                           float(unwrapped[0]), float(unwrapped[1]), bool(degenerate[-1]))


def splitting_curve(params: ChainParams, n_phi: int = 256,
                    steps_per_period: int = DEFAULT_STEPS):
    """(phi grid starting at pi/2, unwrapped splitting nu1 - nu2, degenerate flags)."""
    phis = np.pi / 2 + 2 * np.pi * np.arange(n_phi + 1) / n_phi
    values, _, degenerate = _track(phis, params, steps_per_period)
    split = values[:, 0] - values[:, 1]
    if abs(split[-1] - split[0]) > 1e-6 * max(1.0, abs(split[0])):
        raise NumericalFailure("splitting does not close over one phi period; refine n_phi")
    return phis[:-1], split[:-1], degenerate[:-1]


def mean_ro_frequency_floquet(params: ChainParams, n_phi: int = 256,
                              steps_per_period: int = DEFAULT_STEPS) -> float:
    """Phase average of the continuity-unwrapped Floquet splitting."""
    if n_phi < 64:
        raise ValueError("n_phi must be >= 64")
    _, split, _ = splitting_curve(params, n_phi, steps_per_period)
    return float(np.mean(split))


def predicted_lines(params: ChainParams, omega_bar: float, m_max: int = 2,
                    n_max: int = 8) -> list[PredictedLine]:
    """Nonnegative comb m*w0 + n*wB + p*omega_bar, deduplicated and sorted.

    Coinciding members (within 1e-9) keep the simplest label, judged by
    (|m|+|n|+|p|, |p|, |n|, |m|, m, n, p).
    """
    if m_max < 0 or n_max < 0:
        raise ValueError("m_max and n_max must be >= 0")
    members = []
    for m, n, p in itertools.product(range(-m_max, m_max + 1), range(-n_max, n_max + 1), (-1, 0, 1)):
        f = m * params.omega0 + n * params.bloch + p * omega_bar
        if f >= -1e-12:
            members.append((max(f, 0.0), m, n, p))
    members.sort()
    lines = []
    for f, m, n, p in members:
        if lines and abs(f - lines[-1].freq) < 1e-9:
            last = lines[-1]
            if label_cost(m, n, p) < label_cost(last.m, last.n, last.p):
                lines[-1] = PredictedLine(f, m, n, p)
            continue
        lines.append(PredictedLine(f, m, n, p))
    return lines


def label_cost(m: int, n: int, p: int) -> tuple:
    return (abs(m) + abs(n) + abs(p), abs(p), abs(n), abs(m), m, n, p)
