"""Closed-form rotating-wave theory of the driven chain.

Plane waves a_p ~ exp(i p phi) at exact resonance give two dressed branches

    nu_{1,2}(phi) = mu +- sqrt(d^2 cos^2 phi + wR^2/4),   mu = (t_a + t_b) cos phi,
    d = t_a - t_b,

with mixing factor Lambda = wR / (2 (d cos phi + sqrt(...))) and corrected Rabi
frequency Omega(phi) = nu_1 - nu_2.  The quasi-classical dc-field picture
substitutes phi -> -wB t + phi0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import AmplitudeState, ChainParams


class DegenerateModeError(ValueError):
    """Mixing factor is 0/0: no Rabi coupling and no band asymmetry at this phase."""


@dataclass(frozen=True)
class ModeInfo:
    phase_per_cell: float | np.ndarray
    nu1: float | np.ndarray
    nu2: float | np.ndarray
    lam: float | np.ndarray
    big_omega: float | np.ndarray
    mu: float | np.ndarray


def _split(dc, rabi):
    """Half splitting sqrt(dc^2 + rabi^2/4)."""
    return np.sqrt(dc**2 + 0.25 * rabi**2)


def _mixing(dc, rabi, half_omega):
    """Lambda, evaluated on whichever branch of the formula avoids cancellation."""
    dc = np.asarray(dc, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = rabi / (2.0 * (dc + half_omega))
        # (s - dc)(s + dc) = rabi^2/4, so Lambda = 2 (s - dc) / rabi
        flipped = 2.0 * (half_omega - dc) / rabi if rabi > 0 else np.full_like(dc, np.inf)
    return np.where(dc >= 0, direct, flipped)


def mode_info(phi, params: ChainParams) -> ModeInfo:
    """Dressed-branch frequencies and mixing factor at phase ``phi`` (scalar or array)."""
    phi = np.asarray(phi, dtype=float)
    c = np.cos(phi)
    dc = (params.t_a - params.t_b) * c
    if params.rabi == 0 and np.any(dc == 0):
        raise DegenerateModeError("rabi = 0 and (t_a - t_b) cos(phi) = 0: Lambda undefined")
    s = _split(dc, params.rabi)
    mu = (params.t_a + params.t_b) * c
    lam = _mixing(dc, params.rabi, s)
    return ModeInfo(_scalar(phi), _scalar(mu + s), _scalar(mu - s), _scalar(lam),
                    _scalar(2 * s), _scalar(mu))


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def rabi_frequency(phi, params: ChainParams):
    """Omega(phi) = sqrt(4 (t_a - t_b)^2 cos^2 phi + wR^2)."""
    c = np.cos(np.asarray(phi, dtype=float))
    return _scalar(np.sqrt(4 * (params.t_a - params.t_b) ** 2 * c**2 + params.rabi**2))


def excited_start_constants(phi, params: ChainParams) -> tuple[float, float]:
    """(C1, C2) for a chain that starts fully in the excited band."""
    lam = mode_info(phi, params).lam
    return 1.0 / (1.0 + lam**2), lam / (1.0 + lam**2)


def travelling_wave_amplitudes(phi, t, c1, c2, params: ChainParams, sites=None):
    """Per-site travelling-wave coefficients (A_p(t), B_p(t)) at the given sites.

    ``c1`` and ``c2`` must satisfy |c1|^2 + |c2|^2 = 1/(1 + Lambda^2); then
    |A_p|^2 + |B_p|^2 = 1 on every site.  The common factor exp(-i mu t) and the
    chain normalisation are not included (see :func:`travelling_wave_state`).
    """
    info = mode_info(phi, params)
    lam, big = info.lam, info.big_omega
    target = 1.0 / (1.0 + lam**2)
    if abs(abs(c1) ** 2 + abs(c2) ** 2 - target) > 1e-10:
        raise ValueError(f"|c1|^2 + |c2|^2 must equal 1/(1+Lambda^2) = {target:.12g}")
    p = np.arange(params.n_sites) if sites is None else np.asarray(sites)
    w = params.drive_freq
    plane = np.exp(1j * p * phi)
    lo, hi = np.exp(-0.5j * big * t), np.exp(0.5j * big * t)
    amp_a = (c1 * lo + lam * c2 * hi) * np.exp(-0.5j * w * t) * plane
    amp_b = (c2 * hi - lam * c1 * lo) * np.exp(0.5j * w * t) * plane
    return amp_a, amp_b


def travelling_wave_state(phi, t, c1, c2, params: ChainParams) -> AmplitudeState:
    """Unit-norm ring state exp(-i mu t) (A_p, B_p) / sqrt(N)."""
    amp_a, amp_b = travelling_wave_amplitudes(phi, t, c1, c2, params)
    scale = np.exp(-1j * mode_info(phi, params).mu * t) / np.sqrt(params.n_sites)
    return AmplitudeState(t, scale * amp_a, scale * amp_b)


def eigenmode_state(phi, params: ChainParams, branch: int = 1, t: float = 0.0) -> AmplitudeState:
    """Stationary dressed mode of branch 1 (upper) or 2 (lower) on a ring.

    ``phi`` should be a multiple of 2 pi / N for the mode to close on the ring.
    """
    info = mode_info(phi, params)
    lam = info.lam
    n = params.n_sites
    p = np.arange(n)
    w = params.drive_freq
    if branch == 1:
        nu, ca, cb = info.nu1, 1.0, -lam
    elif branch == 2:
        nu, ca, cb = info.nu2, lam, 1.0
    else:
        raise ValueError("branch must be 1 or 2")
    carrier = np.exp(1j * (p * phi - nu * t)) / np.sqrt(n * (1.0 + lam**2))
    return AmplitudeState(t, ca * carrier * np.exp(-0.5j * w * t),
                          cb * carrier * np.exp(0.5j * w * t))


def closed_form_current(phi, t, params: ChainParams):
    """Per-site tunneling current of an excited-start travelling wave (e = 1)."""
    info = mode_info(phi, params)
    lam, big = info.lam, info.big_omega
    t = np.asarray(t, dtype=float)
    bracket = (params.t_a * (1 + lam**4 + 2 * lam**2 * np.cos(big * t))
               + 4 * params.t_b * lam**2 * np.sin(0.5 * big * t) ** 2)
    return _scalar(-2.0 * np.sin(phi) * bracket / (1 + lam**2) ** 2)


def mean_ro_frequency_rwa(params: ChainParams, n_points: int = 2**14) -> float:
    """Phase-averaged Rabi frequency (1/2pi) int_0^2pi Omega(phi) dphi.

    Trapezoid rule on the periodic integrand, i.e. the plain sample mean.
    """
    phi = 2 * np.pi * np.arange(n_points) / n_points
    return float(np.mean(rabi_frequency(phi, params)))


def mean_ro_frequency_stark(params: ChainParams, n_points: int = 2**14) -> float:
    """Phase average of the dc-only Rabi frequency in its published form."""
    phi = 2 * np.pi * np.arange(n_points) / n_points
    dc = (params.t_a - params.t_b) * np.cos(phi)
    return float(np.mean(np.sqrt(dc**2 + params.rabi**2)))


def quasiclassical_ro(t, phi0: float, params: ChainParams):
    """(Omega(t), Lambda(t)) with phi swept as -wB t + phi0."""
    phase = params.bloch * np.asarray(t, dtype=float) - phi0
    c = np.cos(phase)
    dc = (params.t_a - params.t_b) * c
    if params.rabi == 0 and np.any(dc == 0):
        raise DegenerateModeError("rabi = 0 and (t_a - t_b) cos(phi) = 0: Lambda undefined")
    s = _split(dc, params.rabi)
    return _scalar(2 * s), _scalar(_mixing(dc, params.rabi, s))


def stark_quasiclassical(t, phi0: float, params: ChainParams):
    """(Omega(t), Lambda(t)) of the dc-only chain, exactly in the published form.

    These expressions differ from :func:`quasiclassical_ro` by a factor 4 under
    the square root and a factor 2 in the mixing denominator; use
    :func:`compare_stark_forms` to see both side by side.
    """
    phase = params.bloch * np.asarray(t, dtype=float) - phi0
    dc = (params.t_a - params.t_b) * np.cos(phase)
    root = np.sqrt(dc**2 + params.rabi**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = params.rabi / (dc + root)
    if np.any(~np.isfinite(lam)):
        raise DegenerateModeError("rabi = 0 and (t_a - t_b) cos(phi) = 0: Lambda undefined")
    return _scalar(root), _scalar(lam)


def compare_stark_forms(t, phi0: float, params: ChainParams) -> dict:
    """Both the dc-only printed forms and the ac-derived forms at the same times."""
    om_s, lam_s = stark_quasiclassical(t, phi0, params)
    om_q, lam_q = quasiclassical_ro(t, phi0, params)
    return {"stark": {"omega": om_s, "lambda": lam_s},
            "quasiclassical": {"omega": om_q, "lambda": lam_q},
            "omega_ratio": np.asarray(om_q) / np.asarray(om_s),
            "lambda_ratio": np.asarray(lam_q) / np.asarray(lam_s)}


def _current_from_phase(phi, theta, params: ChainParams):
    """Excited-start current with an accumulated Rabi phase ``theta``.

    Uses |B|^2 = (wR/Omega)^2 sin^2(theta/2), which equals the Lambda form and
    stays finite where Omega -> 0 (no coupling: the particle stays excited).
    """
    big = rabi_frequency(phi, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(big > 0, (params.rabi / big) ** 2, 0.0)
    return -2.0 * np.sin(phi) * (params.t_a - (params.t_a - params.t_b) * frac * np.sin(0.5 * theta) ** 2)


def resonant_params(params: ChainParams, m: int, delta: float) -> ChainParams:
    """Retune the Bloch frequency so that mean_RO - m*wB = delta*wB."""
    if m + delta <= 0:
        raise ValueError("m + delta must be positive")
    return params.replace(bloch=mean_ro_frequency_rwa(params) / (m + delta))


def super_bloch_position(t, params: ChainParams, phi0: float = 0.0,
                         points_per_period: int = 64) -> np.ndarray:
    """Quasi-classical position x(t) = int_0^t J(tau) dtau, in sites.

    J is the excited-start current with phi(tau) = -wB tau + phi0 and a Rabi
    phase accumulated as int_0^tau Omega(phi(s)) ds, so its carrier sits at
    the phase-averaged Rabi frequency.
    """
    if params.bloch <= 0:
        raise ValueError("bloch must be > 0")
    t = np.asarray(t, dtype=float)
    t_max = float(np.max(t))
    fastest = max(params.bloch, 2 * abs(params.t_a - params.t_b) + params.rabi)
    n = max(2, int(np.ceil(t_max * fastest / (2 * np.pi) * points_per_period)) + 1)
    tau = np.linspace(0.0, t_max, n)
    phi = -params.bloch * tau + phi0
    theta = cumulative_trapezoid(rabi_frequency(phi, params), tau, initial=0.0)
    x = cumulative_trapezoid(_current_from_phase(phi, theta, params), tau, initial=0.0)
    return np.interp(t, tau, x)
