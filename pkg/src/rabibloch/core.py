"""Parameter and state model shared by the whole package.

Units: hbar = e = 1 and the transition frequency omega0 sets the frequency
scale, so times are in 1/omega0 and currents in e*omega0.  Sites are labelled
j = 0..N-1 externally; the dc tilt is applied with p = j - N//2 internally.
"""
from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

Boundary = Literal["open", "periodic"]
Mode = Literal["full", "rwa", "stark"]
Band = Literal["excited", "ground"]

BOUNDARIES = ("open", "periodic")
MODES = ("full", "rwa", "stark")
BANDS = ("excited", "ground")


class ParameterError(ValueError):
    """Raised when a parameter set violates one or more invariants.

    ``errors`` holds every violation as a human readable message.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class NumericalFailure(RuntimeError):
    """Raised on NaN/Inf, norm drift, or an accuracy check that did not hold."""


@dataclass(frozen=True)
class ChainParams:
    """Physical constants of one chain scenario."""

    n_sites: int = 128
    omega0: float = 1.0
    drive_freq: float = 1.0
    rabi: float = 0.8
    bloch: float = 0.04
    t_a: float = 0.4
    t_b: float = 0.04
    gamma: float = 0.0
    boundary: Boundary = "open"
    mode: Mode = "full"
    lattice_const_nm: float = 20.0

    @property
    def q_factor(self) -> float:
        """Quality factor Q = omega0 / (2 gamma); infinite when lossless."""
        return np.inf if self.gamma == 0 else self.omega0 / (2.0 * self.gamma)

    @staticmethod
    def gamma_from_q(q: float, omega0: float = 1.0) -> float:
        return omega0 / (2.0 * q)

    @property
    def site_offset(self) -> int:
        return self.n_sites // 2

    def replace(self, **changes) -> "ChainParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def validate(params: ChainParams) -> list[str]:
    """Return every violated invariant of ``params`` (empty list when valid)."""
    errors = []
    n = params.n_sites
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        errors.append("n_sites must be an integer")
    elif n < 1:
        errors.append("n_sites must be ≥ 1")
    for name in ("omega0", "drive_freq", "rabi", "bloch", "t_a", "t_b", "gamma", "lattice_const_nm"):
        value = getattr(params, name)
        if not isinstance(value, (int, float, np.integer, np.floating)) or not np.isfinite(value):
            errors.append(f"{name} must be a finite real number")
    if _finite(params.omega0) and params.omega0 <= 0:
        errors.append("omega0 must be > 0")
    if _finite(params.drive_freq) and params.drive_freq < 0:
        errors.append("drive_freq must be ≥ 0")
    if _finite(params.rabi) and params.rabi < 0:
        errors.append("rabi must be ≥ 0")
    if _finite(params.bloch) and params.bloch < 0:
        errors.append("bloch must be ≥ 0")
    if _finite(params.gamma) and params.gamma < 0:
        errors.append("gamma must be ≥ 0")
    if _finite(params.lattice_const_nm) and params.lattice_const_nm <= 0:
        errors.append("lattice_const_nm must be > 0")
    if params.boundary not in BOUNDARIES:
        errors.append(f"boundary must be one of {BOUNDARIES}")
    if params.mode not in MODES:
        errors.append(f"mode must be one of {MODES}")
    return errors


def check(params: ChainParams) -> ChainParams:
    """Raise :class:`ParameterError` listing all violations, else return ``params``."""
    errors = validate(params)
    if errors:
        raise ParameterError(errors)
    return params


def _finite(x) -> bool:
    try:
        return bool(np.isfinite(x))
    except TypeError:
        return False


@dataclass(frozen=True)
class GaussianPacket:
    """Gaussian envelope exp(-(j - center)^2 / width^2) on one band."""

    center_site: float = 80.0
    width_sites: float = 20.0
    band: Band = "excited"
    phase_per_site: float = 0.0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True, eq=False)
class AmplitudeState:
    """Site amplitudes a_j (excited) and b_j (ground) at time ``time``."""

    time: float
    amp_excited: np.ndarray
    amp_ground: np.ndarray

    def __post_init__(self):
        a = np.array(self.amp_excited, dtype=np.complex128)
        b = np.array(self.amp_ground, dtype=np.complex128)
        if a.ndim != 1 or a.shape != b.shape:
            raise ValueError("amp_excited and amp_ground must be 1-D arrays of equal length")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "amp_excited", a)
        object.__setattr__(self, "amp_ground", b)
        object.__setattr__(self, "time", float(self.time))

    @property
    def n_sites(self) -> int:
        return self.amp_excited.size

    def scaled(self, factor: complex) -> "AmplitudeState":
        return AmplitudeState(self.time, factor * self.amp_excited, factor * self.amp_ground)

    def stacked(self) -> np.ndarray:
        """(2, N) copy with excited amplitudes in row 0."""
        return np.stack([self.amp_excited, self.amp_ground])

    def __add__(self, other: "AmplitudeState") -> "AmplitudeState":
        return AmplitudeState(self.time, self.amp_excited + other.amp_excited,
                              self.amp_ground + other.amp_ground)


def norm(state: AmplitudeState) -> float:
    """Total probability sum_j |a_j|^2 + |b_j|^2."""
    a, b = state.amp_excited, state.amp_ground
    return float(np.sum(a.real**2 + a.imag**2) + np.sum(b.real**2 + b.imag**2))


def make_initial_state(params: ChainParams, packet: GaussianPacket) -> AmplitudeState:
    """Unit-norm Gaussian packet on the requested band at t = 0.

    The envelope prefactor is not used; the packet is always renormalised.
    Widths well below one site collapse to a single-site state on
    ``round(center_site)``.
    """
    check(params)
    n = params.n_sites
    if packet.band not in BANDS:
        raise ValueError(f"band must be one of {BANDS}")
    if not np.isfinite(packet.width_sites) or packet.width_sites <= 0:
        raise ValueError("width_sites must be > 0")
    if not 0 <= packet.center_site < n:
        warnings.warn(f"packet center {packet.center_site} lies outside the chain [0, {n})",
                      stacklevel=2)

    j = np.arange(n, dtype=float)
    env = np.exp(-((j - packet.center_site) / packet.width_sites) ** 2).astype(np.complex128)
    if not env.any() and 0 <= round(packet.center_site) < n:
        # envelope underflowed between sites
        env[int(round(packet.center_site))] = 1.0
    if packet.phase_per_site:
        env = env * np.exp(1j * packet.phase_per_site * j)
    total = np.sqrt(np.sum(np.abs(env) ** 2))
    if total == 0:
        raise ValueError("packet has no weight on the chain")
    env /= total
    zero = np.zeros(n, dtype=np.complex128)
    if packet.band == "excited":
        return AmplitudeState(0.0, env, zero)
    return AmplitudeState(0.0, zero, env)
