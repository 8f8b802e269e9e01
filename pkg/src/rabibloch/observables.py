"""Per-site observables of amplitude states and trajectories.

All densities accept either an :class:`AmplitudeState` or raw arrays whose last
axis runs over sites, so whole trajectories can be processed at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AmplitudeState, ChainParams
from .dynamics import Trajectory

PER_SITE = ("current", "inversion", "dipole")
GLOBAL = ("centroid", "norm")


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    name: str
    site: int | None
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have equal length")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")


def _arrays(state):
    if isinstance(state, AmplitudeState):
        return state.amp_excited, state.amp_ground
    a, b = state
    return np.asarray(a), np.asarray(b)


def _neighbour_difference(x: np.ndarray, periodic: bool) -> np.ndarray:
    """x_{p+1} - x_{p-1} along the last axis; missing neighbours count as 0."""
    if periodic:
        return np.roll(x, -1, axis=-1) - np.roll(x, 1, axis=-1)
    out = np.zeros_like(x)
    out[..., :-1] += x[..., 1:]
    out[..., 1:] -= x[..., :-1]
    return out


def tunneling_current_density(state, params: ChainParams) -> np.ndarray:
    """J_p = i/2 [t_a (a_{p+1} - a_{p-1}) a_p* + t_b (...) b_p*] + c.c.  (e = 1)."""
    a, b = _arrays(state)
    periodic = params.boundary == "periodic"
    bracket = (params.t_a * _neighbour_difference(a, periodic) * a.conj()
               + params.t_b * _neighbour_difference(b, periodic) * b.conj())
    # i/2 z + c.c. = -Im z
    return -bracket.imag


def inversion_density(state) -> np.ndarray:
    a, b = _arrays(state)
    return np.abs(a) ** 2 - np.abs(b) ** 2


def dipole_density(state) -> np.ndarray:
    """Transition dipole 2 Re(a_p b_p*), in units of the dipole matrix element."""
    a, b = _arrays(state)
    return 2.0 * np.real(a * b.conj())


def probability_density(state) -> np.ndarray:
    a, b = _arrays(state)
    return np.abs(a) ** 2 + np.abs(b) ** 2


def centroid(state, params: ChainParams | None = None):
    """Mean site index <j> (multiply by lattice_const_nm for nm)."""
    rho = probability_density(state)
    total = rho.sum(axis=-1)
    if np.any(total == 0):
        raise ValueError("centroid of a zero-norm state")
    j = np.arange(rho.shape[-1])
    out = (rho @ j) / total
    return float(out) if np.ndim(out) == 0 else out


def density_grid(traj: Trajectory, name: str) -> np.ndarray:
    """(K, N) grid of one per-site observable over the trajectory."""
    state = (traj.excited, traj.ground)
    if name == "current":
        return tunneling_current_density(state, traj.params)
    if name == "inversion":
        return inversion_density(state)
    if name == "dipole":
        return dipole_density(state)
    raise ValueError(f"unknown per-site observable {name!r}; choose from {PER_SITE}")


def extract_series(traj: Trajectory, name: str, site: int | None = None) -> ObservableSeries:
    """Time series of ``name`` at ``site`` (per-site) or for the whole chain."""
    if name in PER_SITE:
        if site is None or not 0 <= site < traj.params.n_sites:
            raise ValueError(f"site must be in [0, {traj.params.n_sites}) for {name!r}")
        values = density_grid(traj, name)[:, site]
        return ObservableSeries(name, site, traj.times.copy(), values)
    if name == "centroid":
        return ObservableSeries(name, None, traj.times.copy(), centroid((traj.excited, traj.ground)))
    if name == "norm":
        return ObservableSeries(name, None, traj.times.copy(), traj.norms.copy())
    raise ValueError(f"unknown observable {name!r}; choose from {PER_SITE + GLOBAL}")
