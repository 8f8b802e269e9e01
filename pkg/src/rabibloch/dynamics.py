"""Time-domain integration of the two-band chain amplitude equations.

Three right-hand sides are supported, selected by ``ChainParams.mode``:

``full``
    i da_p/dt = (w0/2 - p*wB) a_p + t_a (a_{p+1} + a_{p-1}) - wR cos(w t) b_p
    i db_p/dt = -(w0/2 + p*wB) b_p + t_b (b_{p+1} + b_{p-1}) - wR cos(w t) a_p
``rwa``
    the coupling terms become -(wR/2) e^{-i w t} b_p and -(wR/2) e^{+i w t} a_p
``stark``
    the coupling is the static -wR (no drive)

Equal-rate decay adds -i*gamma/2 to both diagonals.  Integration is fixed-step
classical RK4; the decay term is a scalar multiple of the identity and is
applied as an exact factor exp(-gamma*dt/2) per step, so lossy runs factor
exactly into the lossless run times exp(-gamma*t/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .core import AmplitudeState, ChainParams, NumericalFailure, check, norm

MODE_CODES = {"full": 0, "rwa": 1, "stark": 2}
NORM_DRIFT_LIMIT = 1e-6
STEP_BUDGET = 0.1


@dataclass(frozen=True)
class IntegrationSettings:
    dt: float
    t_end: float
    record_every: int = 1
    scheme: str = "rk4"

    @property
    def n_steps(self) -> int:
        return self.n_records * self.record_every

    @property
    def n_records(self) -> int:
        # tolerate round-off in t_end / (dt * record_every)
        return int(math.floor(self.t_end / (self.dt * self.record_every) + 1e-9))

    @property
    def sample_dt(self) -> float:
        return self.dt * self.record_every


def lambda_max(params: ChainParams) -> float:
    """Spectral-radius estimate that sets the RK4 step budget."""
    return (params.omega0 / 2 + (params.n_sites / 2) * params.bloch
            + 2 * max(abs(params.t_a), abs(params.t_b)) + params.rabi)


def default_dt(params: ChainParams) -> float:
    return min(STEP_BUDGET / lambda_max(params), 0.01)


def auto_settings(params: ChainParams, t_end: float, sample_dt: float = 0.1,
                  dt_max: float | None = None) -> IntegrationSettings:
    """Settings that land exactly on ``t_end`` with snapshots every <= ``sample_dt``."""
    dt_max = default_dt(params) if dt_max is None else min(dt_max, default_dt(params))
    n_records = max(1, int(math.ceil(t_end / sample_dt - 1e-9)))
    spacing = t_end / n_records
    stride = max(1, int(math.ceil(spacing / dt_max - 1e-9)))
    return IntegrationSettings(dt=spacing / stride, t_end=t_end, record_every=stride)


def validate_settings(settings: IntegrationSettings, params: ChainParams) -> list[str]:
    errors = []
    if not settings.dt > 0:
        errors.append("dt must be > 0")
    if not settings.t_end > 0:
        errors.append("t_end must be > 0")
    if not (isinstance(settings.record_every, (int, np.integer)) and settings.record_every >= 1):
        errors.append("record_every must be a positive integer")
    if settings.scheme != "rk4":
        errors.append("scheme must be 'rk4'")
    if not errors:
        budget = settings.dt * lambda_max(params)
        if budget > STEP_BUDGET * (1 + 1e-12):
            errors.append(f"dt*lambda_max = {budget:.4g} exceeds {STEP_BUDGET}")
    return errors


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots of an evolution, stored as (K, N) arrays."""

    params: ChainParams
    settings: IntegrationSettings
    times: np.ndarray
    excited: np.ndarray
    ground: np.ndarray
    norms: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.times.size

    def __getitem__(self, k: int) -> AmplitudeState:
        return AmplitudeState(self.times[k], self.excited[k], self.ground[k])

    @property
    def snapshots(self) -> list[AmplitudeState]:
        return [self[k] for k in range(len(self))]

    @property
    def final(self) -> AmplitudeState:
        return self[-1]

    def norm_drift(self) -> float:
        """Max relative deviation of the decay-compensated norm from its start."""
        compensated = self.norms * np.exp(self.params.gamma * self.times)
        return float(np.max(np.abs(compensated / compensated[0] - 1.0)))


def _diagonals(params: ChainParams, site_offset: int | None = None):
    n = params.n_sites
    off = params.site_offset if site_offset is None else site_offset
    p = np.arange(n, dtype=float) - off
    return params.omega0 / 2 - p * params.bloch, -params.omega0 / 2 - p * params.bloch


def _coupling(params: ChainParams, t: float) -> tuple[complex, complex]:
    """Coefficients multiplying b_p in the a-row and a_p in the b-row."""
    if params.mode == "full":
        c = -params.rabi * math.cos(params.drive_freq * t)
        return c, c
    if params.mode == "rwa":
        w = params.drive_freq * t
        return -0.5 * params.rabi * complex(math.cos(w), -math.sin(w)), \
            -0.5 * params.rabi * complex(math.cos(w), math.sin(w))
    return -params.rabi, -params.rabi


def _hop(x: np.ndarray, periodic: bool) -> np.ndarray:
    out = np.zeros_like(x)
    if periodic:
        return np.roll(x, 1) + np.roll(x, -1)
    out[:-1] += x[1:]
    out[1:] += x[:-1]
    return out


def derivative(state: AmplitudeState, params: ChainParams, t: float | None = None,
               site_offset: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side (da/dt, db/dt) at time ``t`` (defaults to ``state.time``).

    Includes the -gamma/2 decay term.  Raises NumericalFailure on non-finite input.
    """
    t = state.time if t is None else t
    a, b = state.amp_excited, state.amp_ground
    if a.size != params.n_sites:
        raise ValueError(f"state has {a.size} sites, params expect {params.n_sites}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise NumericalFailure("non-finite amplitudes in state")
    periodic = params.boundary == "periodic"
    diag_a, diag_b = _diagonals(params, site_offset)
    ca, cb = _coupling(params, t)
    ha = (diag_a - 0.5j * params.gamma) * a + params.t_a * _hop(a, periodic) + ca * b
    hb = (diag_b - 0.5j * params.gamma) * b + params.t_b * _hop(b, periodic) + cb * a
    return -1j * ha, -1j * hb


# --- compiled RK4 kernel -----------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _rhs(a, b, t, diag_a, diag_b, t_a, t_b, rabi, omega, mode, periodic, da, db):
    n = a.size
    if mode == 0:
        ca = -rabi * math.cos(omega * t) + 0j
        cb = ca
    elif mode == 1:
        ca = -0.5 * rabi * complex(math.cos(omega * t), -math.sin(omega * t))
        cb = -0.5 * rabi * complex(math.cos(omega * t), math.sin(omega * t))
    else:
        ca = -rabi + 0j
        cb = ca
    for p in range(n):
        if p + 1 < n:
            ar = a[p + 1]
            br = b[p + 1]
        elif periodic:
            ar = a[0]
            br = b[0]
        else:
            ar = 0j
            br = 0j
        if p > 0:
            al = a[p - 1]
            bl = b[p - 1]
        elif periodic:
            al = a[n - 1]
            bl = b[n - 1]
        else:
            al = 0j
            bl = 0j
        ha = diag_a[p] * a[p] + t_a * (ar + al) + ca * b[p]
        hb = diag_b[p] * b[p] + t_b * (br + bl) + cb * a[p]
        da[p] = complex(ha.imag, -ha.real)
        db[p] = complex(hb.imag, -hb.real)


@numba.njit(cache=True, nogil=True)
def _rk4_run(a, b, t0, dt, n_steps, record_every, decay, diag_a, diag_b,
             t_a, t_b, rabi, omega, mode, periodic, out_a, out_b):
    """Advance (a, b) in place; returns -1 or the first step that went non-finite."""
    n = a.size
    k1a = np.empty(n, np.complex128)
    k1b = np.empty(n, np.complex128)
    k2a = np.empty(n, np.complex128)
    k2b = np.empty(n, np.complex128)
    k3a = np.empty(n, np.complex128)
    k3b = np.empty(n, np.complex128)
    k4a = np.empty(n, np.complex128)
    k4b = np.empty(n, np.complex128)
    ya = np.empty(n, np.complex128)
    yb = np.empty(n, np.complex128)
    h2 = 0.5 * dt
    h6 = dt / 6.0
    rec = 0
    if out_a.shape[0] > 0:
        out_a[0, :] = a
        out_b[0, :] = b
        rec = 1
    for step in range(n_steps):
        t = t0 + step * dt
        _rhs(a, b, t, diag_a, diag_b, t_a, t_b, rabi, omega, mode, periodic, k1a, k1b)
        for p in range(n):
            ya[p] = a[p] + h2 * k1a[p]
            yb[p] = b[p] + h2 * k1b[p]
        _rhs(ya, yb, t + h2, diag_a, diag_b, t_a, t_b, rabi, omega, mode, periodic, k2a, k2b)
        for p in range(n):
            ya[p] = a[p] + h2 * k2a[p]
            yb[p] = b[p] + h2 * k2b[p]
        _rhs(ya, yb, t + h2, diag_a, diag_b, t_a, t_b, rabi, omega, mode, periodic, k3a, k3b)
        for p in range(n):
            ya[p] = a[p] + dt * k3a[p]
            yb[p] = b[p] + dt * k3b[p]
        _rhs(ya, yb, t + dt, diag_a, diag_b, t_a, t_b, rabi, omega, mode, periodic, k4a, k4b)
        total = 0.0
        for p in range(n):
            a[p] = decay * (a[p] + h6 * (k1a[p] + 2.0 * k2a[p] + 2.0 * k3a[p] + k4a[p]))
            b[p] = decay * (b[p] + h6 * (k1b[p] + 2.0 * k2b[p] + 2.0 * k3b[p] + k4b[p]))
            total += a[p].real * a[p].real + a[p].imag * a[p].imag
            total += b[p].real * b[p].real + b[p].imag * b[p].imag
        if not math.isfinite(total):
            return step
        if (step + 1) % record_every == 0 and rec < out_a.shape[0]:
            out_a[rec, :] = a
            out_b[rec, :] = b
            rec += 1
    return -1


def _kernel_args(params: ChainParams, site_offset: int | None = None):
    diag_a, diag_b = _diagonals(params, site_offset)
    return (diag_a, diag_b, float(params.t_a), float(params.t_b), float(params.rabi),
            float(params.drive_freq), MODE_CODES[params.mode], params.boundary == "periodic")


def step(state: AmplitudeState, params: ChainParams, settings: IntegrationSettings,
         t: float | None = None) -> AmplitudeState:
    """Advance ``state`` by one step of ``settings.dt``."""
    t = state.time if t is None else t
    a = state.amp_excited.copy()
    b = state.amp_ground.copy()
    empty = np.empty((0, a.size), np.complex128)
    decay = math.exp(-0.5 * params.gamma * settings.dt)
    bad = _rk4_run(a, b, float(t), float(settings.dt), 1, 1, decay, *_kernel_args(params),
                   empty, empty)
    if bad >= 0:
        raise NumericalFailure("non-finite amplitudes after step")
    return AmplitudeState(t + settings.dt, a, b)


def evolve(initial: AmplitudeState, params: ChainParams, settings: IntegrationSettings,
           site_offset: int | None = None, check_norm: bool = True) -> Trajectory:
    """Integrate from ``initial`` to ``settings.t_end`` and record snapshots.

    Snapshot k sits at initial.time + k*record_every*dt.  Raises NumericalFailure
    on non-finite amplitudes (with the step index) or when the decay-compensated
    norm drifts by more than 1e-6 relative.
    """
    check(params)
    errors = validate_settings(settings, params)
    if errors:
        raise ValueError("; ".join(errors))
    if initial.n_sites != params.n_sites:
        raise ValueError(f"state has {initial.n_sites} sites, params expect {params.n_sites}")
    n0 = norm(initial)
    if not np.isfinite(n0) or n0 == 0:
        raise NumericalFailure("initial state has zero or non-finite norm")

    n_rec = settings.n_records + 1
    out_a = np.empty((n_rec, params.n_sites), np.complex128)
    out_b = np.empty((n_rec, params.n_sites), np.complex128)
    a = initial.amp_excited.copy()
    b = initial.amp_ground.copy()
    decay = math.exp(-0.5 * params.gamma * settings.dt)
    bad = _rk4_run(a, b, initial.time, float(settings.dt), settings.n_steps,
                   int(settings.record_every), decay, *_kernel_args(params, site_offset),
                   out_a, out_b)
    if bad >= 0:
        raise NumericalFailure(f"non-finite amplitudes at step {bad}")

    times = initial.time + np.arange(n_rec) * settings.record_every * settings.dt
    norms = np.sum(out_a.real**2 + out_a.imag**2 + out_b.real**2 + out_b.imag**2, axis=1)
    traj = Trajectory(params, settings, times, out_a, out_b, norms)
    if check_norm:
        drift = traj.norm_drift()
        if drift > NORM_DRIFT_LIMIT:
            raise NumericalFailure(f"relative norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT:g}")
    return traj
