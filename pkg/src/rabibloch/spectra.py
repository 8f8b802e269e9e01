"""Magnitude spectra of observable series, peak picking and comb labelling."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .floquet import label_cost
from .observables import ObservableSeries

WINDOWS = ("rect", "hann")
MIN_SAMPLES = 16


@dataclass(frozen=True, eq=False)
class Spectrum:
    omegas: np.ndarray
    magnitudes: np.ndarray
    window: str
    dt_sample: float
    n_samples: int
    n_fft: int

    @property
    def bin_width(self) -> float:
        """Spacing of the (zero-padded) frequency grid."""
        return 2 * np.pi / (self.n_fft * self.dt_sample)

    @property
    def resolution(self) -> float:
        """Native resolution 2 pi / record length; zero padding does not improve it."""
        return 2 * np.pi / (self.n_samples * self.dt_sample)


@dataclass(frozen=True)
class SpectralLine:
    omega_peak: float
    magnitude: float
    label: tuple[int, int, int] | None = None
    residual: float | None = None

    def to_dict(self) -> dict:
        m, n, p = self.label if self.label else (None, None, None)
        return {"omega": self.omega_peak, "magnitude": self.magnitude,
                "m": m, "n": n, "p": p, "residual": self.residual,
                "labeled": self.label is not None}


def power_spectrum(series: ObservableSeries | tuple, window: str = "hann",
                   zero_pad_factor: int = 4) -> Spectrum:
    """One-sided amplitude spectrum of a uniformly sampled real series.

    The mean is removed before windowing.  Magnitudes are scaled so that a
    sinusoid of unit amplitude on a bin centre peaks at 1.
    ``series`` may also be a ``(times, values)`` pair.
    """
    times, values = (series.times, series.values) if isinstance(series, ObservableSeries) else series
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window not in WINDOWS:
        raise ValueError(f"window must be one of {WINDOWS}")
    if zero_pad_factor < 1:
        raise ValueError("zero_pad_factor must be >= 1")
    n = values.size
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n}")
    steps = np.diff(times)
    dt = float(np.mean(steps))
    if np.max(np.abs(steps - dt)) > 1e-9 * max(abs(dt), abs(times[-1])):
        raise ValueError("series is not uniformly sampled")

    w = np.hanning(n) if window == "hann" else np.ones(n)
    n_fft = int(zero_pad_factor) * n
    spec = np.fft.rfft((values - values.mean()) * w, n_fft)
    mags = 2.0 * np.abs(spec) / w.sum()
    omegas = 2 * np.pi * np.fft.rfftfreq(n_fft, dt)
    return Spectrum(omegas, mags, window, dt, n, n_fft)


def find_peaks(spectrum: Spectrum, rel_threshold: float = 0.05,
               min_separation_bins: int | None = None) -> list[SpectralLine]:
    """Local maxima above ``rel_threshold * max``, strongest first.

    Positions and heights are refined with a parabola through the log
    magnitudes of the three bins around each maximum.  The default minimum
    separation is two native resolution bins.
    """
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must be in (0, 1)")
    mags = spectrum.magnitudes
    if mags.size == 0:
        raise ValueError("empty spectrum")
    top = float(mags.max())
    if top <= 0:
        return []
    if min_separation_bins is None:
        min_separation_bins = 2 * spectrum.n_fft // spectrum.n_samples
    idx, _ = scipy.signal.find_peaks(mags, height=rel_threshold * top,
                                     distance=max(1, int(min_separation_bins)))
    lines = []
    with np.errstate(divide="ignore"):
        logm = np.log(mags)
    for k in idx:
        omega, height = spectrum.omegas[k], mags[k]
        if 0 < k < mags.size - 1 and np.all(np.isfinite(logm[k - 1:k + 2])):
            la, lb, lc = logm[k - 1:k + 2]
            curvature = la - 2 * lb + lc
            if curvature < 0:
                shift = 0.5 * (la - lc) / curvature
                omega = omega + shift * spectrum.bin_width
                height = float(np.exp(lb - 0.25 * (la - lc) * shift))
        lines.append(SpectralLine(float(omega), float(height)))
    lines.sort(key=lambda line: -line.magnitude)
    return lines


def default_label_tol(spectrum: Spectrum, bloch: float) -> float:
    return max(spectrum.resolution, bloch / 4)


def label_peaks(peaks: list[SpectralLine], omega0: float, bloch: float, omega_bar: float,
                m_max: int = 2, n_max: int = 8, tol: float | None = None) -> list[SpectralLine]:
    """Attach the nearest comb member m*w0 + n*wB + p*omega_bar to each peak.

    Ties in residual (within 1e-9) go to the smallest
    (|m|+|n|+|p|, |p|, |n|, |m|, m, n, p).  Peaks farther than ``tol`` from
    every member keep ``label=None`` but still report the best residual.
    """
    tol = bloch / 4 if tol is None else tol
    ps = (-1, 0, 1) if omega_bar > 0 else (0,)
    combos = [(m, n, p) for m, n, p in itertools.product(range(-m_max, m_max + 1),
                                                          range(-n_max, n_max + 1), ps)]
    freqs = np.array([m * omega0 + n * bloch + p * omega_bar for m, n, p in combos])
    keep = freqs >= -1e-12
    combos = [c for c, k in zip(combos, keep) if k]
    freqs = freqs[keep]
    out = []
    for peak in peaks:
        if freqs.size == 0:
            out.append(SpectralLine(peak.omega_peak, peak.magnitude, None, None))
            continue
        res = np.abs(freqs - peak.omega_peak)
        best = res.min()
        tied = [combos[i] for i in np.flatnonzero(res <= best + 1e-9)]
        label = min(tied, key=lambda c: label_cost(*c))
        residual = float(abs(peak.omega_peak - (label[0] * omega0 + label[1] * bloch
                                                + label[2] * omega_bar)))
        out.append(SpectralLine(peak.omega_peak, peak.magnitude,
                                label if residual <= tol else None, residual))
    return out
