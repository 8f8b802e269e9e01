"""Scenario execution and file output.

Every run writes into its own directory:

    meta.json                    resolved scenario, solver settings, version, summary
    observables.csv              t, site, current, inversion, dipole (long format)
    centroid.csv                 t, centroid_site, centroid_nm, norm
    spacetime_<obs>.csv          t followed by one column per site
    spectrum_<obs>_j<site>.csv   omega, magnitude
    lines_<obs>_j<site>.json     peaks labelled against the Rabi-Bloch comb

CSV files use 17 significant digits, a header row and LF line endings.  All
results are computed before anything is written, and each file is written to
a temporary name and renamed, so a failed run leaves no partial outputs.
"""
from __future__ import annotations

import itertools
import json
import multiprocessing
import os
import tempfile
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import mean_ro_frequency_rwa, mean_ro_frequency_stark
from .core import ChainParams, NumericalFailure, ParameterError, make_initial_state
from .dynamics import evolve, lambda_max
from .floquet import mean_ro_frequency_floquet
from .observables import PER_SITE, centroid, density_grid
from .scenarios import (Scenario, apply_override, build_scenario, parse_overrides, parse_value,
                        read_scenario_dict)
from .spectra import default_label_tol, find_peaks, label_peaks, power_spectrum

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_UMASK = os.umask(0)
os.umask(_UMASK)


@dataclass
class RunReport:
    out_dir: str
    runtime_s: float
    norm_drift: float
    centroid_excursion: float
    omega_bar: float
    omega_bar_source: str
    peak_counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, NumericalFailure):
        return EXIT_NUMERICAL
    if isinstance(exc, (ParameterError, ValueError, OSError)):
        return EXIT_CONFIG
    raise exc


def resolve_omega_bar(params: ChainParams, choice) -> tuple[float, str]:
    """(mean Rabi-oscillation frequency, provenance) for the comb's p term."""
    if not isinstance(choice, str):
        return float(choice), "user"
    if choice == "auto":
        choice = "floquet" if params.mode == "full" else "rwa"
    if choice == "floquet":
        return mean_ro_frequency_floquet(params), "floquet"
    if params.mode == "stark":
        return mean_ro_frequency_stark(params), "rwa-quadrature"
    return mean_ro_frequency_rwa(params), "rwa-quadrature"


# --- file helpers --------------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_UMASK)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_csv(header: list[str], columns: list[np.ndarray]) -> str:
    """Comma-separated text with 17 significant digits and a header row."""
    table = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    lines = [",".join(header)]
    lines += [",".join(f"{x:.17g}" for x in row) for row in table.tolist()]
    return "\n".join(lines) + "\n"


def read_csv_column(path: str | Path, column: str) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """(t, values, site) of one column of a run CSV; ``site`` is None if absent."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    if column not in header or "t" not in header:
        raise ParameterError([f"{path.name} has no column {column!r} (columns: {', '.join(header)})"])
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    site = data[:, header.index("site")] if "site" in header else None
    return data[:, header.index("t")], data[:, header.index(column)], site


def ensure_writable(out_dir: str | Path) -> Path:
    """Create ``out_dir`` if needed and check that files can be created in it."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        fd, probe = tempfile.mkstemp(dir=out, prefix=".probe.")
        os.close(fd)
        os.unlink(probe)
    except OSError as exc:
        raise ParameterError([f"output directory {str(out)!r} is not writable: {exc}"]) from exc
    return out


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


# --- spectra -------------------------------------------------------------------

def analyse_series(times, values, params: ChainParams, scenario_spectrum, omega_bar: float,
                   omega_bar_source: str):
    """Spectrum and labelled-lines record of one series."""
    s = scenario_spectrum
    spec = power_spectrum((times, values), s.window, s.zero_pad_factor)
    tol = default_label_tol(spec, params.bloch) if s.tol == "auto" else float(s.tol)
    peaks = find_peaks(spec, s.rel_threshold)
    labelled = label_peaks(peaks, params.omega0, params.bloch, omega_bar, s.m_max, s.n_max, tol)
    record = {
        "omega0": params.omega0, "bloch": params.bloch,
        "omega_bar": omega_bar, "omega_bar_source": omega_bar_source,
        "tol": tol, "m_max": s.m_max, "n_max": s.n_max, "rel_threshold": s.rel_threshold,
        "window": s.window, "zero_pad_factor": s.zero_pad_factor,
        "bin_width": spec.bin_width, "resolution": spec.resolution,
        "lines": [line.to_dict() for line in labelled],
    }
    return spec, record


# --- run -----------------------------------------------------------------------

def simulate(scenario: Scenario):
    """Evolve the scenario's packet; returns the trajectory."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        initial = make_initial_state(scenario.params, scenario.packet)
    return evolve(initial, scenario.params, scenario.integration)


def run(scenario: Scenario, out_dir: str | Path) -> RunReport:
    """Run ``scenario`` and write every output file into ``out_dir``."""
    out = ensure_writable(out_dir)
    start = time.perf_counter()
    params = scenario.params
    traj = simulate(scenario)
    omega_bar, source = resolve_omega_bar(params, scenario.spectrum.omega_bar)

    files: dict[str, str] = {}
    grids = {name: density_grid(traj, name) for name in PER_SITE}
    keep = slice(None, None, scenario.write_every)
    t_w = traj.times[keep]
    n = params.n_sites
    files["observables.csv"] = format_csv(
        ["t", "site", "current", "inversion", "dipole"],
        [np.repeat(t_w, n), np.tile(np.arange(n), t_w.size)]
        + [grids[name][keep].ravel() for name in PER_SITE])
    cen = centroid((traj.excited, traj.ground))
    files["centroid.csv"] = format_csv(["t", "centroid_site", "centroid_nm", "norm"],
                                       [traj.times, cen, cen * params.lattice_const_nm, traj.norms])
    for name in PER_SITE:
        files[f"spacetime_{name}.csv"] = format_csv(
            ["t"] + [f"j{j}" for j in range(n)], [t_w] + list(grids[name][keep].T))

    peak_counts = {}
    for name in scenario.spectrum.observables:
        for site in scenario.spectrum.sites:
            if site >= n:
                continue
            spec, record = analyse_series(traj.times, grids[name][:, site], params,
                                          scenario.spectrum, omega_bar, source)
            record = {"observable": name, "site": site, **record}
            files[f"spectrum_{name}_j{site}.csv"] = format_csv(["omega", "magnitude"],
                                                                [spec.omegas, spec.magnitudes])
            files[f"lines_{name}_j{site}.json"] = _json(record)
            peak_counts[f"{name}_j{site}"] = len(record["lines"])

    report = RunReport(str(out), time.perf_counter() - start, traj.norm_drift(),
                       float(cen.max() - cen.min()), omega_bar, source, peak_counts)
    meta = {
        "version": __version__,
        "scenario": scenario.to_dict(),
        "solver": {"scheme": scenario.integration.scheme, "dt": scenario.integration.dt,
                   "record_every": scenario.integration.record_every,
                   "n_steps": scenario.integration.n_steps,
                   "sample_dt": scenario.integration.sample_dt,
                   "lambda_max": lambda_max(params),
                   "dt_lambda_max": scenario.integration.dt * lambda_max(params),
                   "decay": "exact per-step factor exp(-gamma dt / 2)"},
        "summary": report.to_dict(),
    }
    files["meta.json"] = _json(meta)
    for name, text in files.items():
        _atomic_write(out / name, text)
    return report


# --- sweep ---------------------------------------------------------------------

def parse_axis(text: str) -> tuple[str, list]:
    """``key=v1,v2,...`` to (key, [values])."""
    if "=" not in text:
        raise ParameterError([f"axis {text!r} is not of the form key=v1,v2,..."])
    key, values = text.split("=", 1)
    items = [parse_value(v.strip()) for v in values.split(",") if v.strip()]
    if not items:
        raise ParameterError([f"axis {key!r} has no values"])
    return key.strip(), items


def _run_cell(data: dict, out_dir: str) -> dict:
    try:
        report = run(build_scenario(data), out_dir)
        return {"exit_code": EXIT_OK, "summary": report.to_dict()}
    except Exception as exc:  # noqa: BLE001 - every failure is recorded in the index
        return {"exit_code": exit_code_for(exc), "error": str(exc)}


def sweep(base, axes: list[tuple[str, list]], out_dir: str | Path, jobs: int = 1,
          overrides=None) -> dict:
    """Cartesian product of ``axes`` over ``base``; one sub-directory per cell.

    ``base`` is a preset name, a file path or a raw scenario dict.  Failed cells
    are recorded in ``index.json`` with their exit code and the sweep continues.
    """
    out = ensure_writable(out_dir)
    if jobs < 1:
        raise ParameterError(["jobs must be >= 1"])
    data = read_scenario_dict(base) if not isinstance(base, dict) else base
    for key, value in parse_overrides(overrides):
        apply_override(data, key, value)
    keys = [k for k, _ in axes]
    cells = []
    for k, combo in enumerate(itertools.product(*(v for _, v in axes))):
        cell = json.loads(json.dumps(data))
        for key, value in zip(keys, combo):
            apply_override(cell, key, value)
        cells.append((f"cell_{k:03d}", dict(zip(keys, combo)), cell))

    args = [(cell, str(out / name)) for name, _, cell in cells]
    if jobs == 1:
        results = [_run_cell(*a) for a in args]
    else:
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
            results = list(pool.map(_run_cell, *zip(*args)))

    index = {"version": __version__, "axes": {k: v for k, v in axes},
             "cells": [{"dir": name, "values": values, **result}
                       for (name, values, _), result in zip(cells, results)]}
    _atomic_write(out / "index.json", _json(index))
    return index
