"""Command line interface: ``rabibloch run | spectrum | lines | sweep | presets``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .core import ParameterError
from .floquet import predicted_lines
from .runner import (EXIT_OK, _atomic_write, analyse_series, ensure_writable,
                     exit_code_for, format_csv, parse_axis, read_csv_column, resolve_omega_bar,
                     run, sweep)
from .scenarios import SpectrumSettings, load_scenario, preset_names
from .spectra import power_spectrum


def _guard(fn, *args, **kwargs):
    """Call ``fn`` and turn known failures into the documented exit codes."""
    try:
        return fn(*args, **kwargs)
    except click.ClickException:
        raise
    except Exception as exc:  # noqa: BLE001
        code = exit_code_for(exc)
        errors = exc.errors if isinstance(exc, ParameterError) else [str(exc)]
        for line in errors:
            click.echo(f"error: {line}", err=True)
        sys.exit(code)


@click.group()
@click.version_option(__version__, prog_name="rabibloch")
def main():
    """Simulate and analyse Rabi-Bloch oscillations in driven two-level chains."""


@main.command("presets")
def presets_cmd():
    """List the built-in scenario presets."""
    for name in preset_names():
        click.echo(name)


@main.command("run")
@click.option("--scenario", required=True, help="Preset name or path to a TOML/meta.json file.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override one key, e.g. chain.n_sites=64 or rabi=0.5.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def run_cmd(scenario, overrides, out_dir):
    """Integrate a scenario and write time series, grids, spectra and lines."""
    sc = _guard(load_scenario, scenario, list(overrides))
    report = _guard(run, sc, out_dir)
    click.echo(json.dumps(report.to_dict(), indent=2))
    sys.exit(EXIT_OK)


@main.command("spectrum")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--column", required=True, help="Column to transform, e.g. current.")
@click.option("--site", type=int, default=None, help="Site to select from a long-format CSV.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--label", is_flag=True, help="Label peaks against the Rabi-Bloch comb.")
@click.option("--omega-bar", default="auto",
              help="Mean Rabi frequency: 'auto' (from the run's meta.json) or a number.")
@click.option("--window", type=click.Choice(["hann", "rect"]), default="hann")
@click.option("--zero-pad", type=int, default=4)
def spectrum_cmd(input_path, column, site, out_dir, label, omega_bar, window, zero_pad):
    """Spectrum (and optionally labelled lines) of one CSV column."""
    _guard(_spectrum, Path(input_path), column, site, out_dir, label, omega_bar, window, zero_pad)
    sys.exit(EXIT_OK)


def _spectrum(path: Path, column, site, out_dir, label, omega_bar, window, zero_pad):
    t, values, sites = read_csv_column(path, column)
    if sites is not None:
        available = np.unique(sites).astype(int)
        if site is None:
            if available.size > 1:
                raise ParameterError([f"{path.name} holds several sites; choose one with --site"])
            site = int(available[0])
        mask = sites == site
        if not mask.any():
            raise ParameterError([f"site {site} not present in {path.name}"])
        t, values = t[mask], values[mask]
    meta_path = path.parent / "meta.json"
    sc = load_scenario(meta_path) if meta_path.exists() else None
    tag = f"{column}_j{site}" if site is not None else column
    out = ensure_writable(out_dir)

    if label:
        if sc is None:
            raise ParameterError(["labelling needs the run's meta.json for omega0 and the Bloch frequency"])
        choice = sc.spectrum.omega_bar if omega_bar == "auto" else float(omega_bar)
        settings = SpectrumSettings(window=window, zero_pad_factor=zero_pad,
                                    rel_threshold=sc.spectrum.rel_threshold, m_max=sc.spectrum.m_max,
                                    n_max=sc.spectrum.n_max, tol=sc.spectrum.tol)
        value, source = resolve_omega_bar(sc.params, choice)
        spec, record = analyse_series(t, values, sc.params, settings, value, source)
        record = {"observable": column, "site": site, **record}
        _atomic_write(out / f"lines_{tag}.json", json.dumps(record, indent=2) + "\n")
        click.echo(json.dumps([(l["omega"], l["m"], l["n"], l["p"]) for l in record["lines"]]))
    else:
        spec = power_spectrum((t, values), window, zero_pad)
    _atomic_write(out / f"spectrum_{tag}.csv",
                  format_csv(["omega", "magnitude"], [spec.omegas, spec.magnitudes]))


@main.command("lines")
@click.option("--params", "scenario", required=True, help="Preset name or scenario file.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE")
@click.option("--floquet", is_flag=True, help="Use the Floquet mean Rabi frequency.")
@click.option("--max-freq", type=float, default=None, help="Only print lines up to this frequency.")
def lines_cmd(scenario, overrides, floquet, max_freq):
    """Print the predicted comb m*w0 + n*wB + p*omega_bar."""
    sc = _guard(load_scenario, scenario, list(overrides))
    value, source = _guard(resolve_omega_bar, sc.params, "floquet" if floquet else "rwa")
    click.echo(f"# omega_bar = {value:.10g} ({source})")
    click.echo("omega,m,n,p")
    for line in predicted_lines(sc.params, value, sc.spectrum.m_max, sc.spectrum.n_max):
        if max_freq is None or line.freq <= max_freq:
            click.echo(f"{line.freq:.10g},{line.m},{line.n},{line.p}")
    sys.exit(EXIT_OK)


@main.command("sweep")
@click.option("--scenario", required=True)
@click.option("--axis", "axes", multiple=True, required=True, metavar="KEY=V1,V2,...")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--jobs", type=int, default=1, show_default=True)
def sweep_cmd(scenario, axes, overrides, out_dir, jobs):
    """Run the Cartesian product of parameter axes, one directory per cell."""
    parsed = [_guard(parse_axis, a) for a in axes]
    index = _guard(sweep, scenario, parsed, out_dir, jobs, list(overrides))
    for cell in index["cells"]:
        click.echo(f"{cell['dir']} {cell['values']} exit={cell['exit_code']}")
    failed = [c for c in index["cells"] if c["exit_code"] != EXIT_OK]
    sys.exit(max(c["exit_code"] for c in failed) if failed else EXIT_OK)


if __name__ == "__main__":
    main()
