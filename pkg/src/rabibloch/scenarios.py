"""Scenario configuration: figure presets, TOML files and key overrides.

A scenario is described by a nested dict with the sections

    [chain]      n_sites, omega0, t_a, t_b, bloch, boundary, mode, lattice_const_nm
    [drive]      rabi, drive_freq
    [loss]       gamma  or  q_factor
    [init]       center_site, width_sites, band, phase_per_site
    [integrate]  t_end, dt, record_every, sample_dt
    [spectrum]   sites, observables, window, zero_pad_factor, rel_threshold,
                 m_max, n_max, tol, omega_bar
    [output]     write_every

plus an optional top-level ``name``.  ``dt``, ``record_every``, ``tol`` and
``write_every`` accept "auto"; :func:`build_scenario` resolves them, and
:meth:`Scenario.to_dict` writes the resolved values so a saved scenario
reproduces the run exactly.
"""
from __future__ import annotations

import copy
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import tomli

from .core import ChainParams, GaussianPacket, ParameterError, validate
from .dynamics import IntegrationSettings, auto_settings, default_dt, validate_settings
from .observables import PER_SITE
from .spectra import WINDOWS

SECTIONS = {
    "chain": ("n_sites", "omega0", "t_a", "t_b", "bloch", "boundary", "mode", "lattice_const_nm"),
    "drive": ("rabi", "drive_freq"),
    "loss": ("gamma", "q_factor"),
    "init": ("center_site", "width_sites", "band", "phase_per_site"),
    "integrate": ("t_end", "dt", "record_every", "sample_dt"),
    "spectrum": ("sites", "observables", "window", "zero_pad_factor", "rel_threshold",
                 "m_max", "n_max", "tol", "omega_bar"),
    "output": ("write_every",),
}
OMEGA_BAR_SOURCES = ("auto", "rwa", "floquet")
MAX_WRITE_ROWS = 1000


@dataclass(frozen=True)
class SpectrumSettings:
    sites: tuple[int, ...] = (90,)
    observables: tuple[str, ...] = PER_SITE
    window: str = "hann"
    zero_pad_factor: int = 4
    rel_threshold: float = 0.05
    m_max: int = 2
    n_max: int = 8
    tol: float | str = "auto"
    omega_bar: float | str = "auto"


@dataclass(frozen=True)
class Scenario:
    name: str
    params: ChainParams
    packet: GaussianPacket
    integration: IntegrationSettings
    spectrum: SpectrumSettings
    write_every: int = 1
    sample_dt: float = 0.1

    def to_dict(self) -> dict:
        p = self.params
        return {
            "name": self.name,
            "chain": {k: getattr(p, k) for k in SECTIONS["chain"]},
            "drive": {"rabi": p.rabi, "drive_freq": p.drive_freq},
            "loss": {"gamma": p.gamma},
            "init": self.packet.to_dict(),
            "integrate": {"t_end": self.integration.t_end, "dt": self.integration.dt,
                          "record_every": self.integration.record_every,
                          "sample_dt": self.sample_dt},
            "spectrum": {"sites": list(self.spectrum.sites),
                         "observables": list(self.spectrum.observables),
                         "window": self.spectrum.window,
                         "zero_pad_factor": self.spectrum.zero_pad_factor,
                         "rel_threshold": self.spectrum.rel_threshold,
                         "m_max": self.spectrum.m_max, "n_max": self.spectrum.n_max,
                         "tol": self.spectrum.tol, "omega_bar": self.spectrum.omega_bar},
            "output": {"write_every": self.write_every},
        }


# --- presets -----------------------------------------------------------------

def _strong(**chain) -> dict:
    base = {
        "chain": {"n_sites": 128, "omega0": 1.0, "t_a": 0.4, "t_b": 0.04, "bloch": 0.04,
                  "boundary": "open", "mode": "full", "lattice_const_nm": 20.0},
        "drive": {"rabi": 0.8, "drive_freq": 1.0},
        "loss": {"gamma": 0.0},
        "init": {"center_site": 80.0, "width_sites": 20.0, "band": "excited",
                 "phase_per_site": 0.0},
        # eight Bloch periods
        "integrate": {"t_end": 16 * math.pi / 0.04, "dt": "auto", "record_every": "auto",
                      "sample_dt": 0.1},
        "spectrum": {"sites": [90], "omega_bar": "rwa"},
        "output": {"write_every": "auto"},
    }
    base["chain"].update(chain)
    return base


def _ultrastrong(rabi: float, bloch: float, t: float, gamma: float = 0.0,
                 mode: str = "full") -> dict:
    d = _strong(t_a=t, t_b=t, bloch=bloch, mode=mode)
    d["drive"]["rabi"] = rabi
    d["loss"]["gamma"] = gamma
    # forty drive periods
    d["integrate"]["t_end"] = 80 * math.pi
    d["spectrum"] = {"sites": [60], "omega_bar": "rwa" if mode == "stark" else "floquet"}
    return d


PRESETS = {
    "fig3": _strong(),
    "fig4": _strong(t_a=0.04, t_b=0.04),
    "fig5": _strong(),
    "fig6": _strong(t_a=0.04, t_b=0.04),
    "fig7": _strong(),
    "fig9": _strong(),
    "fig11": _ultrastrong(0.8, 0.7, 7.0),
    "fig12": _ultrastrong(0.8, 0.7, 7.0),
    "fig13": _ultrastrong(0.5, 0.5, 5.0),
    "fig15": _ultrastrong(0.8, 0.7, 7.0, gamma=ChainParams.gamma_from_q(15.0)),
    # the Stark captions give no Rabi frequency; take it equal to omega0
    "fig18": _ultrastrong(1.0, 0.9, 9.0, mode="stark"),
    "fig20": _ultrastrong(1.0, 0.9, 9.0, mode="stark"),
}
for _name, _d in PRESETS.items():
    _d["name"] = _name


def preset_names() -> list[str]:
    return sorted(PRESETS, key=lambda s: int(s[3:]))


def preset_dict(name: str) -> dict:
    if name not in PRESETS:
        raise ParameterError([f"unknown preset {name!r}; available: {', '.join(preset_names())}"])
    return copy.deepcopy(PRESETS[name])


# --- loading -----------------------------------------------------------------

def read_scenario_dict(source: str | Path) -> dict:
    """Raw scenario dict from a preset name, a TOML file or a run's meta.json."""
    path = Path(source)
    if str(source) in PRESETS:
        return preset_dict(str(source))
    if not path.exists():
        if path.suffix:
            raise ParameterError([f"scenario file {str(source)!r} not found"])
        return preset_dict(str(source))
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError([f"{path}: {exc}"]) from exc
        return data.get("scenario", data)
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ParameterError([f"{path}: {exc}"]) from exc


def parse_value(text: str):
    """Typed value of an override: TOML literal if it parses, else a bare string."""
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def apply_override(data: dict, key: str, value) -> dict:
    """Set ``section.key`` (or a bare key, if it names exactly one field) in place."""
    if "." in key:
        section, field = key.split(".", 1)
        if section not in SECTIONS or field not in SECTIONS[section]:
            raise ParameterError([f"unknown key {key!r}"])
    elif key == "name":
        data["name"] = str(value)
        return data
    else:
        owners = [s for s, keys in SECTIONS.items() if key in keys]
        if len(owners) != 1:
            raise ParameterError([f"unknown key {key!r}"])
        section, field = owners[0], key
    if isinstance(value, str):
        value = parse_value(value)
    target = data.setdefault(section, {})
    if section == "loss":
        target.pop("gamma", None)
        target.pop("q_factor", None)
    target[field] = value
    return data


def _positive_int_or_auto(value, key, errors):
    if value == "auto":
        return value
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        errors.append(f"{key} must be a positive integer or 'auto'")
        return None
    return value


def build_scenario(data: dict) -> Scenario:
    """Validate a raw scenario dict and resolve every 'auto' entry."""
    errors = []
    for section, body in data.items():
        if section == "name":
            continue
        if section not in SECTIONS:
            errors.append(f"unknown section [{section}]")
        elif not isinstance(body, dict):
            errors.append(f"[{section}] must be a table")
        else:
            errors += [f"unknown key {section}.{k}" for k in body if k not in SECTIONS[section]]
    if errors:
        raise ParameterError(errors)

    chain, drive = data.get("chain", {}), data.get("drive", {})
    loss = data.get("loss", {})
    if "gamma" in loss and "q_factor" in loss:
        raise ParameterError(["give either loss.gamma or loss.q_factor, not both"])
    kwargs = {**chain, **drive}
    if "q_factor" in loss:
        q = loss["q_factor"]
        if not isinstance(q, (int, float)) or q <= 0:
            raise ParameterError(["loss.q_factor must be > 0"])
        kwargs["gamma"] = ChainParams.gamma_from_q(q, kwargs.get("omega0", 1.0))
    elif "gamma" in loss:
        kwargs["gamma"] = loss["gamma"]
    params = ChainParams(**kwargs)
    errors += validate(params)
    packet = GaussianPacket(**data.get("init", {}))
    if packet.band not in ("excited", "ground"):
        errors.append("init.band must be 'excited' or 'ground'")
    if not (isinstance(packet.width_sites, (int, float)) and packet.width_sites > 0):
        errors.append("init.width_sites must be > 0")

    integ = data.get("integrate", {})
    sample_dt = integ.get("sample_dt", 0.1)
    t_end = integ.get("t_end")
    dt = integ.get("dt", "auto")
    record_every = _positive_int_or_auto(integ.get("record_every", "auto"), "integrate.record_every", errors)
    if not isinstance(t_end, (int, float)) or not t_end > 0:
        errors.append("integrate.t_end must be a number > 0")
    if not isinstance(sample_dt, (int, float)) or not sample_dt > 0:
        errors.append("integrate.sample_dt must be > 0")
    if dt != "auto" and (not isinstance(dt, (int, float)) or not dt > 0):
        errors.append("integrate.dt must be > 0 or 'auto'")
    if errors:
        raise ParameterError(errors)

    if dt == "auto" and record_every == "auto":
        settings = auto_settings(params, float(t_end), float(sample_dt))
    elif dt == "auto":
        # finest step within the budget that makes t_end a whole number of records
        n_rec = max(1, math.ceil(t_end / (default_dt(params) * record_every) - 1e-9))
        settings = IntegrationSettings(t_end / (n_rec * record_every), float(t_end), record_every)
    else:
        stride = record_every if record_every != "auto" else max(1, math.ceil(sample_dt / dt - 1e-9))
        settings = IntegrationSettings(float(dt), float(t_end), stride)
    errors += validate_settings(settings, params)

    spec = data.get("spectrum", {})
    spectrum = SpectrumSettings(**{k: tuple(v) if isinstance(v, list) else v for k, v in spec.items()})
    errors += _check_spectrum(spectrum, params)

    write_every = _positive_int_or_auto(data.get("output", {}).get("write_every", "auto"),
                                        "output.write_every", errors)
    if errors:
        raise ParameterError(errors)
    if write_every == "auto":
        write_every = max(1, math.ceil((settings.n_records + 1) / MAX_WRITE_ROWS))
    return Scenario(str(data.get("name", "custom")), params, packet, settings, spectrum,
                    int(write_every), float(sample_dt))


def _check_spectrum(s: SpectrumSettings, params: ChainParams) -> list[str]:
    errors = []
    if any(not isinstance(j, int) or isinstance(j, bool) or j < 0 for j in s.sites):
        errors.append("spectrum.sites must be nonnegative integers")
    elif any(j >= params.n_sites for j in s.sites):
        warnings.warn(f"spectrum sites beyond the chain (n_sites={params.n_sites}) are skipped",
                      stacklevel=3)
    if any(o not in PER_SITE for o in s.observables):
        errors.append(f"spectrum.observables must be drawn from {PER_SITE}")
    if s.window not in WINDOWS:
        errors.append(f"spectrum.window must be one of {WINDOWS}")
    if not isinstance(s.zero_pad_factor, int) or s.zero_pad_factor < 1:
        errors.append("spectrum.zero_pad_factor must be an integer >= 1")
    if not 0 < s.rel_threshold < 1:
        errors.append("spectrum.rel_threshold must be in (0, 1)")
    if not (isinstance(s.m_max, int) and s.m_max >= 0 and isinstance(s.n_max, int) and s.n_max >= 0):
        errors.append("spectrum.m_max and spectrum.n_max must be integers >= 0")
    if s.tol != "auto" and not (isinstance(s.tol, (int, float)) and s.tol > 0):
        errors.append("spectrum.tol must be > 0 or 'auto'")
    if isinstance(s.omega_bar, str):
        if s.omega_bar not in OMEGA_BAR_SOURCES:
            errors.append(f"spectrum.omega_bar must be a number or one of {OMEGA_BAR_SOURCES}")
    elif not s.omega_bar >= 0:
        errors.append("spectrum.omega_bar must be >= 0")
    return errors


def load_scenario(source: str | Path, overrides: dict | list | None = None) -> Scenario:
    """Resolve a preset name or file path, apply ``overrides`` and validate.

    ``overrides`` is a mapping or a list of ``"key=value"`` strings; keys are
    ``section.key`` or a bare key that names exactly one field.
    """
    data = read_scenario_dict(source)
    for key, value in parse_overrides(overrides):
        apply_override(data, key, value)
    try:
        return build_scenario(data)
    except TypeError as exc:
        raise ParameterError([str(exc)]) from exc


def parse_overrides(overrides):
    if not overrides:
        return []
    if isinstance(overrides, dict):
        return list(overrides.items())
    pairs = []
    for item in overrides:
        if "=" not in item:
            raise ParameterError([f"override {item!r} is not of the form key=value"])
        key, value = item.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs
