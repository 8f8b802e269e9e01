"""End-to-end acceptance checks, one test per criterion (sub-parts split out).

"One bin" is the native frequency resolution 2 pi / (record length); zero
padding refines peak positions but not resolution.  A spectrum "contains a
peak" at w when a local maximum above 1e-3 of the spectrum maximum lies within
one bin of w and is not window leakage: it must either exceed 5% of every
stronger peak or sit more than 8 bins from all of them (Hann sidelobes there
are below -60 dB).
"""
import hashlib
import math
import time

import numpy as np
import pytest

from rabibloch import (AmplitudeState, ChainParams, GaussianPacket, IntegrationSettings,
                       auto_settings, evolve, make_initial_state)
from rabibloch.analytics import (eigenmode_state, excited_start_constants,
                                 mean_ro_frequency_rwa, mode_info, resonant_params,
                                 super_bloch_position, travelling_wave_state)
from rabibloch.floquet import (fold, mean_ro_frequency_floquet, monodromy, quasi_energies)
from rabibloch.observables import centroid, density_grid
from rabibloch.runner import run, sweep
from rabibloch.scenarios import load_scenario, preset_names
from rabibloch.spectra import find_peaks, label_peaks, power_spectrum

PRESENCE = 1e-3
LEAKAGE_BINS = 8


@pytest.fixture(scope="module")
def fig3_run():
    sc = load_scenario("fig3")
    simulate_once = lambda: evolve(make_initial_state(sc.params, sc.packet), sc.params, sc.integration)
    simulate_once()  # compile outside the timed run
    start = time.perf_counter()
    traj = simulate_once()
    return sc, traj, time.perf_counter() - start


def spectrum_at(traj, obs, site):
    return power_spectrum((traj.times, density_grid(traj, obs)[:, site]))


def _is_leakage(peak, peaks, spec):
    return any(q.magnitude > peak.magnitude and peak.magnitude < 0.05 * q.magnitude
               and abs(q.omega_peak - peak.omega_peak) <= LEAKAGE_BINS * spec.resolution
               for q in peaks)


def peak_near(spec, omega, rel=PRESENCE):
    peaks = find_peaks(spec, rel)
    near = [p for p in peaks if abs(p.omega_peak - omega) <= spec.resolution
            and not _is_leakage(p, peaks, spec)]
    return max(near, key=lambda p: p.magnitude) if near else None


def test_c01_norm_conservation(fig3_run, criterion):
    _, traj, seconds = fig3_run
    drift = traj.norm_drift()
    criterion("1", drift < 1e-6 and seconds <= 60,
              f"fig3 drift {drift:.2e} (< 1e-6), runtime {seconds:.1f} s (<= 60 s)")


def test_c02_single_atom_flop(criterion):
    p = ChainParams(n_sites=1, t_a=0, t_b=0, bloch=0, rabi=0.8, mode="rwa")
    t_end = math.pi / p.rabi
    traj = evolve(AmplitudeState(0, [1.0], [0.0]), p, auto_settings(p, t_end, sample_dt=t_end))
    err = abs(abs(traj.ground[-1, 0]) ** 2 - 1)
    criterion("2", err < 1e-6, f"| |b(pi/wR)|^2 - 1 | = {err:.2e} (< 1e-6)")


RING = ChainParams(n_sites=128, boundary="periodic", bloch=0.0, mode="rwa")
PHI = 2 * math.pi * 10 / 128


def test_c03a_eigenmode_stationary(criterion):
    t_end = 10 * 2 * math.pi / mode_info(PHI, RING).big_omega
    traj = evolve(eigenmode_state(PHI, RING, 1), RING, auto_settings(RING, t_end, sample_dt=0.5))
    dev = max(np.max(abs(abs(traj.excited) - abs(traj.excited[0]))),
              np.max(abs(abs(traj.ground) - abs(traj.ground[0]))))
    criterion("3a", dev < 1e-6, f"eigenmode magnitude variation over 10 Rabi periods {dev:.2e} (< 1e-6)")


def test_c03b_travelling_wave(criterion):
    t_end = 10 * 2 * math.pi / mode_info(PHI, RING).big_omega
    c1, c2 = excited_start_constants(PHI, RING)
    traj = evolve(travelling_wave_state(PHI, 0.0, c1, c2, RING), RING,
                  auto_settings(RING, t_end, sample_dt=0.5))
    err = 0.0
    for k, t in enumerate(traj.times):
        exact = travelling_wave_state(PHI, t, c1, c2, RING)
        err = max(err, np.max(abs(traj.excited[k] - exact.amp_excited)),
                  np.max(abs(traj.ground[k] - exact.amp_ground)))
    criterion("3b", err < 1e-5, f"excited-start wave vs integrator max error {err:.2e} (< 1e-5)")


def test_c04_bloch_return(criterion):
    p = ChainParams(n_sites=128, rabi=0.0, bloch=0.04)
    state = make_initial_state(p, GaussianPacket(64, 20))
    period = 2 * math.pi / p.bloch
    traj = evolve(state, p, auto_settings(p, period, sample_dt=period / 400))
    fidelity = abs(np.vdot(traj.excited[0], traj.excited[-1])) ** 2
    cen = centroid((traj.excited, traj.ground))
    shift = abs(cen[-1] - cen[0])
    criterion("4", fidelity >= 0.99 and shift <= 0.5,
              f"fidelity {fidelity:.6f} (>= 0.99), centroid return {shift:.2e} site (<= 0.5), "
              f"excursion {np.ptp(cen):.1f} sites")


def test_c05_lossy_factorization(criterion):
    lossy = load_scenario("fig15")
    lossless = lossy.params.replace(gamma=0.0)
    state = make_initial_state(lossy.params, lossy.packet)
    a = evolve(state, lossy.params, lossy.integration)
    b = evolve(state, lossless, lossy.integration)
    factor = np.exp(-0.5 * lossy.params.gamma * a.times)[:, None]
    dev = max(np.max(abs(a.excited - factor * b.excited)), np.max(abs(a.ground - factor * b.ground)))
    criterion("5", dev < 1e-10, f"fig15 vs lossless * exp(-gamma t/2) max deviation {dev:.2e} (< 1e-10)")


def _high_frequency_peaks(spec, omega0):
    return [p for p in find_peaks(spec) if p.omega_peak >= omega0 / 2]


def test_c06a_sidebands(fig3_run, criterion):
    sc, traj, _ = fig3_run
    omega_bar = mean_ro_frequency_rwa(sc.params)
    spec = spectrum_at(traj, "current", 90)
    wb = sc.params.bloch
    found = {k: peak_near(spec, omega_bar + k * wb) for k in (-1, 0, 1)}
    offsets = {k: (None if v is None else v.omega_peak - omega_bar - k * wb) for k, v in found.items()}
    ok = all(v is not None for v in found.values())
    criterion("6a", ok, f"peaks at Omega_bar + k*wB, k=-1,0,1, offsets {offsets} "
                        f"(|offset| <= bin {spec.resolution:.4f}); Omega_bar = {omega_bar:.10f}")


def test_c06b_dominant_high_frequency_peak(fig3_run, criterion):
    sc, traj, _ = fig3_run
    omega_bar = mean_ro_frequency_rwa(sc.params)
    spec = spectrum_at(traj, "current", 90)
    top = _high_frequency_peaks(spec, sc.params.omega0)[0]
    ok = abs(top.omega_peak - omega_bar) <= spec.resolution
    criterion("6b", ok, f"dominant high-frequency peak at {top.omega_peak:.4f}, "
                        f"Omega_bar = {omega_bar:.4f} (tolerance {spec.resolution:.4f})")


def test_c07_spectral_separation(criterion):
    sc = load_scenario("fig5")
    traj = evolve(make_initial_state(sc.params, sc.packet), sc.params, sc.integration)
    spec = spectrum_at(traj, "current", 90)
    p = sc.params
    low = [q for q in find_peaks(spec) if q.omega_peak < p.omega0 / 2]
    high = _high_frequency_peaks(spec, p.omega0)
    labelled = label_peaks(high, p.omega0, p.bloch, mean_ro_frequency_rwa(p), m_max=2, n_max=8,
                           tol=p.bloch / 4)
    unlabelled = [q.omega_peak for q in labelled if q.label is None or q.residual >= p.bloch / 4]
    ok = abs(low[0].omega_peak - p.bloch) <= spec.resolution and high and not unlabelled
    worst = max(q.residual for q in labelled)
    criterion("7", ok, f"dominant low-frequency peak {low[0].omega_peak:.4f} (wB {p.bloch}); "
                       f"{len(high)} high-frequency peaks, worst residual {worst:.4f} "
                       f"(< {p.bloch / 4}), unlabelled {unlabelled}")


@pytest.fixture(scope="module")
def fig13_traj():
    sc = load_scenario("fig13")
    return sc, evolve(make_initial_state(sc.params, sc.packet), sc.params, sc.integration)


@pytest.mark.parametrize("label,obs", [("8a", "dipole"), ("8b", "current")])
def test_c08_degenerate_comb(fig13_traj, criterion, label, obs):
    sc, traj = fig13_traj
    spec = spectrum_at(traj, obs, 60)
    targets = (sc.params.omega0 - 0.5, sc.params.omega0, sc.params.omega0 + 0.5)
    top = spec.magnitudes.max()
    found = {w: peak_near(spec, w) for w in targets}
    summary = {w: (None if f is None else (round(f.omega_peak, 4), f"{f.magnitude / top:.1e}"))
               for w, f in found.items()}
    criterion(label, all(found.values()),
              f"fig13 {obs} at site 60: (target: (position, relative height)) {summary}")


def test_c09_super_bloch_scaling(criterion):
    base = load_scenario("fig3").params
    deltas = (0.1, 0.05)
    window = 2 * math.pi / (min(deltas) * base.bloch)
    excursions = []
    for delta in deltas:
        p = resonant_params(base, 1, delta)
        t = np.linspace(0, window, 4000)
        excursions.append(np.ptp(super_bloch_position(t, p)))
    ratio = excursions[1] / excursions[0]
    criterion("9", 1.6 <= ratio <= 2.4,
              f"excursions {excursions[0]:.2f} -> {excursions[1]:.2f} sites, ratio {ratio:.3f} in [1.6, 2.4]")


@pytest.mark.parametrize("name", ["fig18", "fig20"])
def test_c10_stark_lines(criterion, name):
    sc = load_scenario(name)
    traj = evolve(make_initial_state(sc.params, sc.packet), sc.params, sc.integration)
    spec = spectrum_at(traj, "current", sc.spectrum.sites[0])
    targets = (sc.params.rabi, 2 * sc.params.rabi)
    found = {w: peak_near(spec, w) for w in targets}
    strongest = [round(p.omega_peak, 4) for p in find_peaks(spec)[:4]]
    criterion(f"10 ({name})", all(found.values()),
              f"peaks near wR, 2wR: {[(w, f is not None) for w, f in found.items()]}; "
              f"strongest lines {strongest} (wB = {sc.params.bloch})")


def test_c11a_unitarity(criterion):
    worst = 0.0
    for name in preset_names():
        p = load_scenario(name).params
        for phi in np.linspace(-math.pi, math.pi, 32, endpoint=False):
            m = monodromy(phi, p)
            worst = max(worst, np.linalg.norm(m.conj().T @ m - np.eye(2)))
    criterion("11a", worst < 1e-10, f"max monodromy unitarity defect over presets {worst:.2e} (< 1e-10)")


def test_c11b_uncoupled_closed_form(criterion):
    p = ChainParams(rabi=0.0, t_a=0.4, t_b=0.04)
    worst = 0.0
    for phi in np.linspace(-3.0, 3.0, 13):
        q = quasi_energies(phi, p)
        exact = sorted(fold(np.array([0.5 + 2 * p.t_a * math.cos(phi),
                                      -0.5 + 2 * p.t_b * math.cos(phi)]), 1.0))
        worst = max(worst, np.max(abs(np.array(sorted([q.nu1, q.nu2])) - exact)))
    criterion("11b", worst < 1e-8, f"Omega_R = 0 quasi-energies vs closed form {worst:.2e} (< 1e-8)")


def test_c11c_weak_coupling(criterion):
    p = ChainParams(rabi=0.05, t_a=0.02, t_b=0.02)
    f, r = mean_ro_frequency_floquet(p), mean_ro_frequency_rwa(p)
    rel = abs(f - r) / r
    criterion("11c", rel <= 0.05, f"weak coupling Omega_bar floquet {f:.6f} vs rwa {r:.6f}, "
                                  f"relative difference {rel:.2e} (<= 5%)")


def _csv_digests(directory):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(directory.glob("*.csv"))}


def test_c12a_runs_are_byte_identical(tmp_path, criterion):
    differing = []
    for name in preset_names():
        sc = load_scenario(name)
        run(sc, tmp_path / name / "a")
        run(sc, tmp_path / name / "b")
        if _csv_digests(tmp_path / name / "a") != _csv_digests(tmp_path / name / "b"):
            differing.append(name)
    criterion("12a", not differing, f"repeat runs of all {len(preset_names())} presets, "
                                    f"differing CSVs: {differing}")


def test_c12b_sweep_parallelism(tmp_path, criterion):
    axes = [("drive.rabi", [0.5, 0.6])]
    sweep("fig13", axes, tmp_path / "serial", jobs=1)
    index = sweep("fig13", axes, tmp_path / "parallel", jobs=2)
    same = all(_csv_digests(tmp_path / "serial" / c["dir"]) == _csv_digests(tmp_path / "parallel" / c["dir"])
               for c in index["cells"])
    codes = [c["exit_code"] for c in index["cells"]]
    criterion("12b", same and codes == [0, 0], f"sweep jobs=1 vs jobs=2 identical: {same}, exit codes {codes}")
