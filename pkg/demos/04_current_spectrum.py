"""From a simulated current to labelled spectral lines.

Runs a shortened strong-coupling scenario, takes the tunneling current at one
site, and labels the strongest peaks against the comb.
"""
from rabibloch.observables import extract_series
from rabibloch.runner import resolve_omega_bar, simulate
from rabibloch.scenarios import load_scenario
from rabibloch.spectra import default_label_tol, find_peaks, label_peaks, power_spectrum

scenario = load_scenario("fig3", {"integrate.t_end": 1600.0})
params = scenario.params
traj = simulate(scenario)
series = extract_series(traj, "current", site=90)

spec = power_spectrum(series, window="hann", zero_pad_factor=4)
omega_bar, source = resolve_omega_bar(params, "rwa")
tol = default_label_tol(spec, params.bloch)
lines = label_peaks(find_peaks(spec, 0.05), params.omega0, params.bloch, omega_bar, tol=tol)

print(f"{spec.n_samples} samples, resolution {spec.resolution:.4f}, omega_bar {omega_bar:.4f} ({source})")
print("  omega     magnitude  label")
for line in lines[:12]:
    label = "-" if line.label is None else "m=%+d n=%+d p=%+d" % line.label
    print(f"{line.omega_peak:8.4f}  {line.magnitude:10.3e}  {label}")
