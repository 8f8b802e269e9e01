"""Beyond the rotating-wave limit: Floquet quasi-energies and the line comb.

In the ultrastrong regime the drive is not small compared with the level
spacing, and the Rabi frequency has to be read off the Floquet splitting of
the two-band reduced problem.  The predicted spectrum is the comb
m*w0 + n*wB + p*omega_bar.
"""
from rabibloch.floquet import (mean_ro_frequency_floquet, predicted_lines, quasi_energies)
from rabibloch.analytics import mean_ro_frequency_rwa
from rabibloch.scenarios import load_scenario

params = load_scenario("fig11").params
print(f"rabi {params.rabi}, bloch {params.bloch}, t_a = t_b = {params.t_a}")

for phi in (0.0, 1.0, 2.0):
    q = quasi_energies(phi, params)
    print(f"phi {phi:.1f}: lab frame ({q.nu1:+.5f}, {q.nu2:+.5f}), splitting {q.splitting:.5f}")

floq = mean_ro_frequency_floquet(params)
print(f"omega_bar: Floquet {floq:.6f}, rotating-wave {mean_ro_frequency_rwa(params):.6f}")

print("first comb members below 2.5:")
for line in predicted_lines(params, floq, m_max=2, n_max=3):
    if line.freq <= 2.5:
        print(f"  {line.freq:8.5f}  (m={line.m:+d}, n={line.n:+d}, p={line.p:+d})")
