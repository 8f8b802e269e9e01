"""Rotating-wave picture: mode structure and the mean Rabi frequency.

For a fixed Bloch phase phi the RWA chain has two travelling-wave branches.
Their splitting Omega(phi) sets the local Rabi frequency, and the phase
average of Omega is the carrier that shows up in the current spectrum.
"""
import numpy as np
from scipy.special import ellipe

from rabibloch import ChainParams
from rabibloch.analytics import mean_ro_frequency_rwa, mode_info, rabi_frequency

params = ChainParams(rabi=0.8, bloch=0.04, t_a=0.4, t_b=0.04, mode="rwa")

print(" phi/pi   Omega     Lambda")
for phi in np.linspace(0, np.pi, 5):
    info = mode_info(phi, params)
    print(f"{phi / np.pi:6.2f}  {info.big_omega:8.5f}  {info.lam:8.5f}")

omega_bar = mean_ro_frequency_rwa(params)
# independent check with a complete elliptic integral
d = params.t_a - params.t_b
r2 = 4 * d**2 + params.rabi**2
oracle = 2 / np.pi * np.sqrt(r2) * ellipe(4 * d**2 / r2)
print(f"mean Rabi frequency {omega_bar:.10f}  (elliptic form {oracle:.10f})")
print(f"range of Omega: {rabi_frequency(0.5 * np.pi, params):.4f} .. {rabi_frequency(0.0, params):.4f}")
