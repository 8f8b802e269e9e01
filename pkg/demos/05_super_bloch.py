"""Super-Bloch oscillations near a Rabi-Bloch resonance.

When the mean Rabi frequency nearly matches the Bloch frequency, the packet
drifts on a slow scale 2 pi / (delta wB).  Halving the detuning roughly doubles
the excursion.
"""
import numpy as np

from rabibloch import ChainParams
from rabibloch.analytics import resonant_params, super_bloch_position

base = ChainParams(rabi=0.8, t_a=0.4, t_b=0.04, mode="rwa")
deltas = (0.02, 0.01)
window = 2 * np.pi / (min(deltas) * resonant_params(base, 1, min(deltas)).bloch)
t = np.linspace(0, window, 20001)

amps = []
for delta in deltas:
    p = resonant_params(base, 1, delta)
    x = super_bloch_position(t, p)
    amps.append(np.ptp(x))
    print(f"delta {delta:.3f}: wB = {p.bloch:.5f}, excursion {np.ptp(x):8.2f} sites")
print(f"ratio {amps[1] / amps[0]:.3f}")
