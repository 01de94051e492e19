"""Stronger coupling changes how much entanglement builds up, not how fast.

Curves for J/v = 1, 3, 10 land on one shape once divided by their steady
values. The frozen-amplitude overlap Sigma(tau) gives the same curve from two
error functions.
"""

from spinscatter.entanglement import rescale_to_max, sigma_entanglement, sup_distance
from spinscatter.scenarios import ScenarioConfig, run_scenario

curves = {}
for J in (1.0, 3.0, 10.0):
    res = run_scenario(ScenarioConfig(name=f"J{J:g}", couplings=(J,)))
    curves[J] = res.curve
    sig = sigma_entanglement(J, res.config.packet(), res.curve.times)
    print(f"J/v = {J:4.1f}   steady E_N = {res.curve.steady_value():.4f}   "
          f"|pipeline - Sigma| max = {sup_distance(res.curve, sig):.2e}")

base = rescale_to_max(curves[1.0])
for J in (3.0, 10.0):
    print(f"rescaled J=1 vs J={J:g}: sup distance {sup_distance(base, rescale_to_max(curves[J])):.4f}")

t = curves[1.0].times
print("\n   tau     J=1    J=3    J=10   (rescaled)")
for i in range(60, 120, 6):
    print(f"{t[i]:7.0f}  " + "  ".join(f"{rescale_to_max(curves[J]).values[i]:.3f}" for J in curves))
