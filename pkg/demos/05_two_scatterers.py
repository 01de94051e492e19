"""Entangling two remote spins through a passing electron.

With spins at 0 and d (k0 d = pi) the steady entanglement of the pair does
not depend on dk as long as dk d << 1. The free transit probability over the
interval [0, d] marks when the entanglement forms.
"""
import numpy as np

from spinscatter.entanglement import interval_iou, rise_interval, threshold_interval
from spinscatter.scenarios import ScenarioConfig, run_scenario

for dk in (1e-4, 1e-3, 1e-2):
    res = run_scenario(ScenarioConfig(name="pair", spins=(0.5, 0.5), kd=np.pi, dk=dk))
    c = res.curve
    lo, hi = rise_interval(c)
    t_lo, t_hi = threshold_interval(c.times, res.transit, 0.1)
    print(f"dk/k0 = {dk:7.0e}  steady E_N(1,2) = {c.steady_value():.6f}  rise [{lo:9.0f}, {hi:9.0f}]  "
          f"transit [{t_lo:9.0f}, {t_hi:9.0f}]  IoU {interval_iou((lo, hi), (t_lo, t_hi)):.3f}")
