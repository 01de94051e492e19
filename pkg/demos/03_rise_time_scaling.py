"""The rise time of entanglement is set by the packet, not by the coupling.

A packet of momentum spread dk crosses the scatterer in about 1/(v dk), and
the 10%-90% rise of E_N follows: ten times narrower in k, ten times slower.
"""
from spinscatter.entanglement import rise_time
from spinscatter.scenarios import ScenarioConfig, loglog_slope, run_scenario

dks, rises = [], []
for dk in (1e-4, 1e-3, 1e-2):
    res = run_scenario(ScenarioConfig(name=f"dk{dk:g}", dk=dk))
    t = rise_time(res.curve)
    dks.append(dk)
    rises.append(t)
    print(f"dk/k0 = {dk:7.0e}   steady E_N = {res.curve.steady_value():.5f}   rise time = {t:10.1f}"
          f"   rise time x v dk = {t * dk:.3f}")
print(f"log-log slope: {loglog_slope(dks, rises):.4f}")
