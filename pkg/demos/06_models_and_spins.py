"""Other spins and other interaction models.

Once amplitudes are frozen, the spin state at time tau is the mixture
(1 - P) rho_0 + P rho_inf, where P is the fraction of the packet that has
already passed. The negativity of that mixture is a fixed function of P
for each model. It grows like P^2 whenever rho_inf has no |up,up> weight
(Heisenberg, XXZ, isotropic XY). The anisotropic XY contact flips both
pair spins together, and then it grows like P. The rescaled curves of the
first group collapse onto each other, but the anisotropic one does not.
"""
import numpy as np
from scipy.special import ndtr

from spinscatter.entanglement import reduced_spin_state, rescale_to_max, sup_distance
from spinscatter.scenarios import MODEL_LIBRARY, ScenarioConfig, run_scenario
from spinscatter.wavepacket import free_density_moments

members = {
    "equal 1/2": ScenarioConfig(name="equal", spins=(0.5, 0.5)),
    "unequal 2.6/1.3": ScenarioConfig(name="unequal", spins=(0.5, 0.5), couplings=(2.6, 1.3)),
    "spin 1": ScenarioConfig(name="spin1", spins=(1.0, 1.0)),
}
for label in ("xxz", "xy", "xy-aniso"):
    model, ratios, J = MODEL_LIBRARY[label]
    members[label] = ScenarioConfig(name=label, spins=(0.5, 0.5), model=model, ratios=ratios, couplings=(J,))

runs = {k: run_scenario(c, keep_field=True) for k, c in members.items()}
for k, r in runs.items():
    rho = reduced_spin_state(r.field_, r.curve.times[-1], (1, 2)).matrix
    print(f"{k:16s} steady E_N = {r.curve.steady_value():.4f}   final pair populations "
          + " ".join(f"{p:.3f}" for p in np.diag(rho).real))

ref = rescale_to_max(runs["equal 1/2"].curve)
for k, r in runs.items():
    print(f"rescaled distance to 'equal 1/2': {k:16s} {sup_distance(ref, rescale_to_max(r.curve)):.4f}")

p = members["equal 1/2"].packet()
mean, std = free_density_moments(p, ref.times)
P = ndtr(mean / std)
print("\n   P    equal   xy-aniso   (rescaled E_N against the passed fraction)")
for i in range(0, len(P), 8):
    if 0.02 < P[i] < 0.98:
        print(f"{P[i]:.2f}   {ref.values[i]:.3f}   {rescale_to_max(runs['xy-aniso'].curve).values[i]:.3f}")
