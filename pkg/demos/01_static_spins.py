"""Two static spins under a fixed exchange coupling.

Without motion the entanglement just oscillates: E_N = log2(1 + |sin J tau|).
This is the reference the scattering results are contrasted with.
"""
import numpy as np

from spinscatter.entanglement import DensityMatrix, logarithmic_negativity, static_benchmark, static_state

J = 1.0
for tau in np.linspace(0, np.pi, 9):
    psi = static_state(J, tau)
    e = logarithmic_negativity(DensityMatrix(np.outer(psi, psi.conj()), (2, 2), (0, 1)))
    print(f"J tau = {J * tau:5.3f}   E_N = {e:.6f}   closed form = {float(static_benchmark(J, tau)):.6f}")
