"""Entanglement dynamics of a mobile spin scattered by static spins on a 1D wire."""

__version__ = "0.1.0"

from .spin import CouplingSpec, SpinSpace, coupling_matrix, spin_operators  # noqa: E402
from .scattering import ScatteringSolution, closed_form_single, solve_channels  # noqa: E402
from .wavepacket import GaussianPacket, InitialState, QuadratureSpec, SpinorField, evolve  # noqa: E402
from .entanglement import (EntanglementCurve, logarithmic_negativity, reduced_spin_state,  # noqa: E402
                           rise_time, static_benchmark)

__all__ = [
    "CouplingSpec", "SpinSpace", "coupling_matrix", "spin_operators",
    "ScatteringSolution", "closed_form_single", "solve_channels",
    "GaussianPacket", "InitialState", "QuadratureSpec", "SpinorField", "evolve",
    "EntanglementCurve", "logarithmic_negativity", "reduced_spin_state", "rise_time", "static_benchmark",
]
