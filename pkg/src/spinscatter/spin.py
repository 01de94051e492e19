"""Spin operators, tensor-product embeddings and contact-coupling matrices.

Basis conventions used throughout the package:

* slot 0 is the mobile spin-1/2 particle ``e``, slots ``1..N`` are the static
  scatterers in order of increasing position;
* inside a slot the basis runs over ``m = s, s-1, ..., -s`` (descending);
* the full basis is the Kronecker product of the slots, slot 0 outermost.

The mobile spin enters every coupling through its spin operator
``sigma_hat = pauli / 2``, so that a Heisenberg contact ``J sigma_hat . S``
between two spin-1/2 particles has eigenvalues ``J/4`` (triplet) and
``-3J/4`` (singlet).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

__all__ = [
    "SpinSpace",
    "CouplingSpec",
    "spin_operators",
    "spin_label",
    "tensor_embed",
    "coupling_matrix",
    "coupling_matrices",
    "total_sz",
    "singlet_triplet_projectors",
]


def _twice(s) -> int:
    """Return ``2s`` as an int, rejecting anything that is not a half-integer."""
    if isinstance(s, str):
        s = Fraction(s)
    twice = 2 * float(s)
    n = int(round(twice))
    if n < 0 or abs(twice - n) > 1e-9:
        raise ValueError(f"spin number must be a nonnegative half-integer, got {s!r}")
    return n


def spin_label(s) -> str:
    """Human readable spin number, e.g. ``1/2`` or ``1``."""
    n = _twice(s)
    return str(n // 2) if n % 2 == 0 else f"{n}/2"


def spin_operators(s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(S_x, S_y, S_z)`` for spin number ``s`` (hbar = 1).

    Built from the ladder operator
    ``<m+1|S_+|m> = sqrt(s(s+1) - m(m+1))`` in the descending-``m`` basis.
    """
    n = _twice(s)
    s = n / 2
    m = s - np.arange(n + 1)
    splus = np.zeros((n + 1, n + 1), dtype=complex)
    for i in range(1, n + 1):
        # |m_i> -> |m_i + 1> which sits one index higher up
        splus[i - 1, i] = np.sqrt(s * (s + 1) - m[i] * (m[i] + 1))
    sminus = splus.conj().T
    sx = (splus + sminus) / 2
    sy = (splus - sminus) / 2j
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


@dataclass(frozen=True)
class SpinSpace:
    """Spin Hilbert space of the mobile spin-1/2 plus ``N`` static spins."""

    scatterer_spins: tuple[float, ...]

    electron_spin = 0.5

    def __post_init__(self):
        spins = tuple(_twice(s) / 2 for s in self.scatterer_spins)
        if any(s < 0.5 for s in spins):
            raise ValueError("static spins must have s >= 1/2")
        object.__setattr__(self, "scatterer_spins", spins)

    @property
    def n_scatterers(self) -> int:
        return len(self.scatterer_spins)

    @property
    def slot_spins(self) -> tuple[float, ...]:
        return (self.electron_spin,) + self.scatterer_spins

    @property
    def local_dims(self) -> tuple[int, ...]:
        return tuple(_twice(s) + 1 for s in self.slot_spins)

    @property
    def dim(self) -> int:
        return int(np.prod(self.local_dims))

    def index(self, ms: Sequence[float]) -> int:
        """Basis index of the product state with quantum numbers ``ms``."""
        if len(ms) != len(self.slot_spins):
            raise ValueError(f"expected {len(self.slot_spins)} quantum numbers, got {len(ms)}")
        digits = []
        for m, s in zip(ms, self.slot_spins):
            d = s - float(Fraction(m) if isinstance(m, str) else m)
            i = int(round(d))
            if abs(d - i) > 1e-9 or not 0 <= i <= _twice(s):
                raise ValueError(f"m={m} is not a projection of spin {spin_label(s)}")
            digits.append(i)
        return int(np.ravel_multi_index(digits, self.local_dims))

    def quantum_numbers(self, index: int) -> tuple[float, ...]:
        digits = np.unravel_index(index, self.local_dims)
        return tuple(s - int(i) for s, i in zip(self.slot_spins, digits))

    def basis_state(self, ms: Sequence[float]) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(ms)] = 1.0
        return v

    def label(self, index: int) -> str:
        arrows = []
        for m, s in zip(self.quantum_numbers(index), self.slot_spins):
            if s == 0.5:
                arrows.append("u" if m > 0 else "d")
            else:
                arrows.append(f"{m:+g}")
        return "|" + ",".join(arrows) + ">"


def tensor_embed(op: np.ndarray, slot: int, space: SpinSpace) -> np.ndarray:
    """Embed a single-slot operator into the full spin space (identity elsewhere)."""
    dims = space.local_dims
    if not 0 <= slot < len(dims):
        raise IndexError(f"slot {slot} out of range for {len(dims)} slots")
    op = np.asarray(op)
    if op.shape != (dims[slot], dims[slot]):
        raise ValueError(f"operator shape {op.shape} does not match slot dimension {dims[slot]}")
    factors = [op if i == slot else np.eye(d) for i, d in enumerate(dims)]
    return reduce(np.kron, factors)


def total_sz(space: SpinSpace) -> np.ndarray:
    return sum(tensor_embed(spin_operators(s)[2], i, space) for i, s in enumerate(space.slot_spins))


_MODELS = ("heisenberg", "xyz")


@dataclass(frozen=True)
class CouplingSpec:
    """Contact couplings between the mobile spin and each static spin.

    ``strengths`` holds one entry per scatterer: a scalar ``J`` for the
    Heisenberg model or a triple ``(Jx, Jy, Jz)`` for the XYZ model. Couplings
    carry units of velocity (frequency x length); positions must start at 0
    and increase strictly.
    """

    model: str
    strengths: tuple
    positions: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        model = self.model.lower()
        if model not in _MODELS:
            raise ValueError(f"unknown coupling model {self.model!r}; expected one of {_MODELS}")
        object.__setattr__(self, "model", model)
        pos = tuple(float(x) for x in self.positions)
        if len(pos) == 0 or abs(pos[0]) > 0:
            raise ValueError("the first scatterer must sit at x = 0")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("scatterer positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)
        if model == "heisenberg":
            st = tuple(float(j) for j in self.strengths)
        else:
            st = tuple(tuple(float(c) for c in j) for j in self.strengths)
            if any(len(j) != 3 for j in st):
                raise ValueError("XYZ strengths must be (Jx, Jy, Jz) triples")
        if len(st) != len(pos):
            raise ValueError(f"{len(st)} coupling strengths for {len(pos)} scatterers")
        object.__setattr__(self, "strengths", st)

    @classmethod
    def heisenberg(cls, J, positions=(0.0,)):
        J = np.broadcast_to(np.atleast_1d(J), (len(positions),))
        return cls("heisenberg", tuple(J), tuple(positions))

    @classmethod
    def xyz(cls, jx, jy, jz, positions=(0.0,)):
        return cls("xyz", tuple((jx, jy, jz) for _ in positions), tuple(positions))

    @property
    def n_scatterers(self) -> int:
        return len(self.positions)

    def components(self, j: int) -> tuple[float, float, float]:
        c = self.strengths[j]
        return (c, c, c) if self.model == "heisenberg" else c

    def as_xyz(self) -> "CouplingSpec":
        return CouplingSpec("xyz", tuple(self.components(j) for j in range(self.n_scatterers)), self.positions)

    def scaled(self, factor: float) -> "CouplingSpec":
        if self.model == "heisenberg":
            st = tuple(factor * j for j in self.strengths)
        else:
            st = tuple(tuple(factor * c for c in j) for j in self.strengths)
        return CouplingSpec(self.model, st, self.positions)


def coupling_matrix(spec: CouplingSpec, scatterer: int, space: SpinSpace) -> np.ndarray:
    """``sum_l J_l sigma_hat_l S_{j,l}`` for scatterer ``j``, embedded in the full space."""
    if not 0 <= scatterer < spec.n_scatterers:
        raise IndexError(f"scatterer {scatterer} out of range")
    if space.n_scatterers != spec.n_scatterers:
        raise ValueError("spin space and coupling spec disagree on the number of scatterers")
    se = spin_operators(0.5)
    sj = spin_operators(space.scatterer_spins[scatterer])
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for J, a, b in zip(spec.components(scatterer), se, sj):
        if J != 0.0:
            out += J * tensor_embed(a, 0, space) @ tensor_embed(b, scatterer + 1, space)
    return out


def coupling_matrices(spec: CouplingSpec, space: SpinSpace) -> list[np.ndarray]:
    return [coupling_matrix(spec, j, space) for j in range(spec.n_scatterers)]


def singlet_triplet_projectors() -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto ``|Psi+>`` and ``|Psi->`` on the (e, 1) two-qubit space."""
    psi_p = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    psi_m = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return np.outer(psi_p, psi_p.conj()), np.outer(psi_m, psi_m.conj())
