"""Real-space lattice oracle for the spectral pipeline.

The same Hamiltonian is discretised on a uniform grid (second-difference
kinetic term, each delta contact as an on-site block ``K_j / h``) and stepped
with the Cayley form ``(1 + i H dt/2)^-1 (1 - i H dt/2)``, which is unitary to
round-off. Spin traces reuse :mod:`spinscatter.entanglement`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import splu

from .entanglement import EntanglementCurve, logarithmic_negativity, reduced_spin_state
from .spin import CouplingSpec, SpinSpace, coupling_matrices
from .wavepacket import GaussianPacket, InitialState, SpinorField, packet_position_amplitude

__all__ = [
    "LatticeConfig",
    "LatticeHamiltonian",
    "build_lattice",
    "reachable_subspace",
    "propagate",
    "lattice_initial_state",
    "oracle_entanglement_curve",
]


@dataclass(frozen=True)
class LatticeConfig:
    h: float
    x_min: float
    x_max: float
    dt: float

    @property
    def nodes(self) -> np.ndarray:
        n = int(round((self.x_max - self.x_min) / self.h)) + 1
        return self.x_min + self.h * np.arange(n)

    def check(self, k0: float) -> None:
        if k0 * self.h > 2 * np.pi / 40 * (1 + 1e-12):
            raise ValueError(f"k0 h = {k0 * self.h:.4f} exceeds 2 pi / 40: fewer than 40 points per wavelength")

    @classmethod
    def for_packet(cls, packet: GaussianPacket, positions: Sequence[float], t_end: float,
                   points_per_wavelength: int = 40, dt: float = 0.1, margin: float = 6.0) -> "LatticeConfig":
        """Grid that keeps the packet, and everything it scatters into, away from the walls.

        The spacing is rounded down so that every scatterer sits on a node.
        """
        h = 2 * np.pi / packet.k0 / points_per_wavelength
        span = positions[-1] - positions[0]
        if span > 0:
            h = span / np.ceil(span / h)
        w = float(packet.width(t_end))
        far = max(packet.x0 + margin * packet.dx, -packet.x0 + packet.velocity * t_end + margin * w)
        lo = -h * np.ceil(far / h)
        hi = positions[-1] + h * np.ceil(far / h)
        return cls(h=h, x_min=lo, x_max=hi, dt=dt)


@dataclass
class LatticeHamiltonian:
    matrix: sps.csr_matrix
    nodes: np.ndarray
    basis: np.ndarray       # columns span the spin subspace the lattice works in
    scatterer_nodes: np.ndarray

    @property
    def spin_dim(self) -> int:
        return self.basis.shape[1]

    def full_spinor(self, psi: np.ndarray) -> np.ndarray:
        """Map a flat lattice vector to ``(nodes, full spin dim)``."""
        return psi.reshape(len(self.nodes), self.spin_dim) @ self.basis.T


def reachable_subspace(ops: Iterable[np.ndarray], v0: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the smallest subspace containing ``v0`` and invariant under ``ops``."""
    ops = list(ops)
    basis = [v0 / np.linalg.norm(v0)]
    frontier = list(basis)
    while frontier:
        new = []
        for q in frontier:
            for op in ops:
                w = op @ q
                for b in basis:
                    w = w - (b.conj() @ w) * b
                nrm = np.linalg.norm(w)
                if nrm > tol:
                    w = w / nrm
                    basis.append(w)
                    new.append(w)
        frontier = new
    return np.stack(basis, axis=1)


def build_lattice(spec: CouplingSpec, space: SpinSpace, cfg: LatticeConfig,
                  basis: np.ndarray | None = None, mass: float = 1.0) -> LatticeHamiltonian:
    """Sparse lattice Hamiltonian; ``basis`` optionally restricts the spin space."""
    x = cfg.nodes
    h = cfg.h
    Ks = coupling_matrices(spec, space)
    V = np.eye(space.dim, dtype=complex) if basis is None else basis
    d = V.shape[1]
    n = len(x)
    lap = sps.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1])
    H = sps.kron(-lap / (2 * mass * h**2), sps.identity(d), format="csr").astype(complex)
    sites = []
    for xj, K in zip(spec.positions, Ks):
        if not x[0] < xj < x[-1]:
            raise ValueError(f"scatterer at {xj} lies outside the lattice domain")
        i = int(np.argmin(np.abs(x - xj)))
        sites.append(i)
        block = V.conj().T @ K @ V / h
        e = sps.csr_matrix(([1.0], ([i], [i])), shape=(n, n))
        H = H + sps.kron(e, sps.csr_matrix(block))
    return LatticeHamiltonian(H.tocsr(), x, V, np.array(sites))


def lattice_initial_state(init: InitialState, lat: LatticeHamiltonian, space: SpinSpace) -> np.ndarray:
    phi = packet_position_amplitude(init.packet, lat.nodes)
    spin = lat.basis.conj().T @ init.spin_vector(space)
    psi = np.outer(phi, spin).ravel()
    h = lat.nodes[1] - lat.nodes[0]
    return psi / np.sqrt(h * np.vdot(psi, psi).real)


def propagate(psi0: np.ndarray, H, dt: float, steps: int, every: int = 1) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(step, psi)`` at step 0 and every ``every`` steps of Cayley stepping."""
    H = H.matrix if isinstance(H, LatticeHamiltonian) else H
    n = H.shape[0]
    I = sps.identity(n, dtype=complex, format="csc")
    lu = splu((I + 0.5j * dt * H).tocsc())
    B = (I - 0.5j * dt * H).tocsr()
    psi = np.array(psi0, dtype=complex)
    yield 0, psi.copy()
    for s in range(1, steps + 1):
        psi = lu.solve(B @ psi)
        if not np.all(np.isfinite(psi[:: max(1, n // 64)])):
            raise FloatingPointError(f"lattice propagation diverged at step {s}")
        if s % every == 0:
            yield s, psi.copy()


def oracle_entanglement_curve(init: InitialState, spec: CouplingSpec, space: SpinSpace,
                              times: Sequence[float], keep: Iterable[int], transpose=None,
                              cfg: LatticeConfig | None = None, points_per_wavelength: int = 40,
                              max_dt: float = 0.1) -> EntanglementCurve:
    """Lattice counterpart of the spectral entanglement curve on a uniform time grid."""
    times = np.asarray(times, dtype=float)
    if len(times) > 2 and not np.allclose(np.diff(times), times[1] - times[0], rtol=1e-9, atol=0):
        raise ValueError("the lattice oracle needs a uniform time grid")
    p = init.packet
    spacing = times[1] - times[0] if len(times) > 1 else max_dt
    every = max(1, int(np.ceil(spacing / max_dt - 1e-9)))
    dt = spacing / every
    if cfg is None:
        cfg = LatticeConfig.for_packet(p, spec.positions, times[-1], points_per_wavelength, dt)
    else:
        every = max(1, int(round(spacing / cfg.dt)))
        dt = spacing / every
    cfg.check(p.k0)
    V = reachable_subspace(coupling_matrices(spec, space), init.spin_vector(space))
    lat = build_lattice(spec, space, cfg, V, p.mass)
    psi0 = lattice_initial_state(init, lat, space)
    steps = every * (len(times) - 1)
    vals, norms = [], []
    h = cfg.h
    for s, psi in propagate(psi0, lat, dt, steps, every):
        full = lat.full_spinor(psi)
        tau = times[s // every]
        fld = SpinorField(space, np.array([tau]), lat.nodes, full[None])
        vals.append(logarithmic_negativity(reduced_spin_state(fld, tau, keep), transpose))
        norms.append(h * np.vdot(psi, psi).real)
        edge = np.sum(np.abs(full[[0, -1]]) ** 2)
        if edge > 1e-8:
            raise RuntimeError(f"packet reached the lattice boundary at tau = {tau:.4g} (density {edge:.2e})")
    meta = {"engine": "lattice", "h": h, "dt": dt, "nodes": len(lat.nodes), "spin_dim": lat.spin_dim,
            "norm_drift": float(np.max(np.abs(np.array(norms) - 1)))}
    return EntanglementCurve(times.copy(), np.array(vals), meta)
