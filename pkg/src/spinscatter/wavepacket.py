"""Gaussian wavepackets and their evolution through the scattering eigenbasis.

The mobile particle starts as a Gaussian packet centred at ``-x0`` with
carrier ``k0``; its state is expanded over the stationary scattering states
and propagated with the free spectrum ``eps_k = k^2 / 2m``:

    psi(x, nu, tau) = sum_{mu, eta} int dk  c^mu_eta(k) exp(-i eps_k tau) Psi^mu_{k,eta}(x, nu)

The k-integral is done by Gauss-Legendre quadrature on
``[k0 - W dk, k0 + W dk]``. Inside every region between scatterers the field
is then a finite sum of plane waves, which is what :class:`SpectralExpansion`
stores. Spatial traces over the half-lines use the slowly varying envelopes
for co-propagating products and closed-form x-integrals for the
counter-propagating ones, so their cost does not grow with ``1/dk``.

Fourier convention: ``phi~(k) = (2 pi)^(-1/2) int phi(x) exp(-ikx) dx``.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .scattering import ScatteringSolution, solve_channels
from .spin import CouplingSpec, SpinSpace, coupling_matrices

__all__ = [
    "GaussianPacket",
    "InitialState",
    "QuadratureSpec",
    "SpectralExpansion",
    "SpinorField",
    "packet_position_amplitude",
    "packet_momentum_amplitude",
    "free_propagate",
    "free_density_moments",
    "projection_coefficients",
    "build_expansion",
    "evolve",
    "default_time_grid",
    "default_mesh",
]

MODES = ("quasi-mono", "exact")


@dataclass(frozen=True)
class GaussianPacket:
    """``phi(x) = (2 pi beta)^(-1/4) exp(i k0 (x + x0)) exp(-(x + x0)^2 / 4 beta)``.

    ``dx = 1/dk = sqrt(2 beta)`` are the 1/e half-widths of the position and
    momentum densities.
    """

    x0: float
    k0: float
    beta: float
    mass: float = 1.0

    def __post_init__(self):
        if not (self.k0 > 0 and self.beta > 0 and self.mass > 0):
            raise ValueError("k0, beta and mass must be positive")

    @classmethod
    def from_ratios(cls, dk_over_k0: float, x0_over_dx: float = 5.0, k0: float = 1.0, mass: float = 1.0):
        dk = dk_over_k0 * k0
        beta = 1.0 / (2.0 * dk**2)
        return cls(x0=x0_over_dx / dk, k0=k0, beta=beta, mass=mass)

    @property
    def dx(self) -> float:
        return float(np.sqrt(2.0 * self.beta))

    @property
    def dk(self) -> float:
        return float(1.0 / np.sqrt(2.0 * self.beta))

    @property
    def velocity(self) -> float:
        return self.k0 / self.mass

    def width(self, tau) -> np.ndarray:
        """1/e half-width of the freely spread position density at time ``tau``."""
        return self.dx * np.sqrt(1.0 + (np.asarray(tau) / (2.0 * self.mass * self.beta)) ** 2)


def packet_position_amplitude(p: GaussianPacket, x):
    y = np.asarray(x, dtype=float) + p.x0
    return (2 * np.pi * p.beta) ** -0.25 * np.exp(1j * p.k0 * y - y**2 / (4 * p.beta))


def packet_momentum_amplitude(p: GaussianPacket, k):
    k = np.asarray(k, dtype=float)
    return (2 * p.beta / np.pi) ** 0.25 * np.exp(1j * k * p.x0 - p.beta * (k - p.k0) ** 2)


def free_propagate(p: GaussianPacket, x, tau):
    """Closed-form free evolution of the packet under ``eps_k = k^2/2m``."""
    y = np.asarray(x, dtype=float) + p.x0
    tau = np.asarray(tau, dtype=float)
    b = p.beta + 1j * tau / (2 * p.mass)
    pref = (2 * p.beta / np.pi) ** 0.25 * np.sqrt(np.pi / b) / np.sqrt(2 * np.pi)
    phase = 1j * p.k0 * y - 1j * p.k0**2 * tau / (2 * p.mass)
    return pref * np.exp(phase - (y - p.velocity * tau) ** 2 / (4 * b))


def free_density_moments(p: GaussianPacket, tau):
    """Mean and standard deviation of the free position density at ``tau``."""
    tau = np.asarray(tau, dtype=float)
    mean = -p.x0 + p.velocity * tau
    std = np.sqrt(p.beta * (1.0 + (tau / (2 * p.mass * p.beta)) ** 2))
    return mean, std


@dataclass(frozen=True)
class InitialState:
    """Packet times a product spin state given by its quantum numbers ``(m_e, m_1, ...)``."""

    packet: GaussianPacket
    spin_config: tuple
    allow_overlap: bool = False

    def __post_init__(self):
        object.__setattr__(self, "spin_config", tuple(self.spin_config))
        if self.packet.x0 < 3 * self.packet.dx:
            msg = (f"x0 = {self.packet.x0 / self.packet.dx:.2f} dx < 3 dx: the packet overlaps the "
                   "scattering region and the projection onto stationary states is inaccurate")
            if not self.allow_overlap:
                raise ValueError(msg + " (pass allow_overlap=True to override)")
            warnings.warn(msg, RuntimeWarning, stacklevel=2)

    def spin_vector(self, space: SpinSpace) -> np.ndarray:
        return space.basis_state(self.spin_config)


@dataclass(frozen=True)
class QuadratureSpec:
    nodes: int = 257
    window: float = 6.0

    def rule(self, packet: GaussianPacket) -> tuple[np.ndarray, np.ndarray]:
        lo = packet.k0 - self.window * packet.dk
        hi = packet.k0 + self.window * packet.dk
        if lo <= 0:
            raise ValueError(f"quadrature window reaches k <= 0 (k0 - {self.window} dk = {lo:.3g})")
        t, w = np.polynomial.legendre.leggauss(self.nodes)
        half = 0.5 * (hi - lo)
        return 0.5 * (hi + lo) + half * t, half * w


def projection_coefficients(init: InitialState, space: SpinSpace, sol_plus: ScatteringSolution,
                            sol_minus: ScatteringSolution | None = None, mode: str = "quasi-mono") -> np.ndarray:
    """Overlaps ``<Psi^mu_{k,eta}|Psi(0)>`` as an array indexed ``[eta_index, mu]``.

    Row 0 is ``eta = +1`` and row 1 is ``eta = -1``. ``quasi-mono`` keeps only
    the direct term ``delta_{eta,+} delta_{mu,mubar} phi~(k)``; ``exact`` adds the
    ``r*`` and ``t*`` terms multiplying ``phi~(-k)``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    k = sol_plus.k
    mubar = space.index(init.spin_config)
    out = np.zeros((2, space.dim), dtype=complex)
    out[0, mubar] = packet_momentum_amplitude(init.packet, k)
    if mode == "exact":
        if sol_minus is None:
            raise ValueError("exact mode needs the eta = -1 solution as well")
        back = packet_momentum_amplitude(init.packet, -k)
        out[0] += np.conj(sol_plus.r[mubar, :]) * back
        out[1] += np.conj(sol_minus.t[mubar, :]) * back
    return out


@lru_cache(maxsize=8)
def _legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _interval_integral(q, lo, hi):
    """``int_lo^hi exp(iqx) dx`` for finite bounds, smooth through q = 0."""
    L = hi - lo
    return np.exp(0.5j * q * (lo + hi)) * L * np.sinc(q * L / (2 * np.pi))


@dataclass(frozen=True)
class SpectralExpansion:
    """Plane-wave content of the evolved state, region by region.

    ``forward[a, j, nu]`` (``backward``) multiplies ``exp(+i k_a x)``
    (``exp(-i k_a x)``) in region ``j`` at ``tau = 0``; quadrature weights and
    the ``1/sqrt(2 pi)`` normalisation are already folded in.
    """

    k: np.ndarray
    forward: np.ndarray
    backward: np.ndarray
    positions: np.ndarray
    packet: GaussianPacket
    envelope_points: int = 384
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.forward.shape[2]

    @property
    def energies(self) -> np.ndarray:
        return self.k**2 / (2 * self.packet.mass)

    def phases(self, tau: float) -> np.ndarray:
        return np.exp(-1j * self.energies * tau)

    def region_of(self, x) -> np.ndarray:
        return np.searchsorted(self.positions, np.asarray(x, dtype=float), side="left")

    def field(self, x, tau: float, chunk: int = 4096) -> np.ndarray:
        """Spinor components at positions ``x``, shape ``(len(x), dim)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        ph = self.phases(tau)
        out = np.empty((x.size, self.dim), dtype=complex)
        reg_all = self.region_of(x)
        for s in range(0, x.size, chunk):
            xs, reg = x[s:s + chunk], reg_all[s:s + chunk]
            E = np.exp(1j * np.outer(xs, self.k)) * ph
            Ec = np.exp(-1j * np.outer(xs, self.k)) * ph
            part = out[s:s + chunk]
            for j in np.unique(reg):
                m = reg == j
                part[m] = E[m] @ self.forward[:, j, :] + Ec[m] @ self.backward[:, j, :]
        return out

    @cached_property
    def _kernels(self):
        k = self.k
        qd = k[:, None] - k[None, :]
        qs = k[:, None] + k[None, :]
        pos = self.positions
        ker = {}
        for j in range(1, len(pos)):
            lo, hi = pos[j - 1], pos[j]
            ker[j] = (_interval_integral(qd, lo, hi), _interval_integral(-qd, lo, hi),
                      _interval_integral(qs, lo, hi), _interval_integral(-qs, lo, hi))
        # counter-propagating products on the half-lines; k_a + k_b > 0 keeps these regular
        ker["left"] = (np.exp(1j * qs * pos[0]) / (1j * qs), np.exp(-1j * qs * pos[0]) / (-1j * qs))
        ker["right"] = (-np.exp(1j * qs * pos[-1]) / (1j * qs), -np.exp(-1j * qs * pos[-1]) / (-1j * qs))
        return ker

    def _envelope_block(self, coeff, sign, lo, hi, centre, halfwidth):
        """``int_lo^hi F F^dagger`` with ``F = sum_a coeff_a exp(sign i (k_a - k0) x)``."""
        a, b = max(lo, centre - halfwidth), min(hi, centre + halfwidth)
        if not b > a or not np.any(coeff):
            return 0.0
        t, w = _legendre(self.envelope_points)
        xs = 0.5 * (a + b) + 0.5 * (b - a) * t
        F = np.exp(sign * 1j * np.outer(xs, self.k - self.packet.k0)) @ coeff
        w = 0.5 * (b - a) * w
        return F.T @ (w[:, None] * F.conj())

    def region_matrix(self, tau: float, j: int) -> np.ndarray:
        """``int_{region j} psi(x) psi(x)^dagger dx`` as a ``dim x dim`` matrix."""
        ph = self.phases(tau)[:, None]
        al = self.forward[:, j, :] * ph
        be = self.backward[:, j, :] * ph
        N = len(self.positions)
        if 0 < j < N:
            Id, Idm, Is, Ism = self._kernels[j]
            return (al.T @ Id @ al.conj() + be.T @ Idm @ be.conj()
                    + al.T @ Is @ be.conj() + be.T @ Ism @ al.conj())
        p = self.packet
        lo, hi = (-np.inf, self.positions[0]) if j == 0 else (self.positions[-1], np.inf)
        Hs, Hsm = self._kernels["left" if j == 0 else "right"]
        rho = al.T @ Hs @ be.conj() + be.T @ Hsm @ al.conj()
        centre = -p.x0 + p.velocity * tau
        span = self.positions[-1] - self.positions[0]
        hw = 9.0 * float(p.width(tau)) + 10.0 * span + 200.0 / p.k0
        rho = rho + self._envelope_block(al, +1, lo, hi, centre, hw)
        rho = rho + self._envelope_block(be, -1, lo, hi, -centre, hw)
        return rho

    def spin_density(self, tau: float) -> np.ndarray:
        """Full spin density matrix with the position of ``e`` traced out."""
        key = float(tau)
        if key not in self._cache:
            rho = sum(self.region_matrix(tau, j) for j in range(len(self.positions) + 1))
            self._cache[key] = 0.5 * (rho + rho.conj().T)
        return self._cache[key]


def build_expansion(init: InitialState, spec: CouplingSpec, space: SpinSpace,
                    quadrature: QuadratureSpec | None = None, mode: str = "quasi-mono") -> SpectralExpansion:
    quadrature = quadrature or QuadratureSpec()
    p = init.packet
    ks, ws = quadrature.rule(p)
    Ks = coupling_matrices(spec, space)
    R = spec.n_scatterers + 1
    fwd = np.zeros((ks.size, R, space.dim), dtype=complex)
    bwd = np.zeros_like(fwd)
    for a, (k, w) in enumerate(zip(ks, ws)):
        sp = solve_channels(spec, space, k, +1, mass=p.mass, couplings=Ks)
        sm = solve_channels(spec, space, k, -1, mass=p.mass, couplings=Ks) if mode == "exact" else None
        c = projection_coefficients(init, space, sp, sm, mode) * (w / np.sqrt(2 * np.pi))
        fwd[a] = sp.forward @ c[0]
        bwd[a] = sp.backward @ c[0]
        if sm is not None:
            fwd[a] += sm.forward @ c[1]
            bwd[a] += sm.backward @ c[1]
    return SpectralExpansion(k=ks, forward=fwd, backward=bwd,
                             positions=np.asarray(spec.positions, dtype=float), packet=p)


@dataclass
class SpinorField:
    """Time-dependent spinor wavefunction of the mobile particle.

    ``values[i, m, nu]`` samples ``psi(mesh[m], nu, times[i])`` when a mesh was
    requested. Fields from the spectral engine also carry their
    :class:`SpectralExpansion`, which traces use instead of the mesh.
    """

    space: SpinSpace
    times: np.ndarray
    mesh: np.ndarray | None = None
    values: np.ndarray | None = None
    expansion: SpectralExpansion | None = None
    norms: np.ndarray | None = None
    flags: list = field(default_factory=list)

    def time_index(self, tau: float) -> int:
        i = int(np.argmin(np.abs(self.times - tau)))
        scale = max(1.0, float(np.max(np.abs(self.times))))
        if abs(self.times[i] - tau) > 1e-9 * scale:
            raise KeyError(f"tau = {tau} is not on the field's time grid")
        return i

    def write_csv(self, path) -> Path:
        if self.values is None:
            raise ValueError("field has no mesh samples to export")
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("tau", "x", "spin_index", "re_psi", "im_psi"))
            for i, tau in enumerate(self.times):
                for m, x in enumerate(self.mesh):
                    for nu in range(self.space.dim):
                        v = self.values[i, m, nu]
                        w.writerow((repr(float(tau)), repr(float(x)), nu, repr(float(v.real)), repr(float(v.imag))))
        return path

    def write_density_csv(self, path, times: Sequence[float] | None = None, mesh=None) -> Path:
        """``(tau, x, f_e)`` rows; spectral fields may be sampled on any mesh."""
        path = Path(path)
        times = self.times if times is None else np.asarray(times)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("tau", "x", "f_e"))
            for tau in times:
                if mesh is not None and self.expansion is not None:
                    xs = np.asarray(mesh)
                    f = np.sum(np.abs(self.expansion.field(xs, tau)) ** 2, axis=1)
                else:
                    i = self.time_index(tau)
                    xs = self.mesh
                    f = np.sum(np.abs(self.values[i]) ** 2, axis=1)
                for x, fe in zip(xs, f):
                    w.writerow((repr(float(tau)), repr(float(x)), repr(float(fe))))
        return path


def default_time_grid(packet: GaussianPacket, d: float = 0.0, n: int = 200) -> np.ndarray:
    """``n`` samples on ``[0, 3 (x0 + d)/v + 3/(v dk)]``."""
    v = packet.velocity
    return np.linspace(0.0, 3 * (packet.x0 + d) / v + 3.0 / (v * packet.dk), n)


def default_mesh(packet: GaussianPacket, positions: Sequence[float], times: Sequence[float],
                 points_per_wavelength: int = 20, margin: float = 8.0) -> np.ndarray:
    """Uniform mesh resolving the carrier that holds the packet at every time in ``times``."""
    tmax = float(np.max(times))
    far = max(packet.x0, -packet.x0 + packet.velocity * tmax)
    pad = margin * float(packet.width(tmax))
    lo = min(-packet.x0 - margin * packet.dx, -far - pad)
    hi = positions[-1] + far + pad
    h = 2 * np.pi / packet.k0 / points_per_wavelength
    return np.linspace(lo, hi, int(np.ceil((hi - lo) / h)) + 1)


def evolve(init: InitialState, spec: CouplingSpec, space: SpinSpace, times: Sequence[float],
           mesh=None, quadrature: QuadratureSpec | None = None, mode: str = "quasi-mono",
           norm_tolerance: float = 1e-3) -> SpinorField:
    """Evolve the initial state and return the spinor field on ``times``.

    ``mesh`` is optional: without it the field keeps only its spectral
    representation, which is all that spin traces need.
    """
    exp = build_expansion(init, spec, space, quadrature, mode)
    times = np.asarray(times, dtype=float)
    values = None
    if mesh is not None:
        mesh = np.asarray(mesh, dtype=float)
        values = np.stack([exp.field(mesh, t) for t in times])
    norms = np.array([np.trace(exp.spin_density(t)).real for t in times])
    flags = []
    drift = float(np.max(np.abs(norms - 1.0)))
    if drift > norm_tolerance:
        flags.append(f"norm drift {drift:.2e} exceeds {norm_tolerance:g}")
    return SpinorField(space=space, times=times, mesh=mesh, values=values,
                       expansion=exp, norms=norms, flags=flags)
