"""Stationary scattering of the mobile spin off spin-carrying delta scatterers.

Between consecutive scatterers the spinor wavefunction is a superposition of
plane waves,

    psi(x, nu) = a_j[nu] exp(+ikx) + b_j[nu] exp(-ikx),   x_j < x < x_{j+1},

and at every scatterer the spinor is continuous while its derivative jumps by
``2 m K_j psi(x_j)`` with ``K_j`` the contact coupling matrix. For a given
wavevector and incidence direction all incoming channels are solved at once
as one dense linear system.

Units: hbar = m* = 1 unless ``mass`` is given, so ``v_k = k``.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .spin import CouplingSpec, SpinSpace, coupling_matrices

__all__ = [
    "ScatteringSolverError",
    "IllConditionedWarning",
    "ScatteringSolution",
    "ClosedFormAmplitudes",
    "solve_channels",
    "closed_form_single",
    "delta_amplitudes",
    "phase_differences",
    "stationary_wavefunction",
    "unitarity_defect",
    "write_amplitudes_csv",
]

COND_WARN = 1e8


class ScatteringSolverError(RuntimeError):
    """The boundary-condition system is singular to working precision."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition number {condition:.3e})")
        self.condition = condition


class IllConditionedWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ScatteringSolution:
    """Plane-wave coefficients of all stationary states at one ``(k, eta)``.

    ``forward[j, nu, mu]`` and ``backward[j, nu, mu]`` are the coefficients of
    ``exp(+ikx)`` and ``exp(-ikx)`` in region ``j`` (region 0 is left of the
    first scatterer) for the state that comes in on channel ``mu``.
    """

    k: float
    eta: int
    positions: np.ndarray
    forward: np.ndarray
    backward: np.ndarray
    condition: float = 1.0

    @property
    def dim(self) -> int:
        return self.forward.shape[1]

    @property
    def n_scatterers(self) -> int:
        return len(self.positions)

    @property
    def r(self) -> np.ndarray:
        """Reflection amplitudes ``r[nu, mu]``."""
        return self.backward[0] if self.eta > 0 else self.forward[-1]

    @property
    def t(self) -> np.ndarray:
        """Transmission amplitudes ``t[nu, mu]``."""
        return self.forward[-1] if self.eta > 0 else self.backward[0]

    @property
    def A(self) -> np.ndarray | None:
        """Coefficient of ``exp(i eta k x)`` between the first two scatterers."""
        if self.n_scatterers < 2:
            return None
        return self.forward[1] if self.eta > 0 else self.backward[1]

    @property
    def B(self) -> np.ndarray | None:
        """Coefficient of ``exp(-i eta k x)`` between the first two scatterers."""
        if self.n_scatterers < 2:
            return None
        return self.backward[1] if self.eta > 0 else self.forward[1]


def solve_channels(spec: CouplingSpec, space: SpinSpace, k: float, eta: int = 1,
                   mass: float = 1.0, couplings: list[np.ndarray] | None = None) -> ScatteringSolution:
    """Solve the boundary-value problem for every incoming spin channel.

    Parameters
    ----------
    spec, space : coupling model and spin Hilbert space
    k : wavevector, must be positive
    eta : +1 for incidence from the left, -1 from the right
    couplings : optional precomputed ``coupling_matrices(spec, space)``
    """
    if not k > 0:
        raise ValueError(f"wavevector must be positive, got {k}")
    if eta not in (1, -1):
        raise ValueError("eta must be +1 or -1")
    Ks = coupling_matrices(spec, space) if couplings is None else couplings
    pos = np.asarray(spec.positions, dtype=float)
    N = len(pos)
    D = space.dim
    n = 2 * D * (N + 1)
    I = np.eye(D)
    M = np.zeros((n, n), dtype=complex)
    rhs = np.zeros((n, D), dtype=complex)

    def a(j):
        return slice(2 * D * j, 2 * D * j + D)

    def b(j):
        return slice(2 * D * j + D, 2 * D * (j + 1))

    for j, (xj, K) in enumerate(zip(pos, Ks)):
        e, ec = np.exp(1j * k * xj), np.exp(-1j * k * xj)
        rows_c = slice(2 * D * j, 2 * D * j + D)
        rows_d = slice(2 * D * j + D, 2 * D * (j + 1))
        # continuity
        M[rows_c, a(j)] = e * I
        M[rows_c, b(j)] = ec * I
        M[rows_c, a(j + 1)] = -e * I
        M[rows_c, b(j + 1)] = -ec * I
        # derivative jump: psi'(x+) - psi'(x-) - 2 m K psi(x) = 0
        M[rows_d, a(j + 1)] = 1j * k * e * I - 2 * mass * e * K
        M[rows_d, b(j + 1)] = -1j * k * ec * I - 2 * mass * ec * K
        M[rows_d, a(j)] = -1j * k * e * I
        M[rows_d, b(j)] = 1j * k * ec * I

    rows_in, rows_out = slice(2 * D * N, 2 * D * N + D), slice(2 * D * N + D, n)
    if eta > 0:
        M[rows_in, a(0)] = I        # unit amplitude incoming from the left
        M[rows_out, b(N)] = I       # nothing incoming from the right
    else:
        M[rows_in, b(N)] = I
        M[rows_out, a(0)] = I
    rhs[rows_in] = I

    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > 1e14:
        raise ScatteringSolverError(f"singular boundary system at k={k}, eta={eta}", cond)
    if cond > COND_WARN:
        warnings.warn(f"boundary system at k={k} is ill-conditioned (cond={cond:.2e})",
                      IllConditionedWarning, stacklevel=2)
    sol = np.linalg.solve(M, rhs)
    coeffs = sol.reshape(N + 1, 2, D, D)
    return ScatteringSolution(k=float(k), eta=eta, positions=pos,
                              forward=coeffs[:, 0], backward=coeffs[:, 1], condition=cond)


def delta_amplitudes(gamma, k, mass: float = 1.0):
    """``(r, t)`` of a static potential ``gamma * delta(x)`` (array friendly).

    Equivalent to ``r = -(1 + (v/gamma)^2)^(-1/2) exp(i arctan(v/gamma))`` but
    evaluated as ``-gamma / (gamma - i v)``, which stays finite as gamma -> 0;
    ``t = 1 + r``.
    """
    gamma = np.asarray(gamma, dtype=float)
    v = np.asarray(k, dtype=float) / mass
    r = -gamma / (gamma - 1j * v)
    return r, 1.0 + r


@dataclass(frozen=True)
class ClosedFormAmplitudes:
    """Singlet/triplet amplitudes of a single Heisenberg scatterer (both spin-1/2)."""

    r_plus: complex
    r_minus: complex
    t_plus: complex
    t_minus: complex
    gamma_plus: float
    gamma_minus: float


def closed_form_single(J: float, k: float, mass: float = 1.0) -> ClosedFormAmplitudes:
    """Triplet (``+``, effective strength ``J/4``) and singlet (``-``, ``-3J/4``) amplitudes."""
    if not k > 0:
        raise ValueError("wavevector must be positive")
    gp, gm = J / 4.0, -3.0 * J / 4.0
    rp, tp = delta_amplitudes(gp, k, mass)
    rm, tm = delta_amplitudes(gm, k, mass)
    return ClosedFormAmplitudes(complex(rp), complex(rm), complex(tp), complex(tm), gp, gm)


def _principal(angle):
    """Reduce to (-pi, pi]."""
    out = np.mod(angle + np.pi, 2 * np.pi) - np.pi
    return np.where(out == -np.pi, np.pi, out)


def phase_differences(J, k, mass: float = 1.0):
    """``(Delta_r, Delta_t)``: phase of triplet minus phase of singlet amplitude.

    Both are principal values in (-pi, pi]. The reflection difference lies in
    (0, pi) and the transmission difference equals it minus pi, so
    ``sin(Delta_t) = -sin(Delta_r)``.
    """
    J = np.asarray(J, dtype=float)
    if np.any(J == 0):
        raise ValueError("phase differences are undefined for J = 0")
    rp, tp = delta_amplitudes(J / 4.0, k, mass)
    rm, tm = delta_amplitudes(-3.0 * J / 4.0, k, mass)
    dr = _principal(np.angle(rp) - np.angle(rm))
    dt = _principal(np.angle(tp) - np.angle(tm))
    if dr.ndim == 0:
        return float(dr), float(dt)
    return dr, dt


def stationary_wavefunction(sol: ScatteringSolution, mu: int, x, nu: int):
    """Stationary state ``mu`` at position(s) ``x`` projected on channel ``nu``.

    The common ``1/sqrt(2 pi)`` plane-wave normalisation is omitted. Points
    sitting exactly on a scatterer are evaluated from the left region; the
    wavefunction is continuous there.
    """
    x = np.asarray(x, dtype=float)
    region = np.searchsorted(sol.positions, x, side="left")
    f = sol.forward[region, nu, mu]
    g = sol.backward[region, nu, mu]
    return f * np.exp(1j * sol.k * x) + g * np.exp(-1j * sol.k * x)


def unitarity_defect(sol: ScatteringSolution) -> float:
    """``max_mu |sum_nu (|r|^2 + |t|^2) - 1|``."""
    flux = np.sum(np.abs(sol.r) ** 2 + np.abs(sol.t) ** 2, axis=0)
    return float(np.max(np.abs(flux - 1.0)))


AMPLITUDE_COLUMNS = ("k", "eta", "mu", "nu", "re_r", "im_r", "re_t", "im_t",
                     "re_A", "im_A", "re_B", "im_B")


def write_amplitudes_csv(solutions: Iterable[ScatteringSolution], path) -> Path:
    """One row per ``(k, eta, mu, nu)``; A and B are left blank for a single scatterer."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(AMPLITUDE_COLUMNS)
        for sol in solutions:
            A, B = sol.A, sol.B
            for mu in range(sol.dim):
                for nu in range(sol.dim):
                    r, t = sol.r[nu, mu], sol.t[nu, mu]
                    row = [repr(float(sol.k)), sol.eta, mu, nu] + [repr(float(v)) for v in (r.real, r.imag, t.real, t.imag)]
                    if A is None:
                        row += ["", "", "", ""]
                    else:
                        row += [repr(float(v)) for v in (A[nu, mu].real, A[nu, mu].imag, B[nu, mu].real, B[nu, mu].imag)]
                    w.writerow(row)
    return path
