"""Spin reductions, logarithmic negativity and rise-time statistics."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from .scattering import closed_form_single, delta_amplitudes, phase_differences
from .wavepacket import GaussianPacket, SpinorField, free_density_moments

__all__ = [
    "DensityMatrix",
    "EntanglementCurve",
    "NoSteadyStateError",
    "TraceDeficitError",
    "partial_trace",
    "partial_transpose",
    "spin_density_from_samples",
    "spatial_density",
    "region_probability",
    "reduced_spin_state",
    "logarithmic_negativity",
    "entanglement_curve",
    "static_state",
    "static_benchmark",
    "overlap_sigma",
    "sigma_entanglement",
    "amplitude_variation",
    "rise_time",
    "rise_interval",
    "rescale_to_max",
    "sup_distance",
    "interval_iou",
    "threshold_interval",
]


class TraceDeficitError(ValueError):
    """Position trace lost more weight than tolerated (mesh window too small)."""


class NoSteadyStateError(ValueError):
    pass


@dataclass(frozen=True)
class DensityMatrix:
    """Spin density matrix over the slots listed in ``slots`` (0 is ``e``)."""

    matrix: np.ndarray
    dims: tuple[int, ...]
    slots: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def check(self, herm_tol=1e-10, trace_tol=1e-6, psd_tol=1e-8) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > trace_tol:
            raise ValueError(f"density matrix has trace {np.trace(m).real:.8f}")
        if np.linalg.eigvalsh(m).min() < -psd_tol:
            raise ValueError("density matrix is not positive semidefinite")


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    dims = tuple(dims)
    keep = sorted(set(keep))
    n = len(dims)
    t = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = [c if i in keep else row[i] for i, c in enumerate(letters[n:2 * n])]
    out = [row[i] for i in keep] + [col[i] for i in keep]
    t = np.einsum("".join(row) + "".join(col) + "->" + "".join(out), t)
    d = int(np.prod([dims[i] for i in keep]))
    return t.reshape(d, d)


def partial_transpose(rho: np.ndarray, dims: Sequence[int], transpose: Iterable[int]) -> np.ndarray:
    """Transpose the listed subsystems (positions within ``dims``)."""
    dims = tuple(dims)
    n = len(dims)
    t = rho.reshape(dims + dims)
    axes = list(range(2 * n))
    for i in transpose:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return t.transpose(axes).reshape(rho.shape)


def spin_density_from_samples(x: np.ndarray, psi: np.ndarray, rel_cutoff: float = 1e-10) -> np.ndarray:
    """Trapezoid trace over a mesh, restricted to where ``f_e`` is non-negligible."""
    f = np.sum(np.abs(psi) ** 2, axis=1)
    keep = f > rel_cutoff * f.max()
    if keep.sum() < 2:
        raise TraceDeficitError("no mesh points carry appreciable density")
    lo, hi = np.flatnonzero(keep)[[0, -1]]
    lo, hi = max(lo - 1, 0), min(hi + 1, len(x) - 1)
    xs, ps = x[lo:hi + 1], psi[lo:hi + 1]
    return np.trapezoid(ps[:, :, None] * ps[:, None, :].conj(), xs, axis=0)


def _field_at(field_: SpinorField, tau: float, x) -> np.ndarray:
    if field_.expansion is not None:
        return field_.expansion.field(x, tau)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    i = np.searchsorted(field_.times, tau)
    ts = field_.times
    if i < len(ts) and np.isclose(ts[i], tau, rtol=0, atol=1e-9 * max(1.0, abs(tau))):
        vals = field_.values[i]
    elif 0 < i < len(ts):
        s = (tau - ts[i - 1]) / (ts[i] - ts[i - 1])
        vals = (1 - s) * field_.values[i - 1] + s * field_.values[i]
    else:
        raise KeyError(f"tau = {tau} is outside the field's time grid")
    return np.stack([np.interp(x, field_.mesh, vals[:, nu].real) + 1j * np.interp(x, field_.mesh, vals[:, nu].imag)
                     for nu in range(vals.shape[1])], axis=1)


def spatial_density(field_: SpinorField, tau: float, x):
    """``f_e(x, tau) = sum_nu |psi(x, nu, tau)|^2``."""
    f = np.sum(np.abs(_field_at(field_, tau, x)) ** 2, axis=1)
    return f if np.ndim(x) else float(f[0])


def region_probability(field_: SpinorField, tau: float, region: tuple[float, float]) -> float:
    """Probability of finding ``e`` inside ``[a, b]`` (trapezoid rule)."""
    a, b = region
    if not b > a:
        raise ValueError("region must have positive length")
    if field_.expansion is not None:
        k0 = field_.expansion.packet.k0
        n = max(201, int(np.ceil((b - a) / (2 * np.pi / k0) * 200)) + 1)
        x = np.linspace(a, b, n)
        return float(np.trapezoid(spatial_density(field_, tau, x), x))
    x = field_.mesh
    inside = (x >= a) & (x <= b)
    xs = np.concatenate(([a], x[inside], [b]))
    return float(np.clip(np.trapezoid(spatial_density(field_, tau, xs), xs), 0.0, 1.0))


def reduced_spin_state(field_: SpinorField, tau: float, keep: Iterable[int],
                       trace_tol: float = 1e-3) -> DensityMatrix:
    """Trace out the position of ``e`` and every spin slot not in ``keep``."""
    space = field_.space
    keep = tuple(sorted(set(keep)))
    if not keep or any(not 0 <= s < len(space.local_dims) for s in keep):
        raise ValueError(f"invalid slot selection {keep}")
    if field_.expansion is not None:
        rho = field_.expansion.spin_density(tau)
    else:
        rho = spin_density_from_samples(field_.mesh, field_.values[field_.time_index(tau)])
    tr = np.trace(rho).real
    if abs(tr - 1) > trace_tol:
        raise TraceDeficitError(f"position trace retains weight {tr:.6f} at tau = {tau}")
    red = partial_trace(rho / tr, space.local_dims, keep)
    red = 0.5 * (red + red.conj().T)
    return DensityMatrix(red, tuple(space.local_dims[s] for s in keep), keep)


def logarithmic_negativity(rho: DensityMatrix, transpose: Iterable[int] | None = None,
                           psd_tol: float = 1e-8) -> float:
    """``log2 || rho^{T_A} ||_1`` with ``A`` the slots in ``transpose``.

    By default the first kept slot is transposed.
    """
    transpose = (rho.slots[0],) if transpose is None else tuple(transpose)
    local = [rho.slots.index(s) for s in transpose]
    if not local or len(local) == len(rho.slots):
        raise ValueError("bipartition must split the kept slots into two nonempty groups")
    m = rho.matrix
    if np.linalg.eigvalsh(m).min() < -psd_tol:
        raise ValueError("density matrix is not positive semidefinite")
    pt = partial_transpose(m, rho.dims, local)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return max(0.0, float(np.log2(np.sum(np.abs(ev)))))


@dataclass
class EntanglementCurve:
    times: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)

    def steady_value(self, tail: float = 0.1) -> float:
        n = max(2, int(round(tail * len(self.values))))
        return float(np.mean(self.values[-n:]))

    def is_saturated(self, tail: float = 0.1, rel: float = 0.01) -> bool:
        n = max(2, int(round(tail * len(self.values))))
        seg = self.values[-n:]
        ref = abs(np.mean(seg))
        return bool(ref > 0 and (seg.max() - seg.min()) < rel * ref)

    def steady_flags(self, rel: float = 0.01) -> np.ndarray:
        """1 from the first sample after which the curve stays within ``rel`` of its steady value."""
        ss = self.steady_value()
        off = np.abs(self.values - ss) > rel * abs(ss)
        flags = np.ones(len(self.values), dtype=int)
        if off.any():
            flags[: np.flatnonzero(off)[-1] + 1] = 0
        return flags

    def min_increment(self) -> float:
        return float(np.min(np.diff(self.values)))

    def write_csv(self, path) -> Path:
        path = Path(path)
        flags = self.steady_flags() if self.steady_value() > 0 else np.zeros(len(self.values), int)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("tau", "E_N", "steady_flag"))
            for t, e, s in zip(self.times, self.values, flags):
                w.writerow((repr(float(t)), repr(float(e)), int(s)))
        return path


def entanglement_curve(field_: SpinorField, keep: Iterable[int], transpose: Iterable[int] | None = None,
                       metadata: dict | None = None) -> EntanglementCurve:
    vals = [logarithmic_negativity(reduced_spin_state(field_, t, keep), transpose) for t in field_.times]
    return EntanglementCurve(field_.times.copy(), np.array(vals), dict(metadata or {}))


def static_state(J_static: float, tau: float) -> np.ndarray:
    """State of two static spins from ``|up, down>`` under ``J sigma_hat . S``."""
    psi_p = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    psi_m = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return (np.exp(-1j * J_static * tau / 4) * psi_p + np.exp(3j * J_static * tau / 4) * psi_m) / np.sqrt(2)


def static_benchmark(J_static, tau):
    """``E_N = log2(1 + |sin(J tau)|)`` for two exchange-coupled static spins."""
    return np.log2(1.0 + np.abs(np.sin(np.asarray(J_static) * np.asarray(tau))))


def overlap_sigma(J: float, packet: GaussianPacket, tau):
    """Overlap of the singlet- and triplet-evolved packets in the frozen-amplitude picture.

    Amplitudes are taken at ``k0``; the free half-line weights are closed-form
    error functions, and the left- and right-moving weights coincide by mirror
    symmetry.
    """
    c = closed_form_single(J, packet.k0, packet.mass)
    mean, std = free_density_moments(packet, tau)
    past = ndtr(mean / std)      # int_0^inf |phi_f,R|^2 = int_-inf^0 |phi_f,L|^2
    if J == 0:
        return (1.0 - past) + past + 0j
    d_r, d_t = phase_differences(J, packet.k0, packet.mass)
    rr = abs(c.r_plus * c.r_minus)
    tt = abs(c.t_plus * c.t_minus)
    return (1.0 - past) + rr * np.exp(1j * d_r) * past + tt * np.exp(1j * d_t) * past


def sigma_entanglement(J: float, packet: GaussianPacket, times) -> EntanglementCurve:
    sig = overlap_sigma(J, packet, np.asarray(times, dtype=float))
    return EntanglementCurve(times, np.log2(1.0 + np.abs(sig.imag)), {"engine": "overlap", "J": J})


def amplitude_variation(J: float, k0: float, dk: float, span: float = 3.0, samples: int = 201,
                        mass: float = 1.0) -> float:
    """Largest relative change of ``r^+-_k, t^+-_k`` over ``[k0 - span dk, k0 + span dk]``."""
    ks = np.linspace(k0 - span * dk, k0 + span * dk, samples)
    worst = 0.0
    for g in (J / 4.0, -3.0 * J / 4.0):
        r, t = delta_amplitudes(g, ks, mass)
        r0, t0 = delta_amplitudes(g, k0, mass)
        for a, a0 in ((r, r0), (t, t0)):
            if abs(a0) > 0:
                worst = max(worst, float(np.max(np.abs(a - a0)) / abs(a0)))
    return worst


def _crossing(times, values, level) -> float:
    above = np.flatnonzero(values >= level)
    if len(above) == 0:
        raise NoSteadyStateError("curve never reaches the requested level")
    i = above[0]
    if i == 0:
        return float(times[0])
    t0, t1, v0, v1 = times[i - 1], times[i], values[i - 1], values[i]
    return float(t0 + (level - v0) * (t1 - t0) / (v1 - v0))


def rise_interval(curve: EntanglementCurve, low: float = 0.1, high: float = 0.9) -> tuple[float, float]:
    if not curve.is_saturated():
        raise NoSteadyStateError("no steady state in window")
    ss = curve.steady_value()
    return _crossing(curve.times, curve.values, low * ss), _crossing(curve.times, curve.values, high * ss)


def rise_time(curve: EntanglementCurve) -> float:
    """10%-90% transient time of a saturating curve."""
    a, b = rise_interval(curve)
    return b - a


def rescale_to_max(curve: EntanglementCurve) -> EntanglementCurve:
    ss = curve.steady_value()
    if not ss > 0:
        raise ValueError("cannot rescale a curve with zero steady value")
    return replace(curve, values=curve.values / ss, metadata={**curve.metadata, "rescaled": True})


def sup_distance(a: EntanglementCurve, b: EntanglementCurve) -> float:
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times):
        vb = np.interp(a.times, b.times, b.values)
    else:
        vb = b.values
    return float(np.max(np.abs(a.values - vb)))


def interval_iou(a: tuple[float, float], b: tuple[float, float]) -> float:
    inter = max(0.0, min(a[1], b[1]) - max(a[0], b[0]))
    union = max(a[1], b[1]) - min(a[0], b[0])
    return inter / union if union > 0 else 0.0


def threshold_interval(times, values, fraction: float = 0.1) -> tuple[float, float]:
    """Interval where ``values`` exceed ``fraction`` of their max (edges interpolated)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    level = fraction * values.max()
    idx = np.flatnonzero(values > level)
    i, j = idx[0], idx[-1]

    def edge(i0, i1):
        v0, v1 = values[i0], values[i1]
        return times[i0] + (level - v0) * (times[i1] - times[i0]) / (v1 - v0)

    lo = times[0] if i == 0 else edge(i - 1, i)
    hi = times[-1] if j == len(times) - 1 else edge(j, j + 1)
    return float(lo), float(hi)
