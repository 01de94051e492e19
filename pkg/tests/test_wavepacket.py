import csv

import numpy as np
import pytest
from scipy.integrate import trapezoid

from spinscatter.scattering import solve_channels
from spinscatter.spin import CouplingSpec, SpinSpace
from spinscatter.wavepacket import (GaussianPacket, InitialState, QuadratureSpec, build_expansion, default_mesh,
                                    default_time_grid, evolve, free_density_moments, free_propagate,
                                    packet_momentum_amplitude, packet_position_amplitude, projection_coefficients)


def test_packet_ratios_frozen():
    p = GaussianPacket.from_ratios(1e-2)
    assert p.dk == pytest.approx(1e-2) and p.dx == pytest.approx(100.0)
    assert p.beta == pytest.approx(5000.0) and p.x0 == pytest.approx(500.0)
    assert p.velocity == 1.0


def test_packet_normalised_in_both_spaces():
    p = GaussianPacket.from_ratios(5e-2)
    x = np.linspace(-p.x0 - 10 * p.dx, -p.x0 + 10 * p.dx, 20001)
    assert trapezoid(np.abs(packet_position_amplitude(p, x)) ** 2, x) == pytest.approx(1, abs=1e-10)
    k = np.linspace(p.k0 - 10 * p.dk, p.k0 + 10 * p.dk, 4001)
    assert trapezoid(np.abs(packet_momentum_amplitude(p, k)) ** 2, k) == pytest.approx(1, abs=1e-10)


def test_free_propagation_moments():
    p = GaussianPacket.from_ratios(5e-2)
    tau = 300.0
    x = np.linspace(-400, 400, 40001)
    f = np.abs(free_propagate(p, x, tau)) ** 2
    mean, std = free_density_moments(p, tau)
    assert trapezoid(f, x) == pytest.approx(1, abs=1e-10)
    assert trapezoid(x * f, x) == pytest.approx(mean, abs=1e-8)
    assert np.sqrt(trapezoid((x - mean) ** 2 * f, x)) == pytest.approx(std, rel=1e-8)
    # spreading law beta (1 + (tau / 2 m beta)^2)
    assert std**2 == pytest.approx(p.beta * (1 + (tau / (2 * p.beta)) ** 2))
    # width() is the 1/e half-width, sqrt(2) standard deviations
    assert p.width(tau) == pytest.approx(np.sqrt(2) * std)


def test_overlap_guard():
    p = GaussianPacket(x0=200.0, k0=1.0, beta=5000.0)
    with pytest.raises(ValueError, match="allow_overlap"):
        InitialState(p, (0.5, -0.5))
    with pytest.warns(RuntimeWarning):
        InitialState(p, (0.5, -0.5), allow_overlap=True)


def test_quadrature_window_guard():
    with pytest.raises(ValueError):
        QuadratureSpec(257, 6.0).rule(GaussianPacket.from_ratios(0.2))


def test_quasi_mono_projection_is_delta():
    p = GaussianPacket.from_ratios(1e-2)
    sp = SpinSpace((0.5,))
    init = InitialState(p, (0.5, -0.5))
    k = 1.0
    spec = CouplingSpec.heisenberg(1.0)
    c = projection_coefficients(init, sp, solve_channels(spec, sp, k), solve_channels(spec, sp, k, -1))
    mubar = sp.index((0.5, -0.5))
    expect = np.zeros((2, sp.dim), complex)
    expect[0, mubar] = packet_momentum_amplitude(p, k)
    np.testing.assert_allclose(c, expect)


def test_free_evolution_matches_closed_form():
    p = GaussianPacket.from_ratios(1e-2)
    sp = SpinSpace((0.5,))
    init = InitialState(p, (0.5, -0.5))
    times = [0.0, 400.0, 900.0]
    x = np.linspace(-900, 900, 3001)
    fld = evolve(init, CouplingSpec.heisenberg(0.0), sp, times, mesh=x)
    mubar = sp.index((0.5, -0.5))
    for i, t in enumerate(times):
        np.testing.assert_allclose(fld.values[i, :, mubar], free_propagate(p, x, t), atol=1e-9)
    np.testing.assert_allclose(fld.norms, 1, atol=1e-10)


@pytest.mark.parametrize("spins,spec", [
    ((0.5,), CouplingSpec.heisenberg(3.0)),
    ((0.5, 0.5), CouplingSpec.xyz(3, 6, 0, (0, np.pi))),
    ((1.0, 1.0), CouplingSpec.heisenberg(1.0, (0, np.pi))),
])
def test_norm_conserved(spins, spec):
    p = GaussianPacket.from_ratios(1e-2)
    sp = SpinSpace(spins)
    init = InitialState(p, (0.5,) + tuple(-s for s in spins))
    times = default_time_grid(p, spec.positions[-1], 25)
    fld = evolve(init, spec, sp, times)
    assert np.max(np.abs(fld.norms - 1)) < 1e-6
    assert fld.flags == []


def test_spin_density_matches_mesh_trace():
    p = GaussianPacket.from_ratios(2e-2)
    sp = SpinSpace((0.5, 0.5))
    spec = CouplingSpec.heisenberg(1.0, (0, np.pi))
    init = InitialState(p, (0.5, -0.5, -0.5))
    tau = 300.0
    exp = build_expansion(init, spec, sp)
    errs = []
    for ppw in (80, 160):
        x = default_mesh(p, spec.positions, [tau], points_per_wavelength=ppw)
        psi = exp.field(x, tau)
        rho_mesh = trapezoid(psi[:, :, None] * psi[:, None, :].conj(), x, axis=0)
        errs.append(np.max(np.abs(exp.spin_density(tau) - rho_mesh)))
    # the mesh trace converges to the analytic one at second order (kinks at the scatterers)
    assert errs[1] < 1e-6 and errs[1] < errs[0] / 3


def test_exact_and_quasi_mono_modes_agree_when_far():
    p = GaussianPacket.from_ratios(1e-2)
    sp = SpinSpace((0.5,))
    init = InitialState(p, (0.5, -0.5))
    spec = CouplingSpec.heisenberg(1.0)
    a = build_expansion(init, spec, sp, mode="quasi-mono").spin_density(800.0)
    b = build_expansion(init, spec, sp, mode="exact").spin_density(800.0)
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_spinor_csv_roundtrip(tmp_path):
    p = GaussianPacket.from_ratios(5e-2)
    sp = SpinSpace((0.5,))
    init = InitialState(p, (0.5, -0.5))
    x = np.linspace(-10, 10, 5)
    fld = evolve(init, CouplingSpec.heisenberg(1.0), sp, [0.0, 100.0], mesh=x)
    path = fld.write_csv(tmp_path / "psi.csv")
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["tau", "x", "spin_index", "re_psi", "im_psi"]
    assert len(rows) == 2 * 5 * 4
    r = rows[-1]
    assert complex(float(r["re_psi"]), float(r["im_psi"])) == fld.values[1, 4, 3]
    dens = list(csv.DictReader(fld.write_density_csv(tmp_path / "f.csv").open()))
    assert list(dens[0]) == ["tau", "x", "f_e"]


def test_time_grid_and_mesh_contain_packet():
    p = GaussianPacket.from_ratios(1e-2)
    t = default_time_grid(p, np.pi)
    mesh = default_mesh(p, (0.0, np.pi), t)
    mean, std = free_density_moments(p, t[-1])
    assert mesh[-1] > mean + 6 * std and mesh[0] < -mean - 6 * std
    assert np.diff(mesh).max() <= 2 * np.pi / 20 + 1e-12
