import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinscatter.scattering import (closed_form_single, delta_amplitudes, phase_differences, solve_channels,
                                    stationary_wavefunction, unitarity_defect, write_amplitudes_csv)
from spinscatter.spin import CouplingSpec, SpinSpace, coupling_matrices


def test_delta_amplitudes_frozen():
    # Gamma = J/4 and -3J/4 at J = k = 1
    r, t = delta_amplitudes(0.25, 1.0)
    assert r == pytest.approx(-1 / 17 - 4j / 17, abs=1e-15)
    assert t == pytest.approx(16 / 17 - 4j / 17, abs=1e-15)
    r, _ = delta_amplitudes(-0.75, 1.0)
    assert r == pytest.approx(-0.36 + 0.48j, abs=1e-15)


@given(st.floats(-20, 20), st.floats(0.05, 5))
def test_delta_amplitudes_rational_form(g, k):
    r, t = delta_amplitudes(g, k)
    assert r == pytest.approx(-g / (g - 1j * k), abs=1e-12)
    assert t == pytest.approx(k / (k + 1j * g), abs=1e-12)
    assert abs(r) ** 2 + abs(t) ** 2 == pytest.approx(1, abs=1e-12)


def test_free_wire():
    sol = solve_channels(CouplingSpec.heisenberg(0.0, (0, 2.0)), SpinSpace((0.5, 0.5)), 1.3)
    np.testing.assert_allclose(sol.r, 0, atol=1e-14)
    np.testing.assert_allclose(sol.t, np.eye(8), atol=1e-14)


def test_single_scatterer_rotated_matches_closed_form():
    J, k = 2.0, 0.7
    sol = solve_channels(CouplingSpec.heisenberg(J), SpinSpace((0.5,)), k)
    cf = closed_form_single(J, k)
    # uu is pure triplet; the |Psi+-> combinations diagonalise the (ud, du) block
    assert sol.r[0, 0] == pytest.approx(cf.r_plus, abs=1e-12)
    u = np.array([[0, 1, 1, 0], [0, 1, -1, 0]]) / np.sqrt(2)
    rot = u @ sol.r @ u.T
    np.testing.assert_allclose(rot, np.diag([cf.r_plus, cf.r_minus]), atol=1e-12)


def test_single_scatterer_symmetric_in_direction():
    sp = SpinSpace((1,))
    spec = CouplingSpec.heisenberg(1.7)
    a, b = solve_channels(spec, sp, 0.9, 1), solve_channels(spec, sp, 0.9, -1)
    np.testing.assert_allclose(a.t, b.t, atol=1e-12)
    np.testing.assert_allclose(a.r, b.r, atol=1e-12)


def test_heisenberg_conserves_sz_channels():
    sp = SpinSpace((0.5, 0.5))
    sol = solve_channels(CouplingSpec.heisenberg(1.0, (0, np.pi)), sp, 1.0)
    m = np.array([sum(sp.quantum_numbers(i)) for i in range(sp.dim)])
    mixed = m[:, None] != m[None, :]
    assert np.max(np.abs(sol.r[mixed])) < 1e-13 and np.max(np.abs(sol.t[mixed])) < 1e-13


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["heisenberg", "xxz", "xy", "xyz"]), st.sampled_from([0.5, 1.0]), st.integers(1, 2),
       st.tuples(*[st.floats(0.1, 10)] * 3), st.floats(0.01, 2 * np.pi - 0.01), st.sampled_from([1, -1]))
def test_flux_conservation(model, s, n, js, kd, eta):
    spec = _spec(model, js, n, kd)
    sol = solve_channels(spec, SpinSpace((s,) * n), 1.0, eta)
    assert unitarity_defect(sol) < 1e-10


def _spec(model, js, n, kd):
    J, a, b = js
    pos = (0.0,) if n == 1 else (0.0, kd)
    if model == "heisenberg":
        return CouplingSpec.heisenberg(J, pos)
    comps = {"xxz": (J, J, a), "xy": (J, a, 0.0), "xyz": (J, a, b)}[model]
    return CouplingSpec.xyz(*comps, positions=pos)


def test_boundary_conditions_hold():
    sp = SpinSpace((0.5, 1))
    spec = CouplingSpec.xyz(1.0, 2.0, 0.5, (0, 1.3))
    sol = solve_channels(spec, sp, 1.1)
    Ks = coupling_matrices(spec, sp)
    eps = 1e-7
    for mu in range(sp.dim):
        for j, xj in enumerate(spec.positions):
            left = np.array([stationary_wavefunction(sol, mu, xj - eps, nu) for nu in range(sp.dim)])
            right = np.array([stationary_wavefunction(sol, mu, xj + eps, nu) for nu in range(sp.dim)])
            np.testing.assert_allclose(left, right, atol=1e-6)
            # derivative from the plane-wave coefficients on each side
            k = sol.k
            fwd, bwd = sol.forward, sol.backward
            d_left = 1j * k * (fwd[j, :, mu] * np.exp(1j * k * xj) - bwd[j, :, mu] * np.exp(-1j * k * xj))
            d_right = 1j * k * (fwd[j + 1, :, mu] * np.exp(1j * k * xj) - bwd[j + 1, :, mu] * np.exp(-1j * k * xj))
            psi = fwd[j, :, mu] * np.exp(1j * k * xj) + bwd[j, :, mu] * np.exp(-1j * k * xj)
            np.testing.assert_allclose(d_right - d_left, 2 * Ks[j] @ psi, atol=1e-12)


def test_phase_differences_relation():
    J = np.geomspace(0.1, 20, 50)
    dr, dt = phase_differences(J, 1.0)
    np.testing.assert_allclose(np.sin(dt), -np.sin(dr), atol=1e-12)
    assert np.all((dr > 0) & (dr < np.pi))
    # frozen: arctan(4) + arctan(4/3) at J = v
    assert phase_differences(1.0, 1.0)[0] == pytest.approx(np.arctan(4) + np.arctan(4 / 3), abs=1e-14)
    with pytest.raises(ValueError):
        phase_differences(0.0, 1.0)


def test_invalid_inputs():
    sp = SpinSpace((0.5,))
    with pytest.raises(ValueError):
        solve_channels(CouplingSpec.heisenberg(1.0), sp, 0.0)
    with pytest.raises(ValueError):
        solve_channels(CouplingSpec.heisenberg(1.0), sp, 1.0, eta=0)


def test_amplitude_csv(tmp_path):
    sp = SpinSpace((0.5, 0.5))
    spec = CouplingSpec.heisenberg(1.0, (0, np.pi))
    sols = [solve_channels(spec, sp, k, eta) for k in (0.9, 1.0) for eta in (1, -1)]
    path = write_amplitudes_csv(sols, tmp_path / "amp.csv")
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["k", "eta", "mu", "nu", "re_r", "im_r", "re_t", "im_t", "re_A", "im_A", "re_B", "im_B"]
    assert len(rows) == 4 * 64
    r0 = complex(float(rows[0]["re_r"]), float(rows[0]["im_r"]))
    assert r0 == sols[0].r[0, 0]
    single = write_amplitudes_csv([solve_channels(CouplingSpec.heisenberg(1.0), SpinSpace((0.5,)), 1.0)],
                                  tmp_path / "one.csv")
    assert list(csv.DictReader(single.open()))[0]["re_A"] == ""
