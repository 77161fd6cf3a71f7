import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tqdsim import models
from tqdsim.models import FieldVector, GateSpec, SpinModelParams
from tqdsim.quantum_core import ID2, SX, SY, SZ, eig_hermitian, expm_skew_hermitian, ket, tensor
from tqdsim.tqd_engine import PhaseSchedule

from conftest import random_state

W = models.RESONANT_FREQUENCY
P = SpinModelParams()
freq = st.floats(1e-3, 2 * math.pi * 1e3)
times = st.floats(0, 0.1)


def test_h0_at_zero_and_static_spectrum():
    assert np.allclose(models.h0_rotating(P, 0.0), 0.5 * W * (SZ + SX))
    for t in np.linspace(0, 0.05, 9):
        ev, _ = eig_hermitian(models.h0_rotating(P, t))
        assert np.allclose(ev, [-W / math.sqrt(2), W / math.sqrt(2)], rtol=1e-13)


def test_ground_state_at_zero_is_half_angle_form():
    a = P.alpha
    expected = math.cos(a / 2) * ket(1) - math.sin(a / 2) * ket(0)
    assert abs(abs(np.vdot(expected, models.ground_state_h0(P, 0.0))) - 1) < 1e-15
    ev, vecs = eig_hermitian(models.h0_rotating(P, 0.0))
    assert abs(abs(np.vdot(vecs[:, 0], models.ground_state_h0(P, 0.0))) - 1) < 1e-14


def test_rf_hamiltonian_phases():
    assert np.allclose(models.h_rf(P, 0.0), 0.5 * (P.omega_z * SZ + P.omega_xy * SX))
    assert np.allclose(models.h_rf(P, math.pi / 2), 0.5 * (P.omega_z * SZ + P.omega_xy * SY))
    assert np.allclose(models.h_rf(P, W * 0.013), models.h0_rotating(P, 0.013))


def test_fields_without_rotation():
    p = SpinModelParams(0.0, 3.0, 4.0)
    assert models.field_std(p, 0.2) == models.field_0(p, 0.2)
    assert models.field_opt(p, 0.2).norm == 0.0


def test_generalized_field_specializations():
    a = P.alpha
    ad = lambda t: P.level_splitting - P.omega * math.cos(a)
    geo = lambda t: -P.omega * math.cos(a)
    for t in (0.0, 0.011):
        assert np.allclose(models.field_generalized(P, ad, t).as_array(), models.field_std(P, t).as_array())
        assert np.allclose(models.field_generalized(P, geo, t).as_array(), models.field_opt(P, t).as_array(),
                           atol=1e-10)
        assert np.allclose(models.field_generalized(P, lambda _: 0.0, t).as_array(), [0, 0, W])


def test_norm_ratio_examples():
    assert models.norm_ratio(P) == 2.0
    assert models.norm_ratio(SpinModelParams(W, 0.0, W)) == 1.0
    with pytest.raises(ZeroDivisionError):
        models.norm_ratio(SpinModelParams(W, W, 0.0))


@given(freq, freq, freq, times)
def test_field_norm_inequalities(w, wz, wxy, t):
    p = SpinModelParams(w, wz, wxy)
    b0, bs, bo = (f(p, t).norm for f in (models.field_0, models.field_std, models.field_opt))
    # B_opt is orthogonal to B0, so |B_std|^2 = |B0|^2 + |B_opt|^2
    assert bs ** 2 == pytest.approx(b0 ** 2 + bo ** 2, rel=1e-12)
    if bo > 1e-6 * b0 and b0 > 1e-6 * bo:
        assert bs > b0 and bs > bo
    else:
        assert bs >= b0 and bs >= bo
    assert models.norm_ratio(p) * bo == pytest.approx(b0, rel=1e-12)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_field_operator_round_trip(bx, by, bz):
    f = FieldVector(bx, by, bz)
    g = FieldVector.from_operator(f.to_operator())
    assert np.allclose(g.as_array(), f.as_array(), rtol=1e-12, atol=1e-12)


def test_gate_block_examples():
    g = GateSpec.z_gate()
    assert np.allclose(models.gate_hxi(g, 1.3, 0.0), -g.omega * SZ)
    assert np.allclose(models.gate_hxi(g, 0.0, 0.5), -g.omega * SX)
    for s in np.linspace(0, 1, 7):
        ev, _ = eig_hermitian(models.gate_hxi(g, 0.4, s))
        assert np.allclose(ev, [-g.omega, g.omega])
    with pytest.raises(ValueError):
        models.gate_hxi(g, 0.0, 1.5)


def test_z_gate_closed_forms_match_general_constructors():
    g = GateSpec.z_gate(7e-3)
    scale = g.omega + math.pi / (2 * g.tau)
    for s in np.linspace(0, 1, 11):
        assert np.max(np.abs(models.gate_adiabatic_h(g, s) - models.z_gate_adiabatic_h(g, s))) <= 1e-12 * scale
        assert np.max(np.abs(models.gate_standard_h(g, s) - models.z_gate_standard_h(g, s))) <= 1e-12 * scale
    assert np.max(np.abs(models.gate_optimal_h(g) - models.z_gate_optimal_h(g))) <= 1e-12 * scale
    assert np.allclose(models.z_gate_optimal_h(g), (math.pi / (2 * g.tau)) * tensor(SZ, SY))


def test_gate_start_is_common_for_every_gate():
    g = GateSpec(0.7, 0.3, 1.1)
    assert np.allclose(models.gate_adiabatic_h(g, 0.0), tensor(ID2, -g.omega * SZ))


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi), st.floats(0.05, 2 * math.pi), st.floats(0, 1))
def test_gate_hamiltonian_block_diagonal(eps, delta, phi, s):
    g = GateSpec(eps, delta, phi)
    h = models.gate_standard_h(g, s)
    cross = tensor(g.p_plus, ID2) @ h @ tensor(g.p_minus, ID2)
    assert np.max(np.abs(cross)) < 1e-10 * np.max(np.abs(h))


def test_generalized_block_specializations():
    g = GateSpec(0.4, 1.0, 2.0, tau=5e-3)
    for xi in (0.0, 2.0):
        zero = models.gate_generalized_block(g, PhaseSchedule.constant(0.0, 0.0), xi, 0.3)
        assert np.allclose(zero, models.gate_cd_xi(g, xi))
    for s in (0.0, 0.25, 1.0):
        gen = models.gate_generalized_h(g, models.gate_adiabatic_phases(g), s)
        assert np.max(np.abs(gen - models.gate_standard_h(g, s))) < 1e-10
        opt = models.gate_generalized_h(g, models.gate_geometric_phases(g), s)
        assert np.max(np.abs(opt - models.gate_optimal_h(g))) < 1e-10


def test_generalized_block_drives_tracked_levels():
    # constant Theta: the block Hamiltonian is time dependent, so integrate finely
    from tqdsim.dynamics import propagate_unitary

    g = GateSpec.z_gate(3e-3)
    traj = models.gate_block_trajectory(g, math.pi, 201)
    phases = PhaseSchedule.constant(517.0, -89.0)
    h = lambda t: models.gate_generalized_block(g, phases, math.pi, t / g.tau)
    res = propagate_unitary(h, traj.frame(0.0).vectors[:, 0], g.tau, 2000)
    rho = res.final_state
    v = traj.frame(g.tau).vectors[:, 0]
    assert np.real(v.conj() @ rho @ v) > 1 - 1e-8


def test_optimal_z_gate_closed_form():
    for tau in (1e-4, 1e-3, 12e-3):
        g = GateSpec.z_gate(tau)
        u = expm_skew_hermitian(models.z_gate_optimal_h(g), tau)
        assert np.allclose(u, -1j * tensor(SZ, SY), atol=1e-13)
        plus = np.array([1, 1]) / math.sqrt(2)
        minus = np.array([1, -1]) / math.sqrt(2)
        out = u @ np.kron(plus, ket(0))
        assert abs(np.vdot(np.kron(minus, ket(1)), out)) == pytest.approx(1.0, abs=1e-14)
    g = GateSpec.z_gate()
    assert np.array_equal(models.gate_optimal_h(g), models.gate_optimal_h(g))


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi),
       st.integers(0, 2 ** 32 - 1))
def test_optimal_gate_completes_rotation(eps, delta, phi, seed):
    g = GateSpec(eps, delta, phi, tau=4e-3)
    psi = random_state(np.random.default_rng(seed), 2)
    out = expm_skew_hermitian(models.gate_optimal_h(g), g.tau) @ np.kron(psi, ket(0))
    target = np.kron(g.target_unitary() @ psi, ket(1))
    assert abs(np.vdot(target, out)) ** 2 >= 1 - 1e-8


def test_ground_state_reference_at_end_of_z_sweep():
    g = GateSpec.z_gate()
    plus = np.array([1, 1]) / math.sqrt(2)
    ref = models.gate_ground_state(g, plus, 1.0)
    assert abs(np.vdot(np.kron(SZ @ plus, ket(1)), ref)) == pytest.approx(1.0, abs=1e-15)
    h = models.z_gate_adiabatic_h(g, 0.37)
    mid = models.gate_ground_state(g, plus, 0.37)
    assert np.allclose(h @ mid, -g.omega * mid)
