"""One test per acceptance criterion, each with its own runtime limit."""

import math
import time

import numpy as np
import pytest

from tqdsim import models
from tqdsim.dynamics import (
    NoiseModel, depolarize, lindblad_rhs, oscillation_envelope, propagate_lindblad, propagate_unitary,
    relative_purity,
)
from tqdsim.experiments import RunConfig, gate_fidelities, gate_final_fidelity
from tqdsim.models import GateSpec, SpinModelParams
from tqdsim.pulse_compiler import (
    PROTOCOLS, compile, continuous_unitary, convergence_order, digitization_error, energy_report,
)
from tqdsim.quantum_core import (
    ID2, SZ, SY, bloch_operator, dagger, eig_hermitian, expm_skew_hermitian, is_hermitian, is_unitary, ket,
    projector, tensor,
)
from tqdsim.tqd_engine import (
    adiabatic_phases, counterdiabatic_hamiltonian, generalized_tqd_hamiltonian, geometric_phases,
    standard_tqd_hamiltonian,
)

from conftest import random_density, random_hermitian, random_state

P = SpinModelParams()
PLUS = np.array([1, 1]) / math.sqrt(2)


class Timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.2f} s, limit {self.limit} s"


def _spin_fidelity(h, noise=None, steps=10_000, tau=models.SPIN_TOTAL_TIME):
    psi0 = models.ground_state_h0(P, 0.0)
    if noise is None:
        res = propagate_unitary(h, psi0, tau, steps)
    else:
        res = propagate_lindblad(h, projector(psi0), noise, tau, steps)
    return res.times, res.with_fidelity([models.ground_state_h0(P, t) for t in res.times]).fidelities


@pytest.mark.acceptance(1, "norm ratio and field ordering", 1.0)
def test_criterion_1_norm_ratio():
    with Timer(1.0):
        assert models.norm_ratio(P) == pytest.approx(2.0, abs=1e-12)
        for t in np.linspace(0, models.SPIN_TOTAL_TIME, 101):
            b0, bs, bo = (f(P, t).norm for f in (models.field_0, models.field_std, models.field_opt))
            assert bs > b0 > bo
            assert b0 / bo == pytest.approx(2.0, abs=1e-12)


@pytest.mark.acceptance(2, "transitionless flatness over 50 ms", 10.0)
def test_criterion_2_transitionless_flatness():
    with Timer(10.0):
        _, f_std = _spin_fidelity(lambda t: models.h_std_rotating(P, t))
        _, f_opt = _spin_fidelity(lambda t: models.h_opt_rotating(P, t))
        _, f_ad = _spin_fidelity(lambda t: models.h0_rotating(P, t))
        assert f_std.min() >= 0.9999 and f_opt.min() >= 0.9999
        assert f_ad.min() < 0.75


@pytest.mark.acceptance(3, "dephasing damps the adiabatic oscillation", 10.0)
def test_criterion_3_dephasing():
    with Timer(10.0):
        t, f = _spin_fidelity(lambda t: models.h0_rotating(P, t), NoiseModel.dephasing(models.T2_SPIN))
        assert oscillation_envelope(t, f, 40e-3, 5e-3) < oscillation_envelope(t, f, 10e-3, 5e-3)
        t2 = models.T2_SPIN
        free = propagate_lindblad(lambda _: np.zeros((2, 2)), projector(PLUS), NoiseModel.dephasing(t2), 0.5, 2000)
        coherence = 2 * free.states[:, 0, 1].real
        assert np.max(np.abs(coherence / np.exp(-2 * free.times / t2) - 1)) < 1e-4


@pytest.mark.acceptance(4, "optimal Z gate is exact", 1.0)
def test_criterion_4_z_gate_exactness():
    with Timer(1.0):
        target = np.kron(SZ @ PLUS, ket(1))
        for tau in (0.1e-3, 1e-3, 12e-3):
            g = GateSpec.z_gate(tau)
            u = expm_skew_hermitian(models.z_gate_optimal_h(g), tau)
            assert np.allclose(u, -1j * tensor(SZ, SY), atol=1e-12)
            assert abs(np.vdot(target, u @ np.kron(PLUS, ket(0)))) ** 2 >= 1 - 1e-10


@pytest.mark.acceptance(5, "gate fidelity sweep shape", 30.0)
def test_criterion_5_gate_sweep():
    with Timer(30.0):
        cfg = RunConfig.default("gate-z", workers=1)
        taus, curves = gate_fidelities(cfg)
        assert taus[0] == pytest.approx(0.1e-3) and taus[-1] == pytest.approx(12e-3)
        assert curves["F_standard"].min() >= 0.999 and curves["F_optimal"].min() >= 0.999
        ad = curves["F_adiabatic"]
        assert ad[-1] > ad[0]
        assert np.min(np.diff(ad)) >= -0.02
        assert np.all(ad >= np.maximum.accumulate(ad) - 0.02)
        assert gate_final_fidelity(GateSpec.z_gate(0.12), "adiabatic", 4000) > 0.99


@pytest.mark.acceptance(6, "energy ledger", 1.0)
def test_criterion_6_energy_ledger():
    with Timer(1.0):
        g = GateSpec.z_gate()
        for n in range(1, 65):
            assert compile("adiabatic", g, n).rotation_count == 2 * (n + 1)
            assert compile("standard_tqd", g, n).rotation_count == 5 * n
            assert compile("optimal_tqd", g, n).rotation_count == 3
        rows = energy_report([compile(p, g, 10) for p in PROTOCOLS])
        assert {r.protocol: r.ledger for r in rows} == {"adiabatic": 22.0, "standard_tqd": 50.0, "optimal_tqd": 3.0}


@pytest.mark.acceptance(7, "digitization convergence order", 30.0)
def test_criterion_7_digitization():
    with Timer(30.0):
        g = GateSpec.z_gate()
        ref = continuous_unitary("adiabatic", g, 10_000)
        ns = (8, 16, 32)
        errs = [digitization_error(compile("adiabatic", g, n), ref) for n in ns]
        assert errs[0] > errs[1] > errs[2]
        orders = [math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2])]
        assert min(orders) >= 1.9 and convergence_order(ns, errs) >= 1.9


@pytest.mark.acceptance(8, "cross-construction equivalence", 10.0)
def test_criterion_8_cross_construction():
    rng = np.random.default_rng(8)
    with Timer(10.0):
        spin = models.spin_trajectory(P)
        ad, geo = adiabatic_phases(spin), geometric_phases(spin)
        h0 = lambda t: models.h0_rotating(P, t)
        for t in rng.uniform(0, spin.tau, 100):
            std = standard_tqd_hamiltonian(h0, spin, t)
            assert np.max(np.abs(generalized_tqd_hamiltonian(spin, ad, t) - std)) <= 1e-8
            assert np.max(np.abs(std - models.h_std_rotating(P, t))) <= 1e-8
            cd = counterdiabatic_hamiltonian(spin, t)
            assert np.max(np.abs(generalized_tqd_hamiltonian(spin, geo, t) - cd)) <= 1e-8
            assert np.max(np.abs(cd - models.h_opt_rotating(P, t))) <= 1e-8
        g = GateSpec.z_gate()
        blocks = {xi: models.gate_block_trajectory(g, xi, 101) for _, xi in g.blocks()}
        (pp, x0), (pm, x1) = g.blocks()
        for t in rng.uniform(0, g.tau, 100):
            s = t / g.tau
            gen_ad = {xi: generalized_tqd_hamiltonian(tr, adiabatic_phases(tr), t) for xi, tr in blocks.items()}
            gen_geo = {xi: generalized_tqd_hamiltonian(tr, geometric_phases(tr), t) for xi, tr in blocks.items()}
            std = tensor(pp, gen_ad[x0]) + tensor(pm, gen_ad[x1])
            opt = tensor(pp, gen_geo[x0]) + tensor(pm, gen_geo[x1])
            assert np.max(np.abs(std - models.z_gate_standard_h(g, s))) <= 1e-8
            assert np.max(np.abs(opt - models.z_gate_optimal_h(g))) <= 1e-8
            cd = tensor(pp, counterdiabatic_hamiltonian(blocks[x0], t)) + tensor(pm, counterdiabatic_hamiltonian(blocks[x1], t))
            assert np.max(np.abs(opt - cd)) <= 1e-8


@pytest.mark.acceptance(9, "structural invariants, 10^4 randomized cases", 60.0)
def test_criterion_9_structural_invariants():
    rng = np.random.default_rng(9)
    cases = 0
    with Timer(60.0):
        for k in range(2000):
            dim = 2 if k % 2 else 4
            h = random_hermitian(rng, dim)
            evals, vecs = eig_hermitian(h)
            assert is_hermitian(h)
            assert np.max(np.abs((vecs * evals) @ dagger(vecs) - h)) <= 1e-10
            assert is_unitary(vecs)
            cases += 1
        for k in range(2000):
            dim = 2 if k % 2 else 4
            h, t = random_hermitian(rng, dim), rng.uniform(-20, 20)
            u = expm_skew_hermitian(h, t)
            assert is_unitary(u) and np.max(np.abs(u @ expm_skew_hermitian(h, -t) - np.eye(dim))) <= 1e-10
            cases += 1
        for k in range(2000):
            dim = 2 if k % 2 else 4
            f = relative_purity(random_density(rng, dim), random_density(rng, dim))
            g = relative_purity(random_state(rng, dim), random_state(rng, dim))
            assert -1e-12 <= f <= 1 + 1e-12 and -1e-12 <= g <= 1 + 1e-12
            cases += 1
        for k in range(2000):
            v = random_state(rng, 4)
            p = projector(v)
            assert np.max(np.abs(p @ p - p)) <= 1e-12 and abs(np.trace(p) - 1) <= 1e-12
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            pp, pm = 0.5 * (ID2 + bloch_operator(axis)), 0.5 * (ID2 - bloch_operator(axis))
            assert np.max(np.abs(pp @ pm)) <= 1e-12 and np.max(np.abs(pp + pm - ID2)) <= 1e-15
            assert np.max(np.abs(pp @ pp - pp)) <= 1e-12
            cases += 1
        noise = NoiseModel.dephasing(0.4, 1.3)
        ops = noise.operators(4)
        for k in range(1000):
            h, rho = random_hermitian(rng, 4), random_density(rng, 4)
            d = lindblad_rhs(h, rho, ops)
            assert np.array_equal(d, dagger(d)) and abs(np.trace(d)) <= 1e-12
            step = rho + 1e-3 * d
            assert abs(np.trace(step) - 1) <= 1e-12 and np.min(np.linalg.eigvalsh(step)) >= -1e-6
            cases += 1
        for k in range(1000):
            rho = random_density(rng, 4)
            out = depolarize(rho, k % 2, rng.uniform(0, 0.1))
            assert abs(np.trace(out) - 1) <= 1e-12 and is_hermitian(out) and np.min(np.linalg.eigvalsh(out)) >= -1e-12
            cases += 1
    assert cases == 10_000
