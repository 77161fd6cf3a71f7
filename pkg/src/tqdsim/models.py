"""Model Hamiltonians: a spin in a rotating field, and the controlled gate family.

Fields are stored as ``-gamma * B`` in rad/s, so a field ``b`` corresponds to
the Hamiltonian ``(1/2) b . sigma`` (hbar = 1). With this convention the
field of ``H0`` is simply ``(w_xy cos wt, w_xy sin wt, w_z)``.

The gate family acts on target (first tensor factor) times auxiliary qubit.
Basis index 0 of every qubit is ``|0>`` = spin up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .quantum_core import ID2, SX, SY, SZ, bloch_operator, expm_skew_hermitian, sigma_xy, tensor
from .tqd_engine import PhaseSchedule, SpectralTrajectory

TWO_PI = 2.0 * math.pi

RESONANT_FREQUENCY = TWO_PI * 200.0
SPIN_TOTAL_TIME = 50e-3
T2_SPIN = 0.25
T1_SPIN = 5.11

GATE_NU = 35.0
T1_CARBON, T2_CARBON = 7.33, 4.99
T1_HYDROGEN, T2_HYDROGEN = 14.52, 0.77


# ---------------------------------------------------------------------------
# single spin in a rotating field
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpinModelParams:
    """Rotating frequency ``omega`` and field frequencies ``omega_z``, ``omega_xy`` (rad/s)."""

    omega: float = RESONANT_FREQUENCY
    omega_z: float = RESONANT_FREQUENCY
    omega_xy: float = RESONANT_FREQUENCY

    @property
    def alpha(self) -> float:
        """Polar angle of the static part of the field, ``arctan(w_xy / w_z)``."""
        return math.atan2(self.omega_xy, self.omega_z)

    @property
    def level_splitting(self) -> float:
        return math.hypot(self.omega_z, self.omega_xy)


@dataclass(frozen=True)
class FieldVector:
    """Three field components in angular-frequency units (``-gamma B``)."""

    bx: float
    by: float
    bz: float
    gamma: float | None = None

    @property
    def norm(self) -> float:
        return math.sqrt(self.bx ** 2 + self.by ** 2 + self.bz ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([self.bx, self.by, self.bz])

    def to_operator(self) -> np.ndarray:
        return 0.5 * bloch_operator((self.bx, self.by, self.bz))

    @classmethod
    def from_operator(cls, h: np.ndarray) -> "FieldVector":
        """Field of the traceless part of a 2x2 Hamiltonian."""
        h = np.asarray(h, dtype=complex)
        return cls(float(np.trace(h @ SX).real), float(np.trace(h @ SY).real), float(np.trace(h @ SZ).real))


def _rotating(transverse: float, z: float, angle: float) -> FieldVector:
    return FieldVector(transverse * math.cos(angle), transverse * math.sin(angle), z)


def h0_rotating(p: SpinModelParams, t: float) -> np.ndarray:
    """``(1/2)[w_z Z + w_xy (X cos wt + Y sin wt)]``."""
    return 0.5 * (p.omega_z * SZ + p.omega_xy * sigma_xy(p.omega * t))


def h_rf(p: SpinModelParams, phi: float) -> np.ndarray:
    """Rotating-frame pulse Hamiltonian with RF phase ``phi``."""
    return 0.5 * (p.omega_z * SZ + p.omega_xy * sigma_xy(phi))


def field_0(p: SpinModelParams, t: float) -> FieldVector:
    return _rotating(p.omega_xy, p.omega_z, p.omega * t)


def field_std(p: SpinModelParams, t: float) -> FieldVector:
    """Field of the standard transitionless Hamiltonian ``H0 + H_cd``."""
    a = p.alpha
    return _rotating(p.omega_xy - math.sin(2 * a) * p.omega / 2, p.omega_z + p.omega * math.sin(a) ** 2, p.omega * t)


def field_opt(p: SpinModelParams, t: float) -> FieldVector:
    """Minimal-intensity transitionless field (the counter-diabatic field alone)."""
    a = p.alpha
    return _rotating(-(p.omega / 2) * math.sin(2 * a), p.omega * math.sin(a) ** 2, p.omega * t)


def field_generalized(p: SpinModelParams, theta: Callable[[float], float], t: float) -> FieldVector:
    """Generalized transitionless field for a level-phase difference ``theta(t) = theta_0 - theta_1``."""
    a = p.alpha
    th = float(theta(t))
    return _rotating(th * math.sin(a), p.omega + th * math.cos(a), p.omega * t)


def norm_ratio(p: SpinModelParams) -> float:
    """``|B0| / |B_opt| = (w_xy^2 + w_z^2) / (w_xy w)``."""
    den = p.omega_xy * p.omega
    if den == 0:
        raise ZeroDivisionError("norm ratio needs nonzero omega_xy and omega")
    return (p.omega_xy ** 2 + p.omega_z ** 2) / den


def h_std_rotating(p: SpinModelParams, t: float) -> np.ndarray:
    return field_std(p, t).to_operator()


def h_opt_rotating(p: SpinModelParams, t: float) -> np.ndarray:
    return field_opt(p, t).to_operator()


def spin_eigensystem(p: SpinModelParams, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form energies, gauge-fixed eigenvectors and their time derivatives for ``H0``."""
    half = 0.5 * p.alpha
    c, s = math.cos(half), math.sin(half)
    w = p.omega
    ph = complex(math.cos(w * t), math.sin(w * t))
    ground = np.array([s, -c * ph])
    excited = np.array([c, s * ph])
    d_ground = np.array([0.0, -1j * w * c * ph])
    d_excited = np.array([0.0, 1j * w * s * ph])
    e = 0.5 * p.level_splitting
    return (np.array([-e, e]), np.column_stack([ground, excited]), np.column_stack([d_ground, d_excited]))


def ground_state_h0(p: SpinModelParams, t: float) -> np.ndarray:
    """``cos(a/2)|down> - sin(a/2)|up>`` rotated to time ``t``, up to a global phase."""
    return spin_eigensystem(p, t)[1][:, 0]


def spin_trajectory(p: SpinModelParams, tau: float = SPIN_TOTAL_TIME, grid_size: int = 1001) -> SpectralTrajectory:
    """Analytic spectral trajectory of ``H0`` (exact derivatives)."""
    return SpectralTrajectory(lambda t: h0_rotating(p, t), tau, grid_size,
                              analytic=lambda t: spin_eigensystem(p, t))


# ---------------------------------------------------------------------------
# controlled single-qubit gates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GateSpec:
    """Rotation by ``phi`` about the Bloch axis ``(epsilon, delta)``, run over time ``tau``.

    ``nu`` is the energy scale in Hz; ``omega = 2 pi nu``.
    """

    epsilon: float = 0.0
    delta: float = 0.0
    phi: float = math.pi
    nu: float = GATE_NU
    tau: float = 12e-3

    @classmethod
    def z_gate(cls, tau: float = 12e-3, nu: float = GATE_NU) -> "GateSpec":
        return cls(0.0, 0.0, math.pi, nu, tau)

    @property
    def omega(self) -> float:
        return TWO_PI * self.nu

    @property
    def axis(self) -> np.ndarray:
        e, d = self.epsilon, self.delta
        return np.array([math.sin(e) * math.cos(d), math.sin(e) * math.sin(d), math.cos(e)])

    @property
    def n_plus(self) -> np.ndarray:
        return np.array([math.cos(self.epsilon / 2), np.exp(1j * self.delta) * math.sin(self.epsilon / 2)])

    @property
    def p_plus(self) -> np.ndarray:
        return 0.5 * (ID2 + bloch_operator(self.axis))

    @property
    def p_minus(self) -> np.ndarray:
        return 0.5 * (ID2 - bloch_operator(self.axis))

    @property
    def is_z_gate(self) -> bool:
        return abs(self.epsilon) < 1e-15 and abs(math.remainder(self.phi - math.pi, TWO_PI)) < 1e-15

    def target_unitary(self) -> np.ndarray:
        """``exp(-i phi r.sigma / 2)``."""
        return expm_skew_hermitian(bloch_operator(self.axis), self.phi / 2)

    def blocks(self) -> tuple[tuple[np.ndarray, float], tuple[np.ndarray, float]]:
        """``((P+, 0), (P-, phi))``: projector and block angle ``xi``."""
        return (self.p_plus, 0.0), (self.p_minus, self.phi)


def _check_s(s: float) -> float:
    s = float(s)
    if not -1e-12 <= s <= 1 + 1e-12:
        raise ValueError(f"normalized time s = {s!r} outside [0, 1]")
    return min(max(s, 0.0), 1.0)


def _sweep_axis(xi: float, s: float) -> np.ndarray:
    ps = math.pi * s
    return np.array([math.sin(ps) * math.cos(xi), math.sin(ps) * math.sin(xi), math.cos(ps)])


def gate_hxi(g: GateSpec, xi: float, s: float) -> np.ndarray:
    """``-w [cos(pi s) Z + sin(pi s) sigma_xy(xi)]``."""
    s = _check_s(s)
    return -g.omega * (math.cos(math.pi * s) * SZ + math.sin(math.pi * s) * sigma_xy(xi))


def gate_cd_xi(g: GateSpec, xi: float) -> np.ndarray:
    """Time-independent counter-diabatic term ``-(pi / 2 tau)(sin xi X - cos xi Y)`` of ``H^xi``."""
    return -(math.pi / (2 * g.tau)) * (math.sin(xi) * SX - math.cos(xi) * SY)


def _controlled(g: GateSpec, block: Callable[[float], np.ndarray]) -> np.ndarray:
    (pp, x0), (pm, x1) = g.blocks()
    return tensor(pp, block(x0)) + tensor(pm, block(x1))


def gate_adiabatic_h(g: GateSpec, s: float) -> np.ndarray:
    """``P+ (x) H^0(s) + P- (x) H^phi(s)``."""
    return _controlled(g, lambda xi: gate_hxi(g, xi, s))


def gate_standard_h(g: GateSpec, s: float) -> np.ndarray:
    return _controlled(g, lambda xi: gate_hxi(g, xi, s) + gate_cd_xi(g, xi))


def gate_optimal_h(g: GateSpec) -> np.ndarray:
    return _controlled(g, lambda xi: gate_cd_xi(g, xi))


BlockPhases = Union[PhaseSchedule, Sequence[PhaseSchedule]]


def gate_generalized_block(g: GateSpec, phases: PhaseSchedule, xi: float, s: float) -> np.ndarray:
    """Generalized transitionless Hamiltonian of one block.

    Level 0 is the ground state of ``H^xi`` (Bloch vector along the sweep
    axis ``m``), level 1 the excited one, so

        H = -(theta_0 + theta_1)/2 - (Theta/2) m.sigma + H_cd^xi,  Theta = theta_0 - theta_1.
    """
    s = _check_s(s)
    th = phases.values(s * g.tau)
    m = bloch_operator(_sweep_axis(xi, s))
    return -0.5 * (th[0] + th[1]) * ID2 - 0.5 * (th[0] - th[1]) * m + gate_cd_xi(g, xi)


def gate_generalized_h(g: GateSpec, phases: BlockPhases, s: float) -> np.ndarray:
    """Controlled generalized Hamiltonian; ``phases`` is one schedule or a (P+, P-) pair."""
    if isinstance(phases, PhaseSchedule):
        pair = (phases, phases)
    else:
        pair = tuple(phases)
        if len(pair) != 2:
            raise ValueError("expected one phase schedule or a pair of them")
    (pp, x0), (pm, x1) = g.blocks()
    return tensor(pp, gate_generalized_block(g, pair[0], x0, s)) + tensor(pm, gate_generalized_block(g, pair[1], x1, s))


def gate_adiabatic_phases(g: GateSpec) -> PhaseSchedule:
    """``theta_n = -E_n`` (the Berry term vanishes in the planar sweep)."""
    return PhaseSchedule.constant(g.omega, -g.omega)


def gate_geometric_phases(g: GateSpec) -> PhaseSchedule:
    return PhaseSchedule.constant(0.0, 0.0)


def gate_block_eigensystem(g: GateSpec, xi: float, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Energies, eigenvectors and time derivatives of ``H^xi(t / tau)`` in a gauge continuous on ``[0, tau]``."""
    s = _check_s(t / g.tau)
    half = 0.5 * math.pi * s
    rate = 0.5 * math.pi / g.tau
    c, sn = math.cos(half), math.sin(half)
    e = np.exp(1j * xi)
    ground = np.array([c, e * sn])
    excited = np.array([sn, -e * c])
    d_ground = rate * np.array([-sn, e * c])
    d_excited = rate * np.array([c, e * sn])
    return (np.array([-g.omega, g.omega]), np.column_stack([ground, excited]),
            np.column_stack([d_ground, d_excited]))


def gate_block_trajectory(g: GateSpec, xi: float, grid_size: int = 1001) -> SpectralTrajectory:
    """Analytic spectral trajectory of the block Hamiltonian ``H^xi(t / tau)``."""
    return SpectralTrajectory(lambda t: gate_hxi(g, xi, t / g.tau), g.tau, grid_size,
                              analytic=lambda t: gate_block_eigensystem(g, xi, t))


def gate_ground_state(g: GateSpec, psi: np.ndarray, s: float) -> np.ndarray:
    """Adiabatically continued ground state ``sum_pm P_pm psi (x) |E_0^xi(s)>``.

    ``H(s)`` is doubly degenerate, so the reference state in the ground
    manifold is fixed by the input ``psi`` and by continuity in ``s``. At
    ``s = 1`` it equals ``(U psi) (x) |1>`` up to a global phase.
    """
    out = np.zeros(4, dtype=complex)
    for proj, xi in g.blocks():
        out += np.kron(proj @ psi, gate_block_eigensystem(g, xi, s * g.tau)[1][:, 0])
    return out


def z_gate_adiabatic_h(g: GateSpec, s: float) -> np.ndarray:
    """Closed form ``-w [cos(pi s) 1 (x) Z + sin(pi s) Z (x) X]`` of the Z-gate sweep."""
    s = _check_s(s)
    return -g.omega * (math.cos(math.pi * s) * tensor(ID2, SZ) + math.sin(math.pi * s) * tensor(SZ, SX))


def z_gate_optimal_h(g: GateSpec) -> np.ndarray:
    """``(pi / 2 tau) Z (x) Y``."""
    return (math.pi / (2 * g.tau)) * tensor(SZ, SY)


def z_gate_standard_h(g: GateSpec, s: float) -> np.ndarray:
    return z_gate_adiabatic_h(g, s) + z_gate_optimal_h(g)
