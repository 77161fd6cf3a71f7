"""Closed- and open-system propagation, and the relative-purity fidelity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .quantum_core import (
    ID2,
    SZ,
    DegeneracyError,
    dagger,
    eig_hermitian,
    expm_skew_hermitian,
    normalize,
    projector,
)

Hamiltonian = Callable[[float], np.ndarray]

GUARD_FACTOR = 20
POSITIVITY_FLOOR = -1e-6
GUARD_SAMPLES = 17


class StepSizeError(ArithmeticError):
    """The requested time step does not resolve the dynamics."""


def _embed(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for q in range(n_qubits):
        out = np.kron(out, op if q == qubit else ID2)
    return out


@dataclass(frozen=True)
class NoiseModel:
    """Markovian noise: pure dephasing per qubit, optionally amplitude damping.

    ``t2`` holds one dephasing time per qubit; ``L = sqrt(1/T2) Z`` on each.
    ``t1`` is recorded but only enters the generator when
    ``amplitude_damping`` is set, as an infinite-temperature channel with
    ``L = sqrt(1/(2 T1)) sigma_pm``.
    """

    t2: tuple[float, ...]
    t1: tuple[float, ...] | None = None
    amplitude_damping: bool = False
    extra: tuple[tuple[complex, np.ndarray], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if any(not t > 0 for t in self.t2):
            raise ValueError("T2 must be positive")
        if self.amplitude_damping and (self.t1 is None or any(not t > 0 for t in self.t1)):
            raise ValueError("amplitude damping needs positive T1 for every qubit")

    @classmethod
    def dephasing(cls, *t2: float, t1: Sequence[float] | None = None, amplitude_damping: bool = False) -> "NoiseModel":
        return cls(tuple(float(t) for t in t2), None if t1 is None else tuple(float(t) for t in t1), amplitude_damping)

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls((), None)

    @property
    def n_qubits(self) -> int:
        return len(self.t2)

    @property
    def gamma0(self) -> tuple[float, ...]:
        """Lindblad coefficients ``sqrt(1/T2)`` in s^-1/2."""
        return tuple(math.sqrt(1.0 / t) for t in self.t2)

    def operators(self, dim: int) -> list[np.ndarray]:
        """Lindblad operators (coefficients folded in) for a Hilbert space of dimension ``dim``."""
        ops: list[np.ndarray] = []
        if self.n_qubits:
            n = int(round(math.log2(dim)))
            if 2 ** n != dim or n != self.n_qubits:
                raise ValueError(f"noise model for {self.n_qubits} qubit(s) applied to dimension {dim}")
            for q, g in enumerate(self.gamma0):
                ops.append(g * _embed(SZ, q, n))
            if self.amplitude_damping:
                lower = np.array([[0, 0], [1, 0]], dtype=complex)
                for q, t1 in enumerate(self.t1):
                    k = math.sqrt(1.0 / (2.0 * t1))
                    ops.append(k * _embed(lower, q, n))
                    ops.append(k * _embed(lower.T.copy(), q, n))
        ops.extend(c * m for c, m in self.extra)
        return ops

    @property
    def shortest_time(self) -> float:
        times = list(self.t2)
        if self.amplitude_damping:
            times += list(self.t1)
        return min(times) if times else math.inf


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: np.ndarray
    fidelities: np.ndarray | None = None

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def with_fidelity(self, references: Sequence[np.ndarray]) -> "EvolutionResult":
        """Attach ``relative_purity(reference_k, state_k)`` at every grid point."""
        if len(references) != len(self.states):
            raise ValueError("one reference per grid point required")
        fid = np.array([relative_purity(r, s) for r, s in zip(references, self.states)])
        return EvolutionResult(self.times, self.states, fid)


def _as_density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return projector(state) if state.ndim == 1 else state


def propagator(h_of_t: Hamiltonian, tau: float, steps: int, t0: float = 0.0) -> np.ndarray:
    """Midpoint-rule product ``prod_j exp(-i H(t_j + dt/2) dt)``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = tau / steps
    u = None
    for j in range(steps):
        slice_u = expm_skew_hermitian(h_of_t(t0 + (j + 0.5) * dt), dt)
        u = slice_u if u is None else slice_u @ u
    return u


def propagate_unitary(h_of_t: Hamiltonian, psi0: np.ndarray, tau: float, steps: int) -> EvolutionResult:
    """Closed-system evolution on a uniform grid of ``steps + 1`` points.

    Each slice is the exact exponential of the Hamiltonian at the slice
    midpoint, which makes the scheme second order in the step.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    psi = normalize(psi0)
    dt = tau / steps
    times = np.linspace(0.0, tau, steps + 1)
    kets = np.empty((steps + 1, psi.size), dtype=complex)
    kets[0] = psi
    for j in range(steps):
        psi = expm_skew_hermitian(h_of_t((j + 0.5) * dt), dt) @ psi
        kets[j + 1] = psi
    states = np.einsum("ti,tj->tij", kets, np.conj(kets))
    return EvolutionResult(times, states)


def lindblad_rhs(h: np.ndarray, rho: np.ndarray, ops: Sequence[np.ndarray]) -> np.ndarray:
    """``-i[H, rho] + sum_k (L rho L^dag - {L^dag L, rho}/2)``, Hermitian by construction."""
    out = -1j * (h @ rho - rho @ h)
    for op in ops:
        od = dagger(op)
        odo = od @ op
        out += op @ rho @ od - 0.5 * (odo @ rho + rho @ odo)
    return 0.5 * (out + dagger(out))


def _spectral_norm(h: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (h + dagger(h))))))


def _guard(h_of_t: Hamiltonian, noise: NoiseModel, tau: float, steps: int) -> None:
    dt = tau / steps
    hmax = max(_spectral_norm(h_of_t(t)) for t in np.linspace(0.0, tau, GUARD_SAMPLES))
    limit = min(noise.shortest_time, 1.0 / hmax if hmax > 0 else math.inf) / GUARD_FACTOR
    if dt > limit:
        need = math.ceil(tau / limit)
        raise StepSizeError(f"time step {dt:.3e} s exceeds the resolution limit {limit:.3e} s; use >= {need} steps")


def propagate_lindblad(h_of_t: Hamiltonian, rho0: np.ndarray, noise: NoiseModel, tau: float,
                       steps: int) -> EvolutionResult:
    """Fixed-step fourth-order Runge-Kutta integration of the Lindblad equation.

    Raises
    ------
    StepSizeError
        If ``tau / steps`` is larger than ``min(T2, 1/|H|) / 20`` or a state
        loses positivity beyond -1e-6 during the run.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rho = _as_density(rho0).copy()
    ops = noise.operators(rho.shape[0])
    _guard(h_of_t, noise, tau, steps)
    dt = tau / steps
    times = np.linspace(0.0, tau, steps + 1)
    states = np.empty((steps + 1,) + rho.shape, dtype=complex)
    states[0] = rho
    for j in range(steps):
        t = j * dt
        h_a, h_m, h_b = h_of_t(t), h_of_t(t + 0.5 * dt), h_of_t(t + dt)
        k1 = lindblad_rhs(h_a, rho, ops)
        k2 = lindblad_rhs(h_m, rho + 0.5 * dt * k1, ops)
        k3 = lindblad_rhs(h_m, rho + 0.5 * dt * k2, ops)
        k4 = lindblad_rhs(h_b, rho + dt * k3, ops)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = 0.5 * (rho + dagger(rho))
        rho = rho / np.trace(rho).real
        lam = np.linalg.eigvalsh(rho)[0]
        if lam < POSITIVITY_FLOOR:
            raise StepSizeError(f"state lost positivity (eigenvalue {lam:.2e}) at t = {t + dt:.6g} s; use more steps")
        states[j + 1] = rho
    return EvolutionResult(times, states)


def relative_purity(rho_gs: np.ndarray, rho: np.ndarray) -> float:
    """``|tr(rho_gs rho)| / sqrt(tr(rho_gs^2) tr(rho^2))``; kets are promoted to projectors."""
    a, b = _as_density(rho_gs), _as_density(rho)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    pa = np.trace(a @ a).real
    pb = np.trace(b @ b).real
    if pa <= 0 or pb <= 0:
        raise ValueError("relative purity undefined for zero-purity input")
    val = abs(np.trace(a @ b)) / math.sqrt(pa * pb)
    return min(val, 1.0)


def ground_state_trajectory(h_of_t: Hamiltonian, tau: float, grid: int | Sequence[float]) -> list[np.ndarray]:
    """Projectors onto the instantaneous ground state, on ``grid`` points (or explicit times)."""
    times = np.linspace(0.0, tau, grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    out = []
    for t in times:
        evals, evecs = eig_hermitian(h_of_t(float(t)))
        scale = max(1.0, float(np.max(np.abs(evals))))
        if len(evals) > 1 and evals[1] - evals[0] < 1e-10 * scale:
            raise DegeneracyError(f"ground level is degenerate at t = {t:.9g} s")
        out.append(projector(evecs[:, 0]))
    return out


def depolarize(rho: np.ndarray, qubit: int, strength: float) -> np.ndarray:
    """Single-qubit depolarizing channel ``(1-p) rho + p (1/2) (x) tr_q rho`` on ``qubit``."""
    if strength == 0:
        return rho
    dim = rho.shape[0]
    n = int(round(math.log2(dim)))
    r = rho.reshape((2,) * (2 * n))
    traced = np.trace(r, axis1=qubit, axis2=n + qubit)
    # reinsert identity/2 on the traced qubit
    full = np.multiply.outer(traced, 0.5 * ID2)
    order = list(range(2 * n - 2))
    # full axes: rows(n-1), cols(n-1), q_row, q_col
    rows = order[: n - 1]
    cols = order[n - 1:]
    rows.insert(qubit, 2 * n - 2)
    cols.insert(qubit, 2 * n - 1)
    mixed = np.transpose(full, rows + cols).reshape(dim, dim)
    return (1 - strength) * rho + strength * mixed


def oscillation_envelope(times: np.ndarray, values: np.ndarray, center: float, window: float) -> float:
    """Peak-to-peak amplitude of ``values`` within ``center +- window/2``."""
    mask = np.abs(np.asarray(times) - center) <= window / 2
    if not np.any(mask):
        raise ValueError("window contains no samples")
    v = np.asarray(values)[mask]
    return float(np.max(v) - np.min(v))
