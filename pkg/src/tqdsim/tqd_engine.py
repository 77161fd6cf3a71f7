"""Transitionless driving Hamiltonians built from a tracked eigenbasis.

A :class:`SpectralTrajectory` follows the instantaneous eigensystem of a
reference Hamiltonian ``h0(t)``. Given a :class:`PhaseSchedule` (one real
function per level), :func:`generalized_tqd_hamiltonian` returns the unique
Hamiltonian whose propagator is

    U(t) = sum_n exp(i int_0^t theta_n) |n(t)><n(0)|,

namely ``H = sum_n [-theta_n |n><n| + i |dn><n|]``. Two phase choices are
special: the adiabatic phases reproduce ``h0 + H_cd`` and the geometric phases
``theta_n = i<n|dn>`` leave the counter-diabatic term alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .quantum_core import (
    DegeneracyError,
    dagger,
    eig_hermitian,
    fix_gauge,
    gauge_anchor,
    require_hermitian,
)

Hamiltonian = Callable[[float], np.ndarray]

DEGENERACY_GAP = 1e-10
CONTINUITY_MIN_OVERLAP = 0.999


class GaugeContinuityError(ValueError):
    """Consecutive grid samples of an eigenvector overlap too little."""


@dataclass(frozen=True)
class Frame:
    """Eigensystem of the reference Hamiltonian at one instant.

    ``vectors[:, n]`` is ``|n(t)>`` and ``derivatives[:, n]`` its time
    derivative, both in the trajectory gauge.
    """

    t: float
    energies: np.ndarray
    vectors: np.ndarray
    derivatives: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def geometric(self) -> np.ndarray:
        """``gamma_n = <dn|n>`` for every level (purely imaginary)."""
        return np.einsum("in,in->n", np.conj(self.derivatives), self.vectors)

    def projector(self, n: int) -> np.ndarray:
        v = self.vectors[:, n]
        return np.outer(v, np.conj(v))


def _check_gap(t: float, evals: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(evals))))
    gaps = np.diff(evals)
    if gaps.size and float(np.min(gaps)) < DEGENERACY_GAP * scale:
        raise DegeneracyError(
            f"reference Hamiltonian is degenerate at t = {t:.9g} s "
            f"(gap {float(np.min(gaps)):.3e}); a smooth eigenbasis does not exist"
        )


def _aligned_eigvecs(h: np.ndarray, anchors: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    evals, evecs = eig_hermitian(h)
    cols = [fix_gauge(evecs[:, k], anchor=anchors[k]) for k in range(len(evals))]
    return evals, np.column_stack(cols)


class SpectralTrajectory:
    """Gauge-fixed instantaneous eigensystem of ``h_of_t`` on ``[0, tau]``.

    The trajectory is sampled on a uniform grid of ``grid_size`` points for
    validation, and evaluated on demand at arbitrary times. Derivatives come
    either from a supplied analytic function or from finite differences with
    step ``tau / (grid_size - 1)``.

    Prefer :func:`spectral_trajectory` or the analytic constructors in
    :mod:`tqdsim.models` over calling this directly.
    """

    def __init__(self, h_of_t: Hamiltonian | None, tau: float, grid_size: int,
                 analytic: Callable[[float], tuple[np.ndarray, np.ndarray, np.ndarray]] | None = None):
        if grid_size < 3:
            raise ValueError("grid_size must be at least 3")
        if not tau > 0:
            raise ValueError("tau must be positive")
        if h_of_t is None and analytic is None:
            raise ValueError("need a Hamiltonian or an analytic eigensystem")
        self.h_of_t = h_of_t
        self.tau = float(tau)
        self.grid_size = int(grid_size)
        self.step = self.tau / (self.grid_size - 1)
        self._analytic = analytic
        self.times = np.linspace(0.0, self.tau, self.grid_size)
        self.frames = tuple(self._compute(float(t)) for t in self.times)
        self._check_continuity()

    @property
    def dim(self) -> int:
        return self.frames[0].dim

    def frame(self, t: float) -> Frame:
        """Eigensystem at ``t``; raises ``ValueError`` outside ``[0, tau]``."""
        t = float(t)
        if t < -1e-12 * self.tau or t > self.tau * (1 + 1e-12):
            raise ValueError(f"t = {t!r} lies outside [0, {self.tau!r}]")
        t = min(max(t, 0.0), self.tau)
        k = t / self.step
        kr = int(round(k))
        if abs(k - kr) < 1e-9:
            return self.frames[kr]
        return self._compute(t)

    def _compute(self, t: float) -> Frame:
        if self._analytic is not None:
            energies, vectors, derivs = self._analytic(t)
            energies = np.asarray(energies, dtype=float)
            _check_gap(t, energies)
            return Frame(t, energies, np.asarray(vectors, dtype=complex), np.asarray(derivs, dtype=complex))
        h = require_hermitian(self.h_of_t(t))
        evals, evecs = eig_hermitian(h)
        _check_gap(t, evals)
        anchors = [gauge_anchor(evecs[:, k]) for k in range(len(evals))]
        d = self.step

        def vecs(tt: float) -> np.ndarray:
            ev, vv = _aligned_eigvecs(self.h_of_t(tt), anchors)
            _check_gap(tt, ev)
            return vv

        if t - d >= 0.0 and t + d <= self.tau:
            dv = (vecs(t + d) - vecs(t - d)) / (2 * d)
        elif t + 2 * d <= self.tau:
            dv = (-3 * evecs + 4 * vecs(t + d) - vecs(t + 2 * d)) / (2 * d)
        else:
            dv = (3 * evecs - 4 * vecs(t - d) + vecs(t - 2 * d)) / (2 * d)
        return Frame(t, evals, evecs, dv)

    def _check_continuity(self) -> None:
        for a, b in zip(self.frames[:-1], self.frames[1:]):
            overlaps = np.abs(np.einsum("in,in->n", np.conj(a.vectors), b.vectors))
            worst = int(np.argmin(overlaps))
            if overlaps[worst] < CONTINUITY_MIN_OVERLAP:
                raise GaugeContinuityError(
                    f"level {worst} jumps between t = {a.t:.9g} s and t = {b.t:.9g} s "
                    f"(overlap {overlaps[worst]:.4f}); use a finer grid"
                )


def spectral_trajectory(h_of_t: Hamiltonian, tau: float, grid_size: int) -> SpectralTrajectory:
    """Numerically tracked eigensystem of ``h_of_t`` with finite-difference derivatives."""
    return SpectralTrajectory(h_of_t, tau, grid_size)


@dataclass(frozen=True)
class PhaseSchedule:
    """Free gauge functions ``theta_n(t)`` in rad/s, one per level."""

    thetas: tuple[Callable[[float], float], ...]
    label: str = field(default="custom", compare=False)

    def values(self, t: float) -> np.ndarray:
        out = np.empty(len(self.thetas))
        for n, fn in enumerate(self.thetas):
            v = complex(fn(t))
            if abs(v.imag) > 1e-9 * max(1.0, abs(v.real)):
                raise ValueError(f"theta_{n}({t!r}) = {v!r} is not real")
            out[n] = v.real
        return out

    def difference(self, t: float) -> float:
        """``theta_0(t) - theta_1(t)``, the only combination a two-level field sees."""
        v = self.values(t)
        return float(v[0] - v[1])

    def shifted(self, delta: Callable[[float], float], level: int) -> "PhaseSchedule":
        """Copy with ``delta(t)`` added to one level's phase."""
        fns = list(self.thetas)
        base = fns[level]
        fns[level] = lambda t, _b=base: _b(t) + delta(t)
        return PhaseSchedule(tuple(fns), label=self.label + "+shift")

    @classmethod
    def constant(cls, *values: float) -> "PhaseSchedule":
        return cls(tuple((lambda t, _v=float(v): _v) for v in values), label="constant")


def adiabatic_phase(traj: SpectralTrajectory, n: int, t: float) -> float:
    """Phase ``-E_n(t) - i gamma_n(t)`` accompanying exact adiabatic following."""
    f = traj.frame(t)
    if not 0 <= n < f.dim:
        raise IndexError(f"level {n} out of range for dimension {f.dim}")
    return float((-f.energies[n] - 1j * f.geometric[n]).real)


def geometric_phase(traj: SpectralTrajectory, n: int, t: float) -> float:
    """Phase ``i<n|dn> = -i gamma_n`` that cancels the diagonal part of H_cd."""
    f = traj.frame(t)
    return float((-1j * f.geometric[n]).real)


def adiabatic_phases(traj: SpectralTrajectory) -> PhaseSchedule:
    return PhaseSchedule(
        tuple((lambda t, _n=n: adiabatic_phase(traj, _n, t)) for n in range(traj.dim)),
        label="adiabatic",
    )


def geometric_phases(traj: SpectralTrajectory) -> PhaseSchedule:
    return PhaseSchedule(
        tuple((lambda t, _n=n: geometric_phase(traj, _n, t)) for n in range(traj.dim)),
        label="geometric",
    )


def _transport_term(f: Frame) -> np.ndarray:
    # Hermitian part of i sum_n |dn><n|; exact for exact derivatives
    a = f.derivatives @ dagger(f.vectors)
    return 0.5j * (a - dagger(a))


def generalized_tqd_hamiltonian(traj: SpectralTrajectory, phases: PhaseSchedule, t: float) -> np.ndarray:
    """Generalized transitionless Hamiltonian for the given phase schedule at time ``t``."""
    f = traj.frame(t)
    theta = phases.values(f.t)
    if len(theta) != f.dim:
        raise ValueError(f"phase schedule has {len(theta)} levels, trajectory has {f.dim}")
    diag = (f.vectors * (-theta)) @ dagger(f.vectors)
    return diag + _transport_term(f)


def counterdiabatic_hamiltonian(traj: SpectralTrajectory, t: float) -> np.ndarray:
    """Counter-diabatic term ``i sum_n (|dn><n| + gamma_n |n><n|)``."""
    f = traj.frame(t)
    weights = np.real(1j * f.geometric)
    return (f.vectors * weights) @ dagger(f.vectors) + _transport_term(f)


def standard_tqd_hamiltonian(h0: Hamiltonian, traj: SpectralTrajectory, t: float) -> np.ndarray:
    """``h0(t) + H_cd(t)``."""
    return np.asarray(h0(t), dtype=complex) + counterdiabatic_hamiltonian(traj, t)


def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def tqd_hamiltonian_function(traj: SpectralTrajectory, phases: PhaseSchedule) -> Hamiltonian:
    """Callable ``t -> H_gen(t)``, convenient for the propagators."""
    return lambda t: _hermitize(generalized_tqd_hamiltonian(traj, phases, t))


def level_populations(traj: SpectralTrajectory, t: float, psi: np.ndarray) -> np.ndarray:
    """``|<n(t)|psi>|^2`` for each tracked level."""
    f = traj.frame(t)
    return np.abs(dagger(f.vectors) @ psi) ** 2

