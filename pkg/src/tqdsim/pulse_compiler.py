"""Digitize the Z-gate protocols into NMR-style pulse programs.

Qubit 0 is the target, qubit 1 the auxiliary. A program is a list of

* ``rotation``: ``exp(-i (theta/2) n.sigma)`` on one qubit, with ``n`` in the
  xy-plane at angle ``phi`` or along z. Every rotation costs one unit ``E0``.
* ``frame_shift``: ``exp(-i (theta/2) Z)`` on one qubit, free of cost.
* ``free_evolution``: ``exp(-i (pi J / 2) dt Z(x)Z)``, free of cost.

A coupling ``exp(-i c Z(x)X)`` with ``c <= 0`` is realized as
``Ry(-pi/2) . ZZ(-c) . Ry(pi/2)`` on the auxiliary, so free-evolution times
are never negative. Within each protocol the ledger is fixed by construction:
``2(N+1)`` rotations for the adiabatic sweep, ``5N`` for the standard
transitionless sweep and 3 for the optimal one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dynamics import EvolutionResult, depolarize
from .dynamics import propagator
from .models import GateSpec, z_gate_adiabatic_h, z_gate_optimal_h, z_gate_standard_h
from .quantum_core import ID2, SZ, normalize, projector, sigma_xy, tensor

ROTATION = "rotation"
FRAME_SHIFT = "frame_shift"
FREE_EVOLUTION = "free_evolution"

PROTOCOLS = ("adiabatic", "standard_tqd", "optimal_tqd")
PROTOCOL_ALIASES = {
    "a": "adiabatic", "adiabatic": "adiabatic",
    "s": "standard_tqd", "standard": "standard_tqd", "standard_tqd": "standard_tqd",
    "o": "optimal_tqd", "optimal": "optimal_tqd", "optimal_tqd": "optimal_tqd",
}
DEFAULT_J = 215.0
TARGET, AUX = 0, 1
HALF_PI = 0.5 * math.pi


def canonical_protocol(name: str) -> str:
    try:
        return PROTOCOL_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}") from None


def wrap_angle(theta: float) -> float:
    """Map ``theta`` into ``(-2 pi, 2 pi]`` modulo ``4 pi`` (exact for SU(2) rotations)."""
    w = math.fmod(theta, 4 * math.pi)
    if w > 2 * math.pi:
        w -= 4 * math.pi
    elif w <= -2 * math.pi:
        w += 4 * math.pi
    return w


@dataclass(frozen=True)
class PulseOp:
    kind: str
    qubit: int | None = None
    theta: float = 0.0
    phi: float | None = None
    dt: float = 0.0
    coupling: float = 0.0

    def __post_init__(self):
        if self.kind not in (ROTATION, FRAME_SHIFT, FREE_EVOLUTION):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.kind == FREE_EVOLUTION:
            if self.dt < 0:
                raise ValueError("free evolution duration must be >= 0")
            if not self.coupling > 0:
                raise ValueError("coupling J must be positive")
        else:
            if self.qubit not in (0, 1):
                raise ValueError("qubit must be 0 or 1")
            if not -2 * math.pi < self.theta <= 2 * math.pi:
                raise ValueError(f"angle {self.theta!r} outside (-2pi, 2pi]")

    @classmethod
    def rotation(cls, qubit: int, phi: float | None, theta: float) -> "PulseOp":
        """Rotation by ``theta`` about the xy axis at angle ``phi`` (``None`` for z)."""
        return cls(ROTATION, qubit, wrap_angle(theta), phi)

    @classmethod
    def frame_shift(cls, qubit: int, theta: float) -> "PulseOp":
        return cls(FRAME_SHIFT, qubit, wrap_angle(theta))

    @classmethod
    def free(cls, dt: float, coupling: float) -> "PulseOp":
        return cls(FREE_EVOLUTION, None, 0.0, None, float(dt), float(coupling))

    @property
    def is_rotation(self) -> bool:
        return self.kind == ROTATION

    def single_qubit_matrix(self) -> np.ndarray:
        if self.kind == FREE_EVOLUTION:
            raise ValueError("free evolution acts on both qubits")
        gen = SZ if self.phi is None else sigma_xy(self.phi)
        c, s = math.cos(self.theta / 2), math.sin(self.theta / 2)
        return c * ID2 - 1j * s * gen

    def unitary(self) -> np.ndarray:
        """4x4 unitary of this operation."""
        if self.kind == FREE_EVOLUTION:
            phase = 0.5 * math.pi * self.coupling * self.dt
            d = np.exp(-1j * phase * np.array([1.0, -1.0, -1.0, 1.0]))
            return np.diag(d)
        m = self.single_qubit_matrix()
        return tensor(m, ID2) if self.qubit == 0 else tensor(ID2, m)

    def to_line(self) -> str:
        if self.kind == ROTATION:
            axis = "z" if self.phi is None else f"xy:{self.phi:.17g}"
            return f"ROT q={self.qubit} axis={axis} theta={self.theta:.17g}"
        if self.kind == FRAME_SHIFT:
            return f"FRAME q={self.qubit} theta={self.theta:.17g}"
        return f"FREE dt={self.dt:.17g} J={self.coupling:.17g}"

    @classmethod
    def from_line(cls, line: str) -> "PulseOp":
        head, *fields = line.split()
        kv = dict(f.split("=", 1) for f in fields)
        try:
            if head == "ROT":
                axis = kv["axis"]
                phi = None if axis == "z" else float(axis.split(":", 1)[1])
                return cls(ROTATION, int(kv["q"]), float(kv["theta"]), phi)
            if head == "FRAME":
                return cls(FRAME_SHIFT, int(kv["q"]), float(kv["theta"]))
            if head == "FREE":
                return cls(FREE_EVOLUTION, None, 0.0, None, float(kv["dt"]), float(kv["J"]))
        except (KeyError, IndexError, ValueError) as exc:
            raise ValueError(f"malformed pulse line {line!r}: {exc}") from None
        raise ValueError(f"unknown pulse line {line!r}")


@dataclass(frozen=True)
class PulseSequence:
    ops: tuple[PulseOp, ...]
    protocol: str
    n_steps: int
    e0: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def rotation_count(self) -> int:
        return sum(1 for op in self.ops if op.is_rotation)

    @property
    def ledger(self) -> float:
        """Energy spent, in the same units as ``e0``."""
        return self.e0 * self.rotation_count

    def unitary(self) -> np.ndarray:
        u = np.eye(4, dtype=complex)
        for op in self.ops:
            u = op.unitary() @ u
        return u

    def to_text(self) -> str:
        head = (f"# protocol={self.protocol} N={self.n_steps} E0={self.e0:.17g} "
                f"ledger={self.ledger:.17g}")
        return "\n".join([head] + [op.to_line() for op in self.ops]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PulseSequence":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("#"):
            raise ValueError("pulse program must start with a '# protocol=...' header")
        kv = dict(f.split("=", 1) for f in lines[0][1:].split())
        seq = cls(tuple(PulseOp.from_line(ln) for ln in lines[1:]), kv["protocol"], int(kv["N"]), float(kv["E0"]))
        if "ledger" in kv and float(kv["ledger"]) != seq.ledger:
            raise ValueError(f"header ledger {kv['ledger']} disagrees with {seq.rotation_count} rotation(s)")
        return seq

    def with_frame_shifts(self, shifts: Iterable[tuple[int, PulseOp]]) -> "PulseSequence":
        """Copy with frame shifts inserted before the given op indices."""
        ops = list(self.ops)
        for index, op in sorted(shifts, key=lambda x: -x[0]):
            if op.kind != FRAME_SHIFT:
                raise ValueError("only frame shifts may be inserted")
            ops.insert(index, op)
        return PulseSequence(tuple(ops), self.protocol, self.n_steps, self.e0, dict(self.meta))


def _zz(phase: float, coupling: float) -> PulseOp:
    """Free evolution implementing ``exp(-i phase Z(x)Z)``, ``phase >= 0``."""
    return PulseOp.free(2.0 * phase / (math.pi * coupling), coupling)


def _ry(theta: float) -> PulseOp:
    return PulseOp.rotation(AUX, HALF_PI, theta)


def _rx(theta: float) -> PulseOp:
    return PulseOp.rotation(AUX, 0.0, theta)


def _zx_block(strength: float, coupling: float) -> list[PulseOp]:
    """``exp(+i strength Z(x)X)`` for ``strength >= 0``."""
    return [_ry(HALF_PI), _zz(strength, coupling), _ry(-HALF_PI)]


def _zy_block(strength: float, coupling: float) -> list[PulseOp]:
    """``exp(-i strength Z(x)Y)`` for ``strength >= 0``."""
    return [_rx(HALF_PI), _zz(strength, coupling), _rx(-HALF_PI)]


def _is_inverse_pair(a: PulseOp, b: PulseOp) -> bool:
    return (a.is_rotation and b.is_rotation and a.qubit == b.qubit and a.phi == b.phi
            and a.theta == -b.theta)


def merge_adjacent(ops: Sequence[PulseOp]) -> list[PulseOp]:
    """Cancel back-to-back inverse rotations and join consecutive free evolutions."""
    out: list[PulseOp] = []
    for op in ops:
        if out and _is_inverse_pair(out[-1], op):
            out.pop()
            continue
        if (out and op.kind == FREE_EVOLUTION and out[-1].kind == FREE_EVOLUTION
                and out[-1].coupling == op.coupling):
            out[-1] = PulseOp.free(out[-1].dt + op.dt, op.coupling)
            continue
        out.append(op)
    return out


def _slice_terms(g: GateSpec, n_steps: int, j: int) -> tuple[float, float, float]:
    """Slice ``j`` midpoint: step, Z-field coefficient, ZX coupling magnitude."""
    step = g.tau / n_steps
    s = (j + 0.5) / n_steps
    return step, -g.omega * math.cos(math.pi * s), g.omega * math.sin(math.pi * s)


def _adiabatic_ops(g: GateSpec, n_steps: int, coupling: float) -> list[PulseOp]:
    # per slice: ZX/2, Z frame shift, ZX/2; neighbouring half blocks cancel their basis pulses
    raw: list[PulseOp] = []
    for j in range(n_steps):
        step, a, b = _slice_terms(g, n_steps, j)
        half = _zx_block(0.5 * b * step, coupling)
        raw += half + [PulseOp.frame_shift(AUX, 2.0 * a * step)] + half
    return merge_adjacent(raw)


def _standard_ops(g: GateSpec, n_steps: int, coupling: float) -> list[PulseOp]:
    # per slice: [ZX/2, Z, ZX/2] inside the Ry frame, where the Z field is an x pulse; then the ZY term
    kick = math.pi / (2 * g.tau)
    raw: list[PulseOp] = []
    for j in range(n_steps):
        step, a, b = _slice_terms(g, n_steps, j)
        zz_half = _zz(0.5 * b * step, coupling)
        raw += [_ry(HALF_PI), zz_half, _rx(2.0 * a * step), zz_half, _ry(-HALF_PI)]
        raw += _zy_block(kick * step, coupling)
    return merge_adjacent(raw)


def _optimal_ops(g: GateSpec, coupling: float) -> list[PulseOp]:
    # exp(-i pi/2 Z(x)Y) = W ZZ W^dag with W = Rz(pi/2) Ry(pi/2); W^dag's Rz acts on the aux |0>
    # as a phase and moves to the end as the auxiliary z correction
    return [_ry(-HALF_PI), _zz(HALF_PI, coupling), _ry(HALF_PI), PulseOp.rotation(AUX, None, HALF_PI)]


def compile(protocol: str, g: GateSpec, n_steps: int = 10, coupling: float = DEFAULT_J,
            e0: float = 1.0) -> PulseSequence:
    """Pulse program for one gate protocol.

    Parameters
    ----------
    protocol : str
        ``adiabatic``, ``standard_tqd`` or ``optimal_tqd`` (short aliases accepted).
    g : GateSpec
        Must be the Z gate (rotation by pi about z).
    n_steps : int
        Trotter repetitions; ignored by the optimal protocol.
    coupling : float
        Scalar coupling ``J`` in Hz.
    """
    protocol = canonical_protocol(protocol)
    if not coupling > 0:
        raise ValueError("coupling J must be positive")
    if not g.is_z_gate:
        raise ValueError("only the Z gate (epsilon = 0, phi = pi) can be digitized")
    if protocol != "optimal_tqd" and n_steps < 1:
        raise ValueError("N must be >= 1")
    if protocol == "adiabatic":
        ops = _adiabatic_ops(g, n_steps, coupling)
    elif protocol == "standard_tqd":
        ops = _standard_ops(g, n_steps, coupling)
    else:
        ops = _optimal_ops(g, coupling)
    return PulseSequence(tuple(ops), protocol, int(n_steps), e0, {"tau": g.tau, "nu": g.nu, "J": coupling})


def expected_rotation_count(protocol: str, n_steps: int) -> int:
    protocol = canonical_protocol(protocol)
    return {"adiabatic": 2 * (n_steps + 1), "standard_tqd": 5 * n_steps, "optimal_tqd": 3}[protocol]


def simulate(seq: PulseSequence, psi0: np.ndarray, pulse_error: float = 0.0) -> EvolutionResult:
    """Apply the program op by op; rotations are followed by a depolarizing error of ``pulse_error``.

    The returned trajectory has one state per op plus the initial state; the
    time axis is the op index.
    """
    if not 0.0 <= pulse_error <= 0.1:
        raise ValueError("pulse_error must lie in [0, 0.1]")
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape[0] != 4:
        raise ValueError("pulse programs act on two qubits")
    rho = projector(normalize(psi0)) if psi0.ndim == 1 else psi0.astype(complex)
    states = [rho]
    for op in seq.ops:
        u = op.unitary()
        rho = u @ rho @ u.conj().T
        if op.is_rotation and pulse_error:
            rho = depolarize(rho, op.qubit, pulse_error)
        states.append(rho)
    return EvolutionResult(np.arange(len(states), dtype=float), np.array(states))


@dataclass(frozen=True)
class ReportRow:
    protocol: str
    n_steps: int
    pulses: int
    ledger: float


def energy_report(seqs: Sequence[PulseSequence]) -> list[ReportRow]:
    """Tabulate pulse counts and ledgers.

    Checks the ledger ordering at every ``N >= 2`` present: ``N`` times the
    optimal ledger must not exceed the standard ledger, and the optimal ledger
    must stay below the adiabatic one (``3 N <= 2 (N + 1)`` only holds up to
    ``N = 2``, so the factor ``N`` is not demanded there). Raises
    ``ValueError`` on a violation.
    """
    rows = [ReportRow(s.protocol, s.n_steps, s.rotation_count, s.ledger) for s in seqs]
    opt = [r for r in rows if r.protocol == "optimal_tqd"]
    for r in rows:
        if r.protocol == "optimal_tqd" or r.n_steps < 2:
            continue
        for o in opt:
            bound = o.ledger * r.n_steps if r.protocol == "standard_tqd" else o.ledger
            if bound > r.ledger:
                raise ValueError(f"optimal ledger {o.ledger:g} breaks the ordering against "
                                 f"{r.protocol} ({r.ledger:g}) at N = {r.n_steps}")
    return rows


def format_report(rows: Sequence[ReportRow]) -> str:
    lines = ["protocol,N,pulses,ledger_E0"]
    lines += [f"{r.protocol},{r.n_steps},{r.pulses},{r.ledger:.17g}" for r in rows]
    return "\n".join(lines) + "\n"


def continuous_hamiltonian(protocol: str, g: GateSpec):
    """``t -> H(t)`` of the continuous protocol that a program digitizes."""
    protocol = canonical_protocol(protocol)
    if protocol == "adiabatic":
        return lambda t: z_gate_adiabatic_h(g, t / g.tau)
    if protocol == "standard_tqd":
        return lambda t: z_gate_standard_h(g, t / g.tau)
    h = z_gate_optimal_h(g)
    return lambda t: h


def continuous_unitary(protocol: str, g: GateSpec, steps: int = 10_000) -> np.ndarray:
    """Reference propagator; the optimal Hamiltonian is constant, so one exact step suffices."""
    if canonical_protocol(protocol) == "optimal_tqd":
        steps = 1
    return propagator(continuous_hamiltonian(protocol, g), g.tau, steps)


AUX_GROUND_COLUMNS = (0, 2)


def digitization_error(seq: PulseSequence, reference: np.ndarray) -> float:
    """Distance between program and reference on inputs with the auxiliary in ``|0>``.

    ``min_chi || (U_ref - exp(i chi) U_prog) P ||_F`` where ``P`` projects the
    auxiliary onto ``|0>``; the optimal program differs from its continuous
    Hamiltonian by an auxiliary z rotation that is invisible on that subspace.
    """
    a = reference[:, AUX_GROUND_COLUMNS]
    b = seq.unitary()[:, AUX_GROUND_COLUMNS]
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def convergence_order(ns: Sequence[int], errors: Sequence[float]) -> float:
    """Least-squares slope of ``-log(error)`` against ``log(N)``."""
    x, y = np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float))
    return float(-np.polyfit(x, y, 1)[0])
