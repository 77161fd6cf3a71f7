"""Experiment presets: single-spin resonance, Z-gate time sweep, pulse compilation, digitization sweep.

Each runner takes a :class:`RunConfig`, writes CSV (and a plotting script)
into ``cfg.out`` and returns the list of files it wrote.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import models
from .dynamics import NoiseModel, propagate_lindblad, propagate_unitary, relative_purity
from .models import GateSpec, SpinModelParams
from .pulse_compiler import (
    DEFAULT_J,
    PulseSequence,
    canonical_protocol,
    compile as compile_program,
    continuous_unitary,
    digitization_error,
    energy_report,
    simulate,
)
from .quantum_core import normalize, projector

EXPERIMENTS = ("spin-resonance", "gate-z", "compile", "sweep")
OUTPUT_ENV = "TQDSIM_OUTPUT_DIR"
DEFAULT_OUTPUT = "tqdsim_output"
SHORT_NAMES = {"adiabatic": "adiabatic", "standard_tqd": "standard", "optimal_tqd": "optimal"}
PLUS = np.array([1.0, 1.0]) / math.sqrt(2.0)


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending line or field."""


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT)


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one CLI run.

    ``tau`` is the total time of the spin run, the largest time of the gate
    sweep (which starts at ``tau_min``), and the gate time for ``compile`` and
    ``sweep``. ``steps`` is the number of propagation steps per run (the
    reference resolution for ``compile`` and ``sweep``).
    """

    experiment: str = "spin-resonance"
    tau: float = models.SPIN_TOTAL_TIME
    tau_min: float = 1e-4
    points: int = 25
    steps: int = 10_000
    noise: bool = False
    t1: tuple[float, ...] = (models.T1_SPIN,)
    t2: tuple[float, ...] = (models.T2_SPIN,)
    protocols: tuple[str, ...] = ("adiabatic", "standard_tqd", "optimal_tqd")
    omega_z_hz: float = 200.0
    omega_xy_hz: float = 200.0
    omega_hz: float = 200.0
    nu: float = models.GATE_NU
    n_steps: int = 10
    n_values: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)
    coupling: float = DEFAULT_J
    pulse_error: float = 0.0
    out: str = DEFAULT_OUTPUT
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        self.validate()

    @classmethod
    def default(cls, experiment: str, **overrides) -> "RunConfig":
        """Preset for one experiment; ``overrides`` replace individual fields."""
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"field 'experiment': unknown experiment {experiment!r}")
        base: dict = {"experiment": experiment, "out": default_output_dir(), "workers": os.cpu_count() or 1}
        if experiment in ("gate-z", "compile", "sweep"):
            base.update(tau=12e-3, t1=(models.T1_CARBON, models.T1_HYDROGEN),
                        t2=(models.T2_CARBON, models.T2_HYDROGEN))
        if experiment == "gate-z":
            base.update(steps=400)
        base.update(overrides)
        return cls(**base)

    def validate(self) -> None:
        def bad(name: str, why: str) -> ConfigError:
            return ConfigError(f"field {name!r}: {why}")

        if self.experiment not in EXPERIMENTS:
            raise bad("experiment", f"unknown experiment {self.experiment!r}")
        if not self.tau > 0:
            raise bad("tau", "must be > 0")
        if not 0 < self.tau_min <= self.tau:
            raise bad("tau_min", "must lie in (0, tau]")
        if self.points < 1:
            raise bad("points", "must be >= 1")
        if self.steps < 10:
            raise bad("steps", "must be >= 10")
        if not self.protocols:
            raise bad("protocols", "must be nonempty")
        for p in self.protocols:
            try:
                canonical_protocol(p)
            except ValueError as exc:
                raise bad("protocols", str(exc)) from None
        for name in ("t1", "t2"):
            vals = getattr(self, name)
            if not vals or any(not v > 0 for v in vals):
                raise bad(name, "needs positive times")
        if self.experiment != "spin-resonance" and len(self.t2) != 2:
            raise bad("t2", "gate runs need one T2 per qubit (target, auxiliary)")
        if self.experiment == "spin-resonance" and len(self.t2) != 1:
            raise bad("t2", "the spin run has a single qubit")
        for name in ("omega_z_hz", "omega_xy_hz", "nu", "coupling"):
            if not getattr(self, name) > 0:
                raise bad(name, "must be > 0")
        if self.n_steps < 1 or not self.n_values or min(self.n_values) < 1:
            raise bad("n_steps" if self.n_steps < 1 else "n_values", "Trotter counts must be >= 1")
        if not 0.0 <= self.pulse_error <= 0.1:
            raise bad("pulse_error", "must lie in [0, 0.1]")
        if self.workers < 1:
            raise bad("workers", "must be >= 1")

    @property
    def canonical_protocols(self) -> tuple[str, ...]:
        return tuple(canonical_protocol(p) for p in self.protocols)

    @property
    def spin_params(self) -> SpinModelParams:
        two_pi = 2 * math.pi
        return SpinModelParams(two_pi * self.omega_hz, two_pi * self.omega_z_hz, two_pi * self.omega_xy_hz)

    def gate(self, tau: float | None = None) -> GateSpec:
        return GateSpec.z_gate(self.tau if tau is None else tau, self.nu)

    def noise_model(self) -> NoiseModel:
        return NoiseModel.dephasing(*self.t2, t1=self.t1)

    # -- flat key=value text ---------------------------------------------------

    def emit(self) -> str:
        lines = [f"{f.name} = {_format_value(getattr(self, f.name))}" for f in fields(self)]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, base: "RunConfig | None" = None) -> "RunConfig":
        """Read ``key = value`` lines (``#`` starts a comment) on top of ``base``."""
        types = {f.name: f.type for f in fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            key, val = (x.strip() for x in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown field {key!r}")
            try:
                values[key] = _parse_value(types[key], val)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: field {key!r}: {exc}") from None
        if base is None:
            base = cls.default(values.get("experiment", "spin-resonance"))
        try:
            return replace(base, **values)
        except ConfigError as exc:
            raise ConfigError(f"{exc} (from config text)") from None


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    return str(v)


def _parse_bool(v: str) -> bool:
    low = v.lower()
    if low in ("on", "true", "yes", "1"):
        return True
    if low in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {v!r}")


def _parse_value(type_name: str, v: str):
    t = str(type_name)
    if t == "bool":
        return _parse_bool(v)
    if t == "float":
        return float(v)
    if t == "int":
        return int(v)
    if t.startswith("tuple[float"):
        return tuple(float(x) for x in v.split(",") if x.strip())
    if t.startswith("tuple[int"):
        return tuple(int(x) for x in v.split(",") if x.strip())
    if t.startswith("tuple[str"):
        return tuple(x.strip() for x in v.split(",") if x.strip())
    return v


# -- output helpers ----------------------------------------------------------------


def format_number(x: float) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_number(v) if isinstance(v, (float, np.floating)) else str(v) for v in row) + "\n")
    return path


_PLOT_TEMPLATE = '''"""Plot {csv_name}; generated alongside the data."""
import csv
import matplotlib.pyplot as plt

with open({csv_name!r}) as fh:
    rows = list(csv.DictReader(fh))
x_key = {x_key!r}
for key in rows[0]:
    if key != x_key and key.startswith("F_"):
        plt.plot([float(r[x_key]) for r in rows], [float(r[key]) for r in rows], label=key)
plt.xlabel(x_key)
plt.ylabel("fidelity")
plt.legend()
plt.savefig({png_name!r}, dpi=150)
'''


def write_plot_script(csv_path: Path, x_key: str) -> Path:
    script = csv_path.with_name(f"plot_{csv_path.stem}.py")
    script.write_text(_PLOT_TEMPLATE.format(csv_name=csv_path.name, x_key=x_key,
                                            png_name=csv_path.stem + ".png"), encoding="ascii")
    return script


def _pool_map(fn: Callable, items: Sequence, workers: int) -> list:
    """Ordered map, in a process pool when ``workers > 1``."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


# -- single spin -------------------------------------------------------------------

_SPIN_HAMILTONIANS = {
    "adiabatic": models.h0_rotating,
    "standard_tqd": models.h_std_rotating,
    "optimal_tqd": models.h_opt_rotating,
}


def _spin_job(args: tuple) -> np.ndarray:
    cfg, protocol, open_system = args
    p = cfg.spin_params
    h = lambda t: _SPIN_HAMILTONIANS[protocol](p, t)
    psi0 = models.ground_state_h0(p, 0.0)
    if open_system:
        res = propagate_lindblad(h, projector(psi0), NoiseModel.dephasing(cfg.t2[0], t1=cfg.t1), cfg.tau, cfg.steps)
    else:
        res = propagate_unitary(h, psi0, cfg.tau, cfg.steps)
    refs = [models.ground_state_h0(p, float(t)) for t in res.times]
    return res.with_fidelity(refs).fidelities


def spin_fidelities(cfg: RunConfig) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Time grid and fidelity curves keyed ``F_<protocol>`` (plus ``F_<protocol>_open``)."""
    jobs = [(cfg, p, False) for p in cfg.canonical_protocols]
    if cfg.noise:
        jobs += [(cfg, p, True) for p in cfg.canonical_protocols]
    curves = _pool_map(_spin_job, jobs, cfg.workers)
    out = {}
    for (_, p, open_system), f in zip(jobs, curves):
        out[f"F_{SHORT_NAMES[p]}" + ("_open" if open_system else "")] = f
    return np.linspace(0.0, cfg.tau, cfg.steps + 1), out


def field_norm_rows(p: SpinModelParams, times: Sequence[float]) -> list[tuple]:
    rows = []
    for t in times:
        b0 = models.field_0(p, t).norm
        bs = models.field_std(p, t).norm
        bo = models.field_opt(p, t).norm
        rows.append((float(t), b0, bs, bo, b0 / bo))
    return rows


def run_spin_resonance(cfg: RunConfig) -> list[Path]:
    out = Path(cfg.out)
    times, curves = spin_fidelities(cfg)
    header = ["t_s"] + list(curves)
    rows = [[t] + [curves[k][i] for k in curves] for i, t in enumerate(times)]
    csv_path = write_csv(out / "spin_resonance.csv", header, rows)
    grid = np.linspace(0.0, cfg.tau, min(cfg.points, cfg.steps + 1))
    norms = write_csv(out / "spin_field_norms.csv", ["t_s", "norm_B0", "norm_B_std", "norm_B_opt", "ratio"],
                      field_norm_rows(cfg.spin_params, grid))
    return [csv_path, write_plot_script(csv_path, "t_s"), norms]


# -- Z gate ------------------------------------------------------------------------


def _gate_hamiltonian(protocol: str, g: GateSpec):
    if protocol == "adiabatic":
        return lambda t: models.z_gate_adiabatic_h(g, t / g.tau)
    if protocol == "standard_tqd":
        return lambda t: models.z_gate_standard_h(g, t / g.tau)
    h = models.z_gate_optimal_h(g)
    return lambda t: h


def gate_final_fidelity(g: GateSpec, protocol: str, steps: int, noise: NoiseModel | None = None,
                        target: np.ndarray = PLUS) -> float:
    """Relative purity of the final state against the ground state of ``H_Z`` at ``s = 1``."""
    psi0 = np.kron(normalize(target), np.array([1.0, 0.0]))
    h = _gate_hamiltonian(canonical_protocol(protocol), g)
    if noise is None:
        final = propagate_unitary(h, psi0, g.tau, steps).final_state
    else:
        final = propagate_lindblad(h, projector(psi0), noise, g.tau, steps).final_state
    return relative_purity(models.gate_ground_state(g, normalize(target), 1.0), final)


def _gate_job(args: tuple) -> float:
    cfg, tau, protocol, open_system = args
    noise = cfg.noise_model() if open_system else None
    return gate_final_fidelity(cfg.gate(tau), protocol, cfg.steps, noise)


def gate_taus(cfg: RunConfig) -> np.ndarray:
    return np.linspace(cfg.tau_min, cfg.tau, cfg.points)


def gate_fidelities(cfg: RunConfig) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    taus = gate_taus(cfg)
    variants = [False] + ([True] if cfg.noise else [])
    keys = [(p, o) for o in variants for p in cfg.canonical_protocols]
    jobs = [(cfg, float(tau), p, o) for p, o in keys for tau in taus]
    flat = _pool_map(_gate_job, jobs, cfg.workers)
    out = {}
    for k, (p, o) in enumerate(keys):
        out[f"F_{SHORT_NAMES[p]}" + ("_open" if o else "")] = np.array(flat[k * len(taus):(k + 1) * len(taus)])
    return taus, out


def run_gate_z(cfg: RunConfig) -> list[Path]:
    taus, curves = gate_fidelities(cfg)
    header = ["tau_s"] + list(curves)
    rows = [[t] + [curves[k][i] for k in curves] for i, t in enumerate(taus)]
    csv_path = write_csv(Path(cfg.out) / "gate_z.csv", header, rows)
    return [csv_path, write_plot_script(csv_path, "tau_s")]


# -- pulse programs ----------------------------------------------------------------


def program_fidelity(seq: PulseSequence, g: GateSpec, reference_steps: int, pulse_error: float = 0.0,
                     target: np.ndarray = PLUS) -> float:
    """Relative purity between the simulated program and the continuous protocol, from ``target (x) |0>``."""
    psi0 = np.kron(normalize(target), np.array([1.0, 0.0]))
    ref = continuous_unitary(seq.protocol, g, reference_steps) @ psi0
    final = simulate(seq, psi0, pulse_error).final_state
    return relative_purity(ref, final)


def run_compile(cfg: RunConfig) -> list[Path]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    g = cfg.gate()
    seqs = [compile_program(p, g, cfg.n_steps, cfg.coupling) for p in cfg.canonical_protocols]
    written = []
    for seq in seqs:
        path = out / f"program_{seq.protocol}.txt"
        path.write_text(seq.to_text(), encoding="ascii", newline="\n")
        written.append(path)
    rows = energy_report(seqs)
    table = [(r.protocol, r.n_steps, r.pulses, r.ledger, program_fidelity(s, g, cfg.steps, cfg.pulse_error))
             for r, s in zip(rows, seqs)]
    written.append(write_csv(out / "energy_report.csv", ["protocol", "N", "pulses", "ledger_E0", "F_vs_continuous"],
                             table))
    return written


def _sweep_job(args: tuple) -> list[tuple]:
    cfg, protocol = args
    g = cfg.gate()
    ref = continuous_unitary(protocol, g, cfg.steps)
    rows = []
    for n in cfg.n_values:
        seq = compile_program(protocol, g, n, cfg.coupling)
        rows.append((protocol, n, seq.rotation_count, seq.ledger, digitization_error(seq, ref),
                     program_fidelity(seq, g, cfg.steps, cfg.pulse_error) if cfg.pulse_error else
                     _ideal_fidelity(seq, ref)))
    return rows


def _ideal_fidelity(seq: PulseSequence, ref: np.ndarray) -> float:
    psi0 = np.kron(PLUS, np.array([1.0, 0.0]))
    return relative_purity(ref @ psi0, seq.unitary() @ psi0)


def run_sweep(cfg: RunConfig) -> list[Path]:
    """Digitization sweep: program error and ledger against the Trotter count ``N``."""
    groups = _pool_map(_sweep_job, [(cfg, p) for p in cfg.canonical_protocols], cfg.workers)
    rows = [r for grp in groups for r in grp]
    csv_path = write_csv(Path(cfg.out) / "digitization_sweep.csv",
                         ["protocol", "N", "pulses", "ledger_E0", "unitary_error", "F_vs_continuous"], rows)
    return [csv_path]


RUNNERS: dict[str, Callable[[RunConfig], list[Path]]] = {
    "spin-resonance": run_spin_resonance,
    "gate-z": run_gate_z,
    "compile": run_compile,
    "sweep": run_sweep,
}


def run(cfg: RunConfig) -> list[Path]:
    return RUNNERS[cfg.experiment](cfg)
