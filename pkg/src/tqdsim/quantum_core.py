"""Dense linear algebra for two- and four-dimensional spin operators.

Everything here works on plain ``numpy`` complex arrays. Energies are carried
in angular-frequency units with hbar = 1, so ``exp(-i t H)`` is a propagator
for a Hamiltonian ``H`` given in rad/s and a time ``t`` in seconds.
"""

from __future__ import annotations

import math

import numpy as np

HERMITIAN_RTOL = 1e-12
UNITARY_ATOL = 1e-10
GAUGE_THRESHOLD = 1e-8
JACOBI_TOL = 1e-14
MAX_DIM = 4

_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class ContractError(ValueError):
    """An operator does not satisfy the algebraic property an operation requires."""


class DegeneracyError(ValueError):
    """Raised when a smooth eigenbasis is requested for a degenerate spectrum."""


def pauli(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for ``axis`` in ``{'x', 'y', 'z', 'i'}``.

    ``'identity'`` and ``'1'`` are accepted as aliases of ``'i'``.
    """
    key = axis.lower()
    if key in ("identity", "1", "id"):
        key = "i"
    try:
        return _PAULI[key].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


SX = pauli("x")
SY = pauli("y")
SZ = pauli("z")
ID2 = pauli("i")


def sigma_xy(angle: float) -> np.ndarray:
    """Transverse Pauli combination ``cos(angle) X + sin(angle) Y``."""
    return math.cos(angle) * SX + math.sin(angle) * SY


def bloch_operator(vec) -> np.ndarray:
    """``v . sigma`` for a real 3-vector ``v``."""
    vx, vy, vz = vec
    return vx * SX + vy * SY + vz * SZ


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a (x) b``; the result may not exceed dimension 4."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    dim = a.shape[0] * b.shape[0]
    if dim > MAX_DIM:
        raise ContractError(f"tensor product of dimension {dim} exceeds the supported maximum {MAX_DIM}")
    return np.kron(a, b)


def ket(*bits: int) -> np.ndarray:
    """Computational basis vector; ``ket(0)`` is spin up, ``ket(1, 0)`` is |1>|0>."""
    dim = 2 ** len(bits)
    index = 0
    for bit in bits:
        index = 2 * index + int(bit)
    out = np.zeros(dim, dtype=complex)
    out[index] = 1.0
    return out


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    a = np.asarray(a)
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    return float(np.max(np.abs(a - dagger(a)))) <= rtol * scale


def is_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    u = np.asarray(u)
    return float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0])))) <= atol


def require_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {a.shape}")
    if not is_hermitian(a, rtol):
        err = float(np.max(np.abs(a - dagger(a))))
        raise ContractError(f"matrix is not Hermitian (max |A - A^dag| = {err:.3e})")
    return a


def fix_gauge(vec: np.ndarray, threshold: float = GAUGE_THRESHOLD, anchor: int | None = None) -> np.ndarray:
    """Multiply ``vec`` by a phase so one component becomes real and positive.

    By default the anchor is the first component with magnitude above
    ``threshold``. Passing ``anchor`` pins the component index explicitly, which
    keeps neighbouring samples of a trajectory in the same gauge.
    """
    vec = np.asarray(vec, dtype=complex)
    if anchor is None:
        anchor = gauge_anchor(vec, threshold)
    c = vec[anchor]
    if abs(c) == 0.0:
        return vec.copy()
    r = abs(c)
    out = vec * complex(c.real / r, -c.imag / r)
    out[anchor] = abs(c)  # exactly real, so the rule is idempotent
    return out


def gauge_anchor(vec: np.ndarray, threshold: float = GAUGE_THRESHOLD) -> int:
    mags = np.abs(vec)
    idx = np.flatnonzero(mags > threshold)
    return int(idx[0]) if idx.size else int(np.argmax(mags))


def _eig_2x2(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # h = a0 + r (sin t cos p, sin t sin p, cos t) . sigma
    a0 = 0.5 * (h[0, 0].real + h[1, 1].real)
    hz = 0.5 * (h[0, 0].real - h[1, 1].real)
    hx = h[1, 0].real
    hy = h[1, 0].imag
    r = math.sqrt(hx * hx + hy * hy + hz * hz)
    if r == 0.0:
        return np.array([a0, a0]), np.eye(2, dtype=complex)
    half = 0.5 * math.atan2(math.hypot(hx, hy), hz)
    phase = complex(hx, hy)
    phase = phase / abs(phase) if phase != 0 else 1.0
    c, s = math.cos(half), math.sin(half)
    up = np.array([c, phase * s], dtype=complex)
    down = np.array([-np.conj(phase) * s, c], dtype=complex)
    return np.array([a0 - r, a0 + r]), np.column_stack([down, up])


def _jacobi_hermitian(h: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 100):
    """Cyclic complex Jacobi diagonalization of a small Hermitian matrix."""
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= tol * scale * 1e-3:
                    continue
                # phase-rotate the pair to a real symmetric block, then rotate it away
                ph = np.conj(apq) / r
                theta = 0.5 * math.atan2(2.0 * r, a[q, q].real - a[p, p].real)
                c, s = math.cos(theta), math.sin(theta)
                g = np.eye(n, dtype=complex)
                g[p, p] = c
                g[p, q] = s
                g[q, p] = -ph * s
                g[q, q] = ph * c
                a = dagger(g) @ a @ g
                a[p, q] = a[q, p] = 0.0
                v = v @ g
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    return np.real(np.diag(a)).copy(), v


def eig_hermitian(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a small Hermitian matrix.

    Parameters
    ----------
    h : ndarray
        Hermitian matrix of dimension 2 (closed-form Bloch solution) or larger
        (cyclic Jacobi).

    Returns
    -------
    evals : ndarray
        Real eigenvalues in ascending order.
    evecs : ndarray
        Column ``k`` is the gauge-fixed eigenvector of ``evals[k]``: its first
        component with magnitude above 1e-8 is real and positive.
    """
    h = require_hermitian(h)
    if h.shape[0] == 2:
        evals, evecs = _eig_2x2(h)
    elif h.shape[0] == 1:
        evals, evecs = np.array([h[0, 0].real]), np.ones((1, 1), dtype=complex)
    else:
        evals, evecs = _jacobi_hermitian(h)
        order = np.argsort(evals, kind="stable")
        evals, evecs = evals[order], evecs[:, order]
    evecs = np.column_stack([fix_gauge(evecs[:, k]) for k in range(evecs.shape[1])])
    return evals, evecs


def spectral_gap(evals: np.ndarray) -> float:
    return float(np.min(np.diff(evals))) if len(evals) > 1 else math.inf


def expm_skew_hermitian(h: np.ndarray, scale: float) -> np.ndarray:
    """Unitary ``exp(-i * scale * h)`` for a Hermitian ``h``, by spectral decomposition."""
    evals, evecs = eig_hermitian(h)
    phases = np.exp(-1j * scale * evals)
    return (evecs * phases) @ dagger(evecs)


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, np.conj(vec))


def normalize(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return vec / nrm


def check_density_matrix(rho: np.ndarray, herm_tol: float = 1e-12, trace_tol: float = 1e-10,
                         min_eig: float = -1e-8) -> None:
    """Raise ``ContractError`` unless ``rho`` is a valid density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if not is_hermitian(rho, herm_tol):
        raise ContractError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ContractError(f"density matrix trace {tr.real:.12f} differs from 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))
    if lam[0] < min_eig:
        raise ContractError(f"density matrix has negative eigenvalue {lam[0]:.3e}")
