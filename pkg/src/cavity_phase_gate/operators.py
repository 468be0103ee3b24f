"""Dense complex operator algebra for qutrits coupled to one bosonic mode.

All matrices are plain ``numpy`` arrays of dtype ``complex128``.  The
composite space is ordered as ``qutrit 1 ⊗ qutrit 2 ⊗ … ⊗ qutrit n ⊗ cavity``
with qutrit levels ``(g, e, f) = (0, 1, 2)`` and the cavity in the Fock basis,
so the flat basis index of ``|q1 q2 … qn; m⟩`` is::

    ((…(q1·3 + q2)·3 + …)·3 + qn)·(cutoff + 1) + m
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence, Union

import numpy as np

from .errors import DimensionLimitError, EncodingError, NumericalError, ParameterError

# Hard caps on total Hilbert dimension; runaway configurations become errors.
MAX_STATE_DIM = 4096
MAX_DENSITY_DIM = 1024

QUTRIT_DIM = 3
G, E, F = 0, 1, 2
LEVEL_NAMES = "gef"

HERMITIAN_RTOL = 1e-12

Site = Union[int, str]


def kron(a: np.ndarray, b: np.ndarray, max_dim: int = MAX_STATE_DIM) -> np.ndarray:
    """Kronecker product with a guard on the resulting dimension."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise DimensionLimitError(
            f"dimension limit exceeded: {rows}x{cols} > {max_dim}"
        )
    return np.kron(a, b)


def kron_all(ops: Sequence[np.ndarray], max_dim: int = MAX_STATE_DIM) -> np.ndarray:
    return reduce(lambda x, y: kron(x, y, max_dim), ops)


def annihilation(cutoff: int) -> np.ndarray:
    """Truncated annihilation operator on Fock states ``0 … cutoff``."""
    if int(cutoff) != cutoff or cutoff < 0:
        raise ParameterError(f"cutoff must be a non-negative integer, got {cutoff!r}")
    if cutoff == 0:
        raise ParameterError("cutoff too small to represent coupling")
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def ket(level: int, dim: int = QUTRIT_DIM) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[level] = 1.0
    return v


def projector(level: int, dim: int = QUTRIT_DIM) -> np.ndarray:
    return transition(level, level, dim)


def transition(to: int, frm: int, dim: int = QUTRIT_DIM) -> np.ndarray:
    """``|to⟩⟨frm|`` on a single ``dim``-level site."""
    m = np.zeros((dim, dim), dtype=complex)
    m[to, frm] = 1.0
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def is_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    return hermiticity_error(m) <= rtol


def hermiticity_error(m: np.ndarray) -> float:
    """Relative Hermiticity defect ``max|A - A†| / max|A|`` (0 for the zero matrix)."""
    scale = np.max(np.abs(m)) if m.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(m - dagger(m))) / scale)


@dataclass(frozen=True)
class HilbertSpace:
    """n qutrits ⊗ one cavity mode truncated at ``fock_cutoff`` photons."""

    n_qutrits: int
    fock_cutoff: int

    def __post_init__(self):
        if self.n_qutrits < 1:
            raise ParameterError("need at least one qutrit")
        if self.fock_cutoff < 1:
            raise ParameterError("cutoff too small to represent coupling")

    @property
    def cavity_dim(self) -> int:
        return self.fock_cutoff + 1

    @property
    def qutrit_dim(self) -> int:
        return QUTRIT_DIM**self.n_qutrits

    @property
    def dims(self) -> tuple[int, ...]:
        return (QUTRIT_DIM,) * self.n_qutrits + (self.cavity_dim,)

    @property
    def dim(self) -> int:
        return self.qutrit_dim * self.cavity_dim

    def index(self, levels: Sequence[int], photons: int = 0) -> int:
        if len(levels) != self.n_qutrits:
            raise EncodingError(
                f"expected {self.n_qutrits} qutrit levels, got {len(levels)}"
            )
        if not 0 <= photons <= self.fock_cutoff:
            raise ParameterError(f"photon number {photons} outside [0, {self.fock_cutoff}]")
        idx = 0
        for q in levels:
            if q not in (G, E, F):
                raise ParameterError(f"invalid qutrit level {q!r}")
            idx = idx * QUTRIT_DIM + q
        return idx * self.cavity_dim + photons

    def unravel(self, index: int) -> tuple[tuple[int, ...], int]:
        """Inverse of :meth:`index`: ``(levels, photons)``."""
        if not 0 <= index < self.dim:
            raise ParameterError(f"index {index} outside [0, {self.dim})")
        *levels, photons = np.unravel_index(index, self.dims)
        return tuple(int(q) for q in levels), int(photons)

    def site_dim(self, site: Site) -> int:
        return self.dims[self._site_slot(site)]

    def _site_slot(self, site: Site) -> int:
        if site == "cavity":
            return self.n_qutrits
        if isinstance(site, (int, np.integer)) and not isinstance(site, bool):
            if 1 <= site <= self.n_qutrits:
                return int(site) - 1
        raise ParameterError(f"unknown site {site!r}")

    def check_dim(self, max_dim: int = MAX_STATE_DIM) -> None:
        if self.dim > max_dim:
            raise DimensionLimitError(f"dimension limit exceeded: {self.dim} > {max_dim}")


def embed(op: np.ndarray, site: Site, space: HilbertSpace) -> np.ndarray:
    """Lift a single-site operator to the full space.

    Qutrit sites are numbered from 1 (qutrit 1 is the control); the cavity
    is addressed as ``"cavity"``.
    """
    slot = space._site_slot(site)
    op = np.asarray(op, dtype=complex)
    local = space.dims[slot]
    if op.shape != (local, local):
        raise ParameterError(
            f"dimension mismatch: operator {op.shape} on site {site!r} of dimension {local}"
        )
    space.check_dim()
    factors = [np.eye(d, dtype=complex) for d in space.dims]
    factors[slot] = op
    return kron_all(factors)


def number_operator(space: HilbertSpace) -> np.ndarray:
    a = annihilation(space.fock_cutoff)
    return embed(dagger(a) @ a, "cavity", space)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Unit-norm ket over a :class:`HilbertSpace`."""

    space: HilbertSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.space.dim:
            raise ParameterError(
                f"state has {amps.size} amplitudes, space dimension is {self.space.dim}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, space: HilbertSpace, amplitudes) -> "QuantumState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(amps)
        if nrm == 0:
            raise ParameterError("cannot normalize the zero vector")
        return cls(space, amps / nrm)

    @classmethod
    def product(cls, space: HilbertSpace, qutrit_kets: Sequence, cavity_ket=None) -> "QuantumState":
        if len(qutrit_kets) != space.n_qutrits:
            raise EncodingError(f"expected {space.n_qutrits} qutrit kets")
        if cavity_ket is None:
            cavity_ket = ket(0, space.cavity_dim)
        vec = reduce(np.kron, [np.asarray(k, dtype=complex) for k in qutrit_kets] + [cavity_ket])
        return cls.normalized(space, vec)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "QuantumState") -> complex:
        _check_same_space(self.space, other.space)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise ParameterError(f"density matrix shape {m.shape} does not match dimension {d}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def validate(self, herm_tol: float = 1e-9, trace_tol: float = 1e-7, psd_tol: float = 1e-7) -> dict:
        """Full Hermiticity/trace/positivity check (O(d³), validation runs only)."""
        herm = hermiticity_error(self.matrix)
        tr = abs(self.trace - 1.0)
        hmat = 0.5 * (self.matrix + dagger(self.matrix))
        min_eig = float(np.linalg.eigvalsh(hmat).min())
        return {
            "hermiticity": herm,
            "trace_error": tr,
            "min_eigenvalue": min_eig,
            "ok": herm <= herm_tol and tr <= trace_tol and min_eig >= -psd_tol,
        }


def _check_same_space(a: HilbertSpace, b: HilbertSpace) -> None:
    if a != b:
        raise ParameterError(f"space mismatch: {a} vs {b}")


def pure_state_fidelity(psi: QuantumState, rho: DensityMatrix, imag_tol: float = 1e-9) -> float:
    """``⟨ψ|ρ|ψ⟩`` for a pure reference state and a (possibly mixed) state."""
    _check_same_space(psi.space, rho.space)
    val = np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes)
    if abs(val.imag) > imag_tol:
        raise NumericalError(f"numerical corruption: Im<psi|rho|psi> = {val.imag:.3e}")
    return float(val.real)


def state_fidelity(psi: QuantumState, phi: QuantumState) -> float:
    """``|⟨ψ|φ⟩|²`` between two pure states."""
    return abs(psi.overlap(phi)) ** 2
