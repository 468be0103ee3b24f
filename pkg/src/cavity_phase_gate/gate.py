"""Logical encoding, the target gate and its closed-form realization.

Logical |0⟩ is |g⟩ on every qutrit; logical |1⟩ is |f⟩ on the control
(qutrit 1) and |e⟩ on the targets.  Bitstrings put the control bit first,
so it is the most significant bit of the logical index.
"""
from __future__ import annotations

from itertools import product
from typing import Sequence

import numpy as np

from .errors import EncodingError, ParameterError
from .model import SystemParams, encoded_energies
from .operators import E, F, G, QUTRIT_DIM, HilbertSpace, QuantumState, ket

ENCODING_TOL = 1e-9


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise ParameterError(f"need n >= 2 qubits, got {n!r}")


def bitstrings(n: int) -> list[str]:
    """All n-bit strings in lexicographic order."""
    return ["".join(b) for b in product("01", repeat=n)]


def gate_sign(bits: str) -> int:
    if bits[0] == "0":
        return 1
    return -1 if bits[1:].count("1") % 2 else 1


def ideal_gate_matrix(n: int) -> np.ndarray:
    _check_n(n)
    return np.diag([complex(gate_sign(b)) for b in bitstrings(n)])


def truth_table_text(n: int) -> str:
    """Plain-text ``bitstring sign`` table, one row per logical basis state."""
    _check_n(n)
    rows = ["# bits sign"]
    rows += [f"{b} {'+' if gate_sign(b) > 0 else '-'}" for b in bitstrings(n)]
    return "\n".join(rows) + "\n"


def encode_levels(bits: str) -> tuple[int, ...]:
    """Physical qutrit levels for a logical bitstring."""
    if not bits or set(bits) - {"0", "1"}:
        raise EncodingError(f"invalid bitstring {bits!r}")
    one = [F] + [E] * (len(bits) - 1)
    return tuple(one[i] if b == "1" else G for i, b in enumerate(bits))


def encode(bits: str | Sequence[int], space: HilbertSpace) -> QuantumState:
    bits = "".join(str(int(b)) for b in bits)
    if len(bits) != space.n_qutrits:
        raise EncodingError(
            f"bitstring of length {len(bits)} for {space.n_qutrits} qutrits"
        )
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index(encode_levels(bits), 0)] = 1.0
    return QuantumState(space, amps)


def paper_input_state(space: HilbertSpace) -> QuantumState:
    """Control in (|g⟩+|f⟩)/√2, every target in (|g⟩+|e⟩)/√2, cavity in vacuum."""
    control = (ket(G) + ket(F)) / np.sqrt(2)
    target = (ket(G) + ket(E)) / np.sqrt(2)
    return QuantumState.product(space, [control] + [target] * (space.n_qutrits - 1))


def _encoded_mask_and_signs(space: HilbertSpace) -> tuple[np.ndarray, np.ndarray]:
    n = space.n_qutrits
    levels = np.indices((QUTRIT_DIM,) * n).reshape(n, -1)
    encodable = (levels[0] != E) & np.all(levels[1:] != F, axis=0)
    flips = (levels[0] == F) & (np.sum(levels[1:] == E, axis=0) % 2 == 1)
    signs = np.where(flips, -1.0, 1.0)
    # broadcast over the cavity factor
    return np.repeat(encodable, space.cavity_dim), np.repeat(signs, space.cavity_dim)


def ideal_output_state(state: QuantumState, n: int | None = None) -> QuantumState:
    """Apply the gate's signs to a state supported on the encoded subspace."""
    space = state.space
    if n is not None and n != space.n_qutrits:
        raise ParameterError(f"n = {n} does not match a {space.n_qutrits}-qutrit space")
    mask, signs = _encoded_mask_and_signs(space)
    leak = float(np.sum(np.abs(state.amplitudes[~mask]) ** 2))
    if leak > ENCODING_TOL:
        raise EncodingError(f"input not encodable: weight {leak:.3e} outside encoded subspace")
    return QuantumState(space, state.amplitudes * signs)


def closed_form_unitary(params: SystemParams, n: int | None = None, t: float = 0.0) -> np.ndarray:
    """Diagonal propagator ``exp(-i H_enc t)`` as a product of control/target phases."""
    if t < 0:
        raise ParameterError("t must be non-negative")
    return np.diag(np.exp(-1j * t * encoded_energies(params, n)))


def logical_restriction(unitary: np.ndarray, n: int) -> np.ndarray:
    """Restrict a 3ⁿ-dimensional qutrit operator to the 2ⁿ encoded basis states."""
    idx = [_qutrit_index(encode_levels(b)) for b in bitstrings(n)]
    return unitary[np.ix_(idx, idx)]


def _qutrit_index(levels: Sequence[int]) -> int:
    i = 0
    for q in levels:
        i = i * QUTRIT_DIM + q
    return i
