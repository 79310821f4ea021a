"""Dense statevector simulation.

States are plain complex128 arrays of length 2**K. Qubit 0 is the least
significant bit of the basis index and bit value 0 is the sigma_z = +1 state.
Gates are applied in place through a ``(2,) * K`` view, where qubit ``q`` is
axis ``K - 1 - q``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from math import cos, sin
from pathlib import Path

import numpy as np

from .circuit import CNOT, RX, RZ, ZPHASE
from .errors import ResourceLimitError

MAX_QUBITS = 26
STATE_MAGIC = b"LHZSTATE"


def n_qubits_of(state: np.ndarray) -> int:
    n = int(state.size).bit_length() - 1
    if state.ndim != 1 or state.size != 1 << n:
        raise ValueError(f"state length {state.size} is not a power of two")
    return n


def _check_size(n_qubits: int):
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ResourceLimitError(f"qubit count must be in 1..{MAX_QUBITS}, got {n_qubits}")


def init_uniform(n_qubits: int) -> np.ndarray:
    _check_size(n_qubits)
    return np.full(1 << n_qubits, 2.0 ** (-n_qubits / 2), dtype=complex)


def basis_state(n_qubits: int, index: int) -> np.ndarray:
    _check_size(n_qubits)
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def _index(n, fixed):
    """Tensor index selecting ``{qubit: bit}`` and leaving other axes free."""
    idx = [slice(None)] * n
    for q, b in fixed.items():
        idx[n - 1 - q] = b
    return tuple(idx)


def _parity_tensor(n, qubits):
    """Broadcastable +/-1 tensor holding prod_q z_q over the given qubits."""
    t = np.ones((1,) * n)
    for q in qubits:
        shape = [1] * n
        shape[n - 1 - q] = 2
        t = t * np.array([1.0, -1.0]).reshape(shape)
    return t


def apply_gate(state: np.ndarray, gate) -> np.ndarray:
    n = n_qubits_of(state)
    if max(gate.qubits) >= n or min(gate.qubits) < 0:
        raise ValueError(f"{gate} out of range for {n} qubits")
    psi = state.reshape((2,) * n)
    if gate.kind == RX:
        q = gate.qubits[0]
        c, s = cos(gate.angle / 2), sin(gate.angle / 2)
        i0, i1 = _index(n, {q: 0}), _index(n, {q: 1})
        a, b = psi[i0].copy(), psi[i1].copy()
        psi[i0] = c * a - 1j * s * b
        psi[i1] = c * b - 1j * s * a
    elif gate.kind == RZ:
        q = gate.qubits[0]
        psi[_index(n, {q: 0})] *= np.exp(-0.5j * gate.angle)
        psi[_index(n, {q: 1})] *= np.exp(0.5j * gate.angle)
    elif gate.kind == CNOT:
        c, t = gate.qubits
        i10, i11 = _index(n, {c: 1, t: 0}), _index(n, {c: 1, t: 1})
        tmp = psi[i10].copy()
        psi[i10] = psi[i11]
        psi[i11] = tmp
    elif gate.kind == ZPHASE:
        parity = _parity_tensor(n, gate.qubits)
        psi *= np.exp(-1j * gate.angle * parity)
    else:
        raise ValueError(f"unsupported gate {gate.kind}")
    return state


def apply_circuit(state: np.ndarray, circuit) -> np.ndarray:
    if circuit.n_qubits != n_qubits_of(state):
        raise ValueError(f"circuit has {circuit.n_qubits} qubits, state has {n_qubits_of(state)}")
    for g in circuit.gates():
        apply_gate(state, g)
    return state


def gates_matrix(gates, n_qubits: int) -> np.ndarray:
    """Unitary of a gate list, column k being the image of basis state k."""
    U = np.zeros((1 << n_qubits, 1 << n_qubits), dtype=complex)
    for k in range(1 << n_qubits):
        psi = basis_state(n_qubits, k)
        for g in gates:
            apply_gate(psi, g)
        U[:, k] = psi
    return U


@lru_cache(maxsize=64)
def z_values(n_qubits: int, qubit: int) -> np.ndarray:
    """sigma_z eigenvalue of ``qubit`` for every basis index (read-only)."""
    z = 1 - 2 * ((np.arange(1 << n_qubits) >> qubit) & 1)
    z = z.astype(float)
    z.flags.writeable = False
    return z


def zstring_values(n_qubits: int, qubits) -> np.ndarray:
    out = np.ones(1 << n_qubits)
    for q in qubits:
        out = out * z_values(n_qubits, q)
    return out


@dataclass
class DiagonalHamiltonian:
    """Diagonal operator sum_t coeffs[t] * prod_{q in terms[t]} Z_q."""

    n_qubits: int
    coeffs: np.ndarray
    terms: tuple
    energies: np.ndarray

    @classmethod
    def from_terms(cls, n_qubits, coeffs, terms):
        coeffs = np.asarray(coeffs, dtype=float)
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        energies = np.zeros(1 << n_qubits)
        for c, t in zip(coeffs, terms):
            energies += c * zstring_values(n_qubits, t)
        return cls(n_qubits, coeffs, tuple(tuple(t) for t in terms), energies)

    def split_indices(self) -> np.ndarray:
        """(n_terms, 2, 2**(K-1)) basis indices with Z-string +1 / -1."""
        if not hasattr(self, "_split"):
            rows = []
            for t in self.terms:
                zs = zstring_values(self.n_qubits, t)
                rows.append([np.flatnonzero(zs > 0), np.flatnonzero(zs < 0)])
            self._split = np.array(rows, dtype=np.int64).reshape(len(self.terms), 2, -1)
        return self._split


def build_diagonal(layout, fields, constraint_strengths) -> DiagonalHamiltonian:
    """sum_i J_i Z_i - sum_l C_l prod_{q in l} Z_q.

    The minus sign makes even plaquette parity the low-energy side for C_l > 0.
    """
    fields = list(fields)
    strengths = list(constraint_strengths)
    if len(fields) != layout.n_qubits:
        raise ValueError(f"expected {layout.n_qubits} fields, got {len(fields)}")
    if len(strengths) != len(layout.constraints):
        raise ValueError(f"expected {len(layout.constraints)} strengths, got {len(strengths)}")
    coeffs, terms = [], []
    for q, J in enumerate(fields):
        if J != 0.0:
            coeffs.append(J)
            terms.append((q,))
    for c, C in zip(layout.constraints, strengths):
        coeffs.append(-C)
        terms.append(c.qubits)
    return DiagonalHamiltonian.from_terms(layout.n_qubits, coeffs, terms)


def expectation(state: np.ndarray, diag: DiagonalHamiltonian) -> float:
    """<psi|H|psi> accumulated term by term.

    Each Z-string average is the difference of two equal-length sums, so a
    state with equal weight on both halves (e.g. the uniform state) gives an
    exact zero.
    """
    if state.size != diag.energies.size:
        raise ValueError("state and Hamiltonian dimensions differ")
    if not diag.terms:
        return 0.0
    probs = state.real**2 + state.imag**2
    halves = probs[diag.split_indices()].sum(axis=2)
    return float(diag.coeffs @ (halves[:, 0] - halves[:, 1]))


def overlap_probability(state: np.ndarray, basis_indices) -> float:
    idx = np.fromiter(sorted(set(basis_indices)), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= state.size):
        raise ValueError("basis index out of range")
    amps = state[idx]
    return float(np.sum(amps.real**2 + amps.imag**2))


def overlap_amplitude(state: np.ndarray, basis_indices) -> float:
    """|sum_k <k|psi>| / sqrt(#targets): overlap with the equal superposition of targets."""
    idx = np.fromiter(sorted(set(basis_indices)), dtype=np.int64)
    return float(abs(state[idx].sum()) / np.sqrt(max(idx.size, 1)))


def save_state(state: np.ndarray, path) -> None:
    n = n_qubits_of(state)
    with open(path, "wb") as fh:
        fh.write(STATE_MAGIC + struct.pack("<Q", n))
        fh.write(np.ascontiguousarray(state, dtype="<c16").tobytes())


def load_state(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:8] != STATE_MAGIC:
        raise ValueError("not a state dump (bad magic)")
    (n,) = struct.unpack("<Q", raw[8:16])
    data = np.frombuffer(raw[16:], dtype="<c16")
    if data.size != 1 << n:
        raise ValueError(f"state dump truncated: expected {1 << n} amplitudes, got {data.size}")
    return data.astype(complex)
