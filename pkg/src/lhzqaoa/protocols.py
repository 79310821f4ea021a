"""The three quench protocols on the parity layout and their (E, F) evaluation.

Each cycle applies the diagonal step first and the X mixer last:

* ``A``: ``exp(-i g (sum_i J_i Z_i + C_ref sum_l P_l))``
* ``B``: ``exp(-i g sum_i J_i Z_i)`` then ``exp(-i w C_ref sum_l P_l)``
* ``C``: as ``B`` with per-plaquette strengths ``c_l`` in place of ``C_ref``

where ``P_l`` is the Z-string of plaquette ``l``, so ``A`` is exactly ``B``
with ``w = g``. The evaluation energy uses the penalty ``-C_ref sum_l P_l``
(see :func:`lhzqaoa.statevector.build_diagonal`); the propagator sign is kept
as written in the constraint unitary and the free angles absorb it.
Ancillas start in ``|0>`` and are never mixed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np

from .circuit import Circuit, build_constraint_block, rx, rz
from .layout import bits_to_index, encode, local_fields
from .problem import brute_force_ground
from .statevector import (
    MAX_QUBITS,
    DiagonalHamiltonian,
    apply_circuit,
    build_diagonal,
    expectation,
    overlap_amplitude,
    zstring_values,
)
from .errors import ResourceLimitError

KINDS = ("A", "B", "C")
DIRECT, DECOMPOSED = "direct", "decomposed"
PROBABILITY, AMPLITUDE = "probability", "amplitude"
# registers up to this size apply the mixer as a dense Walsh-Hadamard product
DENSE_MIXER_MAX_QUBITS = 10


@dataclass(frozen=True)
class ProtocolSpec:
    kind: str
    cycles: int
    constraint_block_mode: str = DIRECT
    fidelity_mode: str = PROBABILITY
    c_ref: float = 2.0
    # one extra diagonal step applied after the last mixer (the gamma_0 term of
    # the written-out protocols); it cannot change E, only amplitude-mode F
    trailing_diagonal: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"protocol kind must be one of {KINDS}, got {self.kind!r}")
        if self.cycles < 1:
            raise ValueError(f"cycles must be >= 1, got {self.cycles}")
        if self.constraint_block_mode not in (DIRECT, DECOMPOSED):
            raise ValueError(f"unknown constraint_block_mode {self.constraint_block_mode!r}")
        if self.fidelity_mode not in (PROBABILITY, AMPLITUDE):
            raise ValueError(f"unknown fidelity_mode {self.fidelity_mode!r}")
        if not self.c_ref > 0:
            raise ValueError(f"c_ref must be positive, got {self.c_ref}")

    @property
    def n_diagonal_steps(self) -> int:
        return self.cycles + int(self.trailing_diagonal)


@dataclass(frozen=True)
class ParamSet:
    gammas: tuple
    betas: tuple
    omegas: tuple = ()
    c: tuple = ()

    @classmethod
    def initial(cls, spec: ProtocolSpec, n_constraints: int, angle=1.0, c_init=2.0):
        nd = spec.n_diagonal_steps
        return cls(
            gammas=(float(angle),) * nd,
            betas=(float(angle),) * spec.cycles,
            omegas=(float(angle),) * nd if spec.kind != "A" else (),
            c=(float(c_init),) * n_constraints if spec.kind == "C" else (),
        )

    @classmethod
    def zeros(cls, spec: ProtocolSpec, n_constraints: int):
        p = cls.initial(spec, n_constraints, angle=0.0)
        return replace(p, c=tuple(spec.c_ref for _ in p.c))

    def validate(self, spec: ProtocolSpec, n_constraints: int):
        nd = spec.n_diagonal_steps
        want = {
            "gamma": nd,
            "beta": spec.cycles,
            "omega": nd if spec.kind != "A" else 0,
            "c": n_constraints if spec.kind == "C" else 0,
        }
        got = {"gamma": len(self.gammas), "beta": len(self.betas),
               "omega": len(self.omegas), "c": len(self.c)}
        bad = [f"{k} has {got[k]} entries, expected {want[k]}" for k in want if got[k] != want[k]]
        if any(v < 0 for v in self.c):
            bad.append("c entries must be >= 0")
        if bad:
            raise ValueError(f"parameters inconsistent with protocol {spec.kind}: " + "; ".join(bad))

    def as_vector(self) -> np.ndarray:
        return np.array(self.gammas + self.betas + self.omegas + self.c, dtype=float)

    def with_vector(self, vec) -> "ParamSet":
        vec = [float(v) for v in vec]
        sizes = np.cumsum([len(self.gammas), len(self.betas), len(self.omegas)])
        return ParamSet(tuple(vec[: sizes[0]]), tuple(vec[sizes[0]: sizes[1]]),
                        tuple(vec[sizes[1]: sizes[2]]), tuple(vec[sizes[2]:]))


def format_params(params: ParamSet) -> str:
    def arr(xs):
        return "[" + ", ".join(repr(float(x)) for x in xs) + "]"

    return (f"gamma={arr(params.gammas)} beta={arr(params.betas)} "
            f"omega={arr(params.omegas)} c={arr(params.c)}")


_ARRAY_RE = re.compile(r"(\w+)\s*=\s*\[([^\]]*)\]")


def parse_params(text: str) -> ParamSet:
    found = {}
    for name, body in _ARRAY_RE.findall(text):
        found[name] = tuple(float(x) for x in body.replace(",", " ").split())
    unknown = set(found) - {"gamma", "beta", "omega", "c"}
    if unknown:
        raise ValueError(f"unknown parameter arrays: {sorted(unknown)}")
    if "gamma" not in found or "beta" not in found:
        raise ValueError("parameter block needs gamma=[..] and beta=[..]")
    return ParamSet(found["gamma"], found["beta"], found.get("omega", ()), found.get("c", ()))


def target_indices(problem, layout) -> set:
    """Basis indices of the encoded logical ground states."""
    _, configs = brute_force_ground(problem)
    return {bits_to_index(encode(c, layout)) for c in configs}


class QaoaEngine:
    """Precomputed diagonals for one (problem, layout, spec) triple."""

    def __init__(self, problem, layout, spec: ProtocolSpec, targets=None):
        if layout.n_qubits > MAX_QUBITS:
            raise ResourceLimitError(f"layout needs {layout.n_qubits} qubits, cap is {MAX_QUBITS}")
        self.problem, self.layout, self.spec = problem, layout, spec
        n = layout.n_qubits
        self.n_qubits = n
        self.n_constraints = len(layout.constraints)
        self.fields = np.array(local_fields(problem, layout))
        self.data_qubits = layout.data_qubits

        self.field_diag = np.zeros(1 << n)
        for q, J in enumerate(self.fields):
            if J:
                self.field_diag += J * zstring_values(n, (q,))
        self.parities = np.array([zstring_values(n, c.qubits) for c in layout.constraints]).reshape(
            self.n_constraints, 1 << n)
        self.eval_diag: DiagonalHamiltonian = build_diagonal(
            layout, self.fields, [spec.c_ref] * self.n_constraints)
        self.targets = set(targets) if targets is not None else target_indices(problem, layout)
        self._target_idx = np.array(sorted(self.targets), dtype=np.int64)

        anc = sum(1 << q for q in layout.ancilla_qubits)
        occupied = (np.arange(1 << n) & anc) == 0
        amp = 2.0 ** (-len(self.data_qubits) / 2)
        self.initial_state = np.where(occupied, amp, 0.0).astype(complex)

        self._hadamard = None
        if n <= DENSE_MIXER_MAX_QUBITS:
            h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
            H = np.ones((1, 1))
            for q in reversed(range(n)):
                H = np.kron(H, h if q in self.data_qubits else np.eye(2))
            self._hadamard = H.astype(complex)
            self._zsum = sum(zstring_values(n, (q,)) for q in self.data_qubits)

    def initial_params(self, angle=1.0, c_init=2.0) -> ParamSet:
        return ParamSet.initial(self.spec, self.n_constraints, angle, c_init)

    def _steps(self, params: ParamSet):
        """Yield (gamma, constraint angles alpha_l, beta or None) per cycle."""
        params.validate(self.spec, self.n_constraints)
        return self._steps_from(params.gammas, params.betas, params.omegas, params.c)

    def _steps_from(self, gammas, betas, omegas, c):
        spec = self.spec
        ones = np.ones(self.n_constraints)
        for k in range(spec.n_diagonal_steps):
            g = gammas[k]
            if spec.kind == "A":
                alphas = g * spec.c_ref * ones
            elif spec.kind == "B":
                alphas = omegas[k] * spec.c_ref * ones
            else:
                alphas = omegas[k] * np.asarray(c)
            beta = betas[k] if k < spec.cycles else None
            yield g, alphas, beta

    def circuit(self, params: ParamSet) -> Circuit:
        """Gate-level circuit of the protocol with compiled constraint blocks."""
        layers = []
        for g, alphas, beta in self._steps(params):
            layers.append(tuple(rz(q, 2.0 * g * self.fields[q]) for q in self.data_qubits))
            layers += build_constraint_block(self.layout, alphas).layers
            if beta is not None:
                layers.append(tuple(rx(q, 2.0 * beta) for q in self.data_qubits))
        meta = {"name": f"protocol_{self.spec.kind}", "cycles": self.spec.cycles}
        return Circuit(self.n_qubits, layers, meta)

    def prepare_state(self, params: ParamSet) -> np.ndarray:
        if self.spec.constraint_block_mode == DECOMPOSED:
            return apply_circuit(self.initial_state.copy(), self.circuit(params))
        return self._direct(self._steps(params))

    def _direct(self, steps) -> np.ndarray:
        psi = self.initial_state.copy()
        for g, alphas, beta in steps:
            phase = g * self.field_diag
            if self.n_constraints:
                phase = phase + alphas @ self.parities
            psi *= np.exp(-1j * phase)
            if beta is not None and beta != 0.0:
                psi = self._mix(psi, 2.0 * beta)
        return psi

    def _mix(self, psi, theta):
        """RX(theta) on every data qubit."""
        if self._hadamard is None:
            view = psi.reshape((2,) * self.n_qubits)
            c, s = np.cos(theta / 2), np.sin(theta / 2)
            for q in self.data_qubits:
                v = view.reshape(1 << (self.n_qubits - 1 - q), 2, 1 << q)
                a, b = v[:, 0, :].copy(), v[:, 1, :].copy()
                v[:, 0, :] = c * a - 1j * s * b
                v[:, 1, :] = c * b - 1j * s * a
            return psi
        # prod_q exp(-i t X_q / 2) = H^n exp(-i t sum_q Z_q / 2) H^n
        H = self._hadamard
        return H @ (np.exp(-0.5j * theta * self._zsum) * (H @ psi))

    def vector_layout(self, params: ParamSet):
        """Slices of the flat parameter vector: gamma, beta, omega, c."""
        sizes = np.cumsum([0, len(params.gammas), len(params.betas), len(params.omegas), len(params.c)])
        return [slice(int(a), int(b)) for a, b in zip(sizes, sizes[1:])]

    def run_vector(self, vec, slices):
        """(E, F) for a flat parameter vector; the optimizer's hot path."""
        steps = self._steps_from(*(vec[s] for s in slices))
        if self.spec.constraint_block_mode == DECOMPOSED:
            params = ParamSet(*(tuple(vec[s]) for s in slices))
            return self.evaluate(self.prepare_state(params))
        return self.evaluate(self._direct(steps))

    def evaluate(self, state: np.ndarray):
        E = expectation(state, self.eval_diag)
        if self.spec.fidelity_mode == AMPLITUDE:
            F = overlap_amplitude(state, self._target_idx)
        else:
            amps = state[self._target_idx]
            F = float(np.sum(amps.real**2 + amps.imag**2))
        return E, F

    def run(self, params: ParamSet):
        return self.evaluate(self.prepare_state(params))


def prepare_state(problem, layout, spec: ProtocolSpec, params: ParamSet) -> np.ndarray:
    return QaoaEngine(problem, layout, spec).prepare_state(params)


def evaluate(state, problem, layout, spec: ProtocolSpec):
    return QaoaEngine(problem, layout, spec).evaluate(state)
