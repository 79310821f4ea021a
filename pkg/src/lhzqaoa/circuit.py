"""Layered gate circuits, the plaquette decomposition and the parallel constraint schedule.

Conventions: ``RX(t) = exp(-i t X/2)``, ``RZ(t) = exp(-i t Z/2)``, and
``ZPHASE(qs, a) = exp(-i a Z_q1 ... Z_qk)``. A plaquette phase
``exp(-i a ZZZZ)`` is compiled as a CNOT chain that accumulates the parity on
the last qubit of the path, ``RZ(2a)`` there, and the chain undone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ParseError
from .layout import AUGMENTED

RX, RZ, CNOT, ZPHASE = "RX", "RZ", "CNOT", "ZPHASE"
_ARITY = {RX: 1, RZ: 1, CNOT: 2}

# (anchor row parity, anchor col parity) of each pass: base, +row, +col, +row+col
PASS_SHIFTS = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in (RX, RZ, CNOT, ZPHASE):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == ZPHASE:
            if not 1 <= len(self.qubits) <= 4:
                raise ValueError("ZPHASE acts on 1 to 4 qubits")
        elif len(self.qubits) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} qubit(s)")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} qubits must be distinct, got {self.qubits}")
        if (self.kind == CNOT) != (self.angle is None):
            raise ValueError(f"{self.kind}: angle {'not ' if self.kind == CNOT else ''}expected")


def rx(q, theta):
    return Gate(RX, (q,), float(theta))


def rz(q, phi):
    return Gate(RZ, (q,), float(phi))


def cnot(control, target):
    return Gate(CNOT, (control, target))


def zphase(qubits, alpha):
    return Gate(ZPHASE, tuple(qubits), float(alpha))


@dataclass
class Circuit:
    n_qubits: int
    layers: list = field(default_factory=list)  # list of tuples of Gate
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.layers = [tuple(layer) for layer in self.layers]
        for layer in self.layers:
            for g in layer:
                if max(g.qubits) >= self.n_qubits or min(g.qubits) < 0:
                    raise ValueError(f"{g} references a qubit outside 0..{self.n_qubits - 1}")

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self):
        for layer in self.layers:
            yield from layer


def verify_layers(circuit: Circuit) -> bool:
    for layer in circuit.layers:
        seen = set()
        for g in layer:
            if seen.intersection(g.qubits):
                return False
            seen.update(g.qubits)
    return True


def decompose_plaquette(path, alpha) -> list:
    """CNOT ladder along ``path``, RZ(2*alpha) on the last qubit, ladder reversed."""
    path = tuple(path)
    if len(set(path)) != len(path):
        raise ValueError(f"repeated qubit in plaquette path {path}")
    if not path:
        raise ValueError("empty plaquette path")
    ladder = [cnot(a, b) for a, b in zip(path, path[1:])]
    return ladder + [rz(path[-1], 2.0 * alpha)] + ladder[::-1]


def layer_gates(gates) -> list:
    """As-soon-as-possible layering that keeps per-qubit gate order."""
    layers = []
    ready = {}
    for g in gates:
        k = max((ready.get(q, 0) for q in g.qubits), default=0)
        if k == len(layers):
            layers.append([])
        layers[k].append(g)
        for q in g.qubits:
            ready[q] = k + 1
    return [tuple(layer) for layer in layers]


def _passes(layout):
    groups = {shift: [] for shift in PASS_SHIFTS}
    for l, c in enumerate(layout.constraints):
        groups[(c.anchor[0] % 2, c.anchor[1] % 2)].append(l)
    return [groups[s] for s in PASS_SHIFTS if groups[s]]


def build_constraint_block(layout, alphas, name="constraint_block") -> Circuit:
    """Circuit for prod_l exp(-i alphas[l] Z...Z) over the layout's plaquettes.

    Plaquettes whose west corners share row and column parity are vertex
    disjoint, so in augmented layouts each of the four shifted passes runs as
    three CNOT layers, one RZ layer and three mirrored CNOT layers: at most 28
    layers for any N. Bare layouts (3-body boundary terms) are layered greedily.
    """
    alphas = [float(a) for a in alphas]
    if len(alphas) != len(layout.constraints):
        raise ValueError(f"expected {len(layout.constraints)} angles, got {len(alphas)}")
    meta = {"name": name, "n_logical": layout.n_logical,
            "ancilla_mode": layout.ancilla_mode, "alphas": alphas}
    if layout.ancilla_mode != AUGMENTED:
        gates = []
        for group in _passes(layout):
            for l in group:
                gates += decompose_plaquette(layout.constraints[l].qubits, alphas[l])
        return Circuit(layout.n_qubits, layer_gates(gates), meta)

    layers = []
    for group in _passes(layout):
        seqs = [decompose_plaquette(layout.constraints[l].qubits, alphas[l]) for l in group]
        # every 4-body sequence has 7 gates; slot k of all of them forms one layer
        layers += [tuple(seq[k] for seq in seqs) for k in range(7)]
    return Circuit(layout.n_qubits, layers, meta)


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_text(circuit: Circuit) -> str:
    lines = [f"QUBITS {circuit.n_qubits}"]
    if circuit.metadata:
        lines.append("# META " + json.dumps(circuit.metadata, sort_keys=True))
    for layer in circuit.layers:
        lines.append("LAYER")
        for g in layer:
            if g.kind == CNOT:
                lines.append(f"CNOT {g.qubits[0]} {g.qubits[1]}")
            else:
                name = "ZPHASE" if g.kind == ZPHASE else g.kind
                lines.append(" ".join([name, *map(str, g.qubits), _fmt(g.angle)]))
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> Circuit:
    n_qubits = None
    metadata = {}
    layers = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# META "):
                try:
                    metadata = json.loads(line[len("# META "):])
                except json.JSONDecodeError:
                    raise ParseError("bad metadata", lineno) from None
            continue
        parts = line.split()
        head = parts[0]
        if head == "QUBITS":
            if n_qubits is not None or len(parts) != 2 or not parts[1].isdigit():
                raise ParseError(f"bad header {line!r}", lineno)
            n_qubits = int(parts[1])
            continue
        if n_qubits is None:
            raise ParseError("missing 'QUBITS <n>' header", lineno)
        if head == "LAYER":
            if len(parts) != 1:
                raise ParseError("LAYER takes no arguments", lineno)
            layers.append([])
            continue
        if not layers:
            raise ParseError("gate before first LAYER", lineno)
        try:
            if head == "CNOT":
                if len(parts) != 3:
                    raise ValueError("CNOT takes control and target")
                gate = cnot(int(parts[1]), int(parts[2]))
            elif head in (RX, RZ):
                if len(parts) != 3:
                    raise ValueError(f"{head} takes a qubit and an angle")
                gate = Gate(head, (int(parts[1]),), float(parts[2]))
            elif head == ZPHASE:
                if not 3 <= len(parts) <= 6:
                    raise ValueError("ZPHASE takes 1-4 qubits and an angle")
                gate = zphase([int(p) for p in parts[1:-1]], float(parts[-1]))
            else:
                raise ValueError(f"unknown gate {head!r}")
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if max(gate.qubits) >= n_qubits:
            raise ParseError(f"qubit out of range for QUBITS {n_qubits}", lineno)
        layers[-1].append(gate)
    if n_qubits is None:
        raise ParseError("missing 'QUBITS <n>' header")
    return Circuit(n_qubits, layers, metadata)
