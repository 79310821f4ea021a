"""LHZ parity layout on a square grid.

Physical qubit ``(i, j)`` (``i < j``) sits at grid position ``(row=i, col=j)``
and stores the relative orientation ``s_i * s_j``. The occupied sites form the
strict upper triangle of an N x N grid, so every unit square with top-left
corner ``(i, j)``, ``0 <= i <= N-3``, ``i < j <= N-2``, is a parity plaquette::

    w=(i, j) ---- n=(i, j+1)
       |              |
    s=(i+1, j) -- e=(i+1, j+1)

The roles follow the usual diamond drawing of the LHZ triangle (north has the
largest label distance ``j - i``). Squares touching the diagonal miss their
south corner; ``augmented`` layouts fill that site with an ancilla pinned to
+1, ``bare`` layouts keep a 3-body constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError

AUGMENTED = "augmented"
BARE = "bare"
# chain order for the parity-accumulating CNOT path; neighbours on the grid
PATH_ROLES = ("w", "n", "e", "s")


@dataclass(frozen=True)
class Qubit:
    id: int
    label: tuple | None  # None marks an ancilla
    position: tuple

    @property
    def is_ancilla(self) -> bool:
        return self.label is None


@dataclass(frozen=True)
class Constraint:
    qubits: tuple  # ids in CNOT path order
    roles: tuple
    anchor: tuple  # grid position of the west corner

    def __len__(self):
        return len(self.qubits)


@dataclass(frozen=True)
class LhzLayout:
    n_logical: int
    qubits: tuple
    constraints: tuple
    ancilla_mode: str = AUGMENTED

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def n_ancillas(self) -> int:
        return sum(q.is_ancilla for q in self.qubits)

    @property
    def data_qubits(self) -> list:
        return [q.id for q in self.qubits if not q.is_ancilla]

    @property
    def ancilla_qubits(self) -> list:
        return [q.id for q in self.qubits if q.is_ancilla]

    def qubit_of_pair(self, i: int, j: int) -> int:
        return self._pair_index()[(min(i, j), max(i, j))]

    def qubit_at(self, row: int, col: int):
        return self._position_index().get((row, col))

    def _pair_index(self):
        return {q.label: q.id for q in self.qubits if not q.is_ancilla}

    def _position_index(self):
        return {q.position: q.id for q in self.qubits}


def build_layout(n_logical: int, ancilla_mode: str = AUGMENTED) -> LhzLayout:
    if n_logical < 2:
        raise ValueError(f"n_logical must be >= 2, got {n_logical}")
    if ancilla_mode not in (AUGMENTED, BARE):
        raise ValueError(f"unknown ancilla_mode {ancilla_mode!r}")
    n = n_logical
    qubits = []
    for i in range(n):
        for j in range(i + 1, n):
            qubits.append(Qubit(len(qubits), (i, j), (i, j)))
    if ancilla_mode == AUGMENTED:
        for d in range(1, n - 1):
            qubits.append(Qubit(len(qubits), None, (d, d)))
    by_pos = {q.position: q.id for q in qubits}

    constraints = []
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            corners = {"w": (i, j), "n": (i, j + 1), "e": (i + 1, j + 1), "s": (i + 1, j)}
            roles = tuple(r for r in PATH_ROLES if corners[r] in by_pos)
            constraints.append(Constraint(tuple(by_pos[corners[r]] for r in roles), roles, (i, j)))
    return LhzLayout(n, tuple(qubits), tuple(constraints), ancilla_mode)


def local_fields(problem, layout: LhzLayout) -> list:
    if problem.n_spins != layout.n_logical:
        raise ValueError(f"problem has N={problem.n_spins}, layout has N={layout.n_logical}")
    return [0.0 if q.is_ancilla else float(problem.couplings[q.label]) for q in layout.qubits]


def encode(config, layout: LhzLayout) -> tuple:
    if len(config) != layout.n_logical:
        raise ValueError(f"config has length {len(config)}, expected {layout.n_logical}")
    return tuple(1 if q.is_ancilla else config[q.label[0]] * config[q.label[1]] for q in layout.qubits)


def constraint_parities(bits, layout: LhzLayout) -> tuple:
    out = []
    for c in layout.constraints:
        p = 1
        for q in c.qubits:
            p *= bits[q]
        out.append(p)
    return tuple(out)


def decode(bits, layout: LhzLayout):
    """Read spins off the (0, j) star with s_0 = +1; report violated constraints."""
    if len(bits) != layout.n_qubits:
        raise ValueError(f"bits has length {len(bits)}, expected {layout.n_qubits}")
    config = [1] + [bits[layout.qubit_of_pair(0, j)] for j in range(1, layout.n_logical)]
    n_violated = sum(p != 1 for p in constraint_parities(bits, layout))
    return tuple(config), n_violated


def bits_to_index(bits) -> int:
    """Basis index: qubit q is bit q, and sigma_z = -1 is bit value 1."""
    return sum(1 << q for q, b in enumerate(bits) if b == -1)


def index_to_bits(index: int, n_qubits: int) -> tuple:
    return tuple(-1 if (index >> q) & 1 else 1 for q in range(n_qubits))


def format_layout(layout: LhzLayout) -> str:
    lines = [f"# n_logical={layout.n_logical} ancilla_mode={layout.ancilla_mode}"]
    for q in layout.qubits:
        label = "anc" if q.is_ancilla else f"{q.label[0]},{q.label[1]}"
        lines.append(f"{q.id} {q.position[0]} {q.position[1]} {label}")
    for l, c in enumerate(layout.constraints):
        lines.append(f"{l}: " + " ".join(str(q) for q in c.qubits))
    return "\n".join(lines) + "\n"


def write_layout(layout: LhzLayout, path) -> None:
    Path(path).write_text(format_layout(layout))


def parse_layout(text: str) -> LhzLayout:
    """Inverse of :func:`format_layout`; roles are recomputed from positions."""
    header = {}
    qubits, members = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            header.update(kv.split("=", 1) for kv in line[1:].split() if "=" in kv)
            continue
        try:
            if ":" in line:
                members.append(tuple(int(x) for x in line.split(":", 1)[1].split()))
            else:
                qid, row, col, label = line.split()
                lab = None if label == "anc" else tuple(int(x) for x in label.split(","))
                qubits.append(Qubit(int(qid), lab, (int(row), int(col))))
        except ValueError:
            raise ParseError(f"malformed layout line {line!r}", lineno) from None
    pos = {q.id: q.position for q in qubits}
    constraints = []
    for ids in members:
        i, j = min(pos[q] for q in ids)
        corners = {"w": (i, j), "n": (i, j + 1), "e": (i + 1, j + 1), "s": (i + 1, j)}
        role_of = {v: k for k, v in corners.items()}
        constraints.append(Constraint(ids, tuple(role_of[pos[q]] for q in ids), (i, j)))
    n = int(header.get("n_logical", 1 + max((q.label[1] for q in qubits if q.label), default=0)))
    mode = header.get("ancilla_mode", AUGMENTED if any(q.label is None for q in qubits) else BARE)
    return LhzLayout(n, tuple(qubits), tuple(constraints), mode)
