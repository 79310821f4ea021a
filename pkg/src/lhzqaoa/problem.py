"""All-to-all Ising instances, their energies, and an exhaustive ground-state oracle."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import ParseError, ResourceLimitError

MAX_BRUTE_FORCE_SPINS = 24
_ENUM_CHUNK = 1 << 15
# energies closer than this count as degenerate
GROUND_ATOL = 1e-12

SpinConfig = tuple  # tuple of +1/-1 ints, hashable so ground sets work


@dataclass(frozen=True)
class LogicalProblem:
    n_spins: int
    couplings: dict  # (i, j) with i < j -> J_ij

    def __post_init__(self):
        if self.n_spins < 2:
            raise ValueError(f"n_spins must be >= 2, got {self.n_spins}")
        expected = set(combinations(range(self.n_spins), 2))
        if set(self.couplings) != expected:
            raise ValueError("couplings must have exactly one entry per pair i < j")
        if not all(np.isfinite(v) for v in self.couplings.values()):
            raise ValueError("couplings must be finite")

    @property
    def n_pairs(self) -> int:
        return self.n_spins * (self.n_spins - 1) // 2

    def matrix(self) -> np.ndarray:
        """Strictly upper-triangular coupling matrix."""
        J = np.zeros((self.n_spins, self.n_spins))
        for (i, j), v in self.couplings.items():
            J[i, j] = v
        return J


def generate_instance(n_spins: int, seed: int) -> LogicalProblem:
    """Draw every J_ij uniformly from [-1, 1] with a PCG64 stream seeded by ``seed``.

    Pairs are filled in lexicographic order, so the result is a pure function
    of ``(n_spins, seed)``.
    """
    if n_spins < 2:
        raise ValueError(f"n_spins must be >= 2, got {n_spins}")
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(n_spins), 2))
    values = rng.uniform(-1.0, 1.0, size=len(pairs))
    return LogicalProblem(n_spins, {p: float(v) for p, v in zip(pairs, values)})


def logical_energy(problem: LogicalProblem, config) -> float:
    if len(config) != problem.n_spins:
        raise ValueError(f"config has length {len(config)}, expected {problem.n_spins}")
    return float(sum(J * config[i] * config[j] for (i, j), J in problem.couplings.items()))


def _spin_rows(start: int, stop: int, n: int) -> np.ndarray:
    # row k encodes configuration index k; bit q set -> spin q = -1
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(n, dtype=np.int64)) & 1
    return 1 - 2 * bits


def brute_force_ground(problem: LogicalProblem):
    """Exact ground energy and every minimizing configuration.

    Enumerates the 2^(N-1) configurations with spin 0 fixed to +1 and closes
    the result under global flip.
    """
    n = problem.n_spins
    if n > MAX_BRUTE_FORCE_SPINS:
        raise ResourceLimitError(f"brute force limited to N <= {MAX_BRUTE_FORCE_SPINS}, got {n}")
    J = problem.matrix()
    n_free = n - 1
    total = 1 << n_free
    best = np.inf
    kept = []
    for start in range(0, total, _ENUM_CHUNK):
        stop = min(total, start + _ENUM_CHUNK)
        free = _spin_rows(start, stop, n_free)
        S = np.hstack([np.ones((stop - start, 1), dtype=np.int64), free]).astype(float)
        E = np.einsum("bi,ij,bj->b", S, J, S)
        if E.min() < best:
            best = E.min()
            kept = [(c, e) for c, e in kept if e <= best + GROUND_ATOL]
        for k in np.flatnonzero(E <= best + GROUND_ATOL):
            kept.append((tuple(int(x) for x in S[k]), E[k]))
    configs = set()
    for cfg, _ in kept:
        configs.add(cfg)
        configs.add(tuple(-x for x in cfg))
    return float(best), configs


def write_instance(problem: LogicalProblem, path) -> None:
    lines = [f"N {problem.n_spins}"]
    for (i, j) in sorted(problem.couplings):
        lines.append(f"{i} {j} {problem.couplings[(i, j)]!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def parse_instance(text: str) -> LogicalProblem:
    rows = [(k + 1, ln.split()) for k, ln in enumerate(text.splitlines())]
    rows = [(k, parts) for k, parts in rows if parts and not parts[0].startswith("#")]
    if not rows or rows[0][1][0] != "N" or len(rows[0][1]) != 2:
        raise ParseError("expected header 'N <n>'", rows[0][0] if rows else None)
    try:
        n = int(rows[0][1][1])
    except ValueError:
        raise ParseError("spin count is not an integer", rows[0][0]) from None
    couplings = {}
    for lineno, parts in rows[1:]:
        if len(parts) != 3:
            raise ParseError("expected 'i j J_ij'", lineno)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError("bad number", lineno) from None
        if not 0 <= i < j < n:
            raise ParseError(f"pair ({i}, {j}) out of range for N={n}", lineno)
        if (i, j) in couplings:
            raise ParseError(f"duplicate pair ({i}, {j})", lineno)
        couplings[(i, j)] = v
    try:
        return LogicalProblem(n, couplings)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def read_instance(path) -> LogicalProblem:
    return parse_instance(Path(path).read_text())
