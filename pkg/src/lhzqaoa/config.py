"""Run configuration: a ``key = value`` text file with ``[a, b, c]`` arrays.

Example::

    n_logical = 4
    instances = 200
    cycles = [1, 2, 3]
    protocols = [A, B, C]
    steps = 1000
    objective = minimize_E
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

from .layout import AUGMENTED, BARE
from .montecarlo import EXCLUSIVE, MAXIMIZE_F, MINIMIZE_E, MIXED, McConfig
from .protocols import AMPLITUDE, DECOMPOSED, DIRECT, KINDS, PROBABILITY
from .statevector import MAX_QUBITS

OUTPUT_ENV = "LHZQAOA_OUTPUT"


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))


@dataclass
class RunConfig:
    n_logical: int = 4
    instances: int = 200
    cycles: tuple = (1, 2, 3)
    protocols: tuple = ("A", "B", "C")
    steps: int = 4000
    delta_max: float = 1.0
    objective: str = MINIMIZE_E
    c_update_period: int = 10
    c_step_mode: str = EXCLUSIVE
    angles_init: float = 1.0
    c_init: float = 2.0
    c_ref: float = 2.0
    seed: int = 0
    mc_seed: int = 0
    ancilla_mode: str = BARE
    block_mode: str = DIRECT
    fidelity_mode: str = PROBABILITY
    workers: int = 0  # 0 = all available cores
    output_dir: str = ""

    def validate(self):
        bad = []
        if self.n_logical < 2:
            bad.append(f"n_logical: must be >= 2, got {self.n_logical}")
        else:
            k = self.n_logical * (self.n_logical - 1) // 2
            anc = self.n_logical - 2 if self.ancilla_mode == AUGMENTED else 0
            if k + anc > MAX_QUBITS:
                bad.append(f"n_logical: {self.n_logical} needs {k + anc} qubits, cap is {MAX_QUBITS}")
        if self.instances < 1:
            bad.append(f"instances: must be >= 1, got {self.instances}")
        if not self.cycles or any(m < 1 for m in self.cycles):
            bad.append(f"cycles: need a non-empty list of integers >= 1, got {list(self.cycles)}")
        unknown = [p for p in self.protocols if p not in KINDS]
        if not self.protocols or unknown:
            bad.append(f"protocols: must be drawn from {list(KINDS)}, got {list(self.protocols)}")
        if self.steps < 0:
            bad.append(f"steps: must be >= 0, got {self.steps}")
        if not self.delta_max > 0:
            bad.append(f"delta_max: must be > 0, got {self.delta_max}")
        if self.objective not in (MINIMIZE_E, MAXIMIZE_F):
            bad.append(f"objective: must be {MINIMIZE_E} or {MAXIMIZE_F}, got {self.objective!r}")
        if self.c_update_period < 1:
            bad.append(f"c_update_period: must be >= 1, got {self.c_update_period}")
        if self.c_step_mode not in (EXCLUSIVE, MIXED):
            bad.append(f"c_step_mode: must be {EXCLUSIVE} or {MIXED}, got {self.c_step_mode!r}")
        if self.c_init < 0:
            bad.append(f"c_init: must be >= 0, got {self.c_init}")
        if not self.c_ref > 0:
            bad.append(f"c_ref: must be > 0, got {self.c_ref}")
        if self.ancilla_mode not in (AUGMENTED, BARE):
            bad.append(f"ancilla_mode: must be {AUGMENTED} or {BARE}, got {self.ancilla_mode!r}")
        if self.block_mode not in (DIRECT, DECOMPOSED):
            bad.append(f"block_mode: must be {DIRECT} or {DECOMPOSED}, got {self.block_mode!r}")
        if self.fidelity_mode not in (PROBABILITY, AMPLITUDE):
            bad.append(f"fidelity_mode: must be {PROBABILITY} or {AMPLITUDE}, got {self.fidelity_mode!r}")
        if self.workers < 0:
            bad.append(f"workers: must be >= 0, got {self.workers}")
        if bad:
            raise ConfigError(bad)
        return self

    def mc_config(self) -> McConfig:
        return McConfig(self.steps, self.delta_max, self.objective, self.c_update_period,
                        self.mc_seed, self.angles_init, self.c_init, self.c_step_mode)

    def resolved_output(self, override=None) -> Path:
        return Path(override or self.output_dir or os.environ.get(OUTPUT_ENV) or "lhzqaoa-output")


def _coerce(name, kind, raw):
    if kind is tuple:
        body = raw.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError("expected a [..] array")
        items = [x.strip() for x in body[1:-1].replace(",", " ").split()]
        return tuple(int(x) if name == "cycles" else x for x in items)
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw.strip()


def parse_config(text: str) -> RunConfig:
    types = {f.name: f.type for f in fields(RunConfig)}
    kinds = {"int": int, "float": float, "str": str, "tuple": tuple}
    values, bad = {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            bad.append(f"line {lineno}: expected 'key = value'")
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            bad.append(f"{key}: unknown key (line {lineno})")
            continue
        try:
            values[key] = _coerce(key, kinds[types[key]], val)
        except ValueError as exc:
            bad.append(f"{key}: {exc} (line {lineno})")
    cfg = RunConfig(**values)
    try:
        cfg.validate()
    except ConfigError as exc:
        bad += exc.problems
    if bad:
        raise ConfigError(bad)
    return cfg


def format_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = "[" + ", ".join(map(str, v)) + "]"
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def read_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())
