"""Greedy single-parameter Monte Carlo search and the paired-instance ensemble."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import RNG_ALGORITHM, __version__
from .layout import BARE, build_layout
from .problem import generate_instance
from .protocols import KINDS, ParamSet, ProtocolSpec, QaoaEngine

MINIMIZE_E, MAXIMIZE_F = "minimize_E", "maximize_F"
EXCLUSIVE, MIXED = "exclusive", "mixed"
HIST_BINS = 20


@dataclass(frozen=True)
class McConfig:
    steps: int = 4000
    delta_max: float = 1.0
    objective: str = MINIMIZE_E
    c_update_period: int = 10
    seed: int = 0
    angles_init: float = 1.0
    c_init: float = 2.0
    # exclusive: constraint-strength steps propose only c_l; mixed: any parameter
    c_step_mode: str = EXCLUSIVE

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if not self.delta_max > 0:
            raise ValueError(f"delta_max must be > 0, got {self.delta_max}")
        if self.objective not in (MINIMIZE_E, MAXIMIZE_F):
            raise ValueError(f"objective must be {MINIMIZE_E} or {MAXIMIZE_F}, got {self.objective!r}")
        if self.c_update_period < 1:
            raise ValueError(f"c_update_period must be >= 1, got {self.c_update_period}")
        if self.c_step_mode not in (EXCLUSIVE, MIXED):
            raise ValueError(f"unknown c_step_mode {self.c_step_mode!r}")


@dataclass
class RunTrace:
    accepted_objective: np.ndarray
    best_params: ParamSet
    final_E: float
    final_F: float
    accept_count: int
    initial_E: float
    initial_F: float


def mc_optimize(problem, layout, spec: ProtocolSpec, config: McConfig, engine=None, rng=None) -> RunTrace:
    """Greedy Monte Carlo over the protocol parameters.

    Each step perturbs one randomly chosen parameter by U(-delta, delta) and
    keeps the change only if the objective strictly improves. For protocol C,
    steps t = period, 2*period, ... touch the constraint strengths (clamped at
    zero); all other steps touch the angles.
    """
    engine = engine or QaoaEngine(problem, layout, spec)
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    params = engine.initial_params(config.angles_init, config.c_init)
    slices = engine.vector_layout(params)
    vec = params.as_vector()
    n_angles = slices[3].start
    n_total = vec.size
    has_c = n_total > n_angles

    minimize = config.objective == MINIMIZE_E
    E, F = engine.run_vector(vec, slices)
    E0, F0 = E, F
    current = E if minimize else F
    trace = np.empty(config.steps)
    accepts = 0
    for t in range(1, config.steps + 1):
        if has_c and t % config.c_update_period == 0:
            k = rng.integers(n_angles, n_total) if config.c_step_mode == EXCLUSIVE else rng.integers(n_total)
        else:
            k = rng.integers(n_angles)
        old = vec[k]
        new = old + rng.uniform(-config.delta_max, config.delta_max)
        if k >= n_angles:
            new = max(new, 0.0)
        vec[k] = new
        E_new, F_new = engine.run_vector(vec, slices)
        value = E_new if minimize else F_new
        if (value < current) if minimize else (value > current):
            current, E, F = value, E_new, F_new
            accepts += 1
        else:
            vec[k] = old
        trace[t - 1] = current
    return RunTrace(trace, params.with_vector(vec), E, F, accepts, E0, F0)


@dataclass
class EnsembleReport:
    rows: list  # dicts: instance, protocol, m, final_E, final_F, accepts, initial_E, initial_F
    provenance: dict
    hist_bins: int = HIST_BINS
    cells: list = field(default_factory=list)  # ordered (protocol, m)

    def finals(self, protocol, m, key="final_F") -> np.ndarray:
        """Per-instance values for one cell, ordered by instance index."""
        sel = sorted((r["instance"], r[key]) for r in self.rows if r["protocol"] == protocol and r["m"] == m)
        return np.array([v for _, v in sel])

    def summary(self) -> list:
        out = []
        for protocol, m in self.cells:
            F = self.finals(protocol, m)
            E = self.finals(protocol, m, "final_E")
            n = F.size
            sem = (lambda x: float(x.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0)
            out.append({"protocol": protocol, "m": m, "n": n,
                        "mean_F": float(F.mean()), "sem_F": sem(F),
                        "mean_E": float(E.mean()), "sem_E": sem(E)})
        return out

    def histogram(self) -> list:
        edges = np.linspace(0.0, 1.0, self.hist_bins + 1)
        out = []
        for protocol, m in self.cells:
            F = np.clip(self.finals(protocol, m), 0.0, 1.0)
            counts, _ = np.histogram(F, bins=edges)
            mass = counts / max(F.size, 1)
            for lo, hi, p in zip(edges[:-1], edges[1:], mass):
                out.append({"protocol": protocol, "m": m, "bin_lo": float(lo), "bin_hi": float(hi),
                            "mass": float(p)})
        return out

    def paired_table(self) -> tuple:
        """(column names, rows) with one row per instance and one F column per cell."""
        cols = [f"F_{p}_m{m}" for p, m in self.cells]
        instances = sorted({r["instance"] for r in self.rows})
        lookup = {(r["instance"], r["protocol"], r["m"]): r["final_F"] for r in self.rows}
        table = [[i] + [lookup[(i, p, m)] for p, m in self.cells] for i in instances]
        return ["instance"] + cols, table


def cell_seed(mc_seed: int, instance: int, protocol: str, m: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([mc_seed, instance, KINDS.index(protocol), m])


def _run_instance(args):
    (index, n_logical, seed_base, m_values, protocols, config, ancilla_mode, c_ref,
     block_mode, fidelity_mode) = args
    problem = generate_instance(n_logical, seed_base + index)
    layout = build_layout(n_logical, ancilla_mode)
    targets = None
    rows = []
    for protocol in protocols:
        for m in m_values:
            spec = ProtocolSpec(protocol, m, block_mode, fidelity_mode, c_ref)
            engine = QaoaEngine(problem, layout, spec, targets)
            targets = engine.targets
            rng = np.random.default_rng(cell_seed(config.seed, index, protocol, m))
            tr = mc_optimize(problem, layout, spec, config, engine, rng)
            rows.append({"instance": index, "protocol": protocol, "m": m,
                         "final_E": tr.final_E, "final_F": tr.final_F, "accepts": tr.accept_count,
                         "initial_E": tr.initial_E, "initial_F": tr.initial_F})
    return rows


def run_ensemble(n_logical, m_values, protocols, L, config: McConfig, seed_base=0,
                 ancilla_mode=BARE, c_ref=2.0, block_mode="direct", fidelity_mode="probability",
                 workers=1, progress=None) -> EnsembleReport:
    """Optimize every (protocol, m) cell on the same L instances.

    Instance ``i`` is generated from ``seed_base + i``; each cell's optimizer
    stream comes from ``(config.seed, i, protocol, m)``, so results do not
    depend on ``workers`` or scheduling order.
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    m_values = [int(m) for m in m_values]
    protocols = list(protocols)
    for p in protocols:
        if p not in KINDS:
            raise ValueError(f"unknown protocol {p!r}")
    jobs = [(i, n_logical, seed_base, m_values, protocols, config, ancilla_mode, c_ref,
             block_mode, fidelity_mode) for i in range(L)]
    workers = workers or os.cpu_count() or 1
    rows = []
    if workers == 1:
        for done, job in enumerate(jobs, 1):
            rows += _run_instance(job)
            if progress:
                progress(done, L)
    else:
        with ProcessPoolExecutor(workers) as pool:
            for done, part in enumerate(pool.map(_run_instance, jobs, chunksize=max(1, L // (4 * workers))), 1):
                rows += part
                if progress:
                    progress(done, L)
    rows.sort(key=lambda r: (r["instance"], KINDS.index(r["protocol"]), r["m"]))
    provenance = {"version": __version__, "rng": RNG_ALGORITHM, "N": n_logical, "L": L,
                  "seed": seed_base, "mc_seed": config.seed, "M": config.steps,
                  "delta_max": config.delta_max, "objective": config.objective,
                  "c_update_period": config.c_update_period, "c_step_mode": config.c_step_mode,
                  "angles_init": config.angles_init, "c_init": config.c_init, "c_ref": c_ref,
                  "ancilla_mode": ancilla_mode, "block_mode": block_mode,
                  "fidelity_mode": fidelity_mode,
                  "protocols": "".join(protocols), "m_values": ",".join(map(str, m_values))}
    cells = [(p, m) for p in protocols for m in m_values]
    return EnsembleReport(rows, provenance, HIST_BINS, cells)


def config_dict(config: McConfig) -> dict:
    return asdict(config)
