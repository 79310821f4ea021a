"""``lhzqaoa`` command line: gen, schedule, verify, run, report.

Exit codes: 0 success, 1 usage or I/O error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import build_constraint_block, emit_text, parse_text, verify_layers, zphase
from .config import ConfigError, format_config, read_config
from .errors import ParseError
from .layout import AUGMENTED, BARE, build_layout, write_layout
from .montecarlo import run_ensemble
from .problem import generate_instance, write_instance
from .report import RESULTS, format_summary, read_results, write_report, write_summaries
from .statevector import apply_circuit, apply_gate

log = logging.getLogger("lhzqaoa")

VERIFY_MAX_N = 6
VERIFY_STATES = 4
VERIFY_ATOL = 1e-10


class UsageError(Exception):
    pass


def cmd_gen(args):
    if args.n < 2:
        raise UsageError(f"N must be >= 2, got {args.n}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        path = out / f"instance_N{args.n}_{k:04d}.txt"
        write_instance(generate_instance(args.n, args.seed + k), path)
        print(path)
    return 0


def cmd_schedule(args):
    if args.n < 4:
        raise UsageError(f"schedule needs N >= 4, got {args.n}")
    layout = build_layout(args.n, args.mode)
    circuit = build_constraint_block(layout, [args.alpha] * len(layout.constraints))
    Path(args.out).write_text(emit_text(circuit))
    if args.layout_out:
        write_layout(layout, args.layout_out)
    print(f"layers: {circuit.depth}")
    return 0


def _diagonal_reference(state, layout, alphas):
    for c, a in zip(layout.constraints, alphas):
        apply_gate(state, zphase(c.qubits, a))
    return state


def cmd_verify(args):
    try:
        circuit = parse_text(Path(args.circuit).read_text())
    except ParseError as exc:
        raise UsageError(f"{args.circuit}: {exc}") from None
    problems = []
    if not verify_layers(circuit):
        for k, layer in enumerate(circuit.layers):
            seen = set()
            for g in layer:
                shared = seen.intersection(g.qubits)
                if shared:
                    problems.append(f"layer {k}: {g.kind} {g.qubits} overlaps qubit(s) {sorted(shared)}")
                seen.update(g.qubits)
    mode = circuit.metadata.get("ancilla_mode", AUGMENTED)
    layout = build_layout(args.n, mode)
    if circuit.n_qubits != layout.n_qubits:
        problems.append(f"circuit has {circuit.n_qubits} qubits, {mode} layout for N={args.n} has {layout.n_qubits}")
    elif args.n <= VERIFY_MAX_N:
        alphas = circuit.metadata.get("alphas")
        if alphas is None or len(alphas) != len(layout.constraints):
            problems.append("no per-plaquette 'alphas' metadata matching the layout; cannot check the unitary")
        else:
            rng = np.random.default_rng(args.seed)
            dim = 1 << layout.n_qubits
            worst = 0.0
            for _ in range(VERIFY_STATES):
                psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
                psi /= np.linalg.norm(psi)
                got = apply_circuit(psi.copy(), circuit)
                want = _diagonal_reference(psi.copy(), layout, alphas)
                worst = max(worst, float(np.linalg.norm(got - want)))
            if worst > VERIFY_ATOL:
                problems.append(f"unitary mismatch: max state deviation {worst:.3e} > {VERIFY_ATOL:.0e}")
            else:
                print(f"unitary check: max state deviation {worst:.3e}")
    else:
        print(f"unitary check skipped (N > {VERIFY_MAX_N})")
    if problems:
        print("verification FAILED:")
        for p in problems:
            print(f"  {p}")
        return 2
    print(f"verification passed: {circuit.depth} layers, all disjoint")
    return 0


def cmd_run(args):
    try:
        cfg = read_config(args.config)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    if args.workers is not None:
        cfg.workers = args.workers
    out = cfg.resolved_output(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(format_config(cfg))

    started = time.time()

    def progress(done, total):
        if args.verbose and (done == total or done % max(1, total // 20) == 0):
            log.info("instances %d/%d", done, total)

    report = run_ensemble(cfg.n_logical, cfg.cycles, cfg.protocols, cfg.instances, cfg.mc_config(),
                          seed_base=cfg.seed, ancilla_mode=cfg.ancilla_mode, c_ref=cfg.c_ref,
                          block_mode=cfg.block_mode, fidelity_mode=cfg.fidelity_mode,
                          workers=cfg.workers, progress=progress)
    written = write_report(report, out)
    with open(out / "run.log", "a") as fh:
        fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} lhzqaoa {__version__} run {args.config} "
                 f"elapsed={time.time() - started:.1f}s\n")
    print(format_summary(report))
    for p in written:
        log.info("wrote %s", p)
    return 0


def cmd_report(args):
    src = Path(args.dir)
    path = src / RESULTS if src.is_dir() else src
    try:
        report = read_results(path)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    write_summaries(report, path.parent)
    print(format_summary(report))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="lhzqaoa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write random instance files")
    p.add_argument("--n", type=int, required=True, help="logical spins")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="instance k uses seed + k")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("schedule", help="emit the layered constraint block")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.5, help="phase angle for every plaquette")
    p.add_argument("--mode", choices=[AUGMENTED, BARE], default=AUGMENTED)
    p.add_argument("--out", required=True)
    p.add_argument("--layout-out", help="also dump the layout here")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("verify", help="check layer disjointness and the compiled unitary")
    p.add_argument("circuit")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="run the Monte Carlo ensemble from a config file")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides config and $LHZQAOA_OUTPUT)")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="re-render summary tables from results.csv")
    p.add_argument("dir", help="run directory or results.csv path")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
