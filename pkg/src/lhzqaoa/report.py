"""CSV tables for ensemble runs and the paired protocol comparisons."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy import stats

from .montecarlo import HIST_BINS, EnsembleReport
from .protocols import KINDS

RESULTS = "results.csv"
SUMMARY = "summary.csv"
HISTOGRAM = "histogram.csv"
PAIRED = "paired.csv"
COMPARISONS = "comparisons.csv"
RESULT_COLUMNS = ["instance", "protocol", "m", "final_E", "final_F", "accepts"]
NONINFERIORITY_MARGIN = 0.01


def provenance_line(provenance: dict) -> str:
    return "# " + " ".join(f"{k}={v}" for k, v in provenance.items())


def parse_provenance(line: str) -> dict:
    return dict(kv.split("=", 1) for kv in line.lstrip("#").split() if "=" in kv)


def _write_table(path, provenance, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(provenance_line(provenance) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def compare_protocols(report: EnsembleReport, margin=NONINFERIORITY_MARGIN) -> list:
    """Paired one-sided tests behind the protocol ordering and the trend in m.

    * ``superiority`` B over A at each m: H1 mean(F_B - F_A) > 0
    * ``noninferiority`` C vs B at each m: H1 mean(F_C - F_B) > -margin
    * ``trend`` per protocol, m -> m+1: H1 mean(F_{m+1} - F_m) > 0
    """
    have = set(report.cells)
    ms = sorted({m for _, m in report.cells})
    out = []

    def add(test, lhs, rhs, d, shift=0.0):
        if d.size < 2 or np.all(d + shift == d[0] + shift):
            p = 0.0 if np.mean(d + shift) > 0 else 1.0
        else:
            p = float(stats.ttest_1samp(d + shift, 0.0, alternative="greater").pvalue)
        out.append({"test": test, "lhs": lhs, "rhs": rhs, "n": int(d.size),
                    "mean_diff": float(np.mean(d)), "margin": shift, "p_value": p})

    for m in ms:
        if ("A", m) in have and ("B", m) in have:
            add("superiority", f"B_m{m}", f"A_m{m}", report.finals("B", m) - report.finals("A", m))
        if ("B", m) in have and ("C", m) in have:
            add("noninferiority", f"C_m{m}", f"B_m{m}",
                report.finals("C", m) - report.finals("B", m), margin)
    for p in KINDS:
        pm = [m for m in ms if (p, m) in have]
        for m0, m1 in zip(pm, pm[1:]):
            add("trend", f"{p}_m{m1}", f"{p}_m{m0}", report.finals(p, m1) - report.finals(p, m0))
    return out


def write_report(report: EnsembleReport, outdir) -> list:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    prov = report.provenance
    written = []

    path = outdir / RESULTS
    _write_table(path, prov, RESULT_COLUMNS, ([r[c] for c in RESULT_COLUMNS] for r in report.rows))
    written.append(path)
    written += write_summaries(report, outdir)
    return written


def write_summaries(report: EnsembleReport, outdir) -> list:
    outdir = Path(outdir)
    prov = report.provenance
    written = []
    summary = report.summary()
    cols = ["protocol", "m", "n", "mean_F", "sem_F", "mean_E", "sem_E"]
    _write_table(outdir / SUMMARY, prov, cols, ([s[c] for c in cols] for s in summary))
    written.append(outdir / SUMMARY)

    cols = ["protocol", "m", "bin_lo", "bin_hi", "mass"]
    _write_table(outdir / HISTOGRAM, prov, cols, ([h[c] for c in cols] for h in report.histogram()))
    written.append(outdir / HISTOGRAM)

    cols, table = report.paired_table()
    _write_table(outdir / PAIRED, prov, cols, table)
    written.append(outdir / PAIRED)

    cols = ["test", "lhs", "rhs", "n", "mean_diff", "margin", "p_value"]
    _write_table(outdir / COMPARISONS, prov, cols, ([t[c] for c in cols] for t in compare_protocols(report)))
    written.append(outdir / COMPARISONS)
    return written


def read_results(path) -> EnsembleReport:
    """Rebuild a report from ``results.csv`` (provenance header included)."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}: missing provenance header")
        prov = parse_provenance(first)
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_COLUMNS:
            raise ValueError(f"{path}: expected columns {RESULT_COLUMNS}, got {reader.fieldnames}")
        rows = [{"instance": int(r["instance"]), "protocol": r["protocol"], "m": int(r["m"]),
                 "final_E": float(r["final_E"]), "final_F": float(r["final_F"]),
                 "accepts": int(r["accepts"])} for r in reader]
    protocols = [p for p in KINDS if any(r["protocol"] == p for r in rows)]
    ms = sorted({r["m"] for r in rows})
    cells = [(p, m) for p in protocols for m in ms if any(r["protocol"] == p and r["m"] == m for r in rows)]
    return EnsembleReport(rows, prov, HIST_BINS, cells)


def format_summary(report: EnsembleReport) -> str:
    lines = [f"{'protocol':>8} {'m':>3} {'n':>6} {'mean F':>10} {'sem F':>9} {'mean E':>10}"]
    for s in report.summary():
        lines.append(f"{s['protocol']:>8} {s['m']:>3} {s['n']:>6} {s['mean_F']:>10.5f} "
                     f"{s['sem_F']:>9.5f} {s['mean_E']:>10.5f}")
    return "\n".join(lines)
