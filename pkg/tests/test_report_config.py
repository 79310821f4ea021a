from pathlib import Path

import numpy as np
import pytest

from lhzqaoa.config import ConfigError, RunConfig, format_config, parse_config, read_config
from lhzqaoa.montecarlo import EnsembleReport, McConfig, run_ensemble
from lhzqaoa.report import (
    COMPARISONS,
    HISTOGRAM,
    PAIRED,
    RESULTS,
    SUMMARY,
    compare_protocols,
    parse_provenance,
    read_results,
    write_report,
)


@pytest.fixture(scope="module")
def small_report():
    return run_ensemble(4, [1, 2], "ABC", 4, McConfig(steps=25, seed=1), seed_base=3)


def test_write_and_read_back(tmp_path, small_report):
    write_report(small_report, tmp_path)
    for name in (RESULTS, SUMMARY, HISTOGRAM, PAIRED, COMPARISONS):
        lines = (tmp_path / name).read_text().splitlines()
        assert lines[0].startswith("# ")
        prov = parse_provenance(lines[0])
        for key in ("seed", "M", "L", "delta_max", "version"):
            assert key in prov
    header = (tmp_path / RESULTS).read_text().splitlines()[1]
    assert header == "instance,protocol,m,final_E,final_F,accepts"
    back = read_results(tmp_path / RESULTS)
    assert back.cells == small_report.cells
    for a, b in zip(back.rows, small_report.rows):
        assert a["final_F"] == b["final_F"] and a["final_E"] == b["final_E"]
    assert back.summary() == small_report.summary()


def test_write_is_byte_identical(tmp_path, small_report):
    write_report(small_report, tmp_path / "a")
    write_report(small_report, tmp_path / "b")
    for name in (RESULTS, SUMMARY, HISTOGRAM, PAIRED, COMPARISONS):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_compare_protocols_on_constructed_data():
    rows = []
    rng = np.random.default_rng(0)
    for i in range(50):
        base = rng.uniform(0, 0.5)
        for p, shift in zip("ABC", (0.0, 0.1, 0.1)):
            for m in (1, 2):
                rows.append({"instance": i, "protocol": p, "m": m, "final_E": 0.0,
                             "final_F": base + shift + 0.05 * m + rng.normal(0, 0.01), "accepts": 0})
    rep = EnsembleReport(rows, {}, 20, [(p, m) for p in "ABC" for m in (1, 2)])
    tests = {(t["test"], t["lhs"], t["rhs"]): t for t in compare_protocols(rep)}
    assert tests[("superiority", "B_m1", "A_m1")]["p_value"] < 1e-6
    assert tests[("noninferiority", "C_m2", "B_m2")]["p_value"] < 1e-3
    assert tests[("trend", "A_m2", "A_m1")]["p_value"] < 1e-6
    assert len(tests) == 2 + 2 + 3


def test_config_parse_and_format_round_trip():
    text = """
    # smoke
    n_logical = 4
    instances = 3
    cycles = [1, 3]
    protocols = [A, C]
    steps = 10
    objective = maximize_F
    """
    cfg = parse_config(text)
    assert cfg.cycles == (1, 3) and cfg.protocols == ("A", "C") and cfg.objective == "maximize_F"
    assert parse_config(format_config(cfg)) == cfg
    assert cfg.mc_config().steps == 10


def test_config_lists_every_bad_field():
    with pytest.raises(ConfigError) as exc:
        parse_config("protocols = [A, X]\nsteps = -3\ndelta_max = 0\nbogus = 1\n")
    msg = str(exc.value)
    for key in ("protocols", "bogus"):
        assert key in msg
    with pytest.raises(ConfigError) as exc:
        parse_config("protocols = [A, X]\nsteps = -3\ndelta_max = 0\n")
    assert {p.split(":")[0] for p in exc.value.problems} == {"protocols", "steps", "delta_max"}


def test_full_scale_config_is_accepted():
    cfg = parse_config("instances = 2000\nsteps = 4000\ncycles = [1, 2, 3]\n")
    assert cfg.instances == 2000 and cfg.steps == 4000
    assert parse_config("instances = 400\nobjective = maximize_F\n").objective == "maximize_F"


def test_output_root_env(monkeypatch, tmp_path):
    monkeypatch.setenv("LHZQAOA_OUTPUT", str(tmp_path))
    assert RunConfig().resolved_output() == tmp_path
    assert RunConfig(output_dir="x").resolved_output() == type(tmp_path)("x")


@pytest.mark.parametrize("name", ["quick.cfg", "full_energy.cfg", "full_fidelity.cfg"])
def test_shipped_configs_parse(name):
    path = Path(__file__).resolve().parent.parent / "configs" / name
    cfg = read_config(path)
    assert cfg.n_logical == 4 and cfg.cycles == (1, 2, 3) and cfg.protocols == ("A", "B", "C")
