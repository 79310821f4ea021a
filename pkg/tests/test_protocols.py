import numpy as np
import pytest

from lhzqaoa.layout import AUGMENTED, BARE, bits_to_index, build_layout, encode
from lhzqaoa.problem import LogicalProblem, brute_force_ground, generate_instance
from lhzqaoa.protocols import (
    AMPLITUDE,
    DECOMPOSED,
    ParamSet,
    ProtocolSpec,
    QaoaEngine,
    evaluate,
    format_params,
    parse_params,
    prepare_state,
)
from lhzqaoa.statevector import init_uniform


def random_params(engine, rng):
    p = engine.initial_params()
    v = p.as_vector() + rng.uniform(-1.5, 1.5, p.as_vector().size)
    n_ang = len(p.gammas) + len(p.betas) + len(p.omegas)
    v[n_ang:] = np.abs(v[n_ang:])
    return p.with_vector(v)


@pytest.mark.parametrize("kind", "ABC")
@pytest.mark.parametrize("mode", [BARE, AUGMENTED])
def test_zero_angles_return_initial_state_exactly(kind, mode):
    p = generate_instance(4, 2)
    lay = build_layout(4, mode)
    eng = QaoaEngine(p, lay, ProtocolSpec(kind, 2))
    psi = eng.prepare_state(ParamSet.zeros(eng.spec, eng.n_constraints))
    assert np.array_equal(psi, eng.initial_state)
    if mode == BARE:
        assert np.array_equal(psi, init_uniform(6))
    E, F = eng.evaluate(psi)
    assert E == 0.0
    assert F == pytest.approx(len(eng.targets) * 2.0**-6, abs=1e-16)


def test_diagonal_only_cycle_keeps_E_and_F():
    p = generate_instance(4, 3)
    lay = build_layout(4, BARE)
    spec = ProtocolSpec("A", 1)
    psi = prepare_state(p, lay, spec, ParamSet((0.9,), (0.0,)))
    assert np.allclose(np.abs(psi), 0.125, atol=1e-15)
    E, F = evaluate(psi, p, lay, spec)
    assert E == pytest.approx(0.0, abs=1e-15)
    assert F == pytest.approx(1 / 64)


@pytest.mark.parametrize("kind", "ABC")
@pytest.mark.parametrize("n,mode", [(4, BARE), (4, AUGMENTED), (5, BARE)])
def test_decomposed_matches_direct(kind, n, mode, rng):
    p = generate_instance(n, 8)
    lay = build_layout(n, mode)
    direct = QaoaEngine(p, lay, ProtocolSpec(kind, 2))
    decomposed = QaoaEngine(p, lay, ProtocolSpec(kind, 2, constraint_block_mode=DECOMPOSED))
    for _ in range(3):
        params = random_params(direct, rng)
        a = direct.prepare_state(params)
        b = decomposed.prepare_state(params)
        assert np.linalg.norm(a - b) <= 1e-10


def test_dense_and_per_qubit_mixers_agree(rng):
    p = generate_instance(4, 1)
    eng = QaoaEngine(p, build_layout(4, AUGMENTED), ProtocolSpec("C", 3))
    params = random_params(eng, rng)
    a = eng.prepare_state(params)
    eng._hadamard = None
    b = eng.prepare_state(params)
    assert np.linalg.norm(a - b) <= 1e-12


def test_kind_a_is_b_with_tied_angles(rng):
    p = generate_instance(4, 4)
    lay = build_layout(4, BARE)
    for m in (1, 3):
        a = QaoaEngine(p, lay, ProtocolSpec("A", m))
        b = QaoaEngine(p, lay, ProtocolSpec("B", m))
        c = QaoaEngine(p, lay, ProtocolSpec("C", m))
        g, beta = rng.normal(size=m), rng.normal(size=m)
        psi_a = a.prepare_state(ParamSet(tuple(g), tuple(beta)))
        psi_b = b.prepare_state(ParamSet(tuple(g), tuple(beta), tuple(g)))
        psi_c = c.prepare_state(ParamSet(tuple(g), tuple(beta), tuple(g), (2.0,) * 3))
        assert np.linalg.norm(psi_a - psi_b) <= 1e-12
        assert np.linalg.norm(psi_a - psi_c) <= 1e-12


def test_basis_target_state_has_unit_fidelity():
    p = generate_instance(4, 5)
    lay = build_layout(4, BARE)
    eng = QaoaEngine(p, lay, ProtocolSpec("B", 1))
    (t,) = eng.targets
    psi = np.zeros(64, dtype=complex)
    psi[t] = 1.0
    E, F = eng.evaluate(psi)
    assert F == 1.0
    code_energies = [eng.eval_diag.energies[bits_to_index(encode(c, lay))]
                     for c in [(1, a, b, d) for a in (1, -1) for b in (1, -1) for d in (1, -1)]]
    assert E == pytest.approx(min(code_energies), abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_target_set_size_one_for_unique_ground(seed):
    p = generate_instance(4, seed)
    _, ground = brute_force_ground(p)
    eng = QaoaEngine(p, build_layout(4, BARE), ProtocolSpec("A", 1))
    assert len(ground) == 2
    assert len(eng.targets) == 1


def test_degenerate_ground_targets():
    p = LogicalProblem(3, {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})
    eng = QaoaEngine(p, build_layout(3, BARE), ProtocolSpec("A", 1))
    assert len(eng.targets) == 3
    E, F = eng.evaluate(init_uniform(3))
    assert F == pytest.approx(3 / 8)


def test_amplitude_mode():
    p = generate_instance(4, 5)
    lay = build_layout(4, BARE)
    eng = QaoaEngine(p, lay, ProtocolSpec("A", 1, fidelity_mode=AMPLITUDE))
    assert eng.evaluate(init_uniform(6))[1] == pytest.approx(1 / 8)


def test_evaluation_ignores_variational_strengths(rng):
    p = generate_instance(4, 6)
    lay = build_layout(4, BARE)
    eng = QaoaEngine(p, lay, ProtocolSpec("C", 1))
    psi = rng.normal(size=64) + 1j * rng.normal(size=64)
    psi /= np.linalg.norm(psi)
    ref = QaoaEngine(p, lay, ProtocolSpec("B", 1)).evaluate(psi)
    assert eng.evaluate(psi) == ref


def test_trailing_diagonal_changes_neither_E_nor_F(rng):
    p = generate_instance(4, 7)
    lay = build_layout(4, BARE)
    plain = QaoaEngine(p, lay, ProtocolSpec("B", 2))
    extra = QaoaEngine(p, lay, ProtocolSpec("B", 2, trailing_diagonal=True))
    params = random_params(plain, rng)
    more = ParamSet(params.gammas + (0.7,), params.betas, params.omegas + (-0.4,))
    assert extra.run(more) == pytest.approx(plain.run(params), abs=1e-12)


def test_param_validation():
    eng = QaoaEngine(generate_instance(4, 0), build_layout(4, BARE), ProtocolSpec("C", 2))
    with pytest.raises(ValueError, match="omega"):
        eng.prepare_state(ParamSet((1.0, 1.0), (1.0, 1.0), (1.0,), (2.0,) * 3))
    with pytest.raises(ValueError, match="c entries"):
        eng.prepare_state(ParamSet((1.0, 1.0), (1.0, 1.0), (1.0, 1.0), (2.0, -1.0, 2.0)))
    with pytest.raises(ValueError):
        ProtocolSpec("D", 1)
    with pytest.raises(ValueError):
        ProtocolSpec("A", 0)
    with pytest.raises(ValueError):
        ProtocolSpec("A", 1, c_ref=0.0)


def test_param_counts():
    for kind, want in [("A", 2 * 3), ("B", 3 * 3), ("C", 3 * 3 + 3)]:
        assert ParamSet.initial(ProtocolSpec(kind, 3), 3).as_vector().size == want


def test_param_text_round_trip(rng):
    p = ParamSet(tuple(rng.normal(size=2)), tuple(rng.normal(size=2)), tuple(rng.normal(size=2)), (2.0, 0.5, 1e-300))
    text = format_params(p)
    assert text.startswith("gamma=[") and " c=[" in text
    assert parse_params(text) == p
    assert parse_params("gamma=[1] beta=[2]") == ParamSet((1.0,), (2.0,))
    with pytest.raises(ValueError):
        parse_params("gamma=[1]")
    with pytest.raises(ValueError):
        parse_params("gamma=[1] beta=[1] delta=[3]")


@pytest.mark.parametrize("kind", "ABC")
def test_bare_and_augmented_layouts_give_same_E_F(kind, rng):
    p = generate_instance(4, 12)
    bare = QaoaEngine(p, build_layout(4, BARE), ProtocolSpec(kind, 2))
    aug = QaoaEngine(p, build_layout(4, AUGMENTED), ProtocolSpec(kind, 2))
    for _ in range(3):
        params = random_params(bare, rng)
        assert np.allclose(bare.run(params), aug.run(params), atol=1e-12, rtol=0)
