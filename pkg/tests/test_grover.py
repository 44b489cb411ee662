import itertools
import math
from functools import reduce

import numpy as np
import pytest

from llgrover import qsim
from llgrover.grover import (
    BasisSet, MarkedSetOracle, PatternOracle, Preparation, build_marked_set_oracle,
    build_pattern_oracle, grover_iterations, marked_probability, prepare_basis_set,
    reflect_about_prepared, reflect_via_operator, run_grover, success_probability,
    uniform_preparation,
)
from llgrover.qsim import StateVector

HAD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def hadamard_n(n):
    return reduce(np.kron, [HAD] * n)


@pytest.mark.parametrize("N, M, expected", [
    (4, 1, 1), (8, 1, 2), (16, 1, 3), (64, 1, 6), (4096, 1, 50), (32, 4, 2), (2, 1, 1), (1, 1, 0),
])
def test_iteration_counts(N, M, expected):
    assert grover_iterations(N, M) == expected


def test_iteration_count_guards():
    with pytest.raises(ValueError):
        grover_iterations(4, 0)
    with pytest.raises(ValueError):
        grover_iterations(4, 5)


@pytest.mark.parametrize("N, M, m, p", [
    (4, 1, 1, 1.0),
    (8, 1, 2, 0.9453125),
    (32, 4, 2, 0.9453125),
    (64, 1, 6, 0.99658568),
    (3, 1, 1, 1 / 3 * (3 - 4 / 3) ** 2),
])
def test_success_closed_form(N, M, m, p):
    assert success_probability(N, M, m) == pytest.approx(p, abs=1e-8)


def test_basis_set_vector():
    v = BasisSet(3, [5, 1, 1]).vector()
    assert np.allclose(v, np.where(np.isin(np.arange(8), [1, 5]), 1 / math.sqrt(2), 0))
    with pytest.raises(ValueError):
        BasisSet(2, [4])
    with pytest.raises(ValueError):
        BasisSet(2, [])


@pytest.mark.parametrize("states", [[0], [3], [0, 1, 2, 3], [1, 2], [2, 5, 11, 12]])
def test_preparation_maps_zero_to_psi(states):
    n = 4
    p = prepare_basis_set(BasisSet(n, states))
    zero = np.eye(1 << n)[0]
    assert np.allclose(p.apply(zero), p.psi)
    assert np.allclose(p.apply_inverse(p.psi), zero)
    a = p.matrix()
    assert np.allclose(a.conj().T @ a, np.eye(1 << n))


def test_preparation_complex_phase():
    psi = np.array([1j, 1, 0, 0]) / math.sqrt(2)
    p = Preparation(psi)
    assert np.allclose(p.apply(np.eye(4)[0]), psi)
    with pytest.raises(ValueError):
        Preparation(np.array([1, 1, 0, 0]))


def test_uniform_preparation_is_hadamard_column():
    for n in (1, 2, 3):
        assert np.allclose(uniform_preparation(n).psi, hadamard_n(n)[:, 0])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_uniform_reflection_is_textbook_diffuser(n):
    hn = hadamard_n(n)
    zero_reflect = 2 * np.outer(np.eye(1 << n)[0], np.eye(1 << n)[0]) - np.eye(1 << n)
    diffuser = hn @ zero_reflect @ hn
    p = uniform_preparation(n)
    cols = np.eye(1 << n, dtype=complex)
    built = np.column_stack([reflect_about_prepared(p, c) for c in cols])
    via_op = np.column_stack([reflect_via_operator(p, c) for c in cols])
    assert np.allclose(built, diffuser, atol=1e-12)
    assert np.allclose(via_op, diffuser, atol=1e-12)


def test_reflection_squares_to_identity():
    gen = np.random.default_rng(4)
    for states in ([0, 3], [1, 4, 6], list(range(8))):
        p = prepare_basis_set(BasisSet(3, states))
        v = gen.normal(size=8) + 1j * gen.normal(size=8)
        assert np.allclose(reflect_about_prepared(p, reflect_about_prepared(p, v)), v, atol=1e-12)
        assert np.allclose(reflect_via_operator(p, v), reflect_about_prepared(p, v), atol=1e-12)


def test_pattern_oracle_diagonal():
    o = PatternOracle(3, (0, 2), "10")
    expected = [-1.0 if (i >> 2) & 1 == 1 and i & 1 == 0 else 1.0 for i in range(8)]
    assert list(o.diagonal()) == expected
    with pytest.raises(ValueError):
        PatternOracle(2, (0,), "11")
    with pytest.raises(ValueError):
        PatternOracle(2, (0, 2), "11")


def test_pattern_oracle_on_two_qubits_is_cz():
    o = PatternOracle(2, (0, 1), "11")
    assert list(o.diagonal()) == [1, 1, 1, -1]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_pattern_oracle_circuit_matches_diagonal(n):
    gen = np.random.default_rng(n)
    width = min(n, 3)
    for reg in list(itertools.permutations(range(n), width))[:6]:
        pattern = "".join(gen.choice(["0", "1"]) for _ in reg)
        o = PatternOracle(n, reg, pattern)
        circ = build_pattern_oracle(o)
        v = gen.normal(size=1 << n) + 1j * gen.normal(size=1 << n)
        v /= np.linalg.norm(v)
        wide = np.kron(v, [1, 0])
        out = qsim.run_circuit(StateVector(n + 1, wide), circ).amps
        assert np.max(np.abs(out - np.kron(o.diagonal() * v, [1, 0]))) <= 1e-12


def test_pattern_oracle_kickback_without_uncompute():
    o = PatternOracle(2, (0, 1), "01")
    circ = build_pattern_oracle(o, prepare_ancilla=False)
    minus = np.array([1, -1]) / math.sqrt(2)
    v = np.full(4, 0.5, dtype=complex)
    out = qsim.run_circuit(StateVector(3, np.kron(v, minus)), circ).amps
    assert np.allclose(out, np.kron(o.diagonal() * v, minus))


def test_marked_set_oracle():
    assert list(build_marked_set_oracle(MarkedSetOracle(2, [1, 3]))) == [1, -1, 1, -1]
    with pytest.raises(ValueError):
        MarkedSetOracle(2, [4])


@pytest.mark.parametrize("N, M, m", [(4, 1, 1), (8, 1, 2), (64, 1, 6), (3, 1, 1), (16, 3, 1)])
def test_run_grover_follows_closed_form(N, M, m):
    n = max(1, math.ceil(math.log2(N)))
    oracle = MarkedSetOracle(n, range(M))
    s = run_grover(prepare_basis_set(BasisSet(n, range(N))), oracle, m)
    assert marked_probability(s, oracle) == pytest.approx(success_probability(N, M, m), abs=1e-9)


def test_run_grover_matches_matrix_iteration():
    n = 3
    hn = hadamard_n(n)
    diffuser = hn @ (2 * np.outer(np.eye(8)[0], np.eye(8)[0]) - np.eye(8)) @ hn
    oracle = np.diag([1, 1, 1, 1, 1, -1, 1, 1])
    v = hn[:, 0]
    for _ in range(2):
        v = diffuser @ oracle @ v
    got = run_grover(uniform_preparation(n), MarkedSetOracle(n, [5]), 2).amps
    assert np.allclose(got, v)


def test_run_grover_zero_iterations_and_guards():
    p = uniform_preparation(2)
    assert np.allclose(run_grover(p, MarkedSetOracle(2, [1]), 0).amps, p.psi)
    with pytest.raises(ValueError):
        run_grover(p, MarkedSetOracle(2, [1]), -1)
    with pytest.raises(ValueError):
        run_grover(p, MarkedSetOracle(3, [1]), 1)
