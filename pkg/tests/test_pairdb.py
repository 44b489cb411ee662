import math

import numpy as np
import pytest

from conftest import random_tensor_sequent
from llgrover.classical import NotProvable, Unsupported, match_atom_pairs, prove_bruteforce
from llgrover.grover import marked_probability, success_probability
from llgrover.pairdb import (
    CopyConsumed, DbParams, QueryStats, RecoveryError, amplified_state, encode_pairs,
    make_database, proof_from_permutation, prove_pairdb, query_oracle, query_partner,
    recover_permutation,
)
from llgrover.qsim import SeededRng
from llgrover.seqcalc import Atom, Sequent, check_proof, parse_sequent


def permutation_sequent(perm):
    """Right-nested tensor sequent whose right position b holds left atom perm[b]."""
    atoms = [Atom(f"P{i}") for i in range(len(perm))]

    def nest(xs):
        from llgrover.seqcalc import Tensor
        return xs[0] if len(xs) == 1 else Tensor(xs[0], nest(xs[1:]))

    return Sequent([nest(atoms)], [nest([atoms[a] for a in perm])])


@pytest.mark.parametrize("k, n", [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4), (64, 6)])
def test_register_width(k, n):
    assert DbParams.for_k(k) == DbParams(k, n)
    assert DbParams.for_k(k).qubits == 2 * n


def test_encoding_perm4(perm4):
    params, basis = encode_pairs(match_atom_pairs(perm4))
    # (a, b) pairs (0,2) (1,1) (2,3) (3,0) as a*4 + b
    assert params == DbParams(4, 2)
    assert basis.states == (2, 5, 11, 12)


def test_database_copies_are_uniform_over_pairs(perm4):
    db = make_database(match_atom_pairs(perm4))
    assert len(db.copies) == 4
    for c in db.copies:
        nz = np.flatnonzero(np.abs(c.amps) > 1e-12)
        assert list(nz) == [2, 5, 11, 12]
        assert np.allclose(np.abs(c.amps[nz]) ** 2, 0.25)


def test_query_oracle_targets_right_register(perm4):
    db = make_database(match_atom_pairs(perm4))
    o = query_oracle(db, 3)
    assert o.reg == (2, 3) and o.pattern == "11"
    assert list(np.flatnonzero(o.diagonal() < 0)) == [3, 7, 11, 15]


def test_single_query_is_exact_for_k4(perm4):
    db = make_database(match_atom_pairs(perm4))
    state, iters = amplified_state(db, 0, 0)
    assert iters == 1
    assert np.allclose(np.abs(state.amps[12]) ** 2, 1.0)


@pytest.mark.parametrize("use_circuit", [False, True])
def test_recover_perm4(perm4, use_circuit):
    perm, stats = recover_permutation(perm4, SeededRng(1), use_circuit=use_circuit)
    assert perm == [3, 1, 0, 2]
    assert stats.oracle_calls == 4
    assert all(stats.success)
    assert stats.p_success == pytest.approx([1.0] * 4)


def test_recover_with_shots_majority(perm4):
    perm, stats = recover_permutation(perm4, SeededRng(1), shots=50)
    assert perm == [3, 1, 0, 2]
    assert [sum(h.values()) for h in stats.histograms] == [50] * 4
    assert stats.p_empirical == [1.0] * 4


def test_copy_is_single_use(perm4):
    db = make_database(match_atom_pairs(perm4))
    query_partner(db, 0, 0, SeededRng(0))
    with pytest.raises(CopyConsumed):
        query_partner(db, 0, 1, SeededRng(0))
    assert query_partner(db, 1, 1, SeededRng(0)) == 1


@pytest.mark.parametrize("k", [8, 16, 64])
def test_query_success_follows_closed_form(k):
    rnd = np.random.default_rng(k)
    perm = [int(x) for x in rnd.permutation(k)]
    s = permutation_sequent(perm)
    db = make_database(match_atom_pairs(s))
    iters = math.floor(math.pi / 4 * math.sqrt(k))
    expected = success_probability(k, 1, iters)
    stats = QueryStats()
    for b in (0, k // 2, k - 1):
        query_partner(db, b, b, SeededRng(b), stats=stats)
    assert stats.iterations == [iters] * 3
    assert stats.p_success == pytest.approx([expected] * 3, abs=1e-10)


@pytest.mark.parametrize("k, calls", [(4, 4), (16, 48), (64, 384), (3, 3), (8, 16)])
def test_oracle_call_count(k, calls):
    s = permutation_sequent(list(reversed(range(k))))
    _, _, stats = prove_pairdb(s, SeededRng(5))
    assert stats.oracle_calls == calls == k * math.floor(math.pi / 4 * math.sqrt(k))


def test_prove_pairdb_perm4(perm4):
    proof, perm, stats = prove_pairdb(perm4, SeededRng(7))
    assert perm == [3, 1, 0, 2]
    assert check_proof(proof)
    assert proof == prove_bruteforce(perm4)
    assert stats.attempts == 1


def test_proof_from_permutation_rejects_wrong_perm(perm4):
    with pytest.raises(NotProvable):
        proof_from_permutation(perm4, [0, 1, 2, 3])


def test_bad_measurements_raise_recovery_error(perm4, monkeypatch):
    import llgrover.pairdb as pairdb
    monkeypatch.setattr(pairdb, "query_partner", lambda *a, **k: 0)
    with pytest.raises(RecoveryError):
        prove_pairdb(perm4, SeededRng(0))


def test_unsupported_and_mismatch():
    with pytest.raises(Unsupported):
        prove_pairdb(parse_sequent("A -o B |- A -o B"), SeededRng(0))
    with pytest.raises(NotProvable, match="atom mismatch"):
        prove_pairdb(parse_sequent("A*B |- A*C"), SeededRng(0))


@pytest.mark.parametrize("perm", [[0, 1], [1, 0]])
def test_two_atoms_are_exact_with_doubled_search_space(perm):
    s = permutation_sequent(perm)
    db = make_database(match_atom_pairs(s))
    assert db.basis.states == tuple(sorted(a * 2 + b for b, a in enumerate(perm)))
    for b in range(2):
        state, iters = amplified_state(db, b, b)
        assert iters == 1 and state.n == 3
        assert marked_probability(state, query_oracle(db, b)) == pytest.approx(1.0, abs=1e-12)
    for seed in range(5):
        got, stats = recover_permutation(s, SeededRng(seed), use_circuit=seed % 2 == 1)
        assert got == perm and stats.oracle_calls == 2


def test_single_atom():
    proof, perm, stats = prove_pairdb(parse_sequent("A |- A"), SeededRng(0))
    assert perm == [0] and check_proof(proof)


def test_random_sequents_agree_with_bruteforce(rnd):
    for trial in range(100):
        k = rnd.randint(1, 8)
        s = random_tensor_sequent(k, rnd, mismatch=rnd.random() < 0.3)
        classical = prove_bruteforce(s)
        try:
            proof, _, _ = prove_pairdb(s, SeededRng(trial), shots=1000)
        except NotProvable:
            assert classical is None
            continue
        assert classical is not None
        assert check_proof(proof)
        assert proof.conclusion == s
