import itertools

import pytest

from conftest import random_tensor_sequent
from llgrover.classical import (
    NotProvable, SearchStats, Unsupported, balanced, match_atom_pairs, prove_bruteforce,
    provable_by_counting, tensor_right_splits,
)
from llgrover.seqcalc import (
    Atom, Axiom, Sequent, TensorRight, check_proof, flatten_atoms, parse_sequent,
)


def test_pair_table_perm4(perm4):
    assert match_atom_pairs(perm4).as_dict() == {"A": (0, 2), "B": (1, 1), "C": (2, 3), "D": (3, 0)}


def test_pair_table_small():
    assert match_atom_pairs(parse_sequent("A |- A")).as_dict() == {"A": (0, 0)}
    # positions from flatten_atoms on each side
    s = parse_sequent("A*B |- B*A")
    left, right = flatten_atoms(s.left[0]), flatten_atoms(s.right[0])
    expected = {str(a): (left.index(a), right.index(a)) for a in left}
    assert match_atom_pairs(s).as_dict() == expected == {"A": (0, 1), "B": (1, 0)}


def test_pair_table_repeated_names_first_fit():
    t = match_atom_pairs(parse_sequent("A*(B*A) |- A*(A*B)"))
    assert [(e.a, e.b) for e in t.entries] == [(0, 0), (1, 2), (2, 1)]
    assert t.is_bijection()


def test_pair_table_mismatch():
    with pytest.raises(NotProvable, match="atom mismatch"):
        match_atom_pairs(parse_sequent("A*B |- A*C"))


def test_prove_simplest():
    t = prove_bruteforce(parse_sequent("A, B |- A*B"))
    assert isinstance(t.rule, TensorRight)
    assert [type(p.rule) for p in t.premises] == [Axiom, Axiom]
    assert check_proof(t)


def test_unprovable():
    assert prove_bruteforce(parse_sequent("A |- B")) is None
    assert prove_bruteforce(parse_sequent("A, B |- A")) is None


def test_perm4_splits(perm4):
    t = prove_bruteforce(perm4)
    assert check_proof(t)
    assert tensor_right_splits(t) == [3, 1, 0, 2]


def test_lolli6_derivation(lolli6):
    t = prove_bruteforce(lolli6)
    assert check_proof(t)
    assert t.leaves() == [parse_sequent("A1 |- A2"), parse_sequent("B1, C1 |- B2, C2")]


def test_fragment_guard():
    with pytest.raises(Unsupported):
        prove_bruteforce(parse_sequent("A -o B |- C"), "tensor-only")


def test_deterministic(perm4):
    assert prove_bruteforce(perm4) == prove_bruteforce(perm4)


@pytest.mark.parametrize("text, provable", [
    ("A -o B, A |- B", True),
    ("A |- B -o (A*B)", True),
    ("A |- B -o A", False),
    ("A, B |- (A -o C) -o (B*C)", True),
    ("A -o B |- A -o B", True),
    ("(A -o B) -o C |- C", False),
])
def test_lolli_fragment(text, provable):
    t = prove_bruteforce(parse_sequent(text))
    assert (t is not None) is provable
    if t is not None:
        assert check_proof(t)


def test_exhaustive_small_tensor_sequents():
    """Every tensor-only sequent over up to 4 atoms of shape-enumerated trees."""
    names = "ABC"

    def trees(atoms):
        if len(atoms) == 1:
            yield atoms[0]
            return
        from llgrover.seqcalc import Tensor
        for cut in range(1, len(atoms)):
            for l in trees(atoms[:cut]):
                for r in trees(atoms[cut:]):
                    yield Tensor(l, r)

    def number(ns):
        seen = {}
        out = []
        for n in ns:
            out.append(Atom(n, seen.get(n, 0)))
            seen[n] = seen.get(n, 0) + 1
        return out

    checked = 0
    for k in range(1, 5):
        for lnames in itertools.product(names, repeat=k):
            if list(lnames) != sorted(lnames):
                continue
            for rnames in set(itertools.permutations(lnames)) | {tuple("C" * k)}:
                left = number(lnames)
                right = number(rnames)
                lt = next(trees(left))
                for rt in itertools.islice(trees(right), 3):
                    s = Sequent([lt], [rt])
                    t = prove_bruteforce(s)
                    assert (t is not None) == provable_by_counting(s)
                    if t is not None:
                        assert check_proof(t)
                    checked += 1
    assert checked > 100


def test_random_shapes_agree_with_counting(rnd):
    for _ in range(60):
        k = rnd.randint(1, 6)
        s = random_tensor_sequent(k, rnd, mismatch=rnd.random() < 0.4)
        t = prove_bruteforce(s)
        assert (t is not None) == provable_by_counting(s)
        if t is not None:
            assert check_proof(t)
            assert match_atom_pairs(s).is_bijection()


def test_partition_bound(rnd):
    for _ in range(30):
        k = rnd.randint(2, 6)
        s = random_tensor_sequent(k, rnd, mismatch=rnd.random() < 0.5)
        stats = SearchStats()
        prove_bruteforce(s, stats=stats)
        assert stats.max_partitions <= 2 ** k


@pytest.mark.parametrize("text, expected", [
    ("A |- A", True), ("A |- B", False), ("A -o B, A |- B", True),
    ("A |- B -o A", False), ("(A -o B) -o C |- C", False), ("A, A -o B |- B*A", False),
])
def test_polarity_balance(text, expected):
    assert balanced(parse_sequent(text)) is expected


def test_unbalanced_sequent_pruned_at_root():
    stats = SearchStats()
    assert prove_bruteforce(parse_sequent("A*(B*(C*(D*(E*F)))) |- F*(E*(D*(C*(B*X))))"), stats=stats) is None
    assert stats.nodes == 1
