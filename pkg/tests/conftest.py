import random

import pytest

from llgrover.classical import formula_of
from llgrover.seqcalc import Atom, Sequent, Tensor, parse_sequent

PERM4 = "A*(B*(C*D)) |- D*(B*(A*C))"
LOLLI6 = "A1, A2 -o B1 |- C1 -o B2, C2"


@pytest.fixture
def perm4():
    return parse_sequent(PERM4)


@pytest.fixture
def lolli6():
    return parse_sequent(LOLLI6)


def random_tree(atoms, rnd):
    """Random ⊗ tree over ``atoms`` in order."""
    if len(atoms) == 1:
        return atoms[0]
    cut = rnd.randint(1, len(atoms) - 1)
    return Tensor(random_tree(atoms[:cut], rnd), random_tree(atoms[cut:], rnd))


def random_tensor_sequent(k, rnd, mismatch=False, names="ABCDEFGH"):
    """Random-shaped tensor sequent with k atoms; optionally with one renamed atom on the right."""
    pool = [rnd.choice(names[:max(2, k - 1)]) for _ in range(k)]
    counts = {}
    left = []
    for n in pool:
        left.append(Atom(n, counts.get(n, 0)))
        counts[n] = counts.get(n, 0) + 1
    order = pool[:]
    rnd.shuffle(order)
    if mismatch:
        i = rnd.randrange(k)
        order[i] = next(c for c in "XYZ" if c not in order)
    counts = {}
    right = []
    for n in order:
        right.append(Atom(n, counts.get(n, 0)))
        counts[n] = counts.get(n, 0) + 1
    n_left = rnd.randint(1, min(3, k))
    cuts = sorted(rnd.sample(range(1, k), n_left - 1)) if n_left > 1 else []
    chunks = [left[a:b] for a, b in zip([0] + cuts, cuts + [k])]
    return Sequent([random_tree(c, rnd) for c in chunks], [random_tree(right, rnd)])


@pytest.fixture
def rnd():
    return random.Random(20240601)


__all__ = ["PERM4", "LOLLI6", "formula_of", "random_tensor_sequent"]
