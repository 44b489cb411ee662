"""Classical baseline: exhaustive proof search and the atom position table."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .seqcalc import (
    Atom, Axiom, Formula, Lolli, LolliLeft, LolliRight, ProofTree, Sequent, Tensor,
    TensorLeft, TensorRight, apply_rule, flatten_atoms, is_axiom,
)


class NotProvable(ValueError):
    pass


class Unsupported(ValueError):
    """Sequent is outside the fragment a method handles."""


@dataclass(frozen=True)
class PairEntry:
    atom: Atom
    a: int
    b: int


@dataclass(frozen=True)
class PairTable:
    entries: tuple[PairEntry, ...]

    @property
    def k(self) -> int:
        return len(self.entries)

    def is_bijection(self) -> bool:
        rng = set(range(self.k))
        return {e.a for e in self.entries} == rng and {e.b for e in self.entries} == rng

    def as_dict(self) -> dict[str, tuple[int, int]]:
        return {str(e.atom): (e.a, e.b) for e in self.entries}


def left_atoms(s: Sequent) -> list[Atom]:
    return [a for f in s.left for a in flatten_atoms(f)]


def right_atoms(s: Sequent) -> list[Atom]:
    return [a for f in s.right for a in flatten_atoms(f)]


def check_balanced(s: Sequent) -> None:
    if Counter(a.name for a in left_atoms(s)) != Counter(a.name for a in right_atoms(s)):
        raise NotProvable("not provable: atom mismatch")


def match_atom_pairs(s: Sequent) -> PairTable:
    """Pair every left atom with a right atom of the same name, first fit."""
    if s.has_lolli:
        raise Unsupported("pair table is defined for the tensor fragment only")
    check_balanced(s)
    lhs, rhs = left_atoms(s), right_atoms(s)
    free: dict[str, list[int]] = {}
    for b, atom in enumerate(rhs):
        free.setdefault(atom.name, []).append(b)
    entries = [PairEntry(atom, a, free[atom.name].pop(0)) for a, atom in enumerate(lhs)]
    return PairTable(tuple(entries))


@dataclass
class SearchStats:
    nodes: int = 0
    partitions_tried: list[int] = field(default_factory=list)  # one count per ⊗-Right/⊸-Left node visited

    @property
    def max_partitions(self) -> int:
        return max(self.partitions_tried, default=0)


def _bits(counter: int, width: int) -> tuple[int, ...]:
    # first formula is the most significant bit of the counter
    return tuple((counter >> (width - 1 - i)) & 1 for i in range(width))


def prove_bruteforce(s: Sequent, fragment: str | None = None,
                     stats: SearchStats | None = None) -> ProofTree | None:
    """First cut-free proof in the fixed enumeration order, or ``None``.

    Rules are tried as [Axiom, ⊗-Left at lowest position, ⊸-Right, ⊗-Right,
    ⊸-Left].  ⊗-Left and ⊸-Right are invertible, so once one of them applies
    its failure is final; skipping the later alternatives there returns the
    same first proof as full backtracking.
    """
    if fragment is None:
        fragment = "tensor-lolli" if s.has_lolli or len(s.right) != 1 else "tensor-only"
    if fragment not in ("tensor-only", "tensor-lolli"):
        raise ValueError(f"unknown fragment {fragment!r}")
    if fragment == "tensor-only" and (s.has_lolli or len(s.right) != 1):
        raise Unsupported("sequent is outside the tensor-only fragment")
    stats = stats if stats is not None else SearchStats()
    return _search(s, stats)


def _polarity(f: Formula, sign: int, acc: Counter) -> None:
    if isinstance(f, Atom):
        acc[f.name] += sign
    elif isinstance(f, Tensor):
        _polarity(f.left, sign, acc)
        _polarity(f.right, sign, acc)
    else:
        _polarity(f.antecedent, -sign, acc)
        _polarity(f.consequent, sign, acc)


def balanced(s: Sequent) -> bool:
    """Every atom name occurs as often positively as negatively.

    Every rule of the calculus preserves this count and axioms satisfy it, so
    an unbalanced sequent has no proof and its subtree need not be explored.
    """
    acc: Counter = Counter()
    for f in s.left:
        _polarity(f, -1, acc)
    for f in s.right:
        _polarity(f, 1, acc)
    return not any(acc.values())


def _search(s: Sequent, stats: SearchStats) -> ProofTree | None:
    stats.nodes += 1
    if not balanced(s):
        return None
    if is_axiom(s):
        return ProofTree(s, Axiom(), ())
    for pos, f in enumerate(s.left):
        if isinstance(f, Tensor):
            return _unary(s, TensorLeft(pos), stats)
    for pos, f in enumerate(s.right):
        if isinstance(f, Lolli):
            return _unary(s, LolliRight(pos), stats)
    for pos, f in enumerate(s.right):
        if isinstance(f, Tensor):
            found = _binary(s, stats, lambda p, q: TensorRight(p, pos, q),
                            len(s.left), len(s.right) - 1)
            if found is not None:
                return found
    for pos, f in enumerate(s.left):
        if isinstance(f, Lolli):
            found = _binary(s, stats, lambda p, q: LolliLeft(pos, p, q),
                            len(s.left) - 1, len(s.right))
            if found is not None:
                return found
    return None


def _unary(s: Sequent, rule, stats: SearchStats) -> ProofTree | None:
    (premise,) = apply_rule(s, rule)
    sub = _search(premise, stats)
    return None if sub is None else ProofTree(s, rule, (sub,))


def _binary(s: Sequent, stats: SearchStats, make, n_left: int, n_right: int) -> ProofTree | None:
    width = n_left + n_right
    tried = 0
    try:
        # count down from all-ones: the left premise starts with only the principal's part
        for counter in range((1 << width) - 1, -1, -1):
            bits = _bits(counter, width)
            rule = make(bits[:n_left], bits[n_left:])
            tried += 1
            p0, p1 = apply_rule(s, rule)
            t0 = _search(p0, stats)
            if t0 is None:
                continue
            t1 = _search(p1, stats)
            if t1 is not None:
                return ProofTree(s, rule, (t0, t1))
        return None
    finally:
        stats.partitions_tried.append(tried)


def provable_by_counting(s: Sequent) -> bool:
    """Closed-form truth for the tensor-only fragment: equal atom multisets."""
    return Counter(a.name for a in left_atoms(s)) == Counter(a.name for a in right_atoms(s))


def tensor_right_splits(t: ProofTree) -> list[int]:
    """Left-position index of the atom sent alone to the left premise at each ⊗-Right.

    Read along the right spine (pre-order).  Positions refer to the saturated
    left side of the first ⊗-Right node, which is how the pipelines report
    recovered permutations.
    """
    top = next((n for n in t.nodes() if isinstance(n.rule, TensorRight)), None)
    if top is None:
        return []
    order = {atom: i for i, atom in enumerate(top.conclusion.left)}
    out = []
    node = top
    while isinstance(node.rule, TensorRight):
        lhs = node.premises[0].conclusion.left
        out.extend(order[a] for a in lhs if isinstance(a, Atom))
        node = node.premises[1]
    if isinstance(node.rule, Axiom):
        out.extend(order[a] for a in node.conclusion.left if isinstance(a, Atom))
    return out


def formula_of(atoms: list[Atom]) -> Formula:
    """Right-nested tensor of ``atoms``."""
    f: Formula = atoms[-1]
    for a in reversed(atoms[:-1]):
        f = Tensor(a, f)
    return f
