"""Split-code search: encode premise choices as bitstrings and find them with Grover.

Tensor fragment: one bit per ⊗-Right split (0 = left premise, 1 = right
premise), splits numbered in pre-order over the right formula, followed by
the clause's left position as an index.  A clause that is not in the
subtree of a split carries 0 there.

With ⊸: two bits per rule step, (premise, side of that premise) for every
clause in the step's conclusion and (0, 0) for the others, followed by the
clause's index in (name, occurrence, side) order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

from . import qsim
from .classical import NotProvable, Unsupported, check_balanced, match_atom_pairs, prove_bruteforce
from .grover import (
    MarkedSetOracle, grover_iterations, marked_probability, run_grover, uniform_preparation,
)
from .qsim import SeededRng, StateVector
from .seqcalc import (
    Atom, Axiom, Formula, Lolli, LolliLeft, LolliRight, ProofTree, RuleApp, Sequent, Tensor,
    TensorLeft, TensorRight, apply_rule, build_tree, check_proof, flatten_atoms,
    saturate_tensor_left,
)

MAX_WIDTH = 24


class InconsistentAssignment(ValueError):
    pass


class SearchFailed(RuntimeError):
    def __init__(self, message: str, assignment: "SplitAssignment") -> None:
        super().__init__(message)
        self.assignment = assignment


def _index_width(count: int) -> int:
    return max(1, math.ceil(math.log2(count))) if count > 1 else 1


@dataclass(frozen=True)
class SplitCodeTensor:
    atom: Atom
    split_bits: str
    index_bits: str

    @property
    def bits(self) -> str:
        return self.split_bits + self.index_bits

    def __str__(self) -> str:
        return f"{self.split_bits}|{self.index_bits}"


@dataclass(frozen=True)
class SplitCodeLolli:
    atom: Atom
    side: int
    steps: tuple[tuple[int, int], ...]
    index_bits: str

    @property
    def split_bits(self) -> str:
        return "".join(f"{a}{b}" for a, b in self.steps)

    @property
    def bits(self) -> str:
        return self.split_bits + self.index_bits

    def __str__(self) -> str:
        return f"{self.split_bits}|{self.index_bits}"


SplitCode = Union[SplitCodeTensor, SplitCodeLolli]


@dataclass
class SplitAssignment:
    width: int
    index_width: int
    found: dict[int, str] = field(default_factory=dict)   # clause index -> full code bits
    expected: int = 0

    @property
    def complete(self) -> bool:
        return len(self.found) == self.expected

    def codes(self) -> list[str]:
        return [self.found[i] for i in sorted(self.found)]


@dataclass
class SearchStats:
    width: int = 0
    marked: int = 0
    iterations: int = 0
    runs: int = 0
    rejected: int = 0
    p_marked: float = 0.0
    outcomes: dict[str, int] = field(default_factory=dict)

    @property
    def oracle_calls(self) -> int:
        return self.runs * self.iterations


# ---------------------------------------------------------------------------
# Tensor codes

def _tensor_nodes(f: Formula, lo: int = 0) -> list[tuple[int, int, int]]:
    """Pre-order ⊗ nodes as (start, split, end) right positions: left operand is [start, split)."""
    if not isinstance(f, Tensor):
        return []
    n_l = len(flatten_atoms(f.left))
    n_r = len(flatten_atoms(f.right))
    mid = lo + n_l
    return [(lo, mid, mid + n_r)] + _tensor_nodes(f.left, lo) + _tensor_nodes(f.right, mid)


def _tensor_goal(s: Sequent) -> tuple[Sequent, list[TensorLeft], Formula]:
    if s.has_lolli or len(s.right) != 1:
        raise Unsupported("tensor split codes need a tensor-only sequent")
    check_balanced(s)
    flat, steps = saturate_tensor_left(s)
    return flat, steps, flat.right[0]


def derive_split_codes_tensor(s: Sequent) -> list[SplitCodeTensor]:
    flat, _, goal = _tensor_goal(s)
    table = match_atom_pairs(flat)
    nodes = _tensor_nodes(goal)
    width = _index_width(table.k)
    codes = []
    for e in table.entries:
        bits = "".join("0" if not lo <= e.b < hi or e.b < mid else "1" for lo, mid, hi in nodes)
        codes.append(SplitCodeTensor(e.atom, bits, format(e.a, f"0{width}b")))
    return codes


def _decode_tensor(a: SplitAssignment, s: Sequent) -> ProofTree:
    flat, steps, goal = _tensor_goal(s)
    k = len(flat.left)
    nodes = _tensor_nodes(goal)
    _check_shape(a, k, len(nodes) + _index_width(k))
    split = {i: a.found[i][:len(nodes)] for i in range(k)}
    rules: list[RuleApp] = list(steps)
    counter = iter(range(len(nodes)))

    def go(live: list[int], f: Formula) -> None:
        if not isinstance(f, Tensor):
            rules.append(Axiom())
            return
        j = next(counter)
        for i in range(k):
            if i not in live and split[i][j] != "0":
                raise InconsistentAssignment(
                    f"clause {flat.left[i]} is not in split {j} but its code has a 1 there")
        partition = tuple(int(split[i][j]) for i in live)
        rules.append(TensorRight(partition))
        go([i for i, p in zip(live, partition) if p == 0], f.left)
        go([i for i, p in zip(live, partition) if p == 1], f.right)

    go(list(range(k)), goal)
    return _finish(s, rules)


# ---------------------------------------------------------------------------
# Lolli codes

def clause_order(s: Sequent) -> list[tuple[Atom, int]]:
    """Clauses (atom, side) sorted by name, occurrence, then side."""
    return sorted(s.atoms(), key=lambda c: (c[0].name, c[0].occ, c[1]))


def _relabel(s: Sequent) -> tuple[Sequent, list[tuple[Atom, int]]]:
    """Copy of ``s`` whose atoms carry their clause index as occurrence label."""
    clauses = clause_order(s)
    ids = {c: i for i, c in enumerate(clauses)}

    def sub(f: Formula, side: int) -> Formula:
        if isinstance(f, Atom):
            return Atom(f.name, ids[(f, side)])
        if isinstance(f, Tensor):
            return Tensor(sub(f.left, side), sub(f.right, side))
        return Lolli(sub(f.antecedent, side), sub(f.consequent, side))

    return Sequent([sub(f, 0) for f in s.left], [sub(f, 1) for f in s.right]), clauses


def _rule_list(schedule: ProofTree | Sequence[RuleApp]) -> list[RuleApp]:
    if isinstance(schedule, ProofTree):
        return [n.rule for n in schedule.nodes()]
    return list(schedule)


_ENCODED = (LolliRight, LolliLeft, TensorRight)


def _side_map(seq: Sequent) -> dict[int, int]:
    return {a.occ: side for a, side in seq.atoms()}


def derive_split_codes_lolli(s: Sequent, schedule: ProofTree | Sequence[RuleApp]) -> list[SplitCodeLolli]:
    tagged, clauses = _relabel(s)
    try:
        tree = build_tree(tagged, _rule_list(schedule))
    except ValueError as exc:
        raise ValueError(f"schedule invalid for {s}: {exc}") from exc
    steps: list[dict[int, tuple[int, int]]] = []
    for node in tree.nodes():
        if not isinstance(node.rule, _ENCODED):
            continue
        dest: dict[int, tuple[int, int]] = {}
        for p, prem in enumerate(node.premises):
            for cid, side in _side_map(prem.conclusion).items():
                dest[cid] = (p, side)
        steps.append(dest)
    width = _index_width(len(clauses))
    return [SplitCodeLolli(atom, side, tuple(st.get(i, (0, 0)) for st in steps),
                           format(i, f"0{width}b"))
            for i, (atom, side) in enumerate(clauses)]


def _decode_lolli(a: SplitAssignment, s: Sequent, skeleton: Sequence[RuleApp]) -> ProofTree:
    tagged, clauses = _relabel(s)
    n_steps = sum(1 for r in skeleton if isinstance(r, _ENCODED))
    _check_shape(a, len(clauses), 2 * n_steps + _index_width(len(clauses)))
    code = {i: a.found[i] for i in range(len(clauses))}
    it = iter(skeleton)
    step = iter(range(n_steps))
    rules: list[RuleApp] = []

    def dest(cid: int, j: int) -> tuple[int, int]:
        return int(code[cid][2 * j]), int(code[cid][2 * j + 1])

    def atoms_of(fs) -> list[int]:
        return [x.occ for f in fs for x in flatten_atoms(f)]

    def premise_of(f: Formula, side: int, j: int) -> int:
        ds = {dest(c, j) for c in atoms_of([f])}
        if len(ds) != 1:
            raise InconsistentAssignment(f"atoms of {f} disagree at step {j}")
        (p, sd), = ds
        if sd != side:
            raise InconsistentAssignment(f"{f} would change side at step {j}")
        return p

    def go(seq: Sequent) -> None:
        try:
            r = next(it)
        except StopIteration:
            raise InconsistentAssignment("skeleton too short") from None
        if isinstance(r, _ENCODED):
            j = next(step)
            live = set(atoms_of(seq.left + seq.right))
            for c in range(len(clauses)):
                if c not in live and dest(c, j) != (0, 0):
                    raise InconsistentAssignment(f"closed clause {c} has nonzero bits at step {j}")
            if isinstance(r, TensorRight):
                ctx_r = seq.right[:r.pos] + seq.right[r.pos + 1:]
                r = TensorRight(tuple(premise_of(f, 0, j) for f in seq.left), r.pos,
                                tuple(premise_of(f, 1, j) for f in ctx_r))
            elif isinstance(r, LolliLeft):
                ctx_l = seq.left[:r.pos] + seq.left[r.pos + 1:]
                r = LolliLeft(r.pos, tuple(premise_of(f, 0, j) for f in ctx_l),
                              tuple(premise_of(f, 1, j) for f in seq.right))
            try:
                premises = apply_rule(seq, r)
            except ValueError as exc:
                raise InconsistentAssignment(str(exc)) from exc
            got = {}
            for p, prem in enumerate(premises):
                for cid, side in _side_map(prem).items():
                    got[cid] = (p, side)
            if any(dest(c, j) != d for c, d in got.items()):
                raise InconsistentAssignment(f"codes disagree with the rule at step {j}")
        else:
            try:
                premises = apply_rule(seq, r)
            except ValueError as exc:
                raise InconsistentAssignment(str(exc)) from exc
        rules.append(r)
        for prem in premises:
            go(prem)

    go(tagged)
    return _finish(s, rules)


# ---------------------------------------------------------------------------
# Shared

def _check_shape(a: SplitAssignment, clauses: int, width: int) -> None:
    if sorted(a.found) != list(range(clauses)):
        raise InconsistentAssignment(f"assignment covers {sorted(a.found)}, need 0..{clauses - 1}")
    bad = [c for c in a.found.values() if len(c) != width]
    if bad:
        raise InconsistentAssignment(f"codes {bad} do not have width {width}")


def _finish(s: Sequent, rules: list[RuleApp]) -> ProofTree:
    try:
        tree = build_tree(s, rules)
    except ValueError as exc:
        raise InconsistentAssignment(f"inconsistent assignment: {exc}") from exc
    if not check_proof(tree):
        raise InconsistentAssignment("inconsistent assignment: decoded tree is not a proof")
    return tree


def assignment_from_codes(codes: Sequence[SplitCode]) -> SplitAssignment:
    """Noiseless assignment: every code picked once."""
    iw = len(codes[0].index_bits)
    a = SplitAssignment(len(codes[0].bits), iw, expected=len(codes))
    for c in codes:
        a.found[int(c.index_bits, 2)] = c.bits
    return a


def decode_assignment(a: SplitAssignment, s: Sequent,
                      schedule: ProofTree | Sequence[RuleApp] | None = None) -> ProofTree:
    if not a.complete:
        raise InconsistentAssignment("assignment is incomplete")
    if schedule is None:
        return _decode_tensor(a, s)
    return _decode_lolli(a, s, _rule_list(schedule))


def amplified(codes: Sequence[SplitCode]) -> tuple[StateVector, MarkedSetOracle, int]:
    """Pre-measurement state of one search run."""
    width = len(codes[0].bits)
    if width > MAX_WIDTH:
        raise ValueError(f"code width {width} exceeds {MAX_WIDTH} qubits")
    oracle = MarkedSetOracle(width, {int(c.bits, 2) for c in codes})
    iters = grover_iterations(1 << width, len(oracle.marked))
    return run_grover(uniform_preparation(width), oracle, iters), oracle, iters


def run_split_search(codes: Sequence[SplitCode], budget: int,
                     rng: SeededRng) -> tuple[SplitAssignment, SearchStats]:
    """Repeat prepare/amplify/measure until every clause index has been seen.

    Run ``r`` measures with the stream ``rng.derive(r)``.  An outcome is kept
    only if it is a marked code and its index is new.
    """
    if not codes:
        raise ValueError("no codes to search for")
    iw = len(codes[0].index_bits)
    state, oracle, iters = amplified(codes)
    a = SplitAssignment(oracle.n, iw, expected=len(codes))
    stats = SearchStats(width=oracle.n, marked=len(oracle.marked), iterations=iters,
                        p_marked=marked_probability(state, oracle))
    everything = list(range(oracle.n))
    for r in range(budget):
        if a.complete:
            break
        bits, _ = qsim.measure_collapse(state, everything, rng.derive(r))
        stats.runs += 1
        stats.outcomes[bits] = stats.outcomes.get(bits, 0) + 1
        idx = int(bits[oracle.n - iw:], 2)
        if int(bits, 2) in oracle.marked and idx not in a.found:
            a.found[idx] = bits
        elif int(bits, 2) not in oracle.marked:
            stats.rejected += 1
    stats.outcomes = dict(sorted(stats.outcomes.items()))
    return a, stats


@dataclass
class SplitResult:
    proof: ProofTree
    codes: list[SplitCode]
    assignment: SplitAssignment
    stats: SearchStats
    schedule_from_classical: bool


def prove_splitsearch(s: Sequent, rng: SeededRng, budget: int = 200) -> SplitResult:
    if s.has_lolli:
        # the ⊸ encoding is built from a known derivation skeleton
        tree = prove_bruteforce(s, "tensor-lolli")
        if tree is None:
            raise NotProvable("not provable")
        skeleton = _rule_list(tree)
        codes: list[SplitCode] = list(derive_split_codes_lolli(s, skeleton))
    else:
        skeleton = None
        codes = list(derive_split_codes_tensor(s))
    a, stats = run_split_search(codes, budget, rng)
    if not a.complete:
        raise SearchFailed(f"budget of {budget} runs exhausted with {len(a.found)}/{a.expected} "
                           "clauses recovered", a)
    proof = decode_assignment(a, s, skeleton)
    return SplitResult(proof, codes, a, stats, skeleton is not None)
