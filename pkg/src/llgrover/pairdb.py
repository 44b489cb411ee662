"""Entangled pair database: recover the atom permutation of a tensor sequent.

Each left/right position pair (a, b) of an atom is stored as the basis state
``a * 2**n + b`` on 2n qubits; the left register (qubits 0..n-1) holds a, the
right register (qubits n..2n-1) holds b.  To find the partner of a known
right position b, a pattern oracle on the right register marks the one
support state with that b, Grover rounds reflect about the database state,
and the left register is read out.  Every query consumes its own copy.

At k = 2 the marked pair is half the support, where Grover rounds leave the
success probability stuck at 1/2.  Queries then append one extra qubit in
|+> that the oracle also requires to read 0, doubling the search space to
N = 4 with one marked state, which a single round finds exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qsim
from .classical import NotProvable, PairTable, Unsupported, match_atom_pairs
from .grover import (
    BasisSet, PatternOracle, Preparation, build_pattern_oracle, grover_iterations,
    marked_probability, prepare_basis_set, reflect_about_prepared, run_grover,
    success_probability,
)
from .qsim import SeededRng, StateVector
from .seqcalc import (
    Atom, Axiom, Formula, ProofTree, Sequent, Tensor, TensorRight, build_tree,
    flatten_atoms, saturate_tensor_left,
)

MAX_RETRIES = 3


class RecoveryError(RuntimeError):
    """Measured partners do not form a permutation."""


class CopyConsumed(RuntimeError):
    pass


@dataclass(frozen=True)
class DbParams:
    k: int
    n: int

    @classmethod
    def for_k(cls, k: int) -> "DbParams":
        # registers are padded to at least one qubit so k=1 still has a database
        return cls(k, max(1, math.ceil(math.log2(k))) if k > 1 else 1)

    @property
    def qubits(self) -> int:
        return 2 * self.n


def encode_pairs(t: PairTable) -> tuple[DbParams, BasisSet]:
    if not t.is_bijection():
        raise ValueError("pair table is not a bijection")
    params = DbParams.for_k(t.k)
    return params, BasisSet(params.qubits, [e.a * (1 << params.n) + e.b for e in t.entries])


@dataclass
class EntangledDb:
    params: DbParams
    basis: BasisSet
    preparation: Preparation
    copies: list[StateVector | None]

    def fresh(self, i: int) -> StateVector:
        if self.copies[i] is None:
            raise CopyConsumed(f"database copy {i} was already measured")
        return self.copies[i]


def make_database(t: PairTable) -> EntangledDb:
    params, basis = encode_pairs(t)
    prep = prepare_basis_set(basis)
    # each copy is A|0...0>, built independently
    copies = []
    for _ in range(t.k):
        zero = qsim.new_state(params.qubits).amps
        copies.append(StateVector(params.qubits, prep.apply(zero)))
    return EntangledDb(params, basis, prep, copies)


@dataclass
class QueryStats:
    iterations: list[int] = field(default_factory=list)
    success: list[bool] = field(default_factory=list)
    p_success: list[float] = field(default_factory=list)
    p_empirical: list[float] = field(default_factory=list)
    histograms: list[dict[str, int]] = field(default_factory=list)
    attempts: int = 1

    @property
    def oracle_calls(self) -> int:
        return sum(self.iterations)


def doubled(params: DbParams) -> bool:
    """Whether queries pad the search space with one |+> qubit (only k = 2)."""
    return params.k == 2


def query_plan(k: int) -> tuple[int, int, float]:
    """(searched states, Grover rounds, closed-form success) for one query at size k."""
    searched = 2 * k if doubled(DbParams.for_k(k)) else k
    iters = grover_iterations(searched, 1)
    return searched, iters, success_probability(searched, 1, iters)


def query_oracle(db: EntangledDb, b: int) -> PatternOracle:
    n = db.params.n
    reg, pattern = tuple(range(n, 2 * n)), format(b, f"0{n}b")
    if doubled(db.params):
        return PatternOracle(db.params.qubits + 1, reg + (2 * n,), pattern + "0")
    return PatternOracle(db.params.qubits, reg, pattern)


def amplified_state(db: EntangledDb, copy_index: int, b: int,
                    use_circuit: bool = False) -> tuple[StateVector, int]:
    """Pre-measurement state of a query and its iteration count; consumes nothing."""
    psi = db.fresh(copy_index)
    prep, amps = db.preparation, psi.amps.copy()
    if doubled(db.params):
        plus = np.array([1.0, 1.0]) / math.sqrt(2)
        prep, amps = Preparation(np.kron(prep.psi, plus)), np.kron(amps, plus)
    _, iters, _ = query_plan(db.params.k)
    oracle = query_oracle(db, b)
    if not use_circuit:
        return run_grover(prep, oracle, iters), iters
    circ = build_pattern_oracle(oracle)
    for _ in range(iters):
        # data ⊗ |0> ancilla; the ancilla is the last (least significant) qubit
        wide = qsim.run_circuit(StateVector(circ.n, _with_ancilla(amps)), circ).amps
        amps = reflect_about_prepared(prep, wide[0::2])
    return StateVector(oracle.n, amps), iters


def _with_ancilla(amps: np.ndarray) -> np.ndarray:
    out = np.zeros(2 * len(amps), dtype=np.complex128)
    out[0::2] = amps
    return out


def query_partner(db: EntangledDb, copy_index: int, b: int, rng: SeededRng,
                  shots: int | None = None, stats: QueryStats | None = None,
                  use_circuit: bool = False) -> int:
    """Left position paired with right position ``b``, read from copy ``copy_index``.

    With ``shots`` the query circuit is re-run that many times (sampled from
    the same pre-measurement state) and the most frequent left value wins,
    ties going to the smaller value.  Without it a single measurement
    collapses the copy.
    """
    state, iters = amplified_state(db, copy_index, b, use_circuit)
    n = db.params.n
    left = list(range(n))
    if shots is None:
        bits, _ = qsim.measure_collapse(state, left, rng)
        hist = {bits: 1}
    else:
        hist = qsim.sample(state, left, shots, rng)
        bits = max(sorted(hist), key=lambda k: hist[k])
    db.copies[copy_index] = None
    a = int(bits, 2)
    if stats is not None:
        true_a = _true_partner(db, b)
        stats.iterations.append(iters)
        stats.p_success.append(marked_probability(state, query_oracle(db, b)))
        stats.success.append(a == true_a)
        total = sum(hist.values())
        stats.p_empirical.append(hist.get(format(true_a, f"0{n}b"), 0) / total)
        stats.histograms.append(hist)
    return a


def _true_partner(db: EntangledDb, b: int) -> int:
    mask = (1 << db.params.n) - 1
    return next(s >> db.params.n for s in db.basis.states if s & mask == b)


def recover_permutation(s: Sequent | PairTable, rng: SeededRng, shots: int | None = None,
                        use_circuit: bool = False) -> tuple[list[int], QueryStats]:
    """Recovered left position for each right position 0..k-1."""
    table = s if isinstance(s, PairTable) else match_atom_pairs(s)
    db = make_database(table)
    stats = QueryStats()
    perm = [query_partner(db, b, b, rng.derive(b), shots, stats, use_circuit)
            for b in range(table.k)]
    if sorted(perm) != list(range(table.k)):
        raise RecoveryError(f"quantum recovery failed: {perm} is not a permutation")
    return perm, stats


def _right_positions(f: Formula, offset: int = 0) -> list[int]:
    return list(range(offset, offset + len(flatten_atoms(f))))


def _splits(seq: Sequent, f: Formula, right_pos: list[int], left_of: dict[int, int],
            left_index: dict[Atom, int]) -> list:
    """Pre-order rule list proving ``seq`` (atomic left) against right formula ``f``."""
    if not isinstance(f, Tensor):
        return [Axiom()]
    n_l = len(flatten_atoms(f.left))
    wanted = {left_of[b] for b in right_pos[:n_l]}
    partition = tuple(0 if left_index[a] in wanted else 1 for a in seq.left)
    g0 = Sequent([a for a, p in zip(seq.left, partition) if p == 0], [f.left])
    g1 = Sequent([a for a, p in zip(seq.left, partition) if p == 1], [f.right])
    return ([TensorRight(partition)]
            + _splits(g0, f.left, right_pos[:n_l], left_of, left_index)
            + _splits(g1, f.right, right_pos[n_l:], left_of, left_index))


def proof_from_permutation(s: Sequent, perm: list[int]) -> ProofTree:
    """⊗-Left saturation followed by the ⊗-Right splits ``perm`` dictates."""
    flat, steps = saturate_tensor_left(s)
    (goal,) = flat.right
    left_index = {a: i for i, a in enumerate(flat.left)}
    left_of = dict(enumerate(perm))
    rules = list(steps) + _splits(flat, goal, _right_positions(goal), left_of, left_index)
    try:
        return build_tree(s, rules)
    except ValueError as exc:
        raise NotProvable(f"not provable: {exc}") from exc


def prove_pairdb(s: Sequent, rng: SeededRng, shots: int | None = None,
                 retries: int = MAX_RETRIES) -> tuple[ProofTree, list[int], QueryStats]:
    if s.has_lolli or len(s.right) != 1:
        raise Unsupported("the pair-database method handles tensor-only sequents")
    table = match_atom_pairs(s)
    last: RecoveryError | None = None
    for attempt in range(retries):
        try:
            perm, stats = recover_permutation(table, rng.derive(attempt), shots)
            proof = proof_from_permutation(s, perm)
        except RecoveryError as exc:
            last = exc
            continue
        except NotProvable as exc:
            # atoms are balanced, so a failing axiom means a wrong partner was measured
            last = RecoveryError(f"quantum recovery failed: {exc}")
            continue
        stats.attempts = attempt + 1
        return proof, perm, stats
    raise last
