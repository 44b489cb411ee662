"""Built-in invariant suites behind ``llgrover selftest``.

Each check returns ``None`` on success or a short failure description.
"""
from __future__ import annotations

import itertools
import math
import traceback

import numpy as np

from . import qsim
from .classical import prove_bruteforce, tensor_right_splits
from .grover import (
    BasisSet, MarkedSetOracle, PatternOracle, build_pattern_oracle, prepare_basis_set,
    reflect_about_prepared, run_grover, marked_probability, success_probability,
)
from .pairdb import prove_pairdb
from .qsim import MCX, H, SeededRng, X, Z
from .seqcalc import check_proof, parse_sequent, render_sequent
from .splitsearch import (
    InconsistentAssignment, assignment_from_codes, decode_assignment, derive_split_codes_lolli,
    derive_split_codes_tensor,
)

PERM4 = "A*(B*(C*D)) |- D*(B*(A*C))"
LOLLI6 = "A1, A2 -o B1 |- C1 -o B2, C2"


def check_parser_round_trip():
    for text in (PERM4, LOLLI6, "A, B |- A*B", "(A -o B) -o C, A*A |- C*(D -o E)"):
        s = parse_sequent(text)
        if parse_sequent(render_sequent(s)) != s:
            return f"round trip changed {text!r}"


def check_bruteforce_perm4():
    t = prove_bruteforce(parse_sequent(PERM4))
    if t is None or not check_proof(t) or tensor_right_splits(t) != [3, 1, 0, 2]:
        return "brute force did not reproduce the (3, 1, 0, 2) splits"


def check_norm_preservation():
    rng = np.random.default_rng(11)
    n = 8
    s = qsim.new_state(n)
    for _ in range(300):
        kind = rng.integers(4)
        q = [int(x) for x in rng.permutation(n)[:4]]
        g = [X(q[0]), H(q[0]), Z(q[0]), MCX(q[1:], q[0])][kind]
        s = qsim.apply_gate(s, g)
    if abs(s.norm() - 1) > 1e-10:
        return f"norm drifted to {s.norm()!r}"


def check_mcx_decomposition():
    for m in (3, 4, 5, 6):
        circ = qsim.decompose_mcx(m)
        layout = qsim.default_layout(m)
        native = qsim.Circuit(layout.n, [MCX(layout.controls, layout.target)])
        for idx in range(1 << layout.n):
            if any((idx >> (layout.n - 1 - a)) & 1 for a in layout.ancillas):
                continue
            start = qsim.basis_state(layout.n, idx)
            if not np.array_equal(qsim.run_circuit(start, circ).amps,
                                  qsim.run_circuit(start, native).amps):
                return f"m={m} differs on basis state {idx:0{layout.n}b}"


def check_pattern_oracle():
    for n in (2, 3, 4):
        for reg in itertools.combinations(range(n), 2):
            o = PatternOracle(n, reg, "10")
            circ = build_pattern_oracle(o)
            for idx in range(1 << n):
                wide = np.zeros(1 << (n + 1), dtype=complex)
                wide[2 * idx] = 1
                out = qsim.run_circuit(qsim.StateVector(n + 1, wide), circ).amps
                if np.max(np.abs(out[0::2] - o.diagonal()[idx] * np.eye(1 << n)[idx])) > 1e-12:
                    return f"n={n} reg={reg} basis {idx}"


def check_reflection():
    p = prepare_basis_set(BasisSet(4, [2, 5, 11, 12]))
    v = np.random.default_rng(3).normal(size=16) + 0j
    v /= np.linalg.norm(v)
    twice = reflect_about_prepared(p, reflect_about_prepared(p, v))
    if np.max(np.abs(twice - v)) > 1e-10:
        return "D^2 != I"


def check_success_law():
    for N, M, m in [(4, 1, 1), (8, 1, 2), (64, 1, 6), (3, 1, 1)]:
        basis = BasisSet(int(math.ceil(math.log2(N))) or 1, range(N))
        oracle = MarkedSetOracle(basis.n, list(range(M)))
        got = marked_probability(run_grover(prepare_basis_set(basis), oracle, m), oracle)
        if abs(got - success_probability(N, M, m)) > 1e-9:
            return f"(N={N}, M={M}, m={m}): {got} vs closed form"


def check_pairdb_perm4():
    t, perm, stats = prove_pairdb(parse_sequent(PERM4), SeededRng(7))
    if perm != [3, 1, 0, 2] or not check_proof(t) or stats.oracle_calls != 4:
        return f"recovered {perm}"


def check_split_codes_tensor_codes():
    s = parse_sequent(PERM4)
    codes = derive_split_codes_tensor(s)
    if [str(c) for c in codes] != ["110|00", "100|01", "111|10", "000|11"]:
        return f"codes {[str(c) for c in codes]}"
    if not check_proof(decode_assignment(assignment_from_codes(codes), s)):
        return "decoded tree invalid"


def check_nonzero_fill_rejected():
    s = parse_sequent(PERM4)
    a = assignment_from_codes(derive_split_codes_tensor(s))
    a.found[3] = "01011"
    try:
        decode_assignment(a, s)
    except InconsistentAssignment:
        return None
    return "D = 010|11 decoded without complaint"


def check_lolli_codes_lolli6():
    s = parse_sequent(LOLLI6)
    codes = derive_split_codes_lolli(s, prove_bruteforce(s))
    want = ["0000|000", "0001|001", "0010|010", "0111|011", "0010|100", "0111|101"]
    if [str(c) for c in codes] != want:
        return f"codes {[str(c) for c in codes]}"


def check_determinism():
    from .cli import format_report, run_prove
    outs = [format_report(run_prove(PERM4, "pairdb", seed=7)[1], "json") for _ in range(2)]
    outs += [format_report(run_prove("A, B |- A*B", "splitsearch", seed=1)[1], "json") for _ in range(2)]
    if outs[0] != outs[1] or outs[2] != outs[3]:
        return "reports differ between identical runs"


SUITES = [
    ("parser round trip", check_parser_round_trip),
    ("brute force permutation splits", check_bruteforce_perm4),
    ("norm preservation", check_norm_preservation),
    ("MCX decomposition", check_mcx_decomposition),
    ("pattern oracle circuit = diagonal", check_pattern_oracle),
    ("reflection involution", check_reflection),
    ("closed-form success law", check_success_law),
    ("pair database permutation", check_pairdb_perm4),
    ("tensor split codes", check_split_codes_tensor_codes),
    ("nonzero fill bits rejected", check_nonzero_fill_rejected),
    ("lolli split codes", check_lolli_codes_lolli6),
    ("report determinism", check_determinism),
]


def run_all() -> list[tuple[str, bool, str]]:
    results = []
    for name, fn in SUITES:
        try:
            detail = fn()
        except Exception:  # a crash is a failure, not an abort
            detail = traceback.format_exc(limit=2).strip().splitlines()[-1]
        results.append((name, detail is None, detail or ""))
    return results
