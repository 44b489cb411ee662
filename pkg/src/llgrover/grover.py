"""Amplitude amplification over arbitrary prepared states.

Oracles are kept in diagonal form (a vector of ±1 phases over the data
register) for the pipelines; the phase-kickback gate form of the pattern
oracle is built separately and checked against the diagonal form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qsim import MCX, Circuit, H, StateVector, X


def grover_iterations(N: int, M: int = 1) -> int:
    """floor((pi/4) * sqrt(N/M)), the iteration count maximising success."""
    if M < 1 or N < 1:
        raise ValueError("N and M must be positive")
    if M > N:
        raise ValueError(f"more marked states ({M}) than states ({N})")
    return max(0, math.floor(math.pi / 4 * math.sqrt(N / M)))


def success_probability(N: int, M: int, iterations: int) -> float:
    """Closed-form marked probability for a uniform start over N states."""
    theta = math.asin(math.sqrt(M / N))
    return math.sin((2 * iterations + 1) * theta) ** 2


@dataclass(frozen=True)
class BasisSet:
    n: int
    states: tuple[int, ...]

    def __init__(self, n: int, states: Sequence[int]) -> None:
        states = tuple(sorted(set(int(s) for s in states)))
        if not states:
            raise ValueError("basis set must be nonempty")
        if states[0] < 0 or states[-1] >= 1 << n:
            raise ValueError(f"basis index out of range for {n} qubits")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "states", states)

    def vector(self) -> np.ndarray:
        psi = np.zeros(1 << self.n, dtype=np.complex128)
        psi[list(self.states)] = 1 / math.sqrt(len(self.states))
        return psi


class Preparation:
    """A state Psi together with a unitary A such that A|0...0> = Psi.

    A is the Householder reflection that swaps |0> and Psi (after fixing
    Psi's global phase so its first amplitude is real).  It is Hermitian and
    self-inverse, so both A and its inverse cost O(2^n) without ever
    forming the dense matrix.
    """

    def __init__(self, psi: np.ndarray) -> None:
        psi = np.asarray(psi, dtype=np.complex128)
        nrm = np.linalg.norm(psi)
        if abs(nrm - 1) > 1e-10:
            raise ValueError(f"prepared state must be normalised (norm {nrm})")
        self.n = int(round(math.log2(len(psi))))
        if 1 << self.n != len(psi):
            raise ValueError("state length must be a power of two")
        self.psi = psi
        p0 = psi[0]
        self.phase = p0 / abs(p0) if abs(p0) > 1e-15 else 1.0 + 0j
        v = -psi / self.phase
        v[0] += 1.0
        vn = np.linalg.norm(v)
        self._v = v / vn if vn > 1e-14 else None

    def state(self) -> StateVector:
        return StateVector(self.n, self.psi.copy())

    def _householder(self, amps: np.ndarray) -> np.ndarray:
        if self._v is None:
            return amps.copy()
        return amps - 2 * self._v * np.vdot(self._v, amps)

    def apply(self, amps: np.ndarray) -> np.ndarray:
        """A applied to ``amps``."""
        return self.phase * self._householder(amps)

    def apply_inverse(self, amps: np.ndarray) -> np.ndarray:
        return self._householder(amps) / self.phase

    def matrix(self) -> np.ndarray:
        """Dense A; only sensible for small n."""
        return np.column_stack([self.apply(col) for col in np.eye(1 << self.n, dtype=np.complex128)])


def prepare_basis_set(b: BasisSet) -> Preparation:
    return Preparation(b.vector())


def uniform_preparation(n: int) -> Preparation:
    return prepare_basis_set(BasisSet(n, range(1 << n)))


@dataclass(frozen=True)
class PatternOracle:
    """Phase flip on every basis state whose ``reg`` qubits read ``pattern``."""

    n: int
    reg: tuple[int, ...]
    pattern: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "reg", tuple(self.reg))
        if len(self.pattern) != len(self.reg) or set(self.pattern) - {"0", "1"}:
            raise ValueError("pattern must be a bitstring with one bit per register qubit")
        if any(not 0 <= q < self.n for q in self.reg):
            raise ValueError("register qubit out of range")

    def diagonal(self) -> np.ndarray:
        idx = np.arange(1 << self.n)
        hit = np.ones(1 << self.n, dtype=bool)
        for q, bit in zip(self.reg, self.pattern):
            hit &= ((idx >> (self.n - 1 - q)) & 1) == int(bit)
        return np.where(hit, -1.0, 1.0)


def build_pattern_oracle(o: PatternOracle, prepare_ancilla: bool = True) -> Circuit:
    """Gate form of a pattern oracle on ``o.n`` data qubits plus one kickback ancilla.

    The ancilla is qubit ``o.n``.  With ``prepare_ancilla`` the circuit takes
    it from |0> to |-> (X then H) first and back afterwards, so the whole
    circuit acts on data ⊗ |0>.
    """
    anc = o.n
    circ = Circuit(o.n + 1)
    flips = [X(q) for q, bit in zip(o.reg, o.pattern) if bit == "0"]
    if prepare_ancilla:
        circ.extend([X(anc), H(anc)])
    circ.extend(flips)
    circ.append(MCX(o.reg, anc))
    circ.extend(flips)
    if prepare_ancilla:
        circ.extend([H(anc), X(anc)])
    return circ


@dataclass(frozen=True)
class MarkedSetOracle:
    n: int
    marked: frozenset[int]

    def __init__(self, n: int, marked) -> None:
        marked = frozenset(int(m) for m in marked)
        if any(not 0 <= m < 1 << n for m in marked):
            raise ValueError("marked index out of range")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "marked", marked)


def build_marked_set_oracle(o: MarkedSetOracle) -> np.ndarray:
    d = np.ones(1 << o.n)
    if o.marked:
        d[sorted(o.marked)] = -1.0
    return d


def oracle_diagonal(oracle) -> np.ndarray:
    if isinstance(oracle, PatternOracle):
        return oracle.diagonal()
    if isinstance(oracle, MarkedSetOracle):
        return build_marked_set_oracle(oracle)
    return np.asarray(oracle)


def reflect_about_prepared(p: Preparation, amps: np.ndarray) -> np.ndarray:
    """(2|Psi><Psi| - I) applied to ``amps``."""
    return 2 * p.psi * np.vdot(p.psi, amps) - amps


def reflect_via_operator(p: Preparation, amps: np.ndarray) -> np.ndarray:
    """Same reflection built as A (2|0><0| - I) A^dagger."""
    w = -p.apply_inverse(amps)
    w[0] = -w[0]
    return p.apply(w)


def run_grover(p: Preparation, oracle, iters: int) -> StateVector:
    """Psi after ``iters`` rounds of oracle then reflection about Psi."""
    if iters < 0:
        raise ValueError("iteration count must be non-negative")
    diag = oracle_diagonal(oracle)
    if diag.shape != p.psi.shape:
        raise ValueError("oracle and preparation act on different registers")
    amps = p.psi.copy()
    for _ in range(iters):
        amps = reflect_about_prepared(p, diag * amps)
    return StateVector(p.n, amps)


def marked_probability(s: StateVector, oracle) -> float:
    diag = oracle_diagonal(oracle)
    return float(np.sum(np.abs(s.amps[diag < 0]) ** 2))
