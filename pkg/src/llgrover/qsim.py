"""Dense statevector simulator.

Bit convention: qubit 0 is the most significant bit of a basis index, so a
register pair |a>|b> on (n_a, n_b) qubits sits at index ``a * 2**n_b + b``
and ``|1100>`` is index 12.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

MAX_QUBITS = 24
_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_SQRT1_2 = 1 / np.sqrt(2)


# ---------------------------------------------------------------------------
# Reproducible randomness

def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SeededRng:
    """SplitMix64 stream with inverse-CDF sampling.

    Output ``i`` (1-based) is ``mix64(seed + i * 0x9E3779B97F4A7C15 mod 2**64)``
    with the standard SplitMix64 finaliser; uniforms are the top 53 bits
    scaled by 2**-53.  A discrete distribution ``p`` over outcomes
    ``0..len(p)-1`` is sampled by drawing one uniform ``u`` and returning the
    first index whose running sum (index order) exceeds ``u * sum(p)``.
    """

    def __init__(self, seed: int) -> None:
        self.seed = int(seed) & _MASK
        self.counter = 0

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, counter={self.counter})"

    def next_u64(self) -> int:
        self.counter += 1
        return _mix64((self.seed + self.counter * _GOLDEN) & _MASK)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53

    def u64s(self, count: int) -> np.ndarray:
        i = np.arange(self.counter + 1, self.counter + 1 + count, dtype=np.uint64)
        self.counter += count
        z = np.uint64(self.seed) + i * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    def uniforms(self, count: int) -> np.ndarray:
        return (self.u64s(count) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53

    def choice(self, probs: np.ndarray, count: int = 1) -> np.ndarray:
        cdf = np.cumsum(probs)
        u = self.uniforms(count) * cdf[-1]
        return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)

    def derive(self, *keys: int) -> "SeededRng":
        """Independent stream keyed by ``keys``; ignores how far this stream has advanced."""
        s = self.seed
        for key in keys:
            s = _mix64((s + (int(key) + 1) * _GOLDEN) & _MASK)
        return SeededRng(s)


# ---------------------------------------------------------------------------
# Gates and circuits

@dataclass(frozen=True)
class X:
    target: int


@dataclass(frozen=True)
class H:
    target: int


@dataclass(frozen=True)
class Z:
    target: int


@dataclass(frozen=True)
class MCX:
    controls: tuple[int, ...]
    target: int

    def __init__(self, controls: Iterable[int], target: int) -> None:
        object.__setattr__(self, "controls", tuple(controls))
        object.__setattr__(self, "target", target)


Gate = Union[X, H, Z, MCX]


def gate_qubits(g: Gate) -> tuple[int, ...]:
    return (*g.controls, g.target) if isinstance(g, MCX) else (g.target,)


def check_gate(g: Gate, n: int) -> None:
    qs = gate_qubits(g)
    if any(not 0 <= q < n for q in qs):
        raise IndexError(f"{g} does not fit on {n} qubits")
    if len(set(qs)) != len(qs):
        raise ValueError(f"{g}: controls and target must be distinct")


@dataclass
class Circuit:
    n: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self) -> None:
        for g in self.gates:
            check_gate(g, self.n)

    def append(self, g: Gate) -> "Circuit":
        check_gate(g, self.n)
        self.gates.append(g)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def count(self, kind: type, controls: int | None = None) -> int:
        return sum(1 for g in self.gates if isinstance(g, kind)
                   and (controls is None or len(g.controls) == controls))


# ---------------------------------------------------------------------------
# States

class StateVector:
    def __init__(self, n: int, amps: np.ndarray) -> None:
        amps = np.asarray(amps, dtype=np.complex128)
        if amps.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} amplitudes, got {amps.shape}")
        self.n = n
        self.amps = amps

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def __repr__(self) -> str:
        nz = [(i, a) for i, a in enumerate(self.amps) if abs(a) > 1e-12][:8]
        terms = " + ".join(f"({a:.4g})|{i:0{self.n}b}>" for i, a in nz)
        return f"StateVector(n={self.n}: {terms})"


def new_state(n: int) -> StateVector:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in 1..{MAX_QUBITS}, got {n}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def basis_state(n: int, index: int) -> StateVector:
    s = new_state(n)
    s.amps[0] = 0.0
    s.amps[index] = 1.0
    return s


def _slice(n: int, fixed: dict[int, int]) -> tuple:
    idx: list = [slice(None)] * n
    for q, v in fixed.items():
        idx[q] = v
    return tuple(idx)


def apply_inplace(amps: np.ndarray, n: int, g: Gate) -> None:
    """Apply ``g`` to the flat amplitude array ``amps`` in place."""
    t = amps.reshape([2] * n)
    if isinstance(g, X):
        lo, hi = _slice(n, {g.target: 0}), _slice(n, {g.target: 1})
        tmp = t[lo].copy()
        t[lo] = t[hi]
        t[hi] = tmp
    elif isinstance(g, H):
        lo, hi = _slice(n, {g.target: 0}), _slice(n, {g.target: 1})
        a0, a1 = t[lo].copy(), t[hi].copy()
        t[lo] = (a0 + a1) * _SQRT1_2
        t[hi] = (a0 - a1) * _SQRT1_2
    elif isinstance(g, Z):
        t[_slice(n, {g.target: 1})] *= -1
    elif isinstance(g, MCX):
        on = {c: 1 for c in g.controls}
        lo = _slice(n, {**on, g.target: 0})
        hi = _slice(n, {**on, g.target: 1})
        tmp = t[lo].copy()
        t[lo] = t[hi]
        t[hi] = tmp
    else:
        raise TypeError(f"unknown gate {g!r}")


def apply_gate(s: StateVector, g: Gate) -> StateVector:
    check_gate(g, s.n)
    out = s.copy()
    apply_inplace(out.amps, out.n, g)
    return out


def run_circuit(s: StateVector, c: Circuit) -> StateVector:
    if c.n != s.n:
        raise ValueError(f"circuit on {c.n} qubits applied to a {s.n}-qubit state")
    out = s.copy()
    for g in c.gates:
        apply_inplace(out.amps, out.n, g)
    return out


@dataclass(frozen=True)
class McxLayout:
    controls: tuple[int, ...]
    target: int
    ancillas: tuple[int, ...]
    n: int


def default_layout(m: int) -> McxLayout:
    """Controls 0..m-1, target m, ancillas after it."""
    return McxLayout(tuple(range(m)), m, tuple(range(m + 1, 2 * m - 1)), 2 * m - 1)


def decompose_mcx(m: int, layout: McxLayout | None = None) -> Circuit:
    """Toffoli AND-chain for an m-controlled X using m-2 clean ancillas.

    Computes c0∧c1 into the first ancilla, folds each further control in,
    hits the target with one Toffoli and uncomputes: 2(m-2)+1 Toffolis.
    """
    if m < 3:
        raise ValueError("decomposition needs at least 3 controls; use a Toffoli directly")
    layout = layout or default_layout(m)
    c, anc = layout.controls, layout.ancillas
    if len(c) != m:
        raise ValueError(f"layout has {len(c)} controls, expected {m}")
    if len(anc) < m - 2:
        raise ValueError(f"need {m - 2} ancillas, layout provides {len(anc)}")
    chain = [MCX((c[0], c[1]), anc[0])]
    for i in range(1, m - 2):
        chain.append(MCX((anc[i - 1], c[i + 1]), anc[i]))
    circ = Circuit(layout.n)
    circ.extend(chain)
    circ.append(MCX((anc[m - 3], c[m - 1]), layout.target))
    circ.extend(reversed(chain))
    return circ


# ---------------------------------------------------------------------------
# Measurement

def _check_qubits(n: int, qubits: Sequence[int]) -> list[int]:
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < n for q in qubits):
        raise ValueError(f"bad qubit subset {qubits} for {n} qubits")
    return qubits


def marginal(s: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Born probabilities of ``qubits``; index bit order follows ``qubits`` (first = MSB)."""
    qubits = _check_qubits(s.n, qubits)
    p = (np.abs(s.amps) ** 2).reshape([2] * s.n)
    rest = tuple(q for q in range(s.n) if q not in qubits)
    p = p.sum(axis=rest) if rest else p
    kept = sorted(qubits)
    p = np.transpose(p, [kept.index(q) for q in qubits])
    return p.reshape(-1)


def _bitstring(i: int, width: int) -> str:
    return format(int(i), f"0{width}b") if width else ""


def probabilities(s: StateVector, qubits: Sequence[int] | None = None,
                  cutoff: float = 1e-12) -> dict[str, float]:
    """Marginal distribution as ``{bitstring: p}``; entries at or below ``cutoff`` are dropped."""
    qubits = list(range(s.n)) if qubits is None else list(qubits)
    p = marginal(s, qubits)
    return {_bitstring(i, len(qubits)): float(v) for i, v in enumerate(p) if v > cutoff}


def sample(s: StateVector, qubits: Sequence[int] | None, shots: int,
           rng: SeededRng) -> dict[str, int]:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    qubits = list(range(s.n)) if qubits is None else list(qubits)
    draws = rng.choice(marginal(s, qubits), shots)
    counts = np.bincount(draws, minlength=1 << len(qubits))
    return {_bitstring(i, len(qubits)): int(c) for i, c in enumerate(counts) if c}


def measure_collapse(s: StateVector, qubits: Sequence[int],
                     rng: SeededRng) -> tuple[str, StateVector]:
    qubits = _check_qubits(s.n, qubits)
    outcome = int(rng.choice(marginal(s, qubits), 1)[0])
    bits = _bitstring(outcome, len(qubits))
    t = s.amps.reshape([2] * s.n).copy()
    keep = np.zeros_like(t, dtype=bool)
    keep[_slice(s.n, {q: int(b) for q, b in zip(qubits, bits)})] = True
    t[~keep] = 0.0
    out = t.reshape(-1)
    out /= np.linalg.norm(out)
    return bits, StateVector(s.n, out)


def histogram_json(hist: dict[str, int]) -> dict[str, int]:
    return {k: hist[k] for k in sorted(hist)}
