"""Formulas, sequents and proof trees for the {⊗, ⊸} fragment of linear logic.

Concrete syntax is ASCII: ``*`` for tensor, ``-o`` for linear implication,
``|-`` for the turnstile and commas between side formulas.  ``*`` binds
tighter than ``-o`` and both associate to the right::

    >>> parse_sequent("A*(B*(C*D)) |- D*(B*(A*C))")
    Sequent(left=(A*B*C*D,), right=(D*B*A*C,))

A trailing run of digits on an atom is an explicit occurrence label
(``A1`` is atom ``A`` with occurrence 1).  Unlabelled atoms are numbered
left to right per side, skipping labels already taken on that side.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Union


class ParseError(ValueError):
    """Syntax error in a sequent; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class RuleError(ValueError):
    """A rule was applied to a sequent it does not fit."""


class ProofError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Formulas

@dataclass(frozen=True, order=True)
class Atom:
    name: str
    occ: int = 0

    def __post_init__(self) -> None:
        if not self.name or not self.name[0].isupper():
            raise ValueError(f"bad atom name {self.name!r}")
        if self.occ < 0:
            raise ValueError("occurrence index must be non-negative")

    def __str__(self) -> str:
        return self.name if self.occ == 0 else f"{self.name}{self.occ}"

    __repr__ = __str__


@dataclass(frozen=True)
class Tensor:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        lhs = f"({self.left})" if not isinstance(self.left, Atom) else str(self.left)
        rhs = f"({self.right})" if isinstance(self.right, Lolli) else str(self.right)
        return f"{lhs}*{rhs}"

    __repr__ = __str__


@dataclass(frozen=True)
class Lolli:
    antecedent: "Formula"
    consequent: "Formula"

    def __str__(self) -> str:
        lhs = f"({self.antecedent})" if isinstance(self.antecedent, Lolli) else str(self.antecedent)
        return f"{lhs} -o {self.consequent}"

    __repr__ = __str__


Formula = Union[Atom, Tensor, Lolli]


@dataclass(frozen=True)
class Sequent:
    left: tuple[Formula, ...]
    right: tuple[Formula, ...]

    def __init__(self, left, right) -> None:
        object.__setattr__(self, "left", tuple(left))
        object.__setattr__(self, "right", tuple(right))

    def __str__(self) -> str:
        return render_sequent(self)

    def __repr__(self) -> str:
        return f"Sequent(left={self.left!r}, right={self.right!r})"

    @property
    def has_lolli(self) -> bool:
        return any(has_lolli(f) for f in self.left + self.right)

    def atoms(self) -> list[tuple[Atom, int]]:
        """All atoms with their side (0 = left, 1 = right), in reading order."""
        out = [(a, 0) for f in self.left for a in flatten_atoms(f)]
        out += [(a, 1) for f in self.right for a in flatten_atoms(f)]
        return out


def flatten_atoms(f: Formula) -> list[Atom]:
    """Atoms of ``f`` in left-to-right order."""
    return list(_iter_atoms(f))


def _iter_atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Tensor):
        yield from _iter_atoms(f.left)
        yield from _iter_atoms(f.right)
    else:
        yield from _iter_atoms(f.antecedent)
        yield from _iter_atoms(f.consequent)


def has_lolli(f: Formula) -> bool:
    if isinstance(f, Atom):
        return False
    if isinstance(f, Lolli):
        return True
    return has_lolli(f.left) or has_lolli(f.right)


def count_tensors(f: Formula) -> int:
    if isinstance(f, Atom):
        return 0
    if isinstance(f, Tensor):
        return 1 + count_tensors(f.left) + count_tensors(f.right)
    return count_tensors(f.antecedent) + count_tensors(f.consequent)


def render_sequent(s: Sequent) -> str:
    return f"{', '.join(map(str, s.left))} |- {', '.join(map(str, s.right))}"


# ---------------------------------------------------------------------------
# Parser

_TOKEN = re.compile(r"\s*(?:(?P<atom>[A-Z][A-Za-z0-9]*)|(?P<op>\|-|-o|[*(),]))")
_LABEL = re.compile(r"^(.*?[A-Za-z])(\d+)$")


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
            kind = "atom" if m.group("atom") else m.group("op")
            value = m.group("atom") or m.group("op")
            self.tokens.append((kind, value, _byte_offset(text, m.start(kind if kind == "atom" else "op"))))
            pos = m.end()
        self.i = 0
        self.end = _byte_offset(text, len(text))

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def offset(self) -> int:
        return self.tokens[self.i][2] if self.i < len(self.tokens) else self.end

    def expect(self, kind: str) -> tuple[str, str, int]:
        if self.peek() != kind:
            found = "end of input" if self.peek() is None else repr(self.tokens[self.i][1])
            raise ParseError(f"expected {kind!r}, found {found}", self.offset())
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def formulas(self) -> list:
        if self.peek() in (None, "|-"):
            raise ParseError("empty side", self.offset())
        out = [self.lolli()]
        while self.peek() == ",":
            self.i += 1
            out.append(self.lolli())
        return out

    def lolli(self):
        lhs = self.tensor()
        if self.peek() == "-o":
            self.i += 1
            return ("lolli", lhs, self.lolli())
        return lhs

    def tensor(self):
        lhs = self.primary()
        if self.peek() == "*":
            self.i += 1
            return ("tensor", lhs, self.tensor())
        return lhs

    def primary(self):
        if self.peek() == "(":
            self.i += 1
            inner = self.lolli()
            self.expect(")")
            return inner
        _, value, off = self.expect("atom")
        return ("atom", value, off)


def _byte_offset(text: str, char_pos: int) -> int:
    return len(text[:char_pos].encode("utf-8"))


def _split_label(token: str) -> tuple[str, int | None]:
    m = _LABEL.match(token)
    if m is None:
        return token, None
    return m.group(1), int(m.group(2))


def _number_side(raws: list) -> list[Formula]:
    leaves: list[tuple] = []

    def collect(node):
        if node[0] == "atom":
            leaves.append(node)
        else:
            collect(node[1])
            collect(node[2])

    for r in raws:
        collect(r)
    taken: dict[str, set[int]] = {}
    labels: dict[int, tuple[str, int | None]] = {}
    for node in leaves:
        name, occ = _split_label(node[1])
        labels[id(node)] = (name, occ)
        if occ is not None:
            if occ in taken.setdefault(name, set()):
                raise ParseError(f"duplicate occurrence {node[1]!r} on one side", node[2])
            taken[name].add(occ)
    resolved: dict[int, Atom] = {}
    for node in leaves:
        name, occ = labels[id(node)]
        if occ is None:
            used = taken.setdefault(name, set())
            occ = 0
            while occ in used:
                occ += 1
            used.add(occ)
        resolved[id(node)] = Atom(name, occ)

    def build(node) -> Formula:
        if node[0] == "atom":
            return resolved[id(node)]
        if node[0] == "tensor":
            return Tensor(build(node[1]), build(node[2]))
        return Lolli(build(node[1]), build(node[2]))

    return [build(r) for r in raws]


def parse_sequent(text: str) -> Sequent:
    p = _Parser(text)
    left = p.formulas()
    p.expect("|-")
    right = p.formulas()
    if p.peek() is not None:
        raise ParseError(f"unexpected {p.tokens[p.i][1]!r}", p.offset())
    return Sequent(_number_side(left), _number_side(right))


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.lolli()
    if p.peek() is not None:
        raise ParseError(f"unexpected {p.tokens[p.i][1]!r}", p.offset())
    return _number_side([f])[0]


# ---------------------------------------------------------------------------
# Rules
#
# Context partitions are tuples of premise bits (0 = left premise, 1 = right
# premise) aligned with the context formulas, in list order.  The side a
# context formula lands on is always the side it came from.

@dataclass(frozen=True)
class TensorLeft:
    pos: int
    label = "⊗-Left"


@dataclass(frozen=True)
class TensorRight:
    partition: tuple[int, ...]
    pos: int = 0
    right_partition: tuple[int, ...] = ()
    label = "⊗-Right"


@dataclass(frozen=True)
class LolliLeft:
    pos: int
    partition: tuple[int, ...]
    right_partition: tuple[int, ...] = ()
    label = "⊸-Left"


@dataclass(frozen=True)
class LolliRight:
    pos: int = 0
    label = "⊸-Right"


@dataclass(frozen=True)
class Axiom:
    label = "Axiom"


RuleApp = Union[TensorLeft, TensorRight, LolliLeft, LolliRight, Axiom]


def is_axiom(s: Sequent) -> bool:
    """Identity axiom, matching names and ignoring occurrence labels.

    With several formulas on the right, an all-atomic sequent whose name
    multisets agree also closes (juxtaposed identities).  For a single
    right formula this is exactly ``B |- B``.
    """
    if not s.left or not s.right:
        return False
    if not all(isinstance(f, Atom) for f in s.left + s.right):
        return False
    return Counter(a.name for a in s.left) == Counter(a.name for a in s.right)


def saturate_tensor_left(s: Sequent) -> tuple[Sequent, list[TensorLeft]]:
    """Apply ⊗-Left (leftmost-outermost) until the left side is atomic."""
    if any(has_lolli(f) for f in s.left):
        raise RuleError("left side contains -o; saturation is for the tensor fragment")
    steps: list[TensorLeft] = []
    cur = s
    while True:
        pos = next((i for i, f in enumerate(cur.left) if isinstance(f, Tensor)), None)
        if pos is None:
            return cur, steps
        step = TensorLeft(pos)
        (cur,) = apply_rule(cur, step)
        steps.append(step)


def _split(items, bits, what: str):
    if len(bits) != len(items):
        raise RuleError(f"{what} partition has {len(bits)} entries for {len(items)} formulas")
    if any(b not in (0, 1) for b in bits):
        raise RuleError(f"{what} partition entries must be 0 or 1")
    zero = [f for f, b in zip(items, bits) if b == 0]
    one = [f for f, b in zip(items, bits) if b == 1]
    return zero, one


def apply_rule(s: Sequent, r: RuleApp) -> list[Sequent]:
    left, right = list(s.left), list(s.right)
    if isinstance(r, Axiom):
        if not is_axiom(s):
            raise RuleError(f"{s} is not an axiom")
        return []
    if isinstance(r, TensorLeft):
        if not 0 <= r.pos < len(left) or not isinstance(left[r.pos], Tensor):
            raise RuleError(f"no tensor at left position {r.pos}")
        f = left[r.pos]
        return [Sequent(left[:r.pos] + [f.left, f.right] + left[r.pos + 1:], right)]
    if isinstance(r, LolliRight):
        if not 0 <= r.pos < len(right) or not isinstance(right[r.pos], Lolli):
            raise RuleError(f"no -o at right position {r.pos}")
        f = right[r.pos]
        return [Sequent(left + [f.antecedent], right[:r.pos] + [f.consequent] + right[r.pos + 1:])]
    if isinstance(r, TensorRight):
        if not 0 <= r.pos < len(right) or not isinstance(right[r.pos], Tensor):
            raise RuleError(f"no tensor at right position {r.pos}")
        f = right[r.pos]
        g0, g1 = _split(left, r.partition, "left")
        d0, d1 = _split(right[:r.pos] + right[r.pos + 1:], r.right_partition, "right")
        return [Sequent(g0, [f.left] + d0), Sequent(g1, [f.right] + d1)]
    if isinstance(r, LolliLeft):
        if not 0 <= r.pos < len(left) or not isinstance(left[r.pos], Lolli):
            raise RuleError(f"no -o at left position {r.pos}")
        f = left[r.pos]
        ctx = left[:r.pos] + left[r.pos + 1:]
        g0, g1 = _split(ctx, r.partition, "left")
        d0, d1 = _split(right, r.right_partition, "right")
        # the consequent takes the principal formula's place among the right premise's left side
        before = sum(1 for b in r.partition[:r.pos] if b == 1)
        g1 = g1[:before] + [f.consequent] + g1[before:]
        return [Sequent(g0, [f.antecedent] + d0), Sequent(g1, d1)]
    raise RuleError(f"unknown rule {r!r}")


# ---------------------------------------------------------------------------
# Proof trees

@dataclass(frozen=True)
class ProofTree:
    conclusion: Sequent
    rule: RuleApp
    premises: tuple["ProofTree", ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "premises", tuple(self.premises))

    def nodes(self) -> Iterator["ProofTree"]:
        """Pre-order traversal."""
        yield self
        for p in self.premises:
            yield from p.nodes()

    def leaves(self) -> list[Sequent]:
        return [t.conclusion for t in self.nodes() if not t.premises]


_ARITY = {TensorLeft: 1, LolliRight: 1, TensorRight: 2, LolliLeft: 2, Axiom: 0}


def check_proof(t: ProofTree) -> bool:
    for node in t.nodes():
        if len(node.premises) != _ARITY.get(type(node.rule), -1):
            return False
        try:
            expected = apply_rule(node.conclusion, node.rule)
        except RuleError:
            return False
        if [p.conclusion for p in node.premises] != expected:
            return False
        if not node.premises and not is_axiom(node.conclusion):
            return False
    return True


def build_tree(s: Sequent, rules: list[RuleApp]) -> ProofTree:
    """Replay a pre-order list of rule applications into a tree."""
    it = iter(rules)

    def go(seq: Sequent) -> ProofTree:
        try:
            r = next(it)
        except StopIteration:
            raise ProofError(f"rule list exhausted at {seq}") from None
        return ProofTree(seq, r, tuple(go(p) for p in apply_rule(seq, r)))

    tree = go(s)
    if next(it, None) is not None:
        raise ProofError("unused rules left over")
    return tree


# ---------------------------------------------------------------------------
# Rendering

_TEX_LABEL = {
    TensorLeft: r"$\otimes$-Left",
    TensorRight: r"$\otimes$-Right",
    LolliLeft: r"$\multimap$-Left",
    LolliRight: r"$\multimap$-Right",
}


def _tex_formula(f: Formula, top: bool = True) -> str:
    if isinstance(f, Atom):
        return f.name if f.occ == 0 else f"{f.name}^{{{f.occ}}}"
    if isinstance(f, Tensor):
        body = f"{_tex_formula(f.left, False)} \\otimes {_tex_formula(f.right, False)}"
    else:
        body = f"{_tex_formula(f.antecedent, False)} \\multimap {_tex_formula(f.consequent, False)}"
    return body if top else f"({body})"


def _tex_sequent(s: Sequent) -> str:
    left = ", ".join(_tex_formula(f) for f in s.left)
    right = ", ".join(_tex_formula(f) for f in s.right)
    return f"${left} \\vdash {right}$"


def render_proof(t: ProofTree, format: str = "text") -> str:
    if not check_proof(t):
        raise ProofError("refusing to render an invalid proof")
    if format == "text":
        lines: list[str] = []

        def walk(node: ProofTree, depth: int) -> None:
            lines.append(f"{'  ' * depth}{node.conclusion}   [{node.rule.label}]")
            for p in node.premises:
                walk(p, depth + 1)

        walk(t, 0)
        return "\n".join(lines)
    if format in ("latex", "prooftree-latex"):
        out = [r"\begin{prooftree}"]

        def emit(node: ProofTree) -> None:
            if isinstance(node.rule, Axiom):
                out.append(rf"\AxiomC{{{_tex_sequent(node.conclusion)}}}")
                return
            for p in node.premises:
                emit(p)
            out.append(rf"\RightLabel{{{_TEX_LABEL[type(node.rule)]}}}")
            inf = "UnaryInfC" if len(node.premises) == 1 else "BinaryInfC"
            out.append(rf"\{inf}{{{_tex_sequent(node.conclusion)}}}")

        emit(t)
        out.append(r"\end{prooftree}")
        return "\n".join(out)
    raise ValueError(f"unknown format {format!r}")


# ---------------------------------------------------------------------------
# Serialisation

_RULE_NAMES = {TensorLeft: "tensor-left", TensorRight: "tensor-right", LolliLeft: "lolli-left",
               LolliRight: "lolli-right", Axiom: "axiom"}


def rule_to_dict(r: RuleApp) -> dict:
    d: dict = {"rule": _RULE_NAMES[type(r)]}
    if hasattr(r, "pos"):
        d["pos"] = r.pos
    if hasattr(r, "partition"):
        d["partition"] = list(r.partition)
        d["right_partition"] = list(r.right_partition)
    return d


def rule_from_dict(d: dict) -> RuleApp:
    kind = {v: k for k, v in _RULE_NAMES.items()}[d["rule"]]
    if kind is Axiom:
        return Axiom()
    if kind in (TensorLeft, LolliRight):
        return kind(d["pos"])
    if kind is TensorRight:
        return TensorRight(tuple(d["partition"]), d["pos"], tuple(d["right_partition"]))
    return LolliLeft(d["pos"], tuple(d["partition"]), tuple(d["right_partition"]))


def proof_to_rules(t: ProofTree) -> list[dict]:
    """Pre-order rule list; ``build_tree(conclusion, ...)`` rebuilds the tree."""
    return [rule_to_dict(n.rule) for n in t.nodes()]


def proof_from_rules(s: Sequent, rules: list[dict]) -> ProofTree:
    return build_tree(s, [rule_from_dict(d) for d in rules])
