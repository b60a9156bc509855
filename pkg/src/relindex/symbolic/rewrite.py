"""Priority-ordered rewriting of typed noncommutative terms.

A rule replaces a contiguous subword ``lhs`` by a term ``rhs`` of the same
signature.  The KILL schema sends to zero every word that passes through
both the left spaces ``{H1, H1t}`` and the right spaces ``{H2, H2t}``;
such a word contains a subword mapping one side to the other.

Rule files hold one rule per line, ``ID: LHS -> RHS``, in the grammar of
:func:`parse_term`.  ``@group NAME`` starts a rule group, ``KILL: H1 H1t |
H2 H2t`` declares the crossing schema and ``#`` starts a comment.  The
axiom a rule belongs to is its ID up to the first ``.``, so ``A6.1`` and
``A6.2`` both belong to ``A6``.  Unless switched off, every rule gets its
adjoint (ID suffixed with ``*``) right after it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from ..errors import NonterminationError, ParseError, SignatureError
from .scalars import ONE, Scalar
from .terms import (
    NcTerm,
    SpaceLabel,
    Word,
    _word_key,
    normalize_text,
    parse_term,
    word_adjoint,
    word_signature,
    word_spaces,
    word_str,
)

STEP_LIMIT = 100_000
MAX_ORDERINGS = 24
KILL = "KILL"


@dataclass(frozen=True)
class Rule:
    id: str
    lhs: Word
    rhs: NcTerm
    group: str = "default"

    def __post_init__(self):
        if not self.lhs:
            raise SignatureError(f"rule {self.id}: empty left-hand side")
        sig = word_signature(self.lhs)
        rhs = self.rhs.typed(sig) if self.rhs.signature is None else self.rhs
        if rhs.signature != sig:
            raise SignatureError(
                f"rule {self.id}: left side has signature {sig[0]}->{sig[1]}, "
                f"right side {rhs.signature[0]}->{rhs.signature[1]}")
        object.__setattr__(self, "rhs", rhs)

    @property
    def axiom(self) -> str:
        return self.id.split(".")[0].rstrip("*")

    def adjoint(self) -> "Rule | None":
        lhs = word_adjoint(self.lhs)
        if lhs == self.lhs:
            return None
        return Rule(self.id + "*", lhs, self.rhs.adjoint(), self.group)

    def find(self, word: Word) -> int:
        """Leftmost match position, or -1."""
        n = len(self.lhs)
        for i in range(len(word) - n + 1):
            if word[i:i + n] == self.lhs:
                return i
        return -1

    def __str__(self):
        return f"{self.id}: {word_str(self.lhs)} -> {self.rhs}"


@dataclass(frozen=True)
class Step:
    rule: str
    position: int
    monomial: str

    def to_list(self) -> list:
        return [self.rule, self.position, self.monomial]


def crosses(word: Word, sides) -> bool:
    if sides is None or not word:
        return False
    seen = set(word_spaces(word))
    left, right = sides
    return bool(seen & left) and bool(seen & right)


@dataclass(frozen=True)
class RewriteSystem:
    rules: tuple[Rule, ...]
    kill: tuple[frozenset, frozenset] | None = None
    step_limit: int = STEP_LIMIT

    @property
    def axioms(self) -> list[str]:
        out = list(dict.fromkeys(r.axiom for r in self.rules))
        return out + ([KILL] if self.kill else [])

    @property
    def groups(self) -> list[str]:
        return list(dict.fromkeys(r.group for r in self.rules))

    def without(self, axiom: str) -> "RewriteSystem":
        if axiom not in self.axioms:
            raise KeyError(f"no axiom {axiom!r}; known: {', '.join(self.axioms)}")
        if axiom == KILL:
            return replace(self, kill=None)
        return replace(self, rules=tuple(r for r in self.rules if r.axiom != axiom))

    def reordered(self, groups) -> "RewriteSystem":
        """Rules sorted by the given group order (stable inside a group)."""
        rank = {g: i for i, g in enumerate(groups)}
        return replace(self, rules=tuple(sorted(self.rules, key=lambda r: rank[r.group])))

    def orderings(self, limit: int = MAX_ORDERINGS):
        """The listed order first, then other group permutations."""
        yield self
        for perm in itertools.islice(itertools.permutations(self.groups), 1, limit):
            yield self.reordered(perm)

    def match(self, word: Word) -> tuple[Rule, int] | None:
        for rule in self.rules:
            pos = rule.find(word)
            if pos >= 0:
                return rule, pos
        return None

    def __str__(self):
        lines = [str(r) for r in self.rules]
        if self.kill:
            lines.append(f"{KILL}: " + " | ".join(
                " ".join(sorted(s.value for s in side)) for side in self.kill))
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, close: bool = True) -> "RewriteSystem":
        rules: list[Rule] = []
        kill = None
        group = "default"
        seen: set[str] = set()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("@group"):
                group = line[len("@group"):].strip() or "default"
                continue
            if ":" not in line:
                raise ParseError(f"line {lineno}: expected 'ID: LHS -> RHS'", 0)
            rid, body = (p.strip() for p in line.split(":", 1))
            if rid == KILL:
                kill = _parse_kill(body, lineno)
                continue
            if rid in seen:
                raise ParseError(f"line {lineno}: duplicate rule id {rid!r}", 0)
            seen.add(rid)
            body = normalize_text(body)
            if "->" not in body:
                raise ParseError(f"line {lineno}: missing '->'", 0)
            lhs_text, rhs_text = body.split("->", 1)
            lhs = parse_term(lhs_text)
            words = lhs.words()
            if len(words) != 1 or lhs.coefficient(words[0]) != ONE or not words[0]:
                raise ParseError(f"line {lineno}: left side must be a single word", 0)
            rhs = parse_term(rhs_text)
            rule = Rule(rid, words[0], rhs, group)
            rules.append(rule)
            if close:
                adj = rule.adjoint()
                if adj is not None:
                    rules.append(adj)
        return cls(tuple(rules), kill)

    @classmethod
    def from_file(cls, path, close: bool = True) -> "RewriteSystem":
        return cls.from_text(Path(path).read_text(encoding="utf-8"), close)

    @classmethod
    def default(cls) -> "RewriteSystem":
        text = resources.files(__package__).joinpath("axioms.rules").read_text("utf-8")
        return cls.from_text(text)


def _parse_kill(body: str, lineno: int):
    sides = body.split("|")
    if len(sides) != 2:
        raise ParseError(f"line {lineno}: KILL needs two sides separated by '|'", 0)
    try:
        out = tuple(frozenset(SpaceLabel(s) for s in side.split()) for side in sides)
    except ValueError as exc:
        raise ParseError(f"line {lineno}: {exc}", 0) from None
    if not all(out) or out[0] & out[1]:
        raise ParseError(f"line {lineno}: KILL sides must be non-empty and disjoint", 0)
    return out


def reduce(term: NcTerm, rs: RewriteSystem, trace: list | None = None,
           step_limit: int | None = None) -> NcTerm:
    """Normal form of ``term`` under ``rs``.

    Monomials are visited shortest first; the first one that is killed or
    matched by a rule (highest priority, leftmost position) is rewritten and
    like terms are collected before the next step.  ``trace`` receives one
    :class:`Step` per rewrite.
    """
    limit = rs.step_limit if step_limit is None else step_limit
    sig = term.signature
    cur: dict[Word, Scalar] = term.terms
    steps = 0
    while True:
        target = None
        for w in sorted(cur, key=_word_key):
            if crosses(w, rs.kill):
                target = (w, None, 0)
                break
            m = rs.match(w)
            if m is not None:
                target = (w, m[0], m[1])
                break
        if target is None:
            break
        steps += 1
        if steps > limit:
            raise NonterminationError(f"no normal form within {limit} rewrite steps")
        w, rule, pos = target
        c = cur.pop(w)
        if trace is not None:
            trace.append(Step(KILL if rule is None else rule.id, pos, word_str(w)))
        if rule is None:
            continue
        prefix, suffix = w[:pos], w[pos + len(rule.lhs):]
        for rw, rc in rule.rhs.terms.items():
            nw = prefix + rw + suffix
            v = cur.get(nw, Scalar(0)) + c * rc
            if v.is_zero():
                cur.pop(nw, None)
            else:
                cur[nw] = v
    return NcTerm(sig, cur)
