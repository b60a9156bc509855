"""Typed noncommutative terms over the block symbols of a pasted pair.

A word ``(x1, ..., xn)`` stands for the composition ``x1 x2 ... xn``
(``xn`` acts first), so it is composable when ``source(x_i) ==
target(x_{i+1})``.  The empty word is the identity of the term's space.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from ..errors import ParseError, SignatureError
from .scalars import ONE, ZERO, Scalar


class SpaceLabel(str, enum.Enum):
    H1 = "H1"
    H0 = "H0"
    H2 = "H2"
    H1t = "H1t"
    H2t = "H2t"

    def __str__(self):
        return self.value


LEFT = frozenset({SpaceLabel.H1, SpaceLabel.H1t})
RIGHT = frozenset({SpaceLabel.H2, SpaceLabel.H2t})

# name -> (source, target, self-adjoint)
_SIGNATURES = {
    "a": ("H1", "H1", True),
    "b": ("H0", "H1", False),
    "c": ("H0", "H0", True),
    "d": ("H2", "H0", False),
    "e": ("H2", "H2", True),
    "at": ("H1t", "H1t", True),
    "bt": ("H0", "H1t", False),
    "dt": ("H2t", "H0", False),
    "et": ("H2t", "H2t", True),
}
SYMBOL_NAMES = tuple(_SIGNATURES)
# the middle block of the second module is identified with c
_ALIASES = {"ct": "c"}


@dataclass(frozen=True, order=True)
class Symbol:
    name: str
    adjoint: bool = False

    def __post_init__(self):
        name = _ALIASES.get(self.name, self.name)
        if name not in _SIGNATURES:
            raise ParseError(f"unknown symbol {self.name!r}", -1)
        object.__setattr__(self, "name", name)
        if _SIGNATURES[name][2] and self.adjoint:
            object.__setattr__(self, "adjoint", False)

    @property
    def self_adjoint(self) -> bool:
        return _SIGNATURES[self.name][2]

    @property
    def source(self) -> SpaceLabel:
        src, tgt, _ = _SIGNATURES[self.name]
        return SpaceLabel(tgt if self.adjoint else src)

    @property
    def target(self) -> SpaceLabel:
        src, tgt, _ = _SIGNATURES[self.name]
        return SpaceLabel(src if self.adjoint else tgt)

    def star(self) -> "Symbol":
        return Symbol(self.name, not self.adjoint)

    def ascii(self) -> str:
        return self.name + ("*" if self.adjoint else "")

    def __str__(self):
        base = self.name[0] + "̃" if self.name.endswith("t") else self.name
        return base + ("*" if self.adjoint else "")


Word = tuple[Symbol, ...]


def word_signature(word: Word) -> tuple[SpaceLabel, SpaceLabel]:
    """``(source, target)`` of a non-empty composable word."""
    for left, right in zip(word, word[1:]):
        if left.source != right.target:
            raise SignatureError(
                f"cannot compose {left} after {right}: {right} targets "
                f"{right.target}, {left} consumes {left.source}")
    return word[-1].source, word[0].target


def word_spaces(word: Word) -> list[SpaceLabel]:
    """Spaces visited by a word, from the first applied factor outwards."""
    if not word:
        return []
    out = [word[-1].source]
    out.extend(x.target for x in reversed(word))
    return out


def word_adjoint(word: Word) -> Word:
    return tuple(x.star() for x in reversed(word))


def word_str(word: Word, ascii: bool = False) -> str:
    if not word:
        return "1"
    return " ".join(x.ascii() if ascii else str(x) for x in word)


def _word_key(word: Word):
    return (len(word), [(x.name, x.adjoint) for x in word])


Signature = tuple[SpaceLabel, SpaceLabel]


class NcTerm:
    """Finite sum of scalar multiples of words with one common signature.

    ``signature`` is ``None`` only for a scalar multiple of the identity
    whose space is not yet known; such a term adopts the signature of
    whatever it is combined with.
    """

    __slots__ = ("signature", "_terms")

    def __init__(self, signature: Signature | None,
                 terms: Mapping[Word, Scalar] | None = None):
        if signature is not None:
            signature = (SpaceLabel(signature[0]), SpaceLabel(signature[1]))
        clean: dict[Word, Scalar] = {}
        for word, c in (terms or {}).items():
            c = Scalar.lift(c)
            if c.is_zero():
                continue
            word = tuple(word)
            if word:
                sig = word_signature(word)
                if signature is None:
                    signature = sig
                elif sig != signature:
                    raise SignatureError(
                        f"monomial {word_str(word)} has signature {_sig_str(sig)}, "
                        f"term has {_sig_str(signature)}")
            elif signature is not None and signature[0] != signature[1]:
                raise SignatureError(
                    f"identity cannot have signature {_sig_str(signature)}")
            clean[word] = clean.get(word, ZERO) + c
        self.signature = signature
        self._terms = {w: c for w, c in clean.items() if not c.is_zero()}

    # constructors
    @classmethod
    def zero(cls, source=None, target=None) -> "NcTerm":
        sig = None if source is None else (source, target if target is not None else source)
        return cls(sig, {})

    @classmethod
    def identity(cls, space=None, coeff=ONE) -> "NcTerm":
        sig = None if space is None else (space, space)
        return cls(sig, {(): coeff})

    @classmethod
    def scalar(cls, coeff) -> "NcTerm":
        return cls(None, {(): Scalar.lift(coeff)})

    @classmethod
    def symbol(cls, name: str, adjoint: bool = False) -> "NcTerm":
        x = Symbol(name, adjoint)
        return cls((x.source, x.target), {(x,): ONE})

    @classmethod
    def word(cls, word: Iterable[Symbol], coeff=ONE) -> "NcTerm":
        return cls(None, {tuple(word): coeff})

    # inspection
    @property
    def terms(self) -> dict[Word, Scalar]:
        return dict(self._terms)

    @property
    def source(self):
        return None if self.signature is None else self.signature[0]

    @property
    def target(self):
        return None if self.signature is None else self.signature[1]

    def is_zero(self) -> bool:
        return not self._terms

    def is_identity(self) -> bool:
        return set(self._terms) == {()} and self._terms[()] == ONE

    def is_scalar(self) -> bool:
        return set(self._terms) <= {()}

    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: _word_key(kv[0]))

    def words(self) -> list[Word]:
        return [w for w, _ in self.items()]

    def coefficient(self, word: Iterable[Symbol]) -> Scalar:
        return self._terms.get(tuple(word), ZERO)

    # algebra
    def _unify(self, other: "NcTerm") -> Signature | None:
        if self.signature is None:
            sig = other.signature
        elif other.signature is None or other.signature == self.signature:
            sig = self.signature
        else:
            raise SignatureError(
                f"cannot add terms of signatures {_sig_str(self.signature)} "
                f"and {_sig_str(other.signature)}")
        return sig

    def __add__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        sig = self._unify(other)
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out.get(w, ZERO) + c
        return NcTerm(sig, out)

    __radd__ = __add__

    def __neg__(self):
        return NcTerm(self.signature, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return _lift(other) - self

    def scale(self, c) -> "NcTerm":
        c = Scalar.lift(c)
        return NcTerm(self.signature, {w: c * v for w, v in self._terms.items()})

    def __matmul__(self, other: "NcTerm") -> "NcTerm":
        """Composition ``self o other`` (``other`` acts first)."""
        other = _lift(other)
        if other is NotImplemented:
            return other
        if self.signature is None:
            sig = other.signature
        elif other.signature is None:
            sig = self.signature
        else:
            if self.source != other.target:
                raise SignatureError(
                    f"cannot compose {_sig_str(self.signature)} after "
                    f"{_sig_str(other.signature)}")
            sig = (other.source, self.target)
        out: dict[Word, Scalar] = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                w = w1 + w2
                out[w] = out.get(w, ZERO) + c1 * c2
        return NcTerm(sig, out)

    def __mul__(self, other):
        if isinstance(other, (int, Scalar)):
            return self.scale(other)
        return self.__matmul__(other)

    def __rmul__(self, other):
        if isinstance(other, (int, Scalar)):
            return self.scale(other)
        return NotImplemented

    def adjoint(self) -> "NcTerm":
        sig = None if self.signature is None else (self.target, self.source)
        return NcTerm(sig, {word_adjoint(w): c for w, c in self._terms.items()})

    def typed(self, signature: Signature) -> "NcTerm":
        """The same term with its signature pinned down."""
        return NcTerm(signature, self._terms)

    def substitute_scalars(self, s: int, k: int) -> "NcTerm":
        return NcTerm(self.signature, {w: Scalar(int(c.evaluate(s, k)))
                                       for w, c in self._terms.items()})

    def __eq__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        if self.signature is not None and other.signature is not None \
                and self.signature != other.signature:
            return False
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def evaluate(self, env: Mapping[str, np.ndarray], dims: Mapping, s: float = 0.0,
                 k: float = 1.0) -> np.ndarray:
        """Numerical matrix, with ``env`` mapping symbol names to arrays."""
        if self.signature is None:
            raise SignatureError("cannot evaluate a term of unknown signature")
        src, tgt = self.signature
        out = np.zeros((dims[tgt], dims[src]), dtype=complex)
        for w, c in self._terms.items():
            M = np.eye(dims[src], dtype=complex) if not w else None
            for x in w:
                X = np.asarray(env[x.name])
                X = X.conj().T if x.adjoint else X
                M = X if M is None else M @ X
            out = out + complex(c.evaluate(s, k)) * M
        return out

    def __repr__(self):
        return f"NcTerm({self})"

    def __str__(self):
        return self.format()

    def format(self, ascii: bool = False) -> str:
        if not self._terms:
            return "0"
        parts = []
        for w, c in self.items():
            ws = word_str(w, ascii) if w else ""
            cs = str(c)
            if not ws:
                parts.append(cs)
                continue
            if c == ONE:
                parts.append(ws)
            elif c == -ONE:
                parts.append("-" + ws)
            elif c.is_constant():
                parts.append(f"{cs} {ws}")
            else:
                parts.append(f"({cs}) {ws}")
        text = " + ".join(parts).replace("+ -", "- ")
        if set(self._terms) == {()} and self.signature is not None:
            text = f"{text}_{self.signature[0]}" if self._terms[()] == ONE else text
        return text


def _sig_str(sig) -> str:
    return "?" if sig is None else f"{sig[0]}->{sig[1]}"


def _lift(x):
    if isinstance(x, NcTerm):
        return x
    if isinstance(x, (int, Scalar)):
        return NcTerm.scalar(x)
    return NotImplemented


# parser

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<ident>1_H(?:1t|2t|0|1|2)|[A-Za-z][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<op>[-+*.()^²])
""", re.VERBOSE)

_SCALARS = {"s": Scalar.S, "k": Scalar.K}
_SPLIT_ORDER = sorted(list(SYMBOL_NAMES) + list(_ALIASES) + list(_SCALARS),
                      key=lambda n: -len(n))


def normalize_text(text: str) -> str:
    """Unicode spellings to ASCII: combining tildes become a ``t`` suffix."""
    text = unicodedata.normalize("NFD", text)
    text = text.replace("̃", "t")
    return (text.replace("−", "-").replace("·", ".")
            .replace("∗", "*").replace("→", "->"))


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def _split_ident(name: str, pos: int) -> list[str]:
    """``bb`` -> ``[b, b]``; longest known name first."""
    if name in SYMBOL_NAMES or name in _ALIASES or name in _SCALARS:
        return [name]
    parts, i = [], 0
    while i < len(name):
        for cand in _SPLIT_ORDER:
            if name.startswith(cand, i):
                parts.append(cand)
                i += len(cand)
                break
        else:
            raise ParseError(f"unknown identifier {name!r}", pos + i)
    return parts


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, pos = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def parse(self) -> NcTerm:
        term = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {v!r}", pos)
        return term

    def expr(self) -> NcTerm:
        sign = 1
        kind, v, pos = self.peek()
        if v in "+-" and kind == "op":
            self.take()
            sign = -1 if v == "-" else 1
        term = self._at(pos, lambda: self.product().scale(sign))
        while True:
            kind, v, pos = self.peek()
            if kind == "op" and v in ("+", "-"):
                self.take()
                rhs = self.product()
                term = self._at(pos, lambda: term + rhs if v == "+" else term - rhs)
            else:
                return term

    def _at(self, pos, fn):
        try:
            return fn()
        except SignatureError as exc:
            if "at position" in str(exc):
                raise
            raise SignatureError(f"{exc} (at position {pos})") from None

    def product(self) -> NcTerm:
        term = self.factor()
        while True:
            kind, v, pos = self.peek()
            if kind == "op" and v == ".":
                self.take()
            elif not (kind in ("int", "ident") or (kind == "op" and v == "(")):
                return term
            rhs = self.factor()
            term = self._compose(term, rhs, pos)

    @staticmethod
    def _compose(left: NcTerm, right: NcTerm, pos: int) -> NcTerm:
        try:
            return left @ right
        except SignatureError:
            raise SignatureError(
                f"cannot compose '{left}' after '{right}': '{right}' targets "
                f"{right.target}, '{left}' consumes {left.source} "
                f"(at position {pos})") from None

    def factor(self) -> NcTerm:
        kind, v, pos = self.take()
        if kind == "int":
            base = NcTerm.scalar(int(v))
        elif kind == "ident":
            if v.startswith("1_"):
                base = NcTerm.identity(SpaceLabel(v[2:]))
            else:
                names = _split_ident(v, pos)
                base = None
                for j, n in enumerate(names):
                    last = j == len(names) - 1
                    f = self._postfix(self._atom(n), pos) if last else self._atom(n)
                    base = f if base is None else self._compose(base, f, pos)
                return base
        elif kind == "op" and v == "(":
            base = self.expr()
            self.expect(")")
        else:
            raise ParseError(f"unexpected {v or 'end of input'!r}", pos)
        return self._postfix(base, pos)

    def _atom(self, name: str) -> NcTerm:
        if name in _SCALARS:
            return NcTerm.scalar(_SCALARS[name])
        return NcTerm.symbol(name)

    def _postfix(self, base: NcTerm, pos: int) -> NcTerm:
        while True:
            kind, v, p = self.peek()
            if kind == "op" and v == "*":
                self.take()
                base = base.adjoint()
            elif kind == "op" and v in ("^", "²"):
                self.take()
                if v == "^":
                    kind2, n, p2 = self.take()
                    if kind2 != "int":
                        raise ParseError("exponent must be an integer", p2)
                    n = int(n)
                else:
                    n = 2
                if n < 1:
                    raise ParseError("exponent must be positive", p)
                out = base
                for _ in range(n - 1):
                    out = self._at(p, lambda: out @ base)
                base = out
            else:
                return base


def parse_term(text: str, signature: Signature | None = None) -> NcTerm:
    """Parse an expression such as ``"a b + b c"`` or ``"b* b + c^2 - 1"``.

    Juxtaposition, or ``.``, composes; ``*`` after a factor takes the
    adjoint; ``s`` and ``k`` are the scalar atoms.  Unicode tildes and the
    ``t`` suffix (``bt``) both name the second module's blocks.
    """
    term = _Parser(normalize_text(text)).parse()
    if signature is not None:
        term = term.typed(signature)
    return term
