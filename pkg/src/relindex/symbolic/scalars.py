"""Exact polynomials in ``s = sin t`` and ``k = cos t``.

Canonical form: integer coefficients on monomials ``s^i k^j`` with
``i <= 1``, using ``s^2 = 1 - k^2``.  Two scalars are equal as functions of
``t`` iff their canonical forms coincide.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping


def _reduce(raw: Mapping[tuple[int, int], int]) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = {}

    def add(key, c):
        v = out.get(key, 0) + c
        if v:
            out[key] = v
        else:
            out.pop(key, None)

    stack = [(key, c) for key, c in raw.items() if c]
    while stack:
        (i, j), c = stack.pop()
        if i >= 2:
            # s^i k^j = s^(i-2) k^j - s^(i-2) k^(j+2)
            stack.append(((i - 2, j), c))
            stack.append(((i - 2, j + 2), -c))
        else:
            add((i, j), c)
    return out


class Scalar:
    """Element of ``Z[s, k] / (s^2 + k^2 - 1)``."""

    __slots__ = ("_c", "_hash")

    def __init__(self, coeffs: Mapping[tuple[int, int], int] | int = 0):
        if isinstance(coeffs, int):
            coeffs = {(0, 0): coeffs} if coeffs else {}
        for key, c in coeffs.items():
            if not isinstance(c, int):
                raise TypeError(f"coefficients must be integers, got {c!r}")
            if len(key) != 2 or min(key) < 0:
                raise ValueError(f"bad exponent pair {key!r}")
        self._c = _reduce(coeffs)
        self._hash = None

    S: "Scalar"
    K: "Scalar"

    @property
    def coeffs(self) -> dict[tuple[int, int], int]:
        return dict(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def is_constant(self) -> bool:
        return all(key == (0, 0) for key in self._c)

    def constant(self) -> int:
        return self._c.get((0, 0), 0)

    @staticmethod
    def lift(x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, int):
            return Scalar(x)
        return NotImplemented

    def __add__(self, other):
        other = Scalar.lift(other)
        if other is NotImplemented:
            return other
        out = dict(self._c)
        for key, c in other._c.items():
            out[key] = out.get(key, 0) + c
        return Scalar(out)

    __radd__ = __add__

    def __neg__(self):
        return Scalar({key: -c for key, c in self._c.items()})

    def __sub__(self, other):
        other = Scalar.lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return Scalar.lift(other) - self

    def __mul__(self, other):
        other = Scalar.lift(other)
        if other is NotImplemented:
            return other
        out: dict[tuple[int, int], int] = {}
        for (i1, j1), c1 in self._c.items():
            for (i2, j2), c2 in other._c.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + c1 * c2
        return Scalar(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        out = Scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = Scalar.lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._c.items()))
        return self._hash

    def evaluate(self, s, k):
        """Numerical value; pass ``Fraction``s or ints to stay exact."""
        return sum(c * s**i * k**j for (i, j), c in self._c.items())

    def at_endpoint(self) -> int:
        """Value at ``t = pi/2`` (``s = 1``, ``k = 0``), exactly."""
        v = self.evaluate(Fraction(1), Fraction(0))
        return int(v)

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        if not self._c:
            return "0"
        parts = []
        for (i, j), c in sorted(self._c.items()):
            mono = "".join(["s" * i, "k" if j == 1 else (f"k^{j}" if j else "")])
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}{mono}")
        return " + ".join(parts).replace("+ -", "- ")


Scalar.S = Scalar({(1, 0): 1})
Scalar.K = Scalar({(0, 1): 1})
ONE = Scalar(1)
ZERO = Scalar(0)
