"""Certificates for the squared pasting matrices.

Relations that hold modulo (locally) compact operators are treated as
exact equalities in the quotient: every block is local, so whatever a rule
discards is locally compact.  Whether a given relation holds modulo compact
or only locally compact operators is not tracked.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import SignatureError
from ..surgery import NEGATE_MOVED_HT2
from .rewrite import RewriteSystem, Step, reduce
from .scalars import Scalar
from .terms import NcTerm, SpaceLabel, parse_term

H1, H0, H2, H1t, H2t = (SpaceLabel.H1, SpaceLabel.H0, SpaceLabel.H2,
                        SpaceLabel.H1t, SpaceLabel.H2t)

HEADER = ("Relations modulo compact and modulo locally compact operators are "
          "both read as equalities in the quotient by locally compact operators.")


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Block matrix of terms; entry ``(i, j)`` maps ``cols[j]`` to ``rows[i]``."""

    rows: tuple[SpaceLabel, ...]
    cols: tuple[SpaceLabel, ...]
    entries: tuple[tuple[NcTerm, ...], ...]

    def __post_init__(self):
        rows = tuple(SpaceLabel(r) for r in self.rows)
        cols = tuple(SpaceLabel(c) for c in self.cols)
        if len(self.entries) != len(rows) or any(len(r) != len(cols) for r in self.entries):
            raise SignatureError("entry grid does not match the slot lists")
        typed = []
        for i, row in enumerate(self.entries):
            out = []
            for j, t in enumerate(row):
                t = t if isinstance(t, NcTerm) else NcTerm.scalar(t)
                sig = (cols[j], rows[i])
                if t.signature is not None and t.signature != sig and not t.is_zero():
                    raise SignatureError(
                        f"entry ({i + 1},{j + 1}) has signature "
                        f"{t.signature[0]}->{t.signature[1]}, slot needs {sig[0]}->{sig[1]}")
                out.append(t.typed(sig))
            typed.append(tuple(out))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", tuple(typed))

    @classmethod
    def from_grid(cls, rows, cols, grid: Sequence[Sequence]) -> "SymMatrix":
        return cls(tuple(rows), tuple(cols), tuple(tuple(_term(x) for x in r) for r in grid))

    @classmethod
    def identity(cls, spaces) -> "SymMatrix":
        n = len(spaces)
        return cls.from_grid(spaces, spaces, [[1 if i == j else 0 for j in range(n)]
                                              for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def __getitem__(self, ij) -> NcTerm:
        return self.entries[ij[0]][ij[1]]

    def __matmul__(self, other: "SymMatrix") -> "SymMatrix":
        if self.cols != other.rows:
            raise SignatureError("slot spaces do not match for the product")
        grid = []
        for i, ri in enumerate(self.rows):
            row = []
            for j, cj in enumerate(other.cols):
                acc = NcTerm.zero(cj, ri)
                for k in range(len(self.cols)):
                    acc = acc + self.entries[i][k] @ other.entries[k][j]
                row.append(acc)
            grid.append(row)
        return SymMatrix.from_grid(self.rows, other.cols, grid)

    def adjoint(self) -> "SymMatrix":
        grid = [[self.entries[i][j].adjoint() for i in range(len(self.rows))]
                for j in range(len(self.cols))]
        return SymMatrix.from_grid(self.cols, self.rows, grid)

    def map(self, fn) -> "SymMatrix":
        return SymMatrix.from_grid(self.rows, self.cols,
                                   [[fn(t) for t in row] for row in self.entries])

    def evaluate(self, env, dims, s: float = 0.0, k: float = 1.0) -> np.ndarray:
        return np.block([[t.evaluate(env, dims, s, k) for t in row] for row in self.entries])

    def __str__(self):
        return "\n".join(" | ".join(str(t) for t in row) for row in self.entries)


def _term(x) -> NcTerm:
    if isinstance(x, NcTerm):
        return x
    if isinstance(x, (int, Scalar)):
        return NcTerm.scalar(x)
    if isinstance(x, str):
        return parse_term(x)
    raise TypeError(f"cannot make a term from {x!r}")


def diamond_symbolic() -> SymMatrix:
    """``x <> xt`` on ``H1 + H0 + H2t``."""
    return SymMatrix.from_grid(
        (H1, H0, H2t), (H1, H0, H2t),
        [["a", "b", 0],
         ["b*", "c", "dt"],
         [0, "dt*", "et"]])


def mirror_symbolic() -> SymMatrix:
    """``xt <> x`` on ``H1t + H0 + H2``."""
    return SymMatrix.from_grid(
        (H1t, H0, H2), (H1t, H0, H2),
        [["at", "bt", 0],
         ["bt*", "c", "d"],
         [0, "d*", "e"]])


SIX = (H1, H0, H2, H1t, H0, H2t)


def homotopy_symbolic() -> SymMatrix:
    """The rotation family with ``s = sin t`` and ``k = cos t``."""
    return SymMatrix.from_grid(SIX, SIX, [
        ["a", "b", 0, 0, 0, 0],
        ["b*", "c", "k d", 0, 0, "-s dt"],
        [0, "k d*", "e", 0, "s d*", 0],
        [0, 0, 0, "at", "bt", 0],
        [0, 0, "s d", "bt*", "c", "k dt"],
        [0, "-s dt*", 0, 0, "k dt*", "et"],
    ])


def pasting_unitary_symbolic(negate_moved_ht2: bool = NEGATE_MOVED_HT2) -> SymMatrix:
    """Signed swap of the third and sixth slots, as typed identities."""
    targets = (H1, H0, H2t, H1t, H0, H2)
    source_of = (0, 1, 5, 3, 4, 2)
    sign = [1] * 6
    sign[2 if negate_moved_ht2 else 5] = -1
    grid = [[sign[i] if source_of[i] == j else 0 for j in range(6)] for i in range(6)]
    return SymMatrix.from_grid(targets, SIX, grid)


def block_diagonal(A: SymMatrix, B: SymMatrix) -> SymMatrix:
    n, m = len(A.cols), len(B.cols)
    grid = [list(r) + [0] * m for r in A.entries] + [[0] * n + list(r) for r in B.entries]
    return SymMatrix.from_grid(A.rows + B.rows, A.cols + B.cols, grid)


@dataclass(frozen=True, eq=False)
class EntryResult:
    row: int
    col: int
    passed: bool
    normal_form: NcTerm
    expected: NcTerm
    trace: list[Step]
    ordering: int = 0

    @property
    def label(self) -> str:
        return f"({self.row},{self.col})"

    def to_dict(self) -> dict:
        return {
            "entry": self.label,
            "passed": self.passed,
            "normal_form": self.normal_form.format(ascii=True),
            "expected": self.expected.format(ascii=True),
            "ordering": self.ordering,
            "steps": [s.to_list() for s in self.trace],
        }


@dataclass(frozen=True, eq=False)
class Certificate:
    name: str
    entries: list[EntryResult]
    axioms: list[str]
    checks: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries) and all(self.checks.values())

    @property
    def n_passed(self) -> int:
        return sum(e.passed for e in self.entries)

    @property
    def failures(self) -> list[EntryResult]:
        return [e for e in self.entries if not e.passed]

    @property
    def steps(self) -> int:
        return sum(len(e.trace) for e in self.entries)

    def entry(self, row: int, col: int) -> EntryResult:
        for e in self.entries:
            if (e.row, e.col) == (row, col):
                return e
        raise KeyError((row, col))

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {verdict} {self.n_passed}/{len(self.entries)} entries"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "header": HEADER,
            "passed": self.passed,
            "axioms": self.axioms,
            "checks": self.checks,
            "entries": [e.to_dict() for e in self.entries],
        }


def square_symbolic(M: SymMatrix, rs: RewriteSystem, traces: dict | None = None) -> SymMatrix:
    """``M @ M`` with every entry reduced.

    Like terms are collected, with exact scalar arithmetic, before any
    rule fires.  ``traces`` receives the rewrite steps per ``(i, j)``.
    """
    if M.rows != M.cols:
        raise SignatureError("square_symbolic needs equal row and column slots")
    P = M @ M
    grid = []
    for i, row in enumerate(P.entries):
        out = []
        for j, t in enumerate(row):
            steps: list[Step] = []
            out.append(reduce(t, rs, steps))
            if traces is not None:
                traces[(i, j)] = steps
        grid.append(out)
    return SymMatrix.from_grid(P.rows, P.cols, grid)


def _check_entries(P: SymMatrix, target: SymMatrix, rs: RewriteSystem,
                   fallback: bool) -> list[EntryResult]:
    out = []
    for i in range(P.shape[0]):
        for j in range(P.shape[1]):
            raw, want = P[i, j], target[i, j]
            result = None
            for n, system in enumerate(rs.orderings() if fallback else [rs]):
                steps: list[Step] = []
                nf = reduce(raw, system, steps)
                if nf == want:
                    result = EntryResult(i + 1, j + 1, True, nf, want, steps, n)
                    break
                if n == 0:
                    first = EntryResult(i + 1, j + 1, False, nf, want, steps, 0)
            out.append(result if result is not None else first)
    return out


def _certify(name: str, M: SymMatrix, rs: RewriteSystem | None, fallback: bool):
    rs = RewriteSystem.default() if rs is None else rs
    t0 = time.perf_counter()
    P = M @ M
    entries = _check_entries(P, SymMatrix.identity(M.rows), rs, fallback)
    return rs, entries, t0


def verify_proposition(rs: RewriteSystem | None = None, fallback: bool = True) -> Certificate:
    """All nine entries of the squared diamond must reduce to the identity."""
    rs, entries, t0 = _certify("diamond", diamond_symbolic(), rs, fallback)
    return Certificate("diamond", entries, rs.axioms, {}, time.perf_counter() - t0)


def verify_homotopy(rs: RewriteSystem | None = None, fallback: bool = True) -> Certificate:
    """All 36 entries of the squared rotation family, plus two side checks.

    ``selfadjoint``: the matrix equals its adjoint.  ``endpoint``: at
    ``s = 1, k = 0`` it equals ``U* ((x <> xt) + (xt <> x)) U``.
    """
    M = homotopy_symbolic()
    rs, entries, t0 = _certify("homotopy", M, rs, fallback)
    red = lambda t: reduce(t, rs)
    selfadjoint = all(a == b for ra, rb in zip(M.map(red).entries, M.adjoint().map(red).entries)
                      for a, b in zip(ra, rb))
    U = pasting_unitary_symbolic()
    conj = U.adjoint() @ block_diagonal(diamond_symbolic(), mirror_symbolic()) @ U
    end = M.map(lambda t: t.substitute_scalars(1, 0))
    endpoint = all(red(a) == red(b) for ra, rb in zip(end.entries, conj.entries)
                   for a, b in zip(ra, rb))
    checks = {"selfadjoint": selfadjoint, "endpoint": endpoint}
    return Certificate("homotopy", entries, rs.axioms, checks, time.perf_counter() - t0)


def endpoint_matches(negate_moved_ht2: bool) -> bool:
    """Symbolic endpoint identity for one sign convention of the unitary."""
    rs = RewriteSystem.default()
    U = pasting_unitary_symbolic(negate_moved_ht2)
    conj = U.adjoint() @ block_diagonal(diamond_symbolic(), mirror_symbolic()) @ U
    end = homotopy_symbolic().map(lambda t: t.substitute_scalars(1, 0))
    return all(reduce(a, rs) == reduce(b, rs) for ra, rb in zip(end.entries, conj.entries)
               for a, b in zip(ra, rb))


# numerical spot-check of soundness


def block_env(B, Bt) -> dict[str, np.ndarray]:
    return {"a": B.a, "b": B.b, "c": B.c, "d": B.d, "e": B.e,
            "at": Bt.a, "bt": Bt.b, "dt": Bt.d, "et": Bt.e}


def block_dims(B, Bt) -> dict[SpaceLabel, int]:
    n1, n0, n2 = B.dims
    m1, _, m2 = Bt.dims
    return {H1: n1, H0: n0, H2: n2, H1t: m1, H2t: m2}


def axiom_defect(env, dims, rs: RewriteSystem | None = None) -> float:
    """Largest numerical violation of any rule or KILL instance of length 2."""
    rs = RewriteSystem.default() if rs is None else rs
    worst = 0.0
    for rule in rs.rules:
        lhs = NcTerm.word(rule.lhs)
        diff = lhs.evaluate(env, dims) - rule.rhs.evaluate(env, dims)
        worst = max(worst, np.linalg.norm(diff, 2))
    if rs.kill:
        for pair in ("b d", "b dt", "bt d", "bt dt"):
            t = parse_term(pair)
            worst = max(worst, np.linalg.norm(t.evaluate(env, dims), 2))
    return float(worst)


@dataclass(frozen=True)
class SoundnessResult:
    constant: float
    samples: int
    delta: float
    worst_defect: float
    worst_axiom_defect: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def soundness_check(n_samples: int = 50, delta: float = 1e-6, seed: int = 0,
                    rs: RewriteSystem | None = None) -> SoundnessResult:
    """Ratio of numerical identity defects to axiom defects.

    Block tuples that satisfy every axiom exactly are perturbed by
    ``delta``; the squared diamond and rotation family (at a random ``t``)
    then differ from the identity by at most ``C`` times the axiom defect.
    """
    from ..models import exact_block_pair, perturb_blocks

    rs = RewriteSystem.default() if rs is None else rs
    rng = np.random.default_rng(seed)
    C = worst = worst_ax = 0.0
    D, H = diamond_symbolic(), homotopy_symbolic()
    for _ in range(n_samples):
        n0 = int(rng.integers(2, 6))
        dims = (int(rng.integers(1, 6)), n0, int(rng.integers(1, 6)))
        dims_t = (int(rng.integers(1, 6)), n0, int(rng.integers(1, 6)))
        B, Bt = exact_block_pair(dims, dims_t, rng)
        B, Bt = perturb_blocks(B, delta, rng), perturb_blocks(Bt, delta, rng)
        env, dm = block_env(B, Bt), block_dims(B, Bt)
        ax = axiom_defect(env, dm, rs)
        t = rng.uniform(0, np.pi / 2)
        errs = []
        for M, s, k in ((D, 0.0, 1.0), (H, np.sin(t), np.cos(t))):
            X = M.evaluate(env, dm, s, k)
            errs.append(np.linalg.norm(X @ X - np.eye(X.shape[0]), 2))
        err = max(errs)
        worst, worst_ax = max(worst, err), max(worst_ax, ax)
        C = max(C, err / ax)
    return SoundnessResult(float(C), n_samples, delta, float(worst), float(worst_ax))
