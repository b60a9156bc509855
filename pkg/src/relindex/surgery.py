"""Cut-and-paste of Fredholm modules over a pair of covering ideals.

Given modules ``x`` and ``xt`` that agree on ``J = J1 & J2``, the diamond
``x <> xt`` keeps the ``J1``-part of ``x`` and the ``J2``-part of ``xt``::

    H <> Ht = H1 + H0 + Ht2,        F <> Ft = [[a,  b,   0 ],
                                               [b*, c,   dt],
                                               [0,  dt*, et]]

The rotation family ``F_t`` on ``H + Ht`` connects ``F + Ft`` (t = 0) with a
signed permutation of ``(F <> Ft) + (Ft <> F)`` (t = pi/2).

Corner blocks ``P1 F P2`` are dropped when assembling all of these
operators; :attr:`SurgeryPair.corner_profiles` records what was dropped.
The array-level helpers (:func:`diamond_matrix`, :func:`homotopy_matrix`,
:func:`pasting_unitary_matrix`) work on raw :class:`Blocks` and need no
algebra at all.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .algebra import AlgebraElement, AlgebraRep, Ideal, ideal_cover_check
from .errors import (
    IdentificationError,
    NoDecompositionError,
    NondegeneracyError,
)
from .fredholm import (
    BlockDecomposition,
    CompactnessProfile,
    DefectReport,
    FredholmModule,
    block_decompose,
    check_intertwiner,
    defect_report,
    opnorm,
)

HALF_PI = np.pi / 2

#: Which summand picks up the sign in the pasting unitary.  The summand
#: ``Ht2`` moves into the third slot and is negated there; the opposite
#: choice (negating ``H2`` in the sixth slot) breaks the endpoint identity.
NEGATE_MOVED_HT2 = True


class CChoice(str, enum.Enum):
    FROM_X = "FromX"
    FROM_XTILDE = "FromXtilde"
    AVERAGE = "Average"


@dataclass(frozen=True, eq=False)
class Blocks:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.a.shape[0], self.c.shape[0], self.e.shape[0]

    def assemble(self) -> np.ndarray:
        """The corner-free 3x3 operator on ``H1 + H0 + H2``."""
        return _tridiag3(self.a, self.b, self.c, self.d, self.e)

    @classmethod
    def from_decomposition(cls, bd: BlockDecomposition) -> "Blocks":
        return cls(bd.a, bd.b, bd.c, bd.d, bd.e)

    @classmethod
    def random(cls, dims, rng: np.random.Generator, hermitian: bool = True) -> "Blocks":
        """Unstructured blocks with Hermitian diagonal entries."""
        n1, n0, n2 = dims

        def g(r, c):
            return rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))

        def h(n):
            m = g(n, n)
            return (m + m.conj().T) / 2 if hermitian else m

        return cls(h(n1), g(n1, n0), h(n0), g(n0, n2), h(n2))


def _H(m):
    return m.conj().T


def _tridiag3(a, b, c, d, e) -> np.ndarray:
    n1, n0, n2 = a.shape[0], c.shape[0], e.shape[0]
    z = np.zeros((n1, n2), dtype=complex)
    return np.block([[a, b, z], [_H(b), c, d], [_H(z), _H(d), e]])


def _middle(B: Blocks, Bt: Blocks, c_choice: CChoice) -> np.ndarray:
    c_choice = CChoice(c_choice)
    if c_choice is CChoice.FROM_X:
        return B.c
    if c_choice is CChoice.FROM_XTILDE:
        return Bt.c
    return (B.c + Bt.c) / 2


def diamond_matrix(B: Blocks, Bt: Blocks, c_choice=CChoice.FROM_X) -> np.ndarray:
    if B.c.shape != Bt.c.shape:
        raise IdentificationError(
            f"middle blocks differ in size: {B.c.shape} vs {Bt.c.shape}")
    return _tridiag3(B.a, B.b, _middle(B, Bt, c_choice), Bt.d, Bt.e)


def homotopy_matrix(B: Blocks, Bt: Blocks, t: float) -> np.ndarray:
    """The 6x6 block operator on ``H1 + H0 + H2 + Ht1 + H0 + Ht2``.

    Each middle slot keeps its own module's block (``B.c`` and ``Bt.c``),
    so ``t = 0`` gives the corner-free ``F + Ft`` on the nose.
    """
    if not 0.0 <= t <= HALF_PI:
        raise ValueError(f"t must lie in [0, pi/2], got {t}")
    if B.c.shape != Bt.c.shape:
        raise IdentificationError("middle blocks differ in size")
    a, b, c, d, e = B.a, B.b, B.c, B.d, B.e
    at, bt, ct, dt, et = Bt.a, Bt.b, Bt.c, Bt.d, Bt.e
    n1, n0, n2 = B.dims
    m1, _, m2 = Bt.dims
    co, si = np.cos(t), np.sin(t)
    Z = lambda r, c_: np.zeros((r, c_), dtype=complex)
    rows = [
        [a, b, Z(n1, n2), Z(n1, m1), Z(n1, n0), Z(n1, m2)],
        [_H(b), c, co * d, Z(n0, m1), Z(n0, n0), -si * dt],
        [Z(n2, n1), co * _H(d), e, Z(n2, m1), si * _H(d), Z(n2, m2)],
        [Z(m1, n1), Z(m1, n0), Z(m1, n2), at, bt, Z(m1, m2)],
        [Z(n0, n1), Z(n0, n0), si * d, _H(bt), ct, co * dt],
        [Z(m2, n1), -si * _H(dt), Z(m2, n2), Z(m2, m1), co * _H(dt), et],
    ]
    return np.block(rows)


def _signed_plan(dims, dims_t, negate_moved_ht2: bool) -> tuple[np.ndarray, np.ndarray]:
    """Row ``r`` of the pasting unitary is ``sign[r] * e_{src[r]}``."""
    n1, n0, n2 = dims
    m1, _, m2 = dims_t
    src_sizes = [n1, n0, n2, m1, n0, m2]
    src_off = np.concatenate([[0], np.cumsum(src_sizes)]).astype(int)
    # target slot -> (source slot, sign)
    sign_ht2 = -1.0 if negate_moved_ht2 else 1.0
    sign_h2 = 1.0 if negate_moved_ht2 else -1.0
    plan = [(0, 1.0), (1, 1.0), (5, sign_ht2), (3, 1.0), (4, 1.0), (2, sign_h2)]
    src = np.concatenate([np.arange(src_off[k], src_off[k + 1]) for k, _ in plan])
    sign = np.concatenate([np.full(src_sizes[k], sg) for k, sg in plan])
    return src, sign


def pasting_unitary_matrix(dims, dims_t, negate_moved_ht2: bool = NEGATE_MOVED_HT2) -> np.ndarray:
    """Signed permutation ``H + Ht -> (H <> Ht) + (Ht <> H)``.

    Source layout ``H1, H0, H2, Ht1, H0, Ht2``; target layout
    ``H1, H0, Ht2, Ht1, H0, H2``.  The third and sixth summands trade
    places and one of them changes sign.
    """
    src, sign = _signed_plan(dims, dims_t, negate_moved_ht2)
    U = np.zeros((src.size, src.size))
    U[np.arange(src.size), src] = sign
    return U


def conjugate_by_pasting(A: np.ndarray, dims, dims_t,
                         negate_moved_ht2: bool = NEGATE_MOVED_HT2) -> np.ndarray:
    """``U* A U`` by indexing; bitwise equal to the matrix product."""
    src, sign = _signed_plan(dims, dims_t, negate_moved_ht2)
    inv = np.empty_like(src)
    inv[src] = np.arange(src.size)
    s = sign[inv]
    return s[:, None] * A[np.ix_(inv, inv)] * s[None, :]


def endpoint_residual(B: Blocks, Bt: Blocks,
                      negate_moved_ht2: bool = NEGATE_MOVED_HT2) -> float:
    """``|| F_{pi/2} - U* ((F<>Ft) + (Ft<>F)) U ||`` on raw blocks."""
    F_end = homotopy_matrix(B, Bt, HALF_PI)
    target = sla.block_diag(diamond_matrix(B, Bt), diamond_matrix(Bt, B))
    return opnorm(F_end - conjugate_by_pasting(target, B.dims, Bt.dims, negate_moved_ht2))


class SurgeryPair:
    """Two modules agreeing on ``J1 & J2``, with their block decompositions.

    ``T`` maps ``H0`` (of ``x``) onto ``Ht0`` (of ``xt``) and must intertwine
    the two representations; by default both middle subspaces must have the
    same layout and are identified directly.  All blocks of ``xt`` touching
    the middle are transported into the coordinates of ``x``.
    """

    def __init__(self, x: FredholmModule, xt: FredholmModule, J1: Ideal, J2: Ideal,
                 T: np.ndarray | None = None):
        alg = x.algebra
        if xt.algebra != alg:
            raise IdentificationError("modules over different algebras")
        if not ideal_cover_check(J1, J2, alg):
            raise NoDecompositionError("J1 + J2 does not cover the algebra")
        for name, m in (("x", x), ("xt", xt)):
            if not m.rep.is_nondegenerate():
                raise NondegeneracyError(f"representation of {name} is degenerate")
        if x.graded != xt.graded:
            raise IdentificationError("cannot paste a graded and an ungraded module")
        self.x, self.xt, self.J1, self.J2 = x, xt, J1, J2
        self.bd = block_decompose(x, J1, J2)
        self.bdt = block_decompose(xt, J1, J2)
        self.rep1, self.rep0, self.rep2 = _split_rep(x.rep, self.bd)
        self.rep1t, rep0t, self.rep2t = _split_rep(xt.rep, self.bdt)
        self.blocks = Blocks.from_decomposition(self.bd)
        bt = Blocks.from_decomposition(self.bdt)
        if T is None:
            if not self.rep0.same_layout(rep0t):
                raise IdentificationError(
                    "middle subspaces differ in layout; pass an explicit T")
        else:
            T = np.asarray(T, dtype=complex)
            if T.shape != (rep0t.dim, self.rep0.dim):
                raise IdentificationError(
                    f"T has shape {T.shape}; middle dimensions are "
                    f"{self.rep0.dim} and {rep0t.dim}")
            check_intertwiner(T, self.rep0, rep0t)
            TH = T.conj().T
            bt = Blocks(bt.a, bt.b @ T, TH @ bt.c @ T, TH @ bt.d, bt.e)
        self.T = T
        self.blocks_t = bt

    @property
    def graded(self) -> bool:
        return self.x.graded

    @property
    def corner_profiles(self) -> tuple[CompactnessProfile, CompactnessProfile]:
        return self.bd.corner_profile, self.bdt.corner_profile

    def swapped(self) -> "SurgeryPair":
        T = None if self.T is None else self.T.conj().T
        return SurgeryPair(self.xt, self.x, self.J1, self.J2, T)

    def reordered_rep(self) -> AlgebraRep:
        return _join(self.rep1, self.rep0, self.rep2)

    def reordered_rep_t(self) -> AlgebraRep:
        # the middle slot is the identified copy of H0
        return _join(self.rep1t, self.rep0, self.rep2t)

    def direct_sum_rep(self) -> AlgebraRep:
        return self.reordered_rep().direct_sum(self.reordered_rep_t())


def _split_rep(rep: AlgebraRep, bd: BlockDecomposition):
    bc = rep.basis_copies
    return tuple(rep.subrep(np.unique(bc[idx])) for idx in (bd.idx1, bd.idx0, bd.idx2))


def _join(*reps: AlgebraRep) -> AlgebraRep:
    out = reps[0]
    for r in reps[1:]:
        out = out.direct_sum(r)
    return out


def diamond(p: SurgeryPair, c_choice=CChoice.FROM_X) -> FredholmModule:
    """The pasted module ``x <> xt``; the mirror is ``diamond(p.swapped())``."""
    F = diamond_matrix(p.blocks, p.blocks_t, c_choice)
    rep = _join(p.rep1, p.rep0, p.rep2t)
    return FredholmModule(rep, F, p.graded)


@dataclass(frozen=True, eq=False)
class HomotopySample:
    t: float
    module: FredholmModule
    report: DefectReport | None

    @property
    def F(self) -> np.ndarray:
        return self.module.F


def homotopy_operator(p: SurgeryPair, t: float, tests=None,
                      with_report: bool = True) -> HomotopySample:
    F_t = homotopy_matrix(p.blocks, p.blocks_t, t)
    module = FredholmModule(p.direct_sum_rep(), F_t, p.graded)
    report = defect_report(module, tests) if with_report else None
    return HomotopySample(float(t), module, report)


def corner_free_direct_sum(p: SurgeryPair) -> np.ndarray:
    """``F + Ft`` in the reordered basis with both corner pairs removed."""
    return sla.block_diag(p.blocks.assemble(), p.blocks_t.assemble())


def pasting_unitary(p: SurgeryPair) -> np.ndarray:
    return pasting_unitary_matrix(p.blocks.dims, p.blocks_t.dims)


def endpoint_check(p: SurgeryPair) -> float:
    return endpoint_residual(p.blocks, p.blocks_t)


def t_grid(n: int = 11) -> np.ndarray:
    return np.linspace(0.0, HALF_PI, n)


def lipschitz_constant(p: SurgeryPair) -> float:
    """A bound ``C`` with ``||F_t - F_s|| <= C |t - s|``."""
    return 2.0 * (opnorm(p.blocks.d) + opnorm(p.blocks_t.d))
