"""Fredholm modules and quantitative stand-ins for "modulo compact".

A finite matrix is always compact, so relations such as ``F^2 ~ 1`` have no
literal content here.  Instead every defect operator is summarised by its
full singular-value profile (:class:`CompactnessProfile`); compactness of a
limiting operator shows up as a profile that decays in the tail index and,
across a refinement family, decays in the model size at fixed tail index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .algebra import (
    AlgebraElement,
    AlgebraRep,
    BlockAlgebra,
    Ideal,
    ideal_cover_check,
    ideal_intersect,
    ideal_mask,
    rep_apply,
)
from .errors import (
    AlgebraMismatchError,
    GradingError,
    IdentificationError,
    InvalidIntertwinerError,
    NoDecompositionError,
    NondegeneracyError,
    ShapeMismatchError,
)

#: Operator-norm tolerance for exact-structure assertions.
EXACT_TOL = 1e-10


def singular_values(X: np.ndarray) -> np.ndarray:
    """Singular values in nonincreasing order.

    Exactly Hermitian or skew-Hermitian input goes through ``eigvalsh``,
    which is both faster and more accurate than a general SVD.
    """
    X = np.asarray(X)
    if X.size == 0:
        return np.zeros(0)
    if not np.any(X):
        return np.zeros(min(X.shape))
    if X.shape[0] == X.shape[1]:
        XH = X.conj().T
        if np.array_equal(X, XH):
            return np.sort(np.abs(sla.eigvalsh(X)))[::-1]
        if np.array_equal(X, -XH):
            return np.sort(np.abs(sla.eigvalsh(1j * X)))[::-1]
    return sla.svdvals(X)


#: Below this size the operator norm comes from a dense decomposition.
DENSE_NORM_LIMIT = 400
LANCZOS_MAXITER = 30


def opnorm(X: np.ndarray) -> float:
    X = np.asarray(X)
    n = min(X.shape) if X.ndim == 2 else 0
    if n < DENSE_NORM_LIMIT or not np.any(X):
        sv = singular_values(X)
        return float(sv[0]) if sv.size else 0.0
    # short Lanczos run with a fixed start vector; clustered tops fall back to dense
    v0 = np.ones(n)
    kw = dict(v0=v0, tol=0, maxiter=LANCZOS_MAXITER, ncv=min(n - 1, 32))
    try:
        if X.shape[0] == X.shape[1] and np.array_equal(X, X.conj().T):
            val = spla.eigsh(X, k=1, which="LM", return_eigenvectors=False, **kw)
        else:
            val = spla.svds(X, k=1, return_singular_vectors=False, **kw)
        return float(np.abs(val).max())
    except spla.ArpackNoConvergence:
        return float(singular_values(X)[0])


@dataclass(frozen=True, eq=False)
class CompactnessProfile:
    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.abs(np.asarray(self.values, dtype=float).reshape(-1)))[::-1]
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def of(cls, X) -> "CompactnessProfile":
        return cls(singular_values(X))

    def __len__(self):
        return self.values.size

    @property
    def norm(self) -> float:
        return float(self.values[0]) if self.values.size else 0.0

    def sigma(self, k: int) -> float:
        """The k-th singular value, 1-based; zero past the end."""
        if k < 1:
            raise ValueError("singular values are indexed from 1")
        return float(self.values[k - 1]) if k <= self.values.size else 0.0

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.norm <= tol

    def to_dict(self, limit: int | None = None) -> dict:
        vals = self.values if limit is None else self.values[:limit]
        return {"norm": self.norm, "size": int(self.values.size),
                "singular_values": [float(v) for v in vals]}


@dataclass(frozen=True, eq=False)
class DefectReport:
    selfadjoint_defect: float
    square_profile: CompactnessProfile
    locality_defects: list[tuple[str, float]]
    odd_defect: float | None = None

    def max_defect(self) -> float:
        vals = [self.selfadjoint_defect, self.square_profile.norm]
        vals += [v for _, v in self.locality_defects]
        if self.odd_defect is not None:
            vals.append(self.odd_defect)
        return max(vals)

    def locality(self, name: str) -> float:
        return dict(self.locality_defects)[name]

    def to_dict(self, limit: int | None = 20) -> dict:
        return {
            "selfadjoint_defect": self.selfadjoint_defect,
            "square_profile": self.square_profile.to_dict(limit),
            "locality_defects": {k: v for k, v in self.locality_defects},
            "odd_defect": self.odd_defect,
        }


@dataclass(frozen=True, eq=False)
class FredholmModule:
    rep: AlgebraRep
    F: np.ndarray
    graded: bool = False

    def __post_init__(self):
        F = np.asarray(self.F, dtype=complex)
        if F.shape != (self.rep.dim, self.rep.dim):
            raise ShapeMismatchError(
                f"F has shape {F.shape}, representation has dimension {self.rep.dim}"
            )
        if self.graded and not self.rep.graded:
            raise GradingError("a graded module needs a graded representation")
        F.setflags(write=False)
        object.__setattr__(self, "F", F)

    @property
    def dim(self) -> int:
        return self.rep.dim

    @property
    def algebra(self) -> BlockAlgebra:
        return self.rep.algebra

    def gamma(self) -> np.ndarray:
        return self.rep.gamma()


def direct_sum(x: FredholmModule, y: FredholmModule) -> FredholmModule:
    if x.algebra != y.algebra:
        raise AlgebraMismatchError("modules over different algebras")
    if x.graded != y.graded:
        raise GradingError("cannot sum a graded and an ungraded module")
    return FredholmModule(x.rep.direct_sum(y.rep), sla.block_diag(x.F, y.F), x.graded)


def raised_cosine(pos: np.ndarray, centre: float, half_width: float) -> np.ndarray:
    t = np.clip(np.abs(pos - centre) / half_width, 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(np.pi * t))


def standard_test_elements(alg: BlockAlgebra, seed: int = 0, n_bumps: int = 5,
                           n_random: int = 3) -> list[tuple[str, AlgebraElement]]:
    """Identity, evenly spaced raised-cosine bumps, seeded random Hermitians.

    Bumps live on the rescaled block positions in (-1, 1); their half-width
    equals the spacing of the centres, so they have a fixed shape relative
    to the whole algebra.
    """
    pos = alg.positions()
    out = [("identity", AlgebraElement.identity(alg))]
    centres = np.linspace(-1.0, 1.0, n_bumps + 2)[1:-1]
    width = 2.0 / (n_bumps + 1)
    for i, c in enumerate(centres):
        out.append((f"bump{i}", AlgebraElement.from_values(alg, raised_cosine(pos, c, width))))
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        out.append((f"random{i}", AlgebraElement.random(alg, rng, hermitian=True)))
    return out


def central_bump(alg: BlockAlgebra, n_bumps: int = 5) -> AlgebraElement:
    """The middle member of the standard bump family."""
    return standard_test_elements(alg, n_bumps=n_bumps, n_random=0)[1 + n_bumps // 2][1]


def commutator_norm(F: np.ndarray, R: np.ndarray) -> float:
    d = np.diagonal(R)
    if np.array_equal(R, np.diag(d)):
        return opnorm(F * d[None, :] - d[:, None] * F)
    return opnorm(F @ R - R @ F)


def square_defect(F: np.ndarray) -> np.ndarray:
    """``F^2 - 1``, made exactly Hermitian when ``F`` is."""
    sq = F @ F - np.eye(F.shape[0])
    if np.array_equal(F, F.conj().T):
        sq = (sq + sq.conj().T) / 2
    return sq


def defect_report(x: FredholmModule, tests: list[tuple[str, AlgebraElement]]
                  | None = None) -> DefectReport:
    """All defect quantities of the module relations.

    ``tests`` defaults to :func:`standard_test_elements` with seed 0.
    """
    if tests is None:
        tests = standard_test_elements(x.algebra)
    F = x.F
    FH = F.conj().T
    sa = opnorm(F - FH)
    profile = CompactnessProfile.of(square_defect(F))
    loc = []
    for name, phi in tests:
        loc.append((name, commutator_norm(F, rep_apply(x.rep, phi))))
    odd = None
    if x.graded:
        g = x.rep.grading
        odd = opnorm(g[:, None] * F + F * g[None, :])
    return DefectReport(sa, profile, loc, odd)


def is_degenerate(x: FredholmModule, tests=None, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return defect_report(x, tests).max_defect() <= tol


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """``H = H1 + H0 + H2`` and the five blocks of F in that order.

    ``idx1``, ``idx0``, ``idx2`` are the basis indices spanning each summand
    (each sorted increasingly); the blocks are compressions of F between
    those index sets.
    """

    idx1: np.ndarray
    idx0: np.ndarray
    idx2: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray
    corner: np.ndarray
    corner_profile: CompactnessProfile
    dim: int

    @property
    def dims(self) -> tuple[int, int, int]:
        return len(self.idx1), len(self.idx0), len(self.idx2)

    @property
    def order(self) -> np.ndarray:
        """Permutation putting the basis in the order H1, H0, H2."""
        return np.concatenate([self.idx1, self.idx0, self.idx2])

    def projection(self, which: int) -> np.ndarray:
        idx = {0: self.idx0, 1: self.idx1, 2: self.idx2}[which]
        p = np.zeros(self.dim)
        p[idx] = 1.0
        return np.diag(p)

    def __post_init__(self):
        for name in ("idx1", "idx0", "idx2"):
            arr = np.asarray(getattr(self, name), dtype=int)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def block_decompose(x: FredholmModule, J1: Ideal, J2: Ideal) -> BlockDecomposition:
    alg = x.algebra
    if not ideal_cover_check(J1, J2, alg):
        raise NoDecompositionError("J1 + J2 does not cover the algebra")
    if not x.rep.is_nondegenerate():
        raise NondegeneracyError("representation has a block of multiplicity zero")
    J = ideal_intersect(J1, J2)
    m0 = ideal_mask(J, x.rep)
    m1 = ideal_mask(J1, x.rep) & ~m0
    m2 = ideal_mask(J2, x.rep) & ~m0
    i1, i0, i2 = np.flatnonzero(m1), np.flatnonzero(m0), np.flatnonzero(m2)
    F = x.F
    blk = lambda r, c: F[np.ix_(r, c)]
    corner = blk(i1, i2)
    return BlockDecomposition(i1, i0, i2, blk(i1, i1), blk(i1, i0), blk(i0, i0),
                              blk(i0, i2), blk(i2, i2), corner,
                              CompactnessProfile.of(corner), x.dim)


def middle_rep(x: FredholmModule, bd: BlockDecomposition) -> AlgebraRep:
    """Restriction of the representation of ``x`` to ``H0 = J H``."""
    copies = np.unique(x.rep.basis_copies[bd.idx0])
    return x.rep.subrep(copies)


def check_intertwiner(T: np.ndarray, rep: AlgebraRep, rep_t: AlgebraRep,
                      n_checks: int = 3, seed: int = 0) -> float:
    """Largest ``||T rho(phi) - rho~(phi) T||`` over seeded random elements.

    Intertwining is linear in ``phi``, so generic random elements detect
    any failure with probability one.  Grading preservation is checked too.
    """
    if T.shape != (rep_t.dim, rep.dim):
        raise InvalidIntertwinerError(
            f"T has shape {T.shape}, expected {(rep_t.dim, rep.dim)}")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_checks):
        phi = AlgebraElement.random(rep.algebra, rng)
        worst = max(worst, opnorm(T @ rep_apply(rep, phi) - rep_apply(rep_t, phi) @ T))
    if rep.graded and rep_t.graded:
        g, gt = rep.grading, rep_t.grading
        worst = max(worst, opnorm(T * g[None, :] - gt[:, None] * T))
    if worst > EXACT_TOL:
        raise InvalidIntertwinerError(
            f"T fails to intertwine the representations (defect {worst:.3e})")
    return worst


def agreement_defect(x: FredholmModule, xt: FredholmModule, J: Ideal,
                     T: np.ndarray | None = None) -> CompactnessProfile:
    """Profile of ``T P F P T* - P~ F~ P~`` on ``J H~``.

    With ``T=None`` the two middle subspaces must have identical layouts
    and are identified basis vector by basis vector.
    """
    m, mt = ideal_mask(J, x.rep), ideal_mask(J, xt.rep)
    i0, i0t = np.flatnonzero(m), np.flatnonzero(mt)
    rep0 = x.rep.subrep(np.unique(x.rep.basis_copies[i0]))
    rep0t = xt.rep.subrep(np.unique(xt.rep.basis_copies[i0t]))
    c = x.F[np.ix_(i0, i0)]
    ct = xt.F[np.ix_(i0t, i0t)]
    if T is None:
        if not rep0.same_layout(rep0t):
            raise IdentificationError(
                "middle subspaces differ in layout; pass an explicit intertwiner T")
        return CompactnessProfile.of(c - ct)
    T = np.asarray(T, dtype=complex)
    check_intertwiner(T, rep0, rep0t)
    return CompactnessProfile.of(T @ c @ T.conj().T - ct)
