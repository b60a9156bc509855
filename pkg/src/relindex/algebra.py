"""Finite-dimensional C*-algebras, their ideals, and representations.

The algebra is a direct sum of full matrix algebras ``M_{n_1} + ... + M_{n_k}``.
Every two-sided ideal of such an algebra is the sum of a subset of the
summands, so an :class:`Ideal` is just a set of block indices and all the
ideal-theoretic operations reduce to set operations and exact 0/1
projections.

A representation is described by an ordered list of *copies*: each copy is a
block index (and, for graded representations, a sign).  Copy ``j`` spans
``n_{block_j}`` consecutive basis vectors on which ``phi_{block_j}`` acts.
The multiplicity of block ``i`` is the number of copies carrying it.

Block indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import block_diag

from .errors import (
    AlgebraMismatchError,
    GradingError,
    MalformedIdealError,
    NoDecompositionError,
    ShapeMismatchError,
)


@dataclass(frozen=True)
class BlockAlgebra:
    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(n) for n in self.blocks)
        if not blocks:
            raise ValueError("a block algebra needs at least one block")
        if any(n < 1 for n in blocks):
            raise ValueError(f"block sizes must be >= 1, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def commutative(cls, n_sites: int) -> "BlockAlgebra":
        """Functions on ``n_sites`` points (every block is 1x1)."""
        return cls((1,) * n_sites)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def is_commutative(self) -> bool:
        return all(n == 1 for n in self.blocks)

    def positions(self) -> np.ndarray:
        """Block centres rescaled to the open interval (-1, 1)."""
        k = self.n_blocks
        return (np.arange(k) + 0.5) * (2.0 / k) - 1.0


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: BlockAlgebra
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.blocks) != self.algebra.n_blocks:
            raise ShapeMismatchError(
                f"element has {len(self.blocks)} blocks, algebra has "
                f"{self.algebra.n_blocks}"
            )
        arrs = []
        for i, (blk, n) in enumerate(zip(self.blocks, self.algebra.blocks)):
            blk = np.asarray(blk, dtype=complex)
            if blk.shape != (n, n):
                raise ShapeMismatchError(
                    f"block {i} has shape {blk.shape}, expected {(n, n)}"
                )
            arrs.append(blk)
        object.__setattr__(self, "blocks", tuple(arrs))

    @classmethod
    def identity(cls, alg: BlockAlgebra) -> "AlgebraElement":
        return cls(alg, tuple(np.eye(n) for n in alg.blocks))

    @classmethod
    def zero(cls, alg: BlockAlgebra) -> "AlgebraElement":
        return cls(alg, tuple(np.zeros((n, n)) for n in alg.blocks))

    @classmethod
    def from_values(cls, alg: BlockAlgebra, values) -> "AlgebraElement":
        """Scalar ``values[i]`` times the unit of block ``i``."""
        values = np.asarray(values)
        if values.shape != (alg.n_blocks,):
            raise ShapeMismatchError(
                f"expected {alg.n_blocks} values, got shape {values.shape}"
            )
        return cls(alg, tuple(v * np.eye(n) for v, n in zip(values, alg.blocks)))

    @classmethod
    def indicator(cls, alg: BlockAlgebra, indices: Iterable[int]) -> "AlgebraElement":
        vals = np.zeros(alg.n_blocks)
        vals[list(indices)] = 1.0
        return cls.from_values(alg, vals)

    @classmethod
    def random(cls, alg: BlockAlgebra, rng: np.random.Generator,
               hermitian: bool = False) -> "AlgebraElement":
        out = []
        for n in alg.blocks:
            m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            if hermitian:
                m = (m + m.conj().T) / 2
            out.append(m)
        return cls(alg, tuple(out))

    def _check(self, other: "AlgebraElement"):
        if self.algebra != other.algebra:
            raise AlgebraMismatchError("elements of different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra,
                              tuple(x + y for x, y in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra,
                              tuple(x - y for x, y in zip(self.blocks, other.blocks)))

    def __matmul__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra,
                              tuple(x @ y for x, y in zip(self.blocks, other.blocks)))

    def scale(self, z) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(z * x for x in self.blocks))

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(x.conj().T for x in self.blocks))

    def support(self) -> frozenset[int]:
        return frozenset(i for i, x in enumerate(self.blocks) if np.any(x != 0))

    def equals(self, other: "AlgebraElement") -> bool:
        """Exact blockwise equality."""
        self._check(other)
        return all(np.array_equal(x, y) for x, y in zip(self.blocks, other.blocks))


@dataclass(frozen=True)
class Ideal:
    indices: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "indices", frozenset(int(i) for i in self.indices))

    @classmethod
    def of(cls, alg: BlockAlgebra, indices: Iterable[int]) -> "Ideal":
        ideal = cls(frozenset(indices))
        ideal.validate(alg)
        return ideal

    @classmethod
    def full(cls, alg: BlockAlgebra) -> "Ideal":
        return cls(frozenset(range(alg.n_blocks)))

    def validate(self, alg: BlockAlgebra) -> None:
        bad = [i for i in self.indices if not 0 <= i < alg.n_blocks]
        if bad:
            raise MalformedIdealError(
                f"block indices {sorted(bad)} out of range for {alg.n_blocks} blocks"
            )

    def __len__(self):
        return len(self.indices)

    def __contains__(self, i):
        return i in self.indices


def ideal_cover_check(J1: Ideal, J2: Ideal, alg: BlockAlgebra) -> bool:
    """True iff ``J1 + J2`` is the whole algebra."""
    J1.validate(alg)
    J2.validate(alg)
    return (J1.indices | J2.indices) == frozenset(range(alg.n_blocks))


def ideal_intersect(J1: Ideal, J2: Ideal) -> Ideal:
    return Ideal(J1.indices & J2.indices)


def ideal_decompose(phi: AlgebraElement, J1: Ideal, J2: Ideal,
                    lam: float = 0.5) -> tuple[AlgebraElement, AlgebraElement]:
    """Split ``phi = phi1 + phi2`` with ``phi1`` in ``J1`` and ``phi2`` in ``J2``.

    On the overlap the element is shared as ``lam * phi`` and
    ``(1 - lam) * phi``.  The two parts add back to ``phi`` bit for bit:
    the larger share is rounded and the smaller one is the difference,
    which is exact because the two operands are within a factor of two.
    """
    alg = phi.algebra
    if not ideal_cover_check(J1, J2, alg):
        raise NoDecompositionError("J1 + J2 does not cover the algebra")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam must lie in [0, 1], got {lam}")
    p1, p2 = [], []
    for i, blk in enumerate(phi.blocks):
        zero = np.zeros_like(blk)
        in1, in2 = i in J1, i in J2
        if in1 and in2:
            if lam >= 0.5:
                first = lam * blk
                second = blk - first
            else:
                second = (1.0 - lam) * blk
                first = blk - second
            p1.append(first)
            p2.append(second)
        elif in1:
            p1.append(blk.copy())
            p2.append(zero)
        else:
            p1.append(zero)
            p2.append(blk.copy())
    return AlgebraElement(alg, tuple(p1)), AlgebraElement(alg, tuple(p2))


@dataclass(frozen=True, eq=False)
class AlgebraRep:
    """A representation given by an ordered list of copies of the blocks.

    ``copy_signs`` is ``None`` for an ungraded representation, otherwise one
    sign (+1/-1) per copy; the sign is constant on a copy, so the grading
    operator commutes with every ``rho(phi)`` by construction.
    """

    algebra: BlockAlgebra
    copy_blocks: np.ndarray
    copy_signs: np.ndarray | None = None

    def __post_init__(self):
        cb = np.asarray(self.copy_blocks, dtype=int).reshape(-1)
        if cb.size and (cb.min() < 0 or cb.max() >= self.algebra.n_blocks):
            raise ShapeMismatchError("copy refers to a block outside the algebra")
        cb.setflags(write=False)
        object.__setattr__(self, "copy_blocks", cb)
        if self.copy_signs is not None:
            cs = np.asarray(self.copy_signs, dtype=int).reshape(-1)
            if cs.shape != cb.shape:
                raise GradingError("one grading sign per copy is required")
            if not np.all(np.abs(cs) == 1):
                raise GradingError("grading signs must be +1 or -1")
            cs.setflags(write=False)
            object.__setattr__(self, "copy_signs", cs)

    @classmethod
    def standard(cls, alg: BlockAlgebra, multiplicities: Sequence[int],
                 signs: Sequence[Sequence[int]] | None = None) -> "AlgebraRep":
        """Block-major layout, ``multiplicities[i]`` copies of block ``i``.

        ``signs[i]`` lists the grading sign of each copy of block ``i``.
        """
        if len(multiplicities) != alg.n_blocks:
            raise ShapeMismatchError("one multiplicity per block is required")
        if any(m < 0 for m in multiplicities):
            raise ValueError("multiplicities must be >= 0")
        cb = np.repeat(np.arange(alg.n_blocks), multiplicities)
        cs = None
        if signs is not None:
            if any(len(s) != m for s, m in zip(signs, multiplicities)):
                raise GradingError("signs must list one entry per copy")
            cs = np.concatenate([np.asarray(s, dtype=int) for s in signs]) \
                if cb.size else np.zeros(0, dtype=int)
        return cls(alg, cb, cs)

    @property
    def graded(self) -> bool:
        return self.copy_signs is not None

    @property
    def copy_dims(self) -> np.ndarray:
        return np.asarray(self.algebra.blocks)[self.copy_blocks]

    @property
    def dim(self) -> int:
        return int(self.copy_dims.sum())

    @property
    def multiplicities(self) -> np.ndarray:
        return np.bincount(self.copy_blocks, minlength=self.algebra.n_blocks)

    def is_nondegenerate(self) -> bool:
        return bool(np.all(self.multiplicities >= 1))

    @property
    def basis_blocks(self) -> np.ndarray:
        """Block index of every basis vector."""
        return np.repeat(self.copy_blocks, self.copy_dims)

    @property
    def basis_copies(self) -> np.ndarray:
        return np.repeat(np.arange(self.copy_blocks.size), self.copy_dims)

    @property
    def grading(self) -> np.ndarray:
        """Grading sign of every basis vector."""
        if not self.graded:
            raise GradingError("representation is not graded")
        return np.repeat(self.copy_signs, self.copy_dims)

    def gamma(self) -> np.ndarray:
        return np.diag(self.grading.astype(float))

    def subrep(self, copies) -> "AlgebraRep":
        """Restriction to the listed copies, in the given order."""
        copies = np.asarray(copies, dtype=int)
        cs = None if self.copy_signs is None else self.copy_signs[copies]
        return AlgebraRep(self.algebra, self.copy_blocks[copies], cs)

    def direct_sum(self, other: "AlgebraRep") -> "AlgebraRep":
        if self.algebra != other.algebra:
            raise AlgebraMismatchError("representations of different algebras")
        if self.graded != other.graded:
            raise GradingError("cannot sum a graded and an ungraded representation")
        cs = None
        if self.graded:
            cs = np.concatenate([self.copy_signs, other.copy_signs])
        return AlgebraRep(self.algebra,
                          np.concatenate([self.copy_blocks, other.copy_blocks]), cs)

    def same_layout(self, other: "AlgebraRep") -> bool:
        if self.algebra != other.algebra:
            return False
        if not np.array_equal(self.copy_blocks, other.copy_blocks):
            return False
        if self.graded != other.graded:
            return False
        return not self.graded or np.array_equal(self.copy_signs, other.copy_signs)


def rep_apply(rep: AlgebraRep, phi: AlgebraElement) -> np.ndarray:
    """The operator ``rho(phi)`` as a dense matrix."""
    if phi.algebra != rep.algebra:
        raise ShapeMismatchError("element and representation live on different algebras")
    if rep.dim == 0:
        return np.zeros((0, 0), dtype=complex)
    if rep.algebra.is_commutative:
        vals = np.array([b[0, 0] for b in phi.blocks])
        return np.diag(vals[rep.copy_blocks])
    return block_diag(*[phi.blocks[i] for i in rep.copy_blocks]).astype(complex)


def ideal_mask(J: Ideal, rep: AlgebraRep) -> np.ndarray:
    """Boolean mask of the basis vectors spanning ``J H``."""
    J.validate(rep.algebra)
    return np.isin(rep.basis_blocks, sorted(J.indices))


def ideal_projection(J: Ideal, rep: AlgebraRep) -> np.ndarray:
    """Orthogonal projection onto ``J H`` (a diagonal 0/1 matrix)."""
    return np.diag(ideal_mask(J, rep).astype(float))
