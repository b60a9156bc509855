"""Graded index of finite-dimensional Fredholm modules.

For a graded module the index is ``dim ker F+ - dim ker F+*`` where
``F+ : H+ -> H-`` is the odd part of ``F``.  Numerically the kernel is
whatever falls below a clean spectral gap in the singular values of ``F+``;
if the small singular values do not separate from the bulk by a factor of
at least ``min_gap_ratio`` the computation refuses to answer.

Orientation: the index counts ``H+`` kernel positively.  With the
Wilson-Dirac models of :mod:`relindex.models` a mass profile going from
negative to positive (left to right) carries index ``+1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import AmbiguousKernelError, GradingError, NotOddError
from .fredholm import EXACT_TOL, FredholmModule, direct_sum, opnorm
from .surgery import (
    CChoice,
    SurgeryPair,
    diamond,
    homotopy_operator,
    t_grid,
)

MIN_GAP_RATIO = 10.0
CUTOFF_FACTOR = 1e-3


@dataclass(frozen=True)
class IndexResult:
    index: int
    kernel_plus: int
    kernel_minus: int
    spectral_gap: float
    threshold_used: float
    smallest_bulk: float = float("inf")
    largest_kernel: float = 0.0

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "kernel_plus": self.kernel_plus,
            "kernel_minus": self.kernel_minus,
            "spectral_gap": _finite(self.spectral_gap),
            "threshold_used": self.threshold_used,
            "smallest_bulk": _finite(self.smallest_bulk),
            "largest_kernel": self.largest_kernel,
        }


def _finite(v: float):
    return v if np.isfinite(v) else "inf"


def odd_part(x: FredholmModule) -> np.ndarray:
    """The block ``F+ : H+ -> H-``."""
    if not x.graded:
        raise GradingError("the graded index needs a graded module")
    g = x.rep.grading
    return x.F[np.ix_(g < 0, g > 0)]


def split_kernel(sv: np.ndarray, min_gap_ratio: float = MIN_GAP_RATIO,
                 cutoff_factor: float = CUTOFF_FACTOR) -> tuple[int, float, float]:
    """Number of kernel singular values, the gap ratio, and the cutoff.

    Only values below ``cutoff_factor * median`` may be called kernel.
    Among the admissible split points the one with the largest ratio
    between consecutive singular values wins.  Values at round-off level
    of the largest one (the ``matrix_rank`` tolerance) are exact zeros and
    always admissible, so a spectrum that is mostly kernel still splits.
    """
    sv = np.sort(np.asarray(sv, dtype=float))
    if sv.size == 0:
        return 0, float("inf"), 0.0
    noise = sv[-1] * sv.size * np.finfo(float).eps
    sv = np.where(sv <= noise, 0.0, sv)
    cutoff = max(cutoff_factor * float(np.median(sv)), noise)
    n_small = int(np.count_nonzero((sv < cutoff) | (sv == 0)))
    if n_small == 0:
        return 0, float("inf"), cutoff
    best_k, best_ratio = 0, -1.0
    with np.errstate(divide="ignore"):
        for k in range(1, n_small + 1):
            if k == sv.size:
                ratio = float("inf")
            elif sv[k - 1] == 0:
                # two exact zeros are not separated by a gap
                ratio = float("inf") if sv[k] > 0 else 1.0
            else:
                ratio = sv[k] / sv[k - 1]
            if ratio > best_ratio:
                best_k, best_ratio = k, ratio
    if best_ratio < min_gap_ratio:
        raise AmbiguousKernelError(
            f"no spectral gap: best ratio {best_ratio:.3g} < {min_gap_ratio} "
            f"with {n_small} singular values below cutoff {cutoff:.3g}")
    return best_k, best_ratio, cutoff


def graded_index(x: FredholmModule, min_gap_ratio: float = MIN_GAP_RATIO,
                 cutoff_factor: float = CUTOFF_FACTOR) -> IndexResult:
    Fp = odd_part(x)
    p, q = Fp.shape  # p = dim H-, q = dim H+
    sv = np.sort(sla.svdvals(Fp)) if Fp.size else np.zeros(0)
    k, gap, cutoff = split_kernel(sv, min_gap_ratio, cutoff_factor)
    rank = sv.size - k
    return IndexResult(
        index=q - p,
        kernel_plus=q - rank,
        kernel_minus=p - rank,
        spectral_gap=gap,
        threshold_used=cutoff,
        smallest_bulk=float(sv[k]) if k < sv.size else float("inf"),
        largest_kernel=float(sv[k - 1]) if k > 0 else 0.0,
    )


def mckean_singer(D: np.ndarray, gamma: np.ndarray, t):
    """Supertrace ``Tr(gamma exp(-t D^2))`` of a Hermitian odd operator.

    ``t`` may be a sequence; the eigendecomposition is then shared.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts <= 0):
        raise ValueError("t must be positive")
    D = np.asarray(D)
    gamma = np.asarray(gamma)
    if gamma.ndim == 2 and np.array_equal(gamma, np.diag(np.diag(gamma))):
        gamma = np.diag(gamma)
    if gamma.ndim == 1:
        apply = lambda X: gamma[:, None] * X
        anti = apply(D) + D * gamma[None, :]
    else:
        apply = lambda X: gamma @ X
        anti = gamma @ D + D @ gamma
    if opnorm(anti) > EXACT_TOL:
        raise NotOddError("D does not anticommute with the grading")
    w, V = sla.eigh(D)
    GV = apply(V)
    chir = np.real(np.sum(V.conj() * GV, axis=0))
    out = np.exp(-np.outer(ts, w**2)) @ chir
    return float(out[0]) if np.ndim(t) == 0 else out


def homotopy_index_trace(p: SurgeryPair, grid=None, **kw) -> list[IndexResult]:
    grid = t_grid() if grid is None else grid
    out = []
    for t in grid:
        sample = homotopy_operator(p, float(t), with_report=False)
        try:
            out.append(graded_index(sample.module, **kw))
        except AmbiguousKernelError as exc:
            raise AmbiguousKernelError(f"at t={t:.6g}: {exc}", operator=f"F_t(t={t:.6g})")
    return out


@dataclass(frozen=True, eq=False)
class RelativeIndexReport:
    x: IndexResult
    xt: IndexResult
    diamond: IndexResult
    mirror: IndexResult
    homotopy_trace: list[IndexResult] = field(default_factory=list)
    grid: list[float] = field(default_factory=list)

    @property
    def residual(self) -> int:
        return (self.diamond.index - self.x.index) - (self.xt.index - self.mirror.index)

    @property
    def indices(self) -> tuple[int, int, int, int]:
        return self.x.index, self.xt.index, self.diamond.index, self.mirror.index

    def trace_constant(self) -> bool:
        vals = {r.index for r in self.homotopy_trace}
        return len(vals) <= 1

    def to_dict(self) -> dict:
        return {
            "x": self.x.to_dict(),
            "xt": self.xt.to_dict(),
            "diamond": self.diamond.to_dict(),
            "mirror": self.mirror.to_dict(),
            "residual": self.residual,
            "homotopy_trace": [dict(t=t, **r.to_dict())
                               for t, r in zip(self.grid, self.homotopy_trace)],
        }


def _named_index(module, name, **kw) -> IndexResult:
    try:
        return graded_index(module, **kw)
    except AmbiguousKernelError as exc:
        raise AmbiguousKernelError(f"{name}: {exc}", operator=name)


def relative_index_experiment(p: SurgeryPair, grid=None, trace: bool = True,
                              c_choice=CChoice.FROM_X, **kw) -> RelativeIndexReport:
    """All four indices of the pasting identity plus the homotopy trace.

    The mirror is built from the swapped pair with the same ``c_choice``.
    """
    c_choice = CChoice(c_choice)
    grid = t_grid() if grid is None else np.asarray(grid)
    rx = _named_index(p.x, "x", **kw)
    rxt = _named_index(p.xt, "xt", **kw)
    rd = _named_index(diamond(p, c_choice), "x<>xt", **kw)
    rm = _named_index(diamond(p.swapped(), c_choice), "xt<>x", **kw)
    tr = homotopy_index_trace(p, grid, **kw) if trace else []
    return RelativeIndexReport(rx, rxt, rd, rm, tr, [float(t) for t in grid] if trace else [])


def index_of_sum(x: FredholmModule, y: FredholmModule, **kw) -> IndexResult:
    return graded_index(direct_sum(x, y), **kw)
