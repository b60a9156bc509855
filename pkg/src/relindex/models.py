"""Concrete module pairs: lattice domain walls and exact toys.

Lattice conventions
-------------------
Sites sit at ``x_j = -L + (j + 1/2) h`` with ``h = 2L/N``.  The basis is
site-major with the spinor index inside, so ``gamma = 1 (x) sigma3``.  The
operator is

    D = (-i grad) (x) sigma1 - W (x) sigma2,    W = diag(m) - (r h / 2) lap

with central differences and Dirichlet ends.  Its odd part is
``D+ = -i (grad + W)``, and a mass going from negative to positive binds a
zero mode of ``D+``, which counts as ``+1``.

A finite square ``D+`` always has index zero, so the two spinor components
are not kept symmetrically at the ends: where the boundary mass is negative
the component that the wall oracle would pair with an edge mode is dropped
(the ``-`` component at the left end, the ``+`` component at the right end).
Then ``dim H+ - dim H- = (sgn m(L) - sgn m(-L)) / 2`` and the spectrum has
no edge modes.  ``boundary="dirichlet"`` keeps everything, for comparison.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .algebra import AlgebraRep, BlockAlgebra, Ideal, ideal_cover_check
from .errors import ConfigError, TooCoarseError
from .fredholm import (
    FredholmModule,
    agreement_defect,
    CompactnessProfile,
)
from .index import CUTOFF_FACTOR, MIN_GAP_RATIO
from .surgery import Blocks, SurgeryPair

MIN_SITES = 16
MAX_SITES = 2000
BOUNDARY_MASS = 0.5
BOUNDARY_FRACTION = 0.1
WALL_FRACTION = 0.75

_S1 = np.array([[0, 1], [1, 0]], dtype=complex)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)


@dataclass(frozen=True)
class MassProfile:
    """Piecewise-constant mass: ``values[i]`` on ``[breakpoints[i-1], breakpoints[i])``."""

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if len(vals) != len(bp) + 1:
            raise ConfigError("a mass profile needs one more value than breakpoints")
        if any(b1 >= b2 for b1, b2 in zip(bp, bp[1:])):
            raise ConfigError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    def __call__(self, x) -> np.ndarray:
        idx = np.searchsorted(np.asarray(self.breakpoints), np.asarray(x, dtype=float),
                              side="right")
        return np.asarray(self.values)[idx]

    @classmethod
    def constant(cls, value: float) -> "MassProfile":
        return cls((), (value,))

    @classmethod
    def walls(cls, signs: Sequence[int], half_length: float,
              wall_fraction: float = WALL_FRACTION, magnitude: float = 1.0) -> "MassProfile":
        """Three segments with walls at ``+-wall_fraction * L``."""
        if len(signs) != 3 or any(s not in (-1, 1) for s in signs):
            raise ConfigError("signs must be three entries of +-1")
        w = wall_fraction * half_length
        return cls((-w, w), tuple(magnitude * s for s in signs))

    def to_dict(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "MassProfile":
        return cls(tuple(d["breakpoints"]), tuple(d["values"]))


@dataclass(frozen=True)
class DomainWallConfig:
    sites: int
    mass: MassProfile
    mass_tilde: MassProfile
    half_length: float = 10.0
    wilson_r: float = 1.0
    middle: tuple[float, float] | None = None
    min_gap_ratio: float = MIN_GAP_RATIO
    cutoff_factor: float = CUTOFF_FACTOR
    boundary: str = "chiral"

    def __post_init__(self):
        if self.middle is None:
            L = self.half_length
            object.__setattr__(self, "middle", (-L / 2, L / 2))
        else:
            object.__setattr__(self, "middle", tuple(float(v) for v in self.middle))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.sites

    def positions(self) -> np.ndarray:
        return -self.half_length + (np.arange(self.sites) + 0.5) * self.spacing

    def profile(self, which: str) -> MassProfile:
        if which == "M":
            return self.mass
        if which == "Mtilde":
            return self.mass_tilde
        raise ValueError(f"which must be 'M' or 'Mtilde', got {which!r}")

    def site_masses(self, which: str) -> np.ndarray:
        return self.profile(which)(self.positions())

    def middle_mask(self) -> np.ndarray:
        x = self.positions()
        xl, xr = self.middle
        return (x >= xl) & (x <= xr)

    def validate(self) -> None:
        N, L = self.sites, self.half_length
        if not isinstance(N, (int, np.integer)) or N % 2:
            raise ConfigError(f"sites must be an even integer, got {N!r}")
        if N > MAX_SITES:
            raise ConfigError(f"sites capped at {MAX_SITES} (dense eigensolves)")
        if L <= 0:
            raise ConfigError("half_length must be positive")
        if self.wilson_r < 0:
            raise ConfigError("wilson_r must be >= 0")
        if self.boundary not in ("chiral", "dirichlet"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        for prof in (self.mass, self.mass_tilde):
            if any(abs(b) > L for b in prof.breakpoints):
                raise ConfigError("breakpoints must lie in [-L, L]")
        xl, xr = self.middle
        if not -L <= xl < xr <= L:
            raise ConfigError(f"middle {self.middle} is not a subinterval of [-L, L]")
        x = self.positions()
        # compare on the sites and on every constant piece inside the middle
        cuts = sorted({xl, xr, *[b for b in (*self.mass.breakpoints,
                                            *self.mass_tilde.breakpoints) if xl < b < xr]})
        probes = np.concatenate([x[self.middle_mask()], cuts,
                                 (np.asarray(cuts[:-1]) + np.asarray(cuts[1:])) / 2])
        if not np.array_equal(self.mass(probes), self.mass_tilde(probes)):
            raise ConfigError("mass profiles differ on the middle region")
        if N >= MIN_SITES:
            n_edge = max(1, int(np.ceil(BOUNDARY_FRACTION * N)))
            edge = np.r_[np.arange(n_edge), np.arange(N - n_edge, N)]
            for name in ("M", "Mtilde"):
                if np.any(np.abs(self.site_masses(name)[edge]) < BOUNDARY_MASS):
                    raise ConfigError(
                        f"|mass| must be >= {BOUNDARY_MASS} near the endpoints ({name})")

    def with_sites(self, sites: int, keep_spacing: bool = False) -> "DomainWallConfig":
        """Same profiles at a new resolution.

        With ``keep_spacing`` the interval grows with ``sites`` and every
        length (breakpoints, middle) is scaled with it.
        """
        if not keep_spacing:
            return replace(self, sites=sites)
        s = sites / self.sites

        def scaled(p: MassProfile) -> MassProfile:
            return MassProfile(tuple(b * s for b in p.breakpoints), p.values)

        return replace(self, sites=sites, half_length=self.half_length * s,
                       mass=scaled(self.mass), mass_tilde=scaled(self.mass_tilde),
                       middle=tuple(v * s for v in self.middle))

    def to_dict(self) -> dict:
        return {
            "half_length": self.half_length,
            "sites": self.sites,
            "mass": self.mass.to_dict(),
            "mass_tilde": self.mass_tilde.to_dict(),
            "wilson_r": self.wilson_r,
            "middle": list(self.middle),
            "thresholds": {"min_gap_ratio": self.min_gap_ratio,
                           "cutoff_factor": self.cutoff_factor},
            "boundary": self.boundary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DomainWallConfig":
        th = d.get("thresholds", {})
        return cls(
            sites=d["sites"],
            mass=MassProfile.from_dict(d["mass"]),
            mass_tilde=MassProfile.from_dict(d["mass_tilde"]),
            half_length=float(d.get("half_length", 10.0)),
            wilson_r=float(d.get("wilson_r", 1.0)),
            middle=tuple(d["middle"]) if "middle" in d else None,
            min_gap_ratio=float(th.get("min_gap_ratio", MIN_GAP_RATIO)),
            cutoff_factor=float(th.get("cutoff_factor", CUTOFF_FACTOR)),
            boundary=d.get("boundary", "chiral"),
        )

    @classmethod
    def walls(cls, signs: Sequence[int], signs_tilde: Sequence[int], sites: int = 400,
              half_length: float = 10.0, **kw) -> "DomainWallConfig":
        return cls(sites=sites,
                   mass=MassProfile.walls(signs, half_length),
                   mass_tilde=MassProfile.walls(signs_tilde, half_length),
                   half_length=half_length, **kw)


def _kept_components(m: np.ndarray, boundary: str) -> np.ndarray:
    keep = np.ones(2 * m.size, dtype=bool)
    if boundary == "chiral":
        if m[0] < 0:
            keep[1] = False
        if m[-1] < 0:
            keep[2 * m.size - 2] = False
    return keep


def build_wilson_dirac(cfg: DomainWallConfig, which: str = "M") -> tuple[np.ndarray, AlgebraRep]:
    """The lattice operator and the representation it lives on.

    Each kept spinor component is one graded copy of its site.
    """
    cfg.validate()
    N = cfg.sites
    if N < MIN_SITES:
        raise TooCoarseError(f"N={N} is below the minimum of {MIN_SITES} sites")
    h = cfg.spacing
    m = cfg.site_masses(which)
    off = np.ones(N - 1)
    grad = (np.diag(off, 1) - np.diag(off, -1)) / (2 * h)
    lap = (np.diag(off, 1) + np.diag(off, -1) - 2 * np.eye(N)) / h**2
    W = np.diag(m) - (cfg.wilson_r * h / 2) * lap
    D = np.kron(-1j * grad, _S1) - np.kron(W, _S2)
    keep = _kept_components(m, cfg.boundary)
    D = D[np.ix_(keep, keep)]
    sites = np.repeat(np.arange(N), 2)[keep]
    signs = np.tile([1, -1], N)[keep]
    return D, AlgebraRep(BlockAlgebra.commutative(N), sites, signs)


def module_from_dirac(D: np.ndarray, rep: AlgebraRep) -> FredholmModule:
    """Bounded transform ``F = D (1 + D^2)^(-1/2)``.

    Computed from the SVD of the odd part, so ``F`` is exactly odd and
    exactly Hermitian.
    """
    g = rep.grading
    plus, minus = g > 0, g < 0
    Dp = D[np.ix_(minus, plus)]
    U, s, Vh = sla.svd(Dp, full_matrices=False, lapack_driver="gesvd")
    Fp = (U * (s / np.sqrt(1.0 + s**2))) @ Vh
    F = np.zeros(D.shape, dtype=complex)
    F[np.ix_(minus, plus)] = Fp
    F[np.ix_(plus, minus)] = Fp.conj().T
    return FredholmModule(rep, F, graded=True)


def wall_index(m: np.ndarray) -> int:
    """Wall-counting heuristic ``(sgn m(L) - sgn m(-L)) / 2``."""
    return int((np.sign(m[-1]) - np.sign(m[0])) // 2)


def kernel_count(D: np.ndarray, rep: AlgebraRep, tol: float = 1e-3) -> tuple[int, int]:
    """Independent oracle: ``dim ker D+`` and ``dim ker D+*`` by eigensolve.

    Uses ``D^2`` restricted to each chirality, which does not go through
    the bounded transform or the gap-splitting logic.
    """
    g = rep.grading
    D2 = D @ D
    out = []
    for mask in (g > 0, g < 0):
        ev = sla.eigvalsh(D2[np.ix_(mask, mask)])
        out.append(int(np.sum(ev < tol**2)))
    return out[0], out[1]


@dataclass(eq=False)
class ModelBundle:
    pair: SurgeryPair
    D: np.ndarray | None
    Dt: np.ndarray | None
    config: DomainWallConfig | None = None
    oracle: dict = field(default_factory=dict)
    agreement: CompactnessProfile | None = None

    @property
    def x(self) -> FredholmModule:
        return self.pair.x

    @property
    def xt(self) -> FredholmModule:
        return self.pair.xt


def site_ideals(cfg: DomainWallConfig) -> tuple[Ideal, Ideal]:
    """``J1`` = sites left of ``x_r``, ``J2`` = sites right of ``x_l``."""
    x = cfg.positions()
    xl, xr = cfg.middle
    alg = BlockAlgebra.commutative(cfg.sites)
    J1 = Ideal.of(alg, np.flatnonzero(x <= xr))
    J2 = Ideal.of(alg, np.flatnonzero(x >= xl))
    return J1, J2


def build_agreeing_pair(cfg: DomainWallConfig) -> ModelBundle:
    D, rep = build_wilson_dirac(cfg, "M")
    Dt, rep_t = build_wilson_dirac(cfg, "Mtilde")
    x, xt = module_from_dirac(D, rep), module_from_dirac(Dt, rep_t)
    J1, J2 = site_ideals(cfg)
    if not ideal_cover_check(J1, J2, rep.algebra):
        raise ConfigError("middle region leaves sites uncovered")
    pair = SurgeryPair(x, xt, J1, J2)
    J = Ideal(J1.indices & J2.indices)
    agreement = agreement_defect(x, xt, J)
    m, mt = cfg.site_masses("M"), cfg.site_masses("Mtilde")
    oracle = {
        "wall": (wall_index(m), wall_index(mt)),
        "walls": (wall_kernels(m), wall_kernels(mt)),
        "kernels": (kernel_count(D, rep), kernel_count(Dt, rep_t)),
    }
    return ModelBundle(pair, D, Dt, cfg, oracle, agreement)


def _signed_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    # unitary with entries in {0, +-1, +-i}: products are exact in floating point
    phases = np.array([1, -1, 1j, -1j])[rng.integers(0, 4, n)]
    return np.eye(n, dtype=complex)[rng.permutation(n)] * phases[None, :]


def _odd_involution(n: int, rng: np.random.Generator) -> np.ndarray:
    """``[[0, u*], [u, 0]]`` on ``C^(n/2) + C^(n/2)`` (plus block first)."""
    k = n // 2
    u = _signed_permutation(k, rng)
    out = np.zeros((n, n), dtype=complex)
    out[k:, :k] = u
    out[:k, k:] = u.conj().T
    return out


def toy_exact_pair(dims: Sequence[int] = (2, 2, 2, 2, 2), seed: int = 0) -> ModelBundle:
    """Exact modules over functions on three points ``{left, middle, right}``.

    ``dims = (n1, n0, n2, nt1, nt2)``.  Exact locality forces every block to
    act within one point, so ``b = d = 0`` and each of ``a, c, e`` is an odd
    involution; ``c`` is shared between the two modules.
    """
    dims = tuple(int(n) for n in dims)
    if len(dims) != 5:
        raise ValueError("dims must be (n1, n0, n2, nt1, nt2)")
    if any(n <= 0 or n % 2 for n in dims):
        raise ValueError(f"every summand needs a positive even dimension, got {dims}")
    rng = np.random.default_rng(seed)
    n1, n0, n2, nt1, nt2 = dims
    alg = BlockAlgebra.commutative(3)
    c = _odd_involution(n0, rng)

    def module(na, ne):
        F = sla.block_diag(_odd_involution(na, rng), c, _odd_involution(ne, rng))
        blocks = np.repeat([0, 1, 2], [na, n0, ne])
        signs = np.concatenate([np.repeat([1, -1], n // 2) for n in (na, n0, ne)])
        return FredholmModule(AlgebraRep(alg, blocks, signs), F, graded=True)

    x, xt = module(n1, n2), module(nt1, nt2)
    J1, J2 = Ideal.of(alg, [0, 1]), Ideal.of(alg, [1, 2])
    pair = SurgeryPair(x, xt, J1, J2)
    agreement = agreement_defect(x, xt, Ideal.of(alg, [1]))
    return ModelBundle(pair, None, None, None, {"index": (0, 0)}, agreement)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary (QR of a complex Ginibre matrix)."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))[None, :]


def _signs(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice([-1.0, 1.0], size=n)


def exact_block_pair(dims: Sequence[int], dims_t: Sequence[int],
                     rng: np.random.Generator) -> tuple[Blocks, Blocks]:
    """Block tuples satisfying every rewrite axiom up to rounding.

    Each module is a corner-free Hermitian involution built from 2x2
    reflections coupling ``H1``-``H0`` and ``H0``-``H2`` basis vectors, then
    rotated by block-diagonal unitaries.  Both modules share the coupling
    angles and the ``H0`` rotation, so ``c`` agrees and ``bt* bt = b* b``,
    ``dt dt* = d d*`` hold as well.
    """
    n1, n0, n2 = (int(v) for v in dims)
    m1, m0, m2 = (int(v) for v in dims_t)
    if m0 != n0:
        raise ValueError("the middle dimensions must agree")
    p1 = min(n1, m1, (n0 + 1) // 2)
    p2 = min(n2, m2, n0 - p1)
    th = rng.uniform(0.2, np.pi / 2 - 0.2, p1)
    ph = rng.uniform(0.2, np.pi / 2 - 0.2, p2)
    c = np.diag(np.concatenate([-np.cos(th), np.cos(ph), _signs(n0 - p1 - p2, rng)]))
    W0 = random_unitary(n0, rng)
    c = W0 @ c @ W0.conj().T

    def side(k1, k2):
        a = np.diag(np.concatenate([np.cos(th), _signs(k1 - p1, rng)]))
        b = np.zeros((k1, n0))
        b[np.arange(p1), np.arange(p1)] = np.sin(th)
        d = np.zeros((n0, k2))
        d[p1 + np.arange(p2), np.arange(p2)] = np.sin(ph)
        e = np.diag(np.concatenate([-np.cos(ph), _signs(k2 - p2, rng)]))
        W1, W2 = random_unitary(k1, rng), random_unitary(k2, rng)
        return Blocks(W1 @ a @ W1.conj().T, W1 @ b @ W0.conj().T, c,
                      W0 @ d @ W2.conj().T, W2 @ e @ W2.conj().T)

    return side(n1, n2), side(m1, m2)


def perturb_blocks(B: Blocks, delta: float, rng: np.random.Generator) -> Blocks:
    """Add a corner-free Hermitian perturbation of norm ``delta``."""
    n1, n0, n2 = B.dims
    n = n1 + n0 + n2
    E = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    E = E + E.conj().T
    E[:n1, n1 + n0:] = 0
    E[n1 + n0:, :n1] = 0
    E *= delta / np.linalg.norm(E, 2)
    return split_blocks(B.assemble() + E, B.dims)


def split_blocks(G: np.ndarray, dims: Sequence[int]) -> Blocks:
    n1, n0, n2 = dims
    s1, s0 = slice(0, n1), slice(n1, n1 + n0)
    s2 = slice(n1 + n0, n1 + n0 + n2)
    return Blocks(G[s1, s1], G[s1, s0], G[s0, s0], G[s0, s2], G[s2, s2])


def boundary_patterns(middle_sign: int = 1) -> list[tuple[tuple[int, int, int], tuple[int, int, int]]]:
    """All ``(l, mid, r) x (lt, mid, rt)`` sign choices with a shared middle."""
    out = []
    for l, r, lt, rt in itertools.product((-1, 1), repeat=4):
        out.append(((l, middle_sign, r), (lt, middle_sign, rt)))
    return out


def pattern_label(signs, signs_tilde) -> str:
    fmt = lambda s: "".join("+" if v > 0 else "-" for v in s)
    return f"{fmt(signs)}/{fmt(signs_tilde)}"


def wall_kernels(m: np.ndarray) -> tuple[int, int]:
    """Walls going up (``-`` to ``+``) and down, left to right."""
    s = np.sign(m[m != 0])
    up = int(np.sum((s[:-1] < 0) & (s[1:] > 0)))
    down = int(np.sum((s[:-1] > 0) & (s[1:] < 0)))
    return up, down


def bulk_gap_floor(cfg: DomainWallConfig) -> float:
    """Half the continuum gap of ``F`` for the smallest mass present."""
    mu = min(np.min(np.abs(cfg.site_masses(w))) for w in ("M", "Mtilde"))
    return 0.5 * mu / np.sqrt(1.0 + mu**2)
