import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import bounded_transform_eigh
from relindex.algebra import AlgebraElement, AlgebraRep, BlockAlgebra, Ideal, rep_apply
from relindex.errors import (
    GradingError,
    IdentificationError,
    InvalidIntertwinerError,
    NoDecompositionError,
    NondegeneracyError,
    ShapeMismatchError,
)
from relindex.fredholm import (
    CompactnessProfile,
    FredholmModule,
    agreement_defect,
    block_decompose,
    central_bump,
    commutator_norm,
    defect_report,
    direct_sum,
    is_degenerate,
    opnorm,
    singular_values,
    square_defect,
    standard_test_elements,
)

from conftest import walls_config
from relindex.models import build_agreeing_pair

ONE = BlockAlgebra((1,))
SWAP = np.array([[0, 1], [1, 0]], dtype=complex)


def swap_module():
    return FredholmModule(AlgebraRep(ONE, [0, 0], [1, -1]), SWAP, graded=True)


def test_swap_module_is_degenerate():
    x = swap_module()
    rep = defect_report(x, [("identity", AlgebraElement.identity(ONE))])
    assert rep.selfadjoint_defect == 0
    assert rep.square_profile.norm == 0
    assert rep.odd_defect == 0
    assert all(v == 0 for _, v in rep.locality_defects)
    assert is_degenerate(x, tol=0.0)


def test_zero_operator_square_profile():
    x = FredholmModule(AlgebraRep(ONE, [0, 0, 0]), np.zeros((3, 3)))
    prof = defect_report(x).square_profile
    assert np.array_equal(prof.values, np.ones(3))
    assert not is_degenerate(x, tol=0.5)


def test_is_degenerate_rejects_negative_tol():
    with pytest.raises(ValueError):
        is_degenerate(swap_module(), tol=-1)


def test_opnorm_routes_agree(rng):
    # dense, Hermitian Lanczos and general Lanczos paths against numpy
    for n in (30, 450):
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H = X + X.conj().T
        for M in (X, H, 1j * H):
            assert opnorm(M) == pytest.approx(np.linalg.norm(M, 2), rel=1e-12)
    R = rng.standard_normal((500, 420))
    assert opnorm(R) == pytest.approx(np.linalg.norm(R, 2), rel=1e-12)


def test_singular_values_zero_and_empty():
    assert singular_values(np.zeros((0, 0))).size == 0
    assert np.array_equal(singular_values(np.zeros((3, 2))), np.zeros(2))


def test_commutator_diagonal_fast_path(rng):
    F = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40))
    R = np.diag(rng.standard_normal(40))
    assert commutator_norm(F, R) == pytest.approx(np.linalg.norm(F @ R - R @ F, 2), rel=1e-12)
    R[0, 1] = 1.0
    assert commutator_norm(F, R) == pytest.approx(np.linalg.norm(F @ R - R @ F, 2), rel=1e-12)


def test_square_defect_is_exactly_hermitian(rng):
    X = rng.standard_normal((50, 50))
    F = (X + X.T) / 2
    S = square_defect(F)
    assert np.array_equal(S, S.conj().T)


def test_profile_sigma_and_serialization():
    p = CompactnessProfile([0.1, -3.0, 2.0])
    assert p.norm == 3.0
    assert p.sigma(2) == 2.0 and p.sigma(9) == 0.0
    with pytest.raises(ValueError):
        p.sigma(0)
    d = p.to_dict(2)
    assert d == {"norm": 3.0, "size": 3, "singular_values": [3.0, 2.0]}


def test_module_shape_and_grading_errors():
    with pytest.raises(ShapeMismatchError):
        FredholmModule(AlgebraRep(ONE, [0, 0]), np.eye(3))
    with pytest.raises(GradingError):
        FredholmModule(AlgebraRep(ONE, [0, 0]), np.eye(2), graded=True)


def random_module(rng, alg, mult):
    rep = AlgebraRep.standard(alg, mult, [list(rng.choice([-1, 1], m)) for m in mult])
    n = rep.dim
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return FredholmModule(rep, (X + X.conj().T) / 4)


def test_direct_sum_dims_and_defects(rng):
    alg = BlockAlgebra((1, 2, 1))
    x, y = random_module(rng, alg, [1, 2, 1]), random_module(rng, alg, [2, 1, 1])
    s = direct_sum(x, y)
    assert s.dim == x.dim + y.dim
    tests = standard_test_elements(alg)
    rs, rx, ry = (defect_report(m, tests) for m in (s, x, y))
    assert rs.square_profile.norm <= max(rx.square_profile.norm, ry.square_profile.norm) + 1e-12
    for (name, v), (_, vx), (_, vy) in zip(rs.locality_defects, rx.locality_defects,
                                           ry.locality_defects):
        assert v <= max(vx, vy) + 1e-12, name


def test_standard_test_elements_shape():
    alg = BlockAlgebra.commutative(40)
    names = [n for n, _ in standard_test_elements(alg)]
    assert names == ["identity"] + [f"bump{i}" for i in range(5)] + [f"random{i}" for i in range(3)]
    bump = central_bump(alg)
    vals = np.array([b[0, 0] for b in bump.blocks]).real
    assert 0.95 < vals.max() <= 1.0
    assert np.allclose(vals, vals[::-1])


def banded_module(n, w, rng):
    alg = BlockAlgebra.commutative(n)
    X = rng.standard_normal((n, n))
    X = (X + X.T) / 2
    i, j = np.indices((n, n))
    X[np.abs(i - j) > w] = 0
    return FredholmModule(AlgebraRep(alg, np.arange(n)), X)


def test_banded_corner_vanishes(rng):
    x = banded_module(30, 3, rng)
    alg = x.algebra
    bd = block_decompose(x, Ideal.of(alg, range(0, 18)), Ideal.of(alg, range(12, 30)))
    assert bd.corner_profile.norm == 0
    assert bd.dims == (12, 6, 12)


def test_full_ideals_give_middle_only(rng):
    x = banded_module(10, 2, rng)
    full = Ideal.full(x.algebra)
    bd = block_decompose(x, full, full)
    assert bd.dims == (0, 10, 0)
    assert np.array_equal(bd.c, x.F)


def test_block_decompose_errors(rng):
    x = banded_module(10, 2, rng)
    with pytest.raises(NoDecompositionError):
        block_decompose(x, Ideal({0, 1}), Ideal({5, 6}))
    alg = BlockAlgebra((1, 1))
    degenerate = FredholmModule(AlgebraRep(alg, [0]), np.zeros((1, 1)))
    with pytest.raises(NondegeneracyError):
        block_decompose(degenerate, Ideal.full(alg), Ideal.full(alg))


def test_block_reassembly_is_exact(rng):
    x = banded_module(24, 5, rng)
    bd = block_decompose(x, Ideal(range(0, 14)), Ideal(range(10, 24)))
    P = bd.order
    G = x.F[np.ix_(P, P)]
    n1, n0, _ = bd.dims
    assert np.array_equal(G[:n1, :n1], bd.a)
    assert np.array_equal(G[:n1, n1:n1 + n0], bd.b)
    assert np.array_equal(G[n1:n1 + n0, n1 + n0:], bd.d)
    assert np.array_equal(G[:n1, n1 + n0:], bd.corner)


def test_agreement_self_is_zero(pm200):
    x = pm200.x
    J = Ideal(pm200.pair.J1.indices & pm200.pair.J2.indices)
    assert agreement_defect(x, x, J).norm == 0
    T = np.eye(int(np.sum(np.isin(x.rep.basis_blocks, list(J.indices)))))
    assert agreement_defect(x, x, J, T).norm == 0


def test_agreement_detects_different_middle():
    # the middle regions carry opposite masses: sigma_1 stays of order one
    bundle_a = build_agreeing_pair(walls_config((-1, 1, 1), (-1, 1, 1), sites=100))
    bundle_b = build_agreeing_pair(walls_config((-1, -1, 1), (-1, -1, 1), sites=100))
    J = Ideal(bundle_a.pair.J1.indices & bundle_a.pair.J2.indices)
    prof = agreement_defect(bundle_a.x, bundle_b.x, J)
    assert prof.sigma(1) > 0.5


def test_agreement_intertwiner_errors(pm200):
    x = pm200.x
    J = Ideal(pm200.pair.J1.indices & pm200.pair.J2.indices)
    with pytest.raises(InvalidIntertwinerError):
        agreement_defect(x, x, J, np.eye(3))
    n0 = int(np.sum(np.isin(x.rep.basis_blocks, list(J.indices))))
    with pytest.raises(InvalidIntertwinerError):
        agreement_defect(x, x, J, np.roll(np.eye(n0), 2, axis=0))


def test_agreement_layout_mismatch():
    alg = BlockAlgebra((1, 1, 1))
    x = FredholmModule(AlgebraRep(alg, [0, 1, 2]), np.zeros((3, 3)))
    y = FredholmModule(AlgebraRep(alg, [0, 1, 1, 2]), np.zeros((4, 4)))
    with pytest.raises(IdentificationError):
        agreement_defect(x, y, Ideal({1}))


def test_model_is_not_degenerate(pm200):
    assert not is_degenerate(pm200.x, tol=1e-12)


def test_model_square_profile_matches_spectrum(pm200):
    # F^2 - 1 = -(1 + D^2)^-1, checked against the eigenvalues of D
    lam = np.linalg.eigvalsh(pm200.D)
    expect = np.sort(1.0 / (1.0 + lam**2))[::-1]
    prof = defect_report(pm200.x, []).square_profile
    assert np.allclose(prof.values, expect, atol=1e-12, rtol=0)


def test_bounded_transform_matches_eigh_route(pm200):
    F = bounded_transform_eigh(pm200.D)
    assert opnorm(F - pm200.x.F) < 1e-12
    assert opnorm(pm200.x.F) <= 1.0


@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_selfadjoint_defect_vanishes_for_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    alg = BlockAlgebra.commutative(n)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    x = FredholmModule(AlgebraRep(alg, np.arange(n)), X + X.conj().T)
    rep = defect_report(x)
    assert rep.selfadjoint_defect == 0
    assert rep.locality("identity") == 0


@given(st.integers(0, 2**32 - 1))
def test_locality_defect_is_unitarily_invariant(seed):
    # conjugating F and rho(phi) by the same unitary keeps ||[F, rho(phi)]||
    rng = np.random.default_rng(seed)
    n = 8
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    F = X + X.conj().T
    R = rep_apply(AlgebraRep(BlockAlgebra.commutative(n), np.arange(n)),
                  AlgebraElement.random(BlockAlgebra.commutative(n), rng))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = commutator_norm(F, R)
    b = commutator_norm(Q @ F @ Q.T, Q @ R @ Q.T)
    assert b == pytest.approx(a, rel=1e-10, abs=1e-12)
