import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relindex.algebra import (
    AlgebraElement,
    AlgebraRep,
    BlockAlgebra,
    Ideal,
    ideal_cover_check,
    ideal_decompose,
    ideal_intersect,
    ideal_projection,
    rep_apply,
)
from relindex.errors import (
    AlgebraMismatchError,
    GradingError,
    MalformedIdealError,
    NoDecompositionError,
    ShapeMismatchError,
)

ALG100 = BlockAlgebra.commutative(100)


def rng_ideal(lo, hi):
    # 1-based inclusive ranges, stored 0-based
    return Ideal.of(ALG100, range(lo - 1, hi))


def test_cover_check_overlapping():
    assert ideal_cover_check(rng_ideal(1, 60), rng_ideal(40, 100), ALG100)


def test_cover_check_gap():
    assert not ideal_cover_check(rng_ideal(1, 60), rng_ideal(70, 100), ALG100)


def test_cover_check_full_and_empty():
    assert ideal_cover_check(Ideal.full(ALG100), Ideal(), ALG100)


def test_intersect_examples():
    S = rng_ideal(1, 60)
    assert ideal_intersect(S, rng_ideal(40, 100)) == rng_ideal(40, 60)
    assert ideal_intersect(S, S) == S
    assert ideal_intersect(S, Ideal()) == Ideal()


def test_malformed_ideal():
    with pytest.raises(MalformedIdealError):
        Ideal.of(ALG100, [100])
    with pytest.raises(MalformedIdealError):
        ideal_cover_check(Ideal({-1}), Ideal.full(ALG100), ALG100)


def test_decompose_outside_overlap():
    J1, J2 = rng_ideal(1, 60), rng_ideal(40, 100)
    phi = AlgebraElement.indicator(ALG100, [5])
    p1, p2 = ideal_decompose(phi, J1, J2)
    assert p1.equals(phi)
    assert p2.equals(AlgebraElement.zero(ALG100))


def test_decompose_in_overlap_symmetric():
    J1, J2 = rng_ideal(1, 60), rng_ideal(40, 100)
    phi = AlgebraElement.indicator(ALG100, [49])
    p1, p2 = ideal_decompose(phi, J1, J2, 0.5)
    assert p1.equals(phi.scale(0.5))
    assert p2.equals(phi.scale(0.5))


def test_decompose_recombines_exactly():
    alg = BlockAlgebra((1, 2, 3, 1, 2))
    J1, J2 = Ideal.of(alg, [0, 1, 2]), Ideal.of(alg, [2, 3, 4])
    rng = np.random.default_rng(0)
    for _ in range(100):
        phi = AlgebraElement.random(alg, rng)
        lam = rng.uniform()
        p1, p2 = ideal_decompose(phi, J1, J2, lam)
        assert (p1 + p2).equals(phi)
        assert p1.support() <= J1.indices and p2.support() <= J2.indices


def test_decompose_errors():
    with pytest.raises(NoDecompositionError):
        ideal_decompose(AlgebraElement.identity(ALG100), rng_ideal(1, 60), rng_ideal(70, 100))
    with pytest.raises(ValueError):
        ideal_decompose(AlgebraElement.identity(ALG100), rng_ideal(1, 60),
                        rng_ideal(40, 100), lam=1.5)


def random_rep(alg, rng, graded=True):
    mult = rng.integers(1, 3, alg.n_blocks)
    signs = [list(rng.choice([-1, 1], m)) for m in mult] if graded else None
    return AlgebraRep.standard(alg, mult, signs)


def test_projection_full_and_empty(rng):
    alg = BlockAlgebra((2, 1, 3))
    rep = random_rep(alg, rng)
    assert np.array_equal(ideal_projection(Ideal.full(alg), rep), np.eye(rep.dim))
    assert not np.any(ideal_projection(Ideal(), rep))


def test_projection_commutes_exactly(rng):
    alg = BlockAlgebra((2, 1, 3, 2))
    rep = random_rep(alg, rng)
    P = ideal_projection(Ideal.of(alg, [1, 3]), rep)
    for _ in range(20):
        R = rep_apply(rep, AlgebraElement.random(alg, rng))
        assert np.array_equal(P @ R, R @ P)


def test_rep_identity_and_product(rng):
    alg = BlockAlgebra((2, 3, 1))
    rep = random_rep(alg, rng)
    assert np.array_equal(rep_apply(rep, AlgebraElement.identity(alg)), np.eye(rep.dim))
    for _ in range(20):
        x, y = AlgebraElement.random(alg, rng), AlgebraElement.random(alg, rng)
        lhs = rep_apply(rep, x @ y)
        rhs = rep_apply(rep, x) @ rep_apply(rep, y)
        assert np.allclose(lhs, rhs, atol=1e-13, rtol=0)


def test_commutative_real_is_hermitian(rng):
    alg = BlockAlgebra.commutative(12)
    rep = random_rep(alg, rng)
    R = rep_apply(rep, AlgebraElement.from_values(alg, rng.standard_normal(12)))
    assert np.array_equal(R, R.conj().T)


def test_rep_grading_commutes(rng):
    alg = BlockAlgebra((2, 2))
    rep = random_rep(alg, rng)
    g = rep.gamma()
    R = rep_apply(rep, AlgebraElement.random(alg, rng))
    assert np.array_equal(g @ R, R @ g)


def test_shape_errors():
    alg = BlockAlgebra((2, 1))
    with pytest.raises(ShapeMismatchError):
        AlgebraElement(alg, (np.eye(2),))
    with pytest.raises(ShapeMismatchError):
        AlgebraElement(alg, (np.eye(2), np.eye(2)))
    with pytest.raises(ShapeMismatchError):
        AlgebraRep.standard(alg, [1])
    with pytest.raises(AlgebraMismatchError):
        AlgebraElement.identity(alg) + AlgebraElement.identity(BlockAlgebra((1,)))
    with pytest.raises(ValueError):
        BlockAlgebra((2, 0))


def test_grading_errors():
    alg = BlockAlgebra((1, 1))
    with pytest.raises(GradingError):
        AlgebraRep(alg, [0, 1], [1, 2])
    with pytest.raises(GradingError):
        AlgebraRep(alg, [0, 1], None).grading
    with pytest.raises(GradingError):
        AlgebraRep(alg, [0], [1]).direct_sum(AlgebraRep(alg, [1]))


def test_nondegeneracy():
    alg = BlockAlgebra((1, 1, 1))
    assert AlgebraRep.standard(alg, [1, 2, 1]).is_nondegenerate()
    assert not AlgebraRep.standard(alg, [1, 0, 1]).is_nondegenerate()


@given(st.sets(st.integers(0, 19)), st.sets(st.integers(0, 19)))
def test_cover_iff_union_is_everything(a, b):
    alg = BlockAlgebra.commutative(20)
    expect = (a | b) == set(range(20))
    assert ideal_cover_check(Ideal(a), Ideal(b), alg) == expect
    assert ideal_intersect(Ideal(a), Ideal(b)).indices == a & b


@given(st.lists(st.integers(1, 3), min_size=1, max_size=5), st.integers(0, 2**32 - 1))
def test_projection_is_orthogonal_projection(blocks, seed):
    rng = np.random.default_rng(seed)
    alg = BlockAlgebra(tuple(blocks))
    rep = random_rep(alg, rng)
    J = Ideal(set(np.flatnonzero(rng.integers(0, 2, alg.n_blocks)).tolist()))
    P = ideal_projection(J, rep)
    assert np.array_equal(P @ P, P)
    assert np.array_equal(P, P.T)
    assert int(np.trace(P)) == sum(rep.copy_dims[np.isin(rep.copy_blocks, list(J.indices))])


@given(st.floats(0.0, 1.0), st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=4))
def test_decompose_exact_for_any_share(lam, vals):
    alg = BlockAlgebra.commutative(4)
    phi = AlgebraElement.from_values(alg, np.asarray(vals) * (1 + 0.5j))
    p1, p2 = ideal_decompose(phi, Ideal({0, 1, 2}), Ideal({1, 2, 3}), lam)
    assert (p1 + p2).equals(phi)
