import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relindex.errors import NonterminationError, ParseError, SignatureError
from relindex.models import exact_block_pair
from relindex.surgery import Blocks, homotopy_matrix
from relindex.symbolic import NcTerm, RewriteSystem, Scalar, SpaceLabel, Symbol, parse_term, reduce
from relindex.symbolic.terms import word_signature
from relindex.symbolic.verify import (
    SymMatrix,
    axiom_defect,
    block_dims,
    block_env,
    diamond_symbolic,
    endpoint_matches,
    homotopy_symbolic,
    soundness_check,
    square_symbolic,
    verify_homotopy,
    verify_proposition,
)

RS = RewriteSystem.default()
H0, H1, H2 = SpaceLabel.H0, SpaceLabel.H1, SpaceLabel.H2
S, K = Scalar.S, Scalar.K

CORPUS = [
    "a a + b b*", "b d", "b* b + c c + dt dt*", "a b + b c", "c d + d e",
    "d* d + e e", "bt* bt - b* b", "dt dt* - d d*", "b c d", "a a a",
    "b* a b", "d* c c d", "s b* b + k c c", "k k d d* + s s dt dt*",
    "bt c dt", "a b c", "2 b* b - c", "e d* d e",
]


# scalars

scalars = st.builds(
    lambda cs: Scalar({(i, j): c for (i, j), c in cs.items()}),
    st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)),
                    st.integers(-5, 5), max_size=4))


@given(scalars, scalars, scalars)
def test_scalar_ring_laws(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == Scalar(0)


@given(scalars, st.floats(0, 2 * np.pi))
def test_scalar_canonical_form_evaluates_correctly(x, t):
    # the canonical form never carries s^2, and evaluation agrees with the raw polynomial
    assert all(i <= 1 for i, _ in x.coeffs)
    raw = sum(c * np.sin(t)**i * np.cos(t)**j for (i, j), c in x.coeffs.items())
    assert x.evaluate(np.sin(t), np.cos(t)) == pytest.approx(raw, abs=1e-9)


def test_pythagorean_identity():
    assert S * S + K * K == Scalar(1)
    assert (S * K - K * S).is_zero()
    assert (S**3).evaluate(Fraction(3, 5), Fraction(4, 5)) == Fraction(27, 125)
    assert (K * K).at_endpoint() == 0 and (S * S).at_endpoint() == 1


def test_scalar_rejects_non_integers():
    with pytest.raises(TypeError):
        Scalar({(0, 0): 0.5})
    with pytest.raises(ValueError):
        Scalar({(-1, 0): 1})


# parsing


def test_parse_examples():
    t = parse_term("a b + b c")
    assert t.signature == (H0, H1) and len(t.words()) == 2
    assert parse_term("b d").signature == (H2, H1)


def test_parse_signature_mismatch_names_pair():
    with pytest.raises(SignatureError, match="'d' after 'b'"):
        parse_term("d b")


def test_parse_error_has_position():
    with pytest.raises(ParseError) as err:
        parse_term("a + ")
    assert err.value.position == 4
    with pytest.raises(ParseError):
        parse_term("a ) b")
    with pytest.raises(ParseError):
        parse_term("q")


def test_parse_variants_agree():
    assert parse_term("a.b") == parse_term("a b") == parse_term("ab")
    assert parse_term("(a + 1) b") == parse_term("a b + b")
    assert parse_term("d̃ d̃*") == parse_term("dt dt*")
    assert parse_term("ct") == parse_term("c")
    assert parse_term("(b d)*") == parse_term("d* b*")


def test_mixed_signature_sum_rejected():
    with pytest.raises(SignatureError):
        parse_term("a + c")


def test_symbol_signatures():
    b = Symbol("b")
    assert (b.source, b.target) == (H0, H1)
    assert (b.star().source, b.star().target) == (H1, H0)
    assert Symbol("c").self_adjoint and not b.self_adjoint


# reduction


def test_reduce_examples():
    assert reduce(parse_term("a a + b b*"), RS) == NcTerm.identity(H1)
    assert reduce(parse_term("b d"), RS).is_zero()
    assert reduce(parse_term("b* b + c c + dt dt*"), RS) == NcTerm.identity(H0)


def test_reduce_trace_records_steps():
    steps = []
    reduce(parse_term("a a + b b*"), RS, steps)
    assert [s.rule for s in steps] == ["A1"]


@pytest.mark.parametrize("text", CORPUS)
def test_reduce_commutes_with_adjoint(text):
    t = parse_term(text)
    assert reduce(t.adjoint(), RS) == reduce(t, RS).adjoint()


@pytest.mark.parametrize("text", CORPUS)
def test_reduce_preserves_signature(text):
    t = parse_term(text)
    r = reduce(t, RS)
    assert r.is_zero() or r.signature == t.signature


@pytest.mark.parametrize("text", CORPUS)
def test_reduce_is_idempotent(text):
    r = reduce(parse_term(text), RS)
    assert reduce(r, RS) == r


LETTERS = [Symbol(n, adj) for n in ("a", "b", "c", "d", "e", "at", "bt", "dt", "et")
           for adj in (False, True)]


@st.composite
def words(draw):
    # random composable chain, built right to left
    first = draw(st.sampled_from(LETTERS))
    word = [first]
    for _ in range(draw(st.integers(0, 5))):
        nxt = [x for x in LETTERS if x.source == word[0].target]
        word.insert(0, draw(st.sampled_from(nxt)))
    return tuple(word)


@given(words())
def test_random_words_keep_signature_and_adjoint(word):
    t = NcTerm.word(word)
    r = reduce(t, RS)
    assert r.is_zero() or r.signature == word_signature(word)
    assert reduce(t.adjoint(), RS) == r.adjoint()


def test_nontermination_guard():
    looping = RewriteSystem.from_text("L1: a -> a a - a a + a", close=False)
    with pytest.raises(NonterminationError):
        reduce(parse_term("a"), looping, step_limit=50)


# rule DSL


def test_rule_file_round_trip():
    rs = RewriteSystem.from_text("@group g\nR1: b* b -> 1 - c c\nKILL: H1 | H2\n")
    assert [r.id for r in rs.rules] == ["R1"]
    assert rs.axioms == ["R1", "KILL"]
    rs2 = RewriteSystem.from_text("R1: a b -> -b c\n")
    assert [r.id for r in rs2.rules] == ["R1", "R1*"]


@pytest.mark.parametrize("text", [
    "R1 a a -> 1",
    "R1: a a",
    "R1: a a + b b* -> 1",
    "R1: a a -> 1\nR1: c c -> 1",
    "KILL: H1 H2",
    "KILL: H1 | H1",
])
def test_rule_file_errors(text):
    with pytest.raises(ParseError):
        RewriteSystem.from_text(text)


def test_rule_signature_checked():
    with pytest.raises(SignatureError):
        RewriteSystem.from_text("R1: a a -> c")


def test_unknown_axiom():
    with pytest.raises(KeyError):
        RS.without("A9")


def test_default_axioms():
    assert RS.axioms == ["A1", "A2", "A3", "A4", "A5", "A1t", "A2t", "A3t", "A4t", "A5t",
                         "A6", "KILL"]
    assert RS.groups == ["base", "tilde", "cross"]


# matrices and certificates


def test_two_by_two_swap_squares_to_identity():
    one = NcTerm.identity(H0)
    M = SymMatrix.from_grid((H0, H0), (H0, H0), [[0, one], [one, 0]])
    P = square_symbolic(M, RS)
    assert P.entries == SymMatrix.identity((H0, H0)).entries


def test_diamond_squares_to_identity():
    P = square_symbolic(diamond_symbolic(), RS)
    assert P.entries == SymMatrix.identity(diamond_symbolic().rows).entries


def test_proposition_certificate():
    t0 = time.perf_counter()
    cert = verify_proposition()
    assert time.perf_counter() - t0 < 1.0
    assert cert.passed and cert.n_passed == 9
    assert cert.steps == 10
    assert [s.rule for s in cert.entry(2, 2).trace] == ["A5", "A6.1"]


def test_homotopy_certificate():
    t0 = time.perf_counter()
    cert = verify_homotopy()
    assert time.perf_counter() - t0 < 5.0
    assert cert.passed and cert.n_passed == 36
    assert cert.checks == {"selfadjoint": True, "endpoint": True}
    assert cert.steps == 30
    assert [s.rule for s in cert.entry(2, 2).trace] == ["A5", "A6.1"]
    # sin/cos cross terms cancel before any rule fires
    assert cert.entry(3, 6).trace == []


def test_ablation_without_a6():
    cert = verify_proposition(RS.without("A6"))
    assert not cert.passed
    assert [e.label for e in cert.failures] == ["(2,2)"]
    stuck = cert.entry(2, 2).normal_form
    assert stuck == NcTerm.identity(H0) + parse_term("dt dt* - d d*")


def test_ablation_without_kill():
    cert = verify_proposition(RS.without("KILL"))
    assert cert.failures[0].label == "(1,3)"
    assert cert.entry(1, 3).normal_form == parse_term("b dt")


def test_certificate_serialization():
    d = verify_proposition().to_dict()
    assert d["passed"] and len(d["entries"]) == 9
    assert d["entries"][4]["steps"] == [["A5", 0, "b* b"], ["A6.1", 0, "d̃ d̃*"]]
    assert "compact" in d["header"]


def test_endpoint_sign_convention():
    assert endpoint_matches(True)
    assert not endpoint_matches(False)


# numerics


def test_symbolic_matrices_match_numeric_ones(rng):
    # the symbolic side identifies the two middle blocks
    B, Bt = Blocks.random((2, 3, 4), rng), Blocks.random((3, 3, 2), rng)
    Bt = Blocks(Bt.a, Bt.b, B.c, Bt.d, Bt.e)
    env, dims = block_env(B, Bt), block_dims(B, Bt)
    t = 0.7
    H = homotopy_symbolic().evaluate(env, dims, np.sin(t), np.cos(t))
    assert np.allclose(H, homotopy_matrix(B, Bt, t), atol=1e-14, rtol=0)


def test_exact_blocks_satisfy_axioms(rng):
    B, Bt = exact_block_pair((3, 4, 2), (2, 4, 3), rng)
    assert axiom_defect(block_env(B, Bt), block_dims(B, Bt)) < 1e-12


def test_soundness_constant():
    res = soundness_check()
    assert res.samples == 50
    assert res.constant <= 20
    assert res.worst_axiom_defect < 1e-5
