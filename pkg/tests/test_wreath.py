import random

import pytest
from hypothesis import given, strategies as st

import oracles as O
from wwpd.words import ReducedWord, random_word
from wwpd.wreath import (
    Automorphism,
    BadIndex,
    FiniteQuotient,
    GammaElement,
    ProductWord,
    QuotientMismatch,
    SemidirectModel,
    WreathElement,
    kk_embed,
    model_a,
    model_b,
    outer_rep,
    verify_embedding,
    wreath_mul,
)

R = ReducedWord
A, B = model_a(), model_b()


def pw(*parts: str) -> ProductWord:
    return ProductWord([R(p) for p in parts])


def naive_apply(images: dict, n: ProductWord) -> ProductWord:
    """Letter-by-letter substitution, then reduction of each factor."""
    k_out = [""] * n.n_factors
    for k, f in enumerate(n.factors):
        for ch in f.letters:
            img = images[(k, ch.lower())]
            parts = [g.letters for g in img.factors]
            if ch.isupper():
                parts = [O.naive_inverse(p) for p in parts]
            k_out = [a + b for a, b in zip(k_out, parts)]
    return ProductWord([R(O.naive_reduce(s)) for s in k_out])


one_factor = st.text(alphabet="abAB", max_size=10).map(lambda s: pw(s))
two_factor = st.tuples(st.text(alphabet="abAB", max_size=8), st.text(alphabet="abAB", max_size=8)).map(lambda t: pw(*t))


# ------------------------------------------------------------ product words and automorphisms


def test_product_word_text():
    assert str(ProductWord.parse("1,ab", 2)) == "1,ab"
    assert ProductWord.parse("1", 2).is_identity()
    assert ProductWord.parse("aA,b", 2) == pw("", "b")
    with pytest.raises(ValueError):
        ProductWord.parse("a,b,a", 2)
    assert ProductWord.embed(R("ab"), 1, 2) == pw("", "ab")
    assert len(pw("ab", "a")) == 3


@given(one_factor)
def test_swap_matches_substitution(n):
    sigma = A.quotient.actions[1]
    assert sigma(n) == naive_apply(sigma.images, n)
    assert sigma(n).factors[0].letters == O.swap_ab(n.factors[0].letters)
    assert sigma(sigma(n)) == n


@given(two_factor)
def test_factor_swap_matches_substitution(n):
    sigma = B.quotient.actions[1]
    assert sigma(n) == naive_apply(sigma.images, n) == pw(n.factors[1].letters, n.factors[0].letters)


@given(one_factor, one_factor)
def test_general_path_matches_substitution(u, v):
    # a -> ab, b -> b is a non-letter automorphism, so the general path runs.
    phi = Automorphism({(0, "a"): pw("ab"), (0, "b"): pw("b")}, 1, 2)
    assert phi(u) == naive_apply(phi.images, u)
    assert phi(u * v) == phi(u) * phi(v)
    # Inverting letters keeps the fast path: a -> B, b -> a.
    psi = Automorphism({(0, "a"): pw("B"), (0, "b"): pw("a")}, 1, 2)
    assert psi(u) == naive_apply(psi.images, u)


def test_automorphism_compose_and_identity():
    sigma = A.quotient.actions[1]
    ident = Automorphism.identity(1, 2)
    assert sigma.compose(sigma) == ident
    assert sigma.compose(ident) == sigma
    with pytest.raises(ValueError):
        Automorphism({(0, "a"): pw("b")}, 1, 2)


# ------------------------------------------------------------ quotient validation


def test_shipped_quotients_are_valid():
    assert A.quotient.problems() == []
    assert B.quotient.problems() == []


def test_quotient_problems_are_named():
    ident = Automorphism.identity(1, 2)
    sigma = A.quotient.actions[1]
    bad_table = FiniteQuotient(["1", "s"], [[0, 1], [1, 1]], [ident, sigma])
    assert any("inverse law" in p for p in bad_table.problems())
    # a -> ab has infinite order, so it cannot represent an element of order 2.
    skew = Automorphism({(0, "a"): pw("ab"), (0, "b"): pw("b")}, 1, 2)
    bad_action = FiniteQuotient(["1", "s"], [[0, 1], [1, 0]], [ident, skew])
    assert any("homomorphism" in p for p in bad_action.problems())
    # a -> aa is an endomorphism but not onto; s o s != 1 flags it.
    not_auto = Automorphism({(0, "a"): pw("aa"), (0, "b"): pw("b")}, 1, 2)
    assert FiniteQuotient(["1", "s"], [[0, 1], [1, 0]], [ident, not_auto]).problems()


# ------------------------------------------------------------ semidirect products


def direct_mul_a(x, y):
    """(n, q)(m, p) = (n * sigma^q(m), q + p) with sigma the swap a <-> b."""
    (n, q), (m, p) = x, y
    m2 = O.swap_ab(m) if q else m
    return O.naive_reduce(n + m2), (q + p) % 2


def test_model_a_multiplication_matches_direct_formula():
    rng = random.Random(1)
    for _ in range(500):
        x = (random_word(rng, rng.randint(0, 6)).letters, rng.randrange(2))
        y = (random_word(rng, rng.randint(0, 6)).letters, rng.randrange(2))
        got = A.mul(A.element(pw(x[0]), x[1]), A.element(pw(y[0]), y[1]))
        assert (got.n.factors[0].letters, got.q) == direct_mul_a(x, y)


def test_inverse_and_identity():
    rng = random.Random(2)
    for M in (A, B):
        for _ in range(100):
            g = M.random_element(rng)
            assert g * g.inverse() == M.identity() == g.inverse() * g


def test_ball_sizes_are_stable():
    # Frozen from the generator-ball enumeration.
    assert len(A.ball(3)) == 70
    assert len(B.ball(3)) == 266
    assert len(A.ball(1)) == len(A.generators()) + 1


# ------------------------------------------------------------ Kaloujnin-Krasner


def test_kk_embed_examples():
    mu = A.element("a", "s")
    th = kk_embed(mu)
    assert th.rho == (pw("a"), pw("b")) and th.phi == (1, 0)
    th = kk_embed(A.identity())
    assert all(r.is_identity() for r in th.rho) and th.phi == (0, 1)
    n = pw("abA")
    th = kk_embed(A.from_n(n))
    assert th.rho == (n, pw("baB")) and th.phi == (0, 1)


def test_kk_on_n_is_the_outer_representatives():
    rng = random.Random(3)
    for M in (A, B):
        for _ in range(50):
            n = M.random_element(rng).n
            th = M.kk_embed(M.from_n(n))
            assert list(th.rho) == [M.outer_rep(k, n) for k in range(1, M.K + 1)]


def test_outer_rep_examples():
    assert outer_rep(A, 2, pw("aab")) == pw("bba")
    assert outer_rep(B, 2, pw("ab", "b")) == pw("b", "ab")
    with pytest.raises(BadIndex):
        A.outer_rep(3, pw("a"))
    with pytest.raises(BadIndex):
        A.action(0)


def test_wreath_mul_examples():
    e = WreathElement((pw(""), pw("")), (0, 1))
    s = WreathElement((pw(""), pw("")), (1, 0))
    assert wreath_mul(e, e) == e
    assert wreath_mul(s, s).phi == (0, 1)
    with pytest.raises(QuotientMismatch):
        wreath_mul(e, WreathElement((pw(""),), (0,)))
    with pytest.raises(ValueError):
        WreathElement((pw(""), pw("")), (0, 0))


def test_wreath_mul_matches_permutation_formula():
    rng = random.Random(4)
    for _ in range(200):
        x, y = A.random_element(rng), A.random_element(rng)
        tx, ty = A.kk_embed(x), A.kk_embed(y)
        prod = wreath_mul(tx, ty)
        for Bc in range(2):
            assert prod.rho[Bc] == tx.rho[Bc] * ty.rho[tx.phi[Bc]]
            assert prod.phi[Bc] == ty.phi[tx.phi[Bc]]


def test_verify_embedding_passes_on_models():
    for M in (A, B):
        rep = verify_embedding(M, sample_size=200, seed=7, exhaustive_length=2)
        assert rep.passed, rep.counterexamples
        assert rep.homomorphism_checks > 200 and rep.injectivity_checks > 0 and rep.kernel_checks > 0


def test_verify_embedding_trivial_quotient():
    Q = FiniteQuotient(["1"], [[0]], [Automorphism.identity(1, 2)])
    M = SemidirectModel("trivial", 1, 2, Q, (pw("a"), pw("b")))
    assert verify_embedding(M, sample_size=1).passed


def test_verify_embedding_negative_control():
    # The swap replaced by a -> ab, b -> b: no longer an action of Z/2.
    ident = Automorphism.identity(1, 2)
    skew = Automorphism({(0, "a"): pw("ab"), (0, "b"): pw("b")}, 1, 2)
    Q = FiniteQuotient(["1", "s"], [[0, 1], [1, 0]], [ident, skew])
    M = SemidirectModel("corrupt", 1, 2, Q, (pw("a"), pw("b")))
    rep = verify_embedding(M, sample_size=200, seed=0, exhaustive_length=2)
    assert not rep.passed
    assert rep.counterexamples and "theta" in rep.counterexamples[0]


def test_conjugated_representatives_still_embed():
    M = A.with_reps([pw(""), pw("ab")])
    rep = verify_embedding(M, sample_size=300, seed=1, exhaustive_length=2)
    assert rep.passed, rep.counterexamples
    # i_2 changes by an inner automorphism of N.
    n = pw("aB")
    assert M.outer_rep(2, n) == pw("ab") * A.outer_rep(2, n) * pw("ab").inverse()
    with pytest.raises(ValueError):
        A.with_reps([pw("a"), pw("")])


def test_gamma_element_str_and_equality():
    g = A.element("ab", "s")
    assert str(g) == "(ab;s)"
    assert g == GammaElement(pw("ab"), 1)
