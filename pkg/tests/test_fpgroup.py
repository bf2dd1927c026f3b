from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from l2torsion import catalog
from l2torsion.fpgroup import (CohomClass, abelian_factorization, NotLargeError, Presentation, PresentationError,
                               QuotientHom, Word, abelianize, check_large, generator, pair,
                               perm_inv, perm_mul, reduce, word_of_weight)

letters = st.lists(st.tuples(st.integers(0, 2), st.sampled_from([-2, -1, 1, 2])), max_size=8)


def word(ls):
    return reduce(ls)


@given(letters, letters, letters)
def test_word_associativity(a, b, c):
    a, b, c = word(a), word(b), word(c)
    assert (a * b) * c == a * (b * c)


@given(letters)
def test_word_inverse(a):
    w = word(a)
    assert not (w * w.inverse())
    assert w.inverse().inverse() == w


def test_parse_word_forms():
    p = Presentation.from_strings(["a", "b"], ["a b A B"])
    assert p.parse_word("a^-3 b") == generator(0, -3) * generator(1)
    assert p.parse_word("A A A b") == p.parse_word("a^-3 b")
    assert p.parse_word("a a^-1") == Word(())
    with pytest.raises(PresentationError):
        p.parse_word("c")


def test_json_roundtrip():
    p = catalog.get("figure8").presentation
    q = Presentation.from_json(p.to_json())
    assert q == p
    assert q.deficiency == 1


def test_abelianization_of_knots():
    for name in ("trefoil", "figure8", "5_2", "t2_5", "t3_4"):
        abel = abelianize(catalog.get(name).presentation)
        assert abel.rank == 1
        assert not abel.torsion
    t25 = abelianize(catalog.get("t2_5").presentation)
    assert sorted(abs(w[0]) for w in t25.weights) == [2, 5]


def test_abelianization_with_torsion():
    p = Presentation.from_strings(["a", "b"], ["a^2", "a b A B"])
    abel = abelianize(p)
    assert abel.rank == 1 and abel.torsion == (2,)


@given(st.lists(st.integers(-3, 3), min_size=2, max_size=2), st.integers(-3, 3),
       st.integers(-3, 3), letters)
def test_pair_linearity(ws, r, s, ls):
    p = Presentation.from_strings(["x", "y", "z"], [])
    abel = abelianize(p)
    phi = CohomClass((ws[0], ws[1], 1))
    psi = CohomClass((1, -1, 2))
    w = word(ls)
    combined = CohomClass(tuple(r * a + s * b for a, b in zip(phi.weights, psi.weights)))
    assert pair(combined, w, abel) == r * pair(phi, w, abel) + s * pair(psi, w, abel)
    w2 = w * generator(1, 2)
    assert pair(phi, w2, abel) == pair(phi, w, abel) + pair(phi, generator(1, 2), abel)


def test_cohom_parse():
    assert CohomClass.parse("1, 2/3").weights == (Fraction(1), Fraction(2, 3))


def test_permutations():
    a, b = (1, 0, 2), (0, 2, 1)
    assert perm_mul(a, perm_inv(a)) == (0, 1, 2)
    assert perm_mul(perm_mul(a, b), a) == perm_mul(a, perm_mul(b, a))


def test_quotient_validation():
    p = catalog.get("trefoil").presentation
    with pytest.raises(PresentationError):
        QuotientHom.from_json(p, {"weights": {"a": 1, "b": 2}})
    h = QuotientHom.from_json(p, {"weights": {"a": 1, "b": 1},
                                  "finite": {"degree": 3, "images": {"a": [2, 1, 3], "b": [1, 3, 2]}}})
    assert check_large(h)


def test_not_large():
    p = catalog.get("trefoil").presentation
    h = QuotientHom(p, ((0,), (0,)))
    assert not check_large(h)
    with pytest.raises(NotLargeError):
        abelian_factorization(h)


def test_word_of_weight():
    for name in ("t2_5", "t3_4", "figure8"):
        abel = abelianize(catalog.get(name).presentation)
        for h in (-3, 1, 4):
            assert abel.word_weight(word_of_weight(abel, (h,))) == (h,)
