from fractions import Fraction

import pytest

from goebel.arith import PrimePowerModulus
from goebel.exact import (
    DigitBudgetExceeded,
    ExactTerm,
    decimal_digits,
    exact_first_noninteger,
    exact_residue,
    exact_terms,
)


def fraction_recursion(k, l, n_max):
    """Oracle: the recursion spelled out with Fraction."""
    g = Fraction(l)
    out = [g]
    for n in range(2, n_max + 1):
        g = ((n - 1) * g + g**k) / n
        out.append(g)
    return out


def test_goebel_k2_golden():
    values = [t.value for t in exact_terms(2, 2, 8)]
    assert values == [2, 3, 5, 10, 28, 154, 3520, 1551880]


def test_goebel_k3_golden():
    assert [t.numerator for t in exact_terms(3, 2, 4)] == [2, 5, 45, 22815]


def test_single_term():
    (term,) = exact_terms(2, 2, 1)
    assert term.value == 2 and term.n == 1 and term.is_integer


@pytest.mark.parametrize("k", [2, 3, 4, 5])
@pytest.mark.parametrize("l", [2, 3, 4, 5, 6, 7])
def test_matches_fraction_recursion(k, l):
    terms = exact_terms(k, l, 7)
    assert [t.value for t in terms] == fraction_recursion(k, l, 7)
    for t in terms:
        assert t.value.denominator == t.denominator
        assert t.digit_count == len(str(t.numerator))


def test_recursion_identity_holds_between_terms():
    for k, l in [(2, 2), (3, 4), (5, 3), (4, 6)]:
        terms = exact_terms(k, l, 8)
        for prev, cur in zip(terms, terms[1:]):
            assert cur.n * cur.value == (cur.n - 1) * prev.value + prev.value**k


def test_non_integer_terms_are_reduced():
    # (2, 3)-Göbel leaves the integers at n = 7
    terms = exact_terms(2, 3, 9)
    assert not all(t.is_integer for t in terms)
    for t in terms:
        assert Fraction(t.numerator, t.denominator).denominator == t.denominator


def test_budget_stop_is_signalled_with_partial_terms():
    with pytest.raises(DigitBudgetExceeded) as info:
        exact_terms(2, 2, 20, digit_budget=5)
    partial = info.value.terms
    assert [t.numerator for t in partial] == [2, 3, 5, 10, 28, 154, 3520]
    assert all(t.digit_count <= 5 for t in partial)


def test_budget_stop_before_astronomical_term():
    # the next term would have ~10^6 digits; the guard must refuse without computing it
    with pytest.raises(DigitBudgetExceeded) as info:
        exact_terms(10, 2, 10, digit_budget=1000)
    assert info.value.terms[-1].digit_count <= 1000


@pytest.mark.parametrize("bad", [dict(k=1), dict(l=1), dict(n_max=0), dict(digit_budget=0)])
def test_validation(bad):
    args = dict(k=2, l=2, n_max=3, digit_budget=10) | bad
    with pytest.raises(ValueError):
        exact_terms(**args)


def test_first_noninteger_k2_through_10():
    result = exact_first_noninteger(2, 2, 10)
    assert result.index is None and result.reached == 10 and not result.truncated


def test_first_noninteger_l3_n2():
    assert (1 * 3 + 3**2) % 2 == 0
    assert exact_first_noninteger(2, 3, 2).index is None


def test_first_noninteger_n1():
    assert exact_first_noninteger(7, 5, 1).index is None


def test_first_noninteger_found():
    terms = fraction_recursion(2, 3, 9)
    expected = next(n for n, g in enumerate(terms, 1) if g.denominator != 1)
    assert expected == 7
    assert exact_first_noninteger(2, 3, 9).index == expected


def test_first_noninteger_truncated():
    result = exact_first_noninteger(2, 2, 30, digit_budget=5)
    assert result.truncated and result.reached == 7 and result.index is None


@pytest.mark.parametrize(
    "value, p, s, expected",
    [(154, 3, 2, 1), (2, 5, 3, 2), (10, 2, 3, 2), (Fraction(1, 2), 3, 1, 2), (Fraction(1, 3), 3, 2, None)],
)
def test_exact_residue(value, p, s, expected):
    assert exact_residue(value, PrimePowerModulus(p, s)) == expected


def test_exact_residue_of_term():
    term = ExactTerm(6, 154)
    assert exact_residue(term, PrimePowerModulus(3, 2)) == 154 % 9
    assert exact_residue(ExactTerm(2, 5, 3), PrimePowerModulus(2, 4)) == 5 * 11 % 16


def test_decimal_digits():
    for x in [0, 1, 9, 10, 11, 99, 100, 999_999, 10**6, 10**300 - 1, 10**300, 7**5000]:
        assert decimal_digits(x) == len(str(x))
