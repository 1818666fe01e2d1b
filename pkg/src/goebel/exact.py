"""Literal evaluation of the recursion over the rationals.

This is the ground-truth side for small n only. Terms roughly multiply their
digit count by k at every step, so evaluation is cut off by a digit budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from gmpy2 import gcd, mpz

from goebel.arith import PrimePowerModulus, mod_inverse

__all__ = [
    "DEFAULT_DIGIT_BUDGET",
    "DigitBudgetExceeded",
    "ExactTerm",
    "FirstNonInteger",
    "decimal_digits",
    "exact_terms",
    "exact_first_noninteger",
    "exact_residue",
]

DEFAULT_DIGIT_BUDGET = 2_000_000

_LOG10_2 = math.log10(2)


def decimal_digits(x: int) -> int:
    """Number of decimal digits of |x| (1 for zero), without str() conversion."""
    x = abs(mpz(x))
    if x < 10:
        return 1
    # gmpy2's estimate is exact or one too high
    d = x.num_digits(10)
    return d if x >= mpz(10) ** (d - 1) else d - 1


@dataclass(frozen=True)
class ExactTerm:
    """g_n as a reduced fraction numerator/denominator (denominator > 0)."""

    n: int
    numerator: int
    denominator: int = 1
    digit_count: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "digit_count", decimal_digits(self.numerator))

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def is_integer(self) -> bool:
        return self.denominator == 1


class DigitBudgetExceeded(Exception):
    """The next term would exceed the digit budget.

    ``terms`` holds everything computed before the cut-off.
    """

    def __init__(self, terms: list[ExactTerm], budget: int):
        self.terms = terms
        self.budget = budget
        super().__init__(
            f"term {len(terms) + 1} would exceed {budget} numerator digits "
            f"(stopped after n={len(terms)})"
        )


def _validate(k: int, l: int, n_max: int, digit_budget: int) -> None:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if l < 2:
        raise ValueError(f"l must be >= 2, got {l}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if digit_budget < 1:
        raise ValueError(f"digit_budget must be >= 1, got {digit_budget}")


def _too_big(num, den, k: int, n: int, digit_budget: int) -> bool:
    # Cheap lower bound on log10 of the next value: g_n > g_{n-1}**k / n.
    log_prev = (num.bit_length() - 1 - den.bit_length()) * _LOG10_2
    return k * log_prev - math.log10(n) > digit_budget + 1


def exact_terms(
    k: int, l: int = 2, n_max: int = 10, digit_budget: int = DEFAULT_DIGIT_BUDGET
) -> list[ExactTerm]:
    """Terms g_1..g_{n_max} of the (k, l)-Göbel sequence as reduced fractions.

    Raises DigitBudgetExceeded (carrying the partial list) when a term would
    have more than ``digit_budget`` numerator digits.
    """
    _validate(k, l, n_max, digit_budget)
    first = ExactTerm(1, l)
    if first.digit_count > digit_budget:
        raise DigitBudgetExceeded([], digit_budget)
    terms = [first]
    a, b = mpz(l), mpz(1)
    for n in range(2, n_max + 1):
        if _too_big(a, b, k, n, digit_budget):
            raise DigitBudgetExceeded(terms, digit_budget)
        # g = a/b with gcd(a, b) = 1, so (n-1) a b^(k-1) + a^k is coprime to b^k
        # and only a common factor with n can cancel.
        bk1 = b ** (k - 1)
        num = (n - 1) * a * bk1 + a**k
        den = n * bk1 * b
        d = gcd(num, n)
        a, b = num // d, den // d
        term = ExactTerm(n, int(a), int(b))
        if term.digit_count > digit_budget:
            raise DigitBudgetExceeded(terms, digit_budget)
        terms.append(term)
    return terms


class FirstNonInteger(NamedTuple):
    index: int | None
    reached: int
    truncated: bool


def exact_first_noninteger(
    k: int, l: int = 2, n_max: int = 10, digit_budget: int = DEFAULT_DIGIT_BUDGET
) -> FirstNonInteger:
    """Smallest n <= reached with g_n not an integer, or None.

    ``truncated`` is set when the digit budget stopped the scan before n_max.
    """
    try:
        terms = exact_terms(k, l, n_max, digit_budget)
        truncated = False
    except DigitBudgetExceeded as exc:
        terms = exc.terms
        truncated = True
    for term in terms:
        if not term.is_integer:
            return FirstNonInteger(term.n, len(terms), truncated)
    return FirstNonInteger(None, len(terms), truncated)


def exact_residue(term: ExactTerm | Fraction | int, modulus: PrimePowerModulus) -> int | None:
    """The term reduced into Z/p^sZ, or None when p divides its denominator."""
    if isinstance(term, ExactTerm):
        num, den = term.numerator, term.denominator
    else:
        value = Fraction(term)
        num, den = value.numerator, value.denominator
    if den % modulus.p == 0:
        return None
    mod = modulus.modulus
    return num % mod * mod_inverse(den, modulus) % mod
