"""Elementary number theory over prime-power moduli.

Everything here works on Python ints, so moduli such as ``2**4095`` are fine.
The public functions validate their arguments; the underscore-prefixed
helpers skip validation and are what the hot loops in :mod:`goebel.padic`
call.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

__all__ = [
    "PrimePowerModulus",
    "padic_valuation",
    "factorial_valuation",
    "primes_up_to",
    "is_prime",
    "primorial",
    "factorial_over_primorial",
    "euler_phi_prime_power",
    "mod_inverse",
    "mod_pow_reduced",
]

# Deterministic Miller-Rabin witnesses, valid for n < 3_215_031_751.
_MR_BASES = (2, 3, 5, 7)


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 3.2e9 (covers every N_k we can reach)."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    if n >= 3_215_031_751:
        raise ValueError(f"is_prime is only deterministic below 3215031751, got {n}")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


@dataclass(frozen=True)
class PrimePowerModulus:
    """The modulus ``p**s``. ``s == 0`` is the trivial ring Z/1Z."""

    p: int
    s: int

    def __post_init__(self):
        _check_prime(self.p)
        if self.s < 0:
            raise ValueError(f"exponent must be >= 0, got {self.s}")

    @property
    def modulus(self) -> int:
        return self.p**self.s


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def padic_valuation(n: int, p: int) -> int:
    """Return the largest v with ``p**v`` dividing n."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    _check_prime(p)
    return _valuation(abs(n), p)


def _factorial_valuation(n: int, p: int) -> int:
    total = 0
    while n:
        n //= p
        total += n
    return total


def factorial_valuation(n: int, p: int) -> int:
    """Legendre's formula: the exponent of p in n!, without forming n!."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    _check_prime(p)
    return _factorial_valuation(n, p)


def primes_up_to(m: int) -> list[int]:
    """Sieve of Eratosthenes; the primes in [2, m] in ascending order."""
    if m < 2:
        return []
    sieve = bytearray([1]) * (m + 1)
    sieve[0] = sieve[1] = 0
    i = 2
    while i * i <= m:
        if sieve[i]:
            sieve[i * i :: i] = bytes(len(range(i * i, m + 1, i)))
        i += 1
    return [i for i, flag in enumerate(sieve) if flag]


def primorial(m: int) -> int:
    """m#, the product of the primes up to m (1 for m < 2)."""
    return prod(primes_up_to(m))


def factorial_over_primorial(m: int) -> int:
    """m!/m#, built as the product of ``p**(v_p(m!) - 1)`` over primes p <= m."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return prod(p ** (_factorial_valuation(m, p) - 1) for p in primes_up_to(m))


def euler_phi_prime_power(p: int, r: int) -> int:
    """phi(p**r) = p**(r-1) * (p-1)."""
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    _check_prime(p)
    return p ** (r - 1) * (p - 1)


def mod_inverse(a: int, modulus: PrimePowerModulus) -> int:
    """Inverse of a modulo ``p**s`` in [0, p**s); 0 in the trivial ring.

    Raises ValueError if p divides a and s >= 1.
    """
    if modulus.s == 0:
        return 0
    if a % modulus.p == 0:
        raise ValueError(f"{a} is not invertible modulo {modulus.p}^{modulus.s}")
    return pow(a, -1, modulus.modulus)


def _pow_reduced(a: int, k: int, p: int, s: int, mod: int) -> int:
    # Valid for every base: units by Euler, non-units because both exponents are >= s.
    # phi(p^s) >= s, so testing k >= phi covers the k >= s guard and never enlarges k.
    if s == 0:
        return 0
    phi = mod // p * (p - 1)
    if k >= phi:
        k = phi + k % phi
    return pow(a, k, mod)


def mod_pow_reduced(a: int, k: int, modulus: PrimePowerModulus) -> int:
    """``a**k mod p**s``, with large k cut down to phi(p**s) + (k mod phi(p**s))."""
    if k < 1:
        raise ValueError(f"exponent must be >= 1, got {k}")
    mod = modulus.modulus
    return _pow_reduced(a % mod, k, modulus.p, modulus.s, mod)
