"""Machine-word version of padic.run for moduli below 2**31.

Products of two residues then fit in int64. Exponents must be pre-reduced by
the caller (see :func:`reduce_exponent`).
"""

from __future__ import annotations

from numba import njit

WORD_LIMIT = 1 << 31


def reduce_exponent(k: int, p: int, r: int) -> int:
    # phi(p^s) divides phi(p^r) for every s <= r, so this k is congruent
    # to the original modulo each of them and still >= every phi(p^s).
    phi = p ** (r - 1) * (p - 1)
    return phi + k % phi if k >= phi else k


@njit(cache=True)
def _powmod(a, e, mod):
    result = 1 % mod
    a %= mod
    while e:
        if e & 1:
            result = result * a % mod
        a = a * a % mod
        e >>= 1
    return result


@njit(cache=True)
def _inverse(a, mod):
    old_r, rem = a % mod, mod
    old_s, s = 1, 0
    while rem:
        q = old_r // rem
        old_r, rem = rem, old_r - q * rem
        old_s, s = s, old_s - q * s
    return old_s % mod


@njit(cache=True)
def run_word(k, a, p, r, n_max):
    """Returns (failed, reached, residue, s)."""
    s = r
    mod = 1
    for _ in range(r):
        mod *= p
    n = 1
    while n < n_max:
        m = n + 1
        q = m
        v = 0
        while q % p == 0:
            q //= p
            v += 1
        if v > s:
            break
        n = m
        if s == 0:
            a = 0
            continue
        phi = mod // p * (p - 1)
        e = phi + k % phi if k >= phi else k
        t = ((n - 1) * a + _powmod(a, e, mod)) % mod
        if v:
            pv = 1
            for _ in range(v):
                pv *= p
            s -= v
            if t % pv:
                return True, n, 0, s
            mod //= pv
            t //= pv
        a = t * _inverse(q, mod) % mod if s else 0
    return False, n, a, s
