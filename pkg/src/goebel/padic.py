"""The modular recursion g_{k,p,r}(n) with failure symbol.

State at index n lives in Z/p^sZ with s = r - v_p(n!). Each step divides by
n, which costs v_p(n) digits of p-adic precision; if the numerator is not
divisible by p^{v_p(n)} the term has p in its denominator and the state
becomes Failed for good.

Running out of precision (v_p(n!) > r) is not a failure. It only means the
run needs a larger r.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from gmpy2 import invert, mpz, powmod

from goebel.arith import (
    _check_prime,
    _factorial_valuation,
    _pow_reduced,
    _valuation,
    euler_phi_prime_power,
)

__all__ = [
    "PadicTermState",
    "PrecisionExhausted",
    "RunOutcome",
    "StopReason",
    "init",
    "step",
    "run",
    "trajectory",
    "closed_form_check_kp",
]


class PrecisionExhausted(ValueError):
    """Stepping to index n would need v_p(n!) > r."""


@dataclass(frozen=True)
class PadicTermState:
    """Residue (or failure) of g_{k,p,r}(n).

    ``residue`` is None once the recursion has failed; otherwise it is the
    canonical representative in [0, p**s).
    """

    p: int
    r: int
    n: int
    s: int
    residue: int | None

    @property
    def failed(self) -> bool:
        return self.residue is None

    @property
    def modulus(self) -> int:
        return self.p**self.s


class StopReason(str, Enum):
    COMPLETED = "completed"
    FAILED = "failed"
    PRECISION_EXHAUSTED = "precision_exhausted"


@dataclass(frozen=True)
class RunOutcome:
    first_failure: int | None
    reached: int
    terminal_state: PadicTermState
    stop_reason: StopReason


def init(p: int, r: int, l: int = 2) -> PadicTermState:
    _check_prime(p)
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    return PadicTermState(p, r, 1, r, l % p**r)


def step(state: PadicTermState, k: int) -> PadicTermState:
    """Advance from index n-1 to n."""
    p, r = state.p, state.r
    n = state.n + 1
    v = _valuation(n, p)
    s = state.s - v
    if s < 0:
        raise PrecisionExhausted(
            f"v_{p}({n}!) = {_factorial_valuation(n, p)} exceeds r = {r}"
        )
    if state.failed:
        return PadicTermState(p, r, n, s, None)
    mod = p**state.s
    a = state.residue
    t = ((n - 1) * a + _pow_reduced(a, k, p, state.s, mod)) % mod
    pv = p**v
    if t % pv:
        return PadicTermState(p, r, n, s, None)
    new_mod = mod // pv
    # the unit part of n is invertible mod p^s; s == 0 collapses everything to 0
    c = pow(n // pv, -1, new_mod) if s else 0
    return PadicTermState(p, r, n, s, (t // pv) * c % new_mod)


def trajectory(k: int, l: int, p: int, r: int, n_max: int) -> list[PadicTermState]:
    """All states from n = 1 up to n_max or the precision horizon, built with :func:`step`."""
    states = [init(p, r, l)]
    while states[-1].n < n_max:
        try:
            states.append(step(states[-1], k))
        except PrecisionExhausted:
            break
    return states


def run(
    k: int, l: int, p: int, r: int, n_max: int, *, accelerate: bool = False
) -> RunOutcome:
    """Iterate the recursion from n = 2, stopping at failure, n_max or the precision horizon.

    With ``accelerate`` set, runs whose modulus p**r fits in a machine word go
    through a compiled kernel (numba); results are identical.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    start = init(p, r, l)
    if accelerate and p**r < _WORD_LIMIT:
        return _run_accelerated(k, start, n_max)
    s = r
    mod = mpz(p) ** r
    a = mpz(start.residue)
    n = 1
    failed = False
    # inlined copy of step() on gmpy2 integers; tests compare the two
    while n < n_max:
        m = n + 1
        v = 0
        q = m
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
        t = ((n - 1) * a + powmod(a, e, mod)) % mod
        if v:
            pv = p**v
            s -= v
            if t % pv:
                failed = True
                break
            mod //= pv
            t //= pv
        a = t * invert(q, mod) % mod if s else 0
    a = int(a)

    if failed:
        terminal = PadicTermState(p, r, n, s, None)
        return RunOutcome(n, n, terminal, StopReason.FAILED)
    terminal = PadicTermState(p, r, n, s, a)
    if _valuation(n + 1, p) > s:
        reason = StopReason.PRECISION_EXHAUSTED
    else:
        reason = StopReason.COMPLETED
    return RunOutcome(None, n, terminal, reason)


_WORD_LIMIT = 1 << 31


def _run_accelerated(k: int, start: PadicTermState, n_max: int) -> RunOutcome:
    from goebel._kernel import reduce_exponent, run_word

    p, r = start.p, start.r
    failed, n, a, s = run_word(reduce_exponent(k, p, r), start.residue, p, r, n_max)
    n, a, s = int(n), int(a), int(s)
    if failed:
        return RunOutcome(n, n, PadicTermState(p, r, n, s, None), StopReason.FAILED)
    terminal = PadicTermState(p, r, n, s, a)
    if _valuation(n + 1, p) > s:
        return RunOutcome(None, n, terminal, StopReason.PRECISION_EXHAUSTED)
    return RunOutcome(None, n, terminal, StopReason.COMPLETED)


def _closed_form(l: int, p: int, r: int, n: int) -> int:
    s = r - _factorial_valuation(n, p)
    mod = p**s
    vl = _valuation(l, p)
    if n < p**vl:
        vn = _valuation(n, p)
        unit = n // p**vn
        return (l // p**vn) * (pow(unit, -1, mod) if s else 0) % mod
    return (l // p**vl) % mod


def closed_form_check_kp(p: int, r: int, l: int = 2, n_max: int | None = None) -> bool:
    """Run with k = phi(p^r) + 1 and compare every state with the known closed form.

    For n < p^{v_p(l)} the state is (l / p^{v_p(n)}) * (unit part of n)^-1;
    from p^{v_p(l)} on it is the unit part of l. Checked up to n_max or the
    precision horizon, whichever comes first.
    """
    k = euler_phi_prime_power(p, r) + 1
    if n_max is None:
        n_max = r * p + 1  # past the horizon, since v_p((rp)!) >= r
    for state in trajectory(k, l, p, r, n_max):
        if state.failed or state.residue != _closed_form(l, p, r, state.n):
            return False
    return True
