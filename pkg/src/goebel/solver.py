"""N_k by iterative deepening over per-prime modular runs.

For a search bound M, each prime p <= M is run at precision r = v_p(M!),
which is exactly enough to reach index M. The first failing index over all
primes is N_k. Primes above M cannot put anything in the denominator of
g_1..g_M, since those denominators divide M!. If no prime fails, N_k > M and
the bound doubles.
"""

from __future__ import annotations

import logging
import random
import threading
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from goebel.arith import (
    _factorial_valuation,
    factorial_over_primorial,
    is_prime,
    primes_up_to,
)
from goebel.padic import run

__all__ = [
    "BoundPolicy",
    "BudgetExceeded",
    "CacheInconsistency",
    "NkResult",
    "RunCache",
    "SweepRecord",
    "SweepResult",
    "TheoremCheck",
    "TheoremWitness",
    "compute_Nk",
    "construct_k_for_m",
    "sweep",
    "verify_theorem",
]

logger = logging.getLogger(__name__)

DEFAULT_INITIAL_BOUND = 128
DEFAULT_MAX_BOUND = 4096


class BudgetExceeded(RuntimeError):
    """The step budget ran out before N_k was decided."""

    def __init__(self, k: int, steps: int, budget: int):
        self.k = k
        self.steps = steps
        self.budget = budget
        super().__init__(f"k={k}: {steps} modular steps exceed the budget of {budget}")


class CacheInconsistency(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundPolicy:
    initial_bound: int = DEFAULT_INITIAL_BOUND
    max_bound: int = DEFAULT_MAX_BOUND
    step_budget: int | None = None

    def __post_init__(self):
        if self.initial_bound < 2:
            raise ValueError(f"initial_bound must be >= 2, got {self.initial_bound}")
        if self.max_bound < 2:
            raise ValueError(f"max_bound must be >= 2, got {self.max_bound}")


_MISS = object()


class RunCache:
    """Per-prime run outcomes keyed by (l, p, r, k mod phi(p^r)).

    Once k >= r every exponent in the run is reduced modulo a divisor of
    phi(p^r), so k only matters through that residue class. Smaller k are
    keyed by k itself.

    Entries record (reached, first_failure) and answer any query whose limit
    they cover. Concurrent writers may compute the same entry twice, but two
    entries that disagree raise CacheInconsistency.

    With ``audit_rate > 0`` a random fraction of hits is recomputed from
    scratch and compared.
    """

    def __init__(self, audit_rate: float = 0.0, seed: int = 0):
        self._entries: dict[tuple, tuple[int, int | None]] = {}
        self._lock = threading.Lock()
        self._rng = random.Random(seed)
        self.audit_rate = audit_rate
        self.hits = 0
        self.misses = 0
        self.audits = 0

    def __len__(self):
        return len(self._entries)

    @staticmethod
    def key(k: int, l: int, p: int, r: int) -> tuple:
        if k >= r:
            phi = p ** (r - 1) * (p - 1)
            return (l, p, r, True, k % phi)
        return (l, p, r, False, k)

    def lookup(self, key: tuple, limit: int):
        """First failure within ``limit`` (int or None), or the miss sentinel."""
        with self._lock:
            entry = self._entries.get(key)
        if entry is None:
            return _MISS
        reached, failure = entry
        if failure is not None:
            return failure if failure <= limit else None
        p = key[1]
        # failures only happen at multiples of p
        if reached >= limit - limit % p:
            return None
        return _MISS

    def store(self, key: tuple, reached: int, failure: int | None) -> None:
        with self._lock:
            old = self._entries.get(key)
            if old is not None:
                _check_agree(key, old, (reached, failure))
                if old[1] is not None or old[0] >= reached:
                    return
            self._entries[key] = (reached, failure)

    def run(
        self, k: int, l: int, p: int, r: int, limit: int, accelerate: bool = False
    ) -> tuple[int | None, int, bool]:
        """(first failure or None, steps spent, hit) for one prime."""
        key = self.key(k, l, p, r)
        cached = self.lookup(key, limit)
        if cached is not _MISS:
            with self._lock:
                self.hits += 1
                audit = self.audit_rate > 0 and self._rng.random() < self.audit_rate
            if audit:
                fresh = run(k, l, p, r, limit)
                self.audits += 1
                if fresh.first_failure != cached:
                    raise CacheInconsistency(
                        f"cache says {cached}, recomputation says {fresh.first_failure} "
                        f"for k={k}, l={l}, p={p}, r={r}, limit={limit}"
                    )
            return cached, 0, True
        outcome = run(k, l, p, r, limit, accelerate=accelerate)
        with self._lock:
            self.misses += 1
        self.store(key, outcome.reached, outcome.first_failure)
        return outcome.first_failure, outcome.reached - 1, False


def _check_agree(key, a, b):
    (ra, fa), (rb, fb) = a, b
    if fa is not None and fb is not None:
        ok = fa == fb
    elif fa is not None:
        ok = fa > rb
    elif fb is not None:
        ok = fb > ra
    else:
        ok = True
    if not ok:
        raise CacheInconsistency(f"divergent cache entries for {key}: {a} vs {b}")


@dataclass(frozen=True)
class NkResult:
    """Outcome of an N_k search.

    Exact when ``n_k`` is set (certified by ``witness_prime``); otherwise
    N_k > ``bound_used``.
    """

    k: int
    l: int
    n_k: int | None
    witness_prime: int | None
    bound_used: int
    elapsed: float = field(default=0.0, compare=False)
    cache_hit: bool = field(default=False, compare=False)
    steps: int = field(default=0, compare=False)

    @property
    def is_exact(self) -> bool:
        return self.n_k is not None

    @property
    def lower_bound(self) -> int | None:
        return None if self.is_exact else self.bound_used

    def proves_greater_than(self, m: int) -> bool:
        if self.is_exact:
            return self.n_k > m
        return self.bound_used >= m

    def __str__(self):
        name = f"N_{self.k}" if self.l == 2 else f"N_{{{self.k},{self.l}}}"
        if self.is_exact:
            return f"{name} = {self.n_k}"
        return f"{name} > {self.bound_used}"


def _first_failure_within(k, l, bound, cache, steps, budget, accelerate):
    """(index, prime, steps, any_hit) of the earliest failure up to ``bound``."""
    best = witness = None
    any_hit = False
    for p in primes_up_to(bound):
        # p can only fail at a multiple of p; ties go to the smaller prime
        if best is not None and p >= best:
            break
        limit = bound if best is None else best - 1
        limit -= limit % p
        r = _factorial_valuation(bound, p)
        if cache is not None:
            failure, spent, hit = cache.run(k, l, p, r, limit, accelerate)
            any_hit |= hit
        else:
            outcome = run(k, l, p, r, limit, accelerate=accelerate)
            failure, spent = outcome.first_failure, outcome.reached - 1
        steps += spent
        if budget is not None and steps > budget:
            raise BudgetExceeded(k, steps, budget)
        if failure is not None:
            best, witness = failure, p
    return best, witness, steps, any_hit


def compute_Nk(
    k: int,
    l: int = 2,
    initial_bound: int = DEFAULT_INITIAL_BOUND,
    max_bound: int = DEFAULT_MAX_BOUND,
    *,
    step_budget: int | None = None,
    cache: RunCache | None = None,
    accelerate: bool = False,
) -> NkResult:
    """Find N_k for the (k, l)-Göbel sequence, doubling the bound up to ``max_bound``.

    An ``initial_bound`` above ``max_bound`` is clamped down to it. Raises
    BudgetExceeded if more than ``step_budget`` modular steps are needed.
    ``accelerate`` routes word-sized moduli through the compiled kernel.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if l < 2:
        raise ValueError(f"l must be >= 2, got {l}")
    if initial_bound < 2 or max_bound < 2:
        raise ValueError("bounds must be >= 2")
    start = time.perf_counter()
    bound = min(initial_bound, max_bound)
    steps = 0
    any_hit = False
    while True:
        n_k, witness, steps, hit = _first_failure_within(
            k, l, bound, cache, steps, step_budget, accelerate
        )
        any_hit |= hit
        if n_k is not None or bound >= max_bound:
            break
        logger.debug("k=%d: no failure up to %d, deepening", k, bound)
        bound = min(2 * bound, max_bound)
    return NkResult(
        k, l, n_k, witness, bound,
        elapsed=time.perf_counter() - start, cache_hit=any_hit, steps=steps,
    )


@dataclass(frozen=True)
class TheoremWitness:
    m: int
    modulus: int
    k: int


def construct_k_for_m(m: int) -> TheoremWitness:
    """Smallest k >= 2 with k = 1 mod m!/m#, which forces N_k > m."""
    modulus = factorial_over_primorial(m)
    return TheoremWitness(m, modulus, 1 + modulus if modulus >= 2 else 2)


@dataclass(frozen=True)
class TheoremCheck:
    m: int
    modulus: int
    k: int
    result: NkResult | None
    verified: bool
    error: str | None = None


def verify_theorem(
    m_max: int, policy: BoundPolicy | None = None, l: int = 2, cache: RunCache | None = None
) -> list[TheoremCheck]:
    """Build the witness for every m <= m_max and confirm N_k > m with the solver.

    A budget overrun for one m is recorded as unverified, not raised.
    """
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}")
    policy = policy or BoundPolicy()
    checks = []
    for m in range(1, m_max + 1):
        w = construct_k_for_m(m)
        try:
            res = compute_Nk(
                w.k, l, policy.initial_bound, max(policy.max_bound, m),
                step_budget=policy.step_budget, cache=cache,
            )
        except BudgetExceeded as exc:
            checks.append(TheoremCheck(m, w.modulus, w.k, None, False, str(exc)))
            continue
        checks.append(TheoremCheck(m, w.modulus, w.k, res, res.proves_greater_than(m)))
    return checks


@dataclass(frozen=True)
class SweepRecord:
    k: int
    l: int
    n_k: int | None
    lower_bound: int | None
    witness_prime: int | None
    n_k_is_prime: bool | None
    cache_hit: bool
    error: str | None = None
    elapsed: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def n_k_field(self) -> int | str:
        """n_k, or '>M' for a lower bound, or 'error'."""
        if self.n_k is not None:
            return self.n_k
        if self.lower_bound is not None:
            return f">{self.lower_bound}"
        return "error"


@dataclass
class SweepResult:
    records: list[SweepRecord]
    summary: dict


def _record(k, l, policy, cache, accelerate) -> SweepRecord:
    try:
        res = compute_Nk(
            k, l, policy.initial_bound, policy.max_bound,
            step_budget=policy.step_budget, cache=cache, accelerate=accelerate,
        )
    except BudgetExceeded as exc:
        return SweepRecord(k, l, None, None, None, None, False, error=str(exc))
    return SweepRecord(
        k, l, res.n_k, res.lower_bound, res.witness_prime,
        is_prime(res.n_k) if res.is_exact else None,
        res.cache_hit, elapsed=res.elapsed,
    )


def _sweep_chunk(ks, l, policy, audit_rate, accelerate):
    cache = RunCache(audit_rate=audit_rate)
    return [_record(k, l, policy, cache, accelerate) for k in ks]


def summarize(records: list[SweepRecord]) -> dict:
    exact = [rec for rec in records if rec.n_k is not None]
    min_nk = min((rec.n_k for rec in exact), default=None)
    return {
        "count": len(records),
        "exact_count": len(exact),
        "lower_bound_count": sum(rec.lower_bound is not None for rec in records),
        "error_count": sum(not rec.ok for rec in records),
        "min_n_k": min_nk,
        "argmin_k": [rec.k for rec in exact if rec.n_k == min_nk],
        "max_n_k": max((rec.n_k for rec in exact), default=None),
        "prime_count": sum(bool(rec.n_k_is_prime) for rec in exact),
        "prime_fraction": (
            sum(bool(rec.n_k_is_prime) for rec in exact) / len(exact) if exact else None
        ),
        "cache_hit_count": sum(rec.cache_hit for rec in records),
    }


def sweep(
    k_from: int,
    k_to: int,
    l: int = 2,
    policy: BoundPolicy | None = None,
    jobs: int = 1,
    *,
    cache: RunCache | None = None,
    audit_rate: float = 0.0,
    accelerate: bool = True,
) -> SweepResult:
    """N_k for every k in [k_from, k_to], one record per k, ordered by k.

    With ``jobs > 1`` the range is cut into contiguous chunks handled by worker
    processes, each with its own cache; chunking depends only on the range and
    ``jobs``, so output is reproducible.
    """
    if k_from < 2 or k_to < k_from:
        raise ValueError(f"need 2 <= k_from <= k_to, got [{k_from}, {k_to}]")
    policy = policy or BoundPolicy()
    ks = list(range(k_from, k_to + 1))
    if jobs <= 1:
        cache = cache if cache is not None else RunCache(audit_rate=audit_rate)
        records = [_record(k, l, policy, cache, accelerate) for k in ks]
    else:
        n_chunks = min(len(ks), jobs * 4)
        size = -(-len(ks) // n_chunks)
        chunks = [ks[i : i + size] for i in range(0, len(ks), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(
                _sweep_chunk, chunks, [l] * len(chunks),
                [policy] * len(chunks), [audit_rate] * len(chunks),
                [accelerate] * len(chunks),
            )
            records = [rec for part in parts for rec in part]
    return SweepResult(records, summarize(records))
