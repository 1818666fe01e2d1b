import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from goebel.arith import PrimePowerModulus, euler_phi_prime_power, factorial_valuation
from goebel.exact import exact_residue, exact_terms
from goebel.padic import (
    PadicTermState,
    PrecisionExhausted,
    StopReason,
    closed_form_check_kp,
    init,
    run,
    step,
    trajectory,
)


@pytest.mark.parametrize(
    "p, r, l, residue",
    [(3, 2, 2, 2), (2, 4, 2, 2), (3, 2, 11, 2), (5, 1, 10, 0)],
)
def test_init(p, r, l, residue):
    state = init(p, r, l)
    assert (state.n, state.s, state.residue) == (1, r, residue)
    assert state.modulus == p**r


def test_init_validation():
    with pytest.raises(ValueError):
        init(4, 2)
    with pytest.raises(ValueError):
        init(3, 0)


def test_step_hand_trace():
    s1 = init(3, 2, 2)
    s2 = step(s1, 2)
    # t = 1*2 + 2^2 = 6, n = 2 is a unit, 6 * inv(2) = 6 * 5 = 30 = 3 mod 9
    assert (s2.n, s2.s, s2.residue) == (2, 2, 3)
    s3 = step(s2, 2)
    # t = 2*3 + 3^2 = 15, v_3(3) = 1, 15/3 = 5 = 2 mod 3
    assert (s3.n, s3.s, s3.residue) == (3, 1, 2)
    assert [t.numerator for t in exact_terms(2, 2, 3)] == [2, 3, 5]


def test_failure_is_absorbing():
    failed = PadicTermState(5, 3, 4, 3, None)
    nxt = step(failed, 7)
    assert nxt.failed and nxt.n == 5 and nxt.s == 2


def test_step_beyond_precision_raises():
    state = init(2, 1, 2)
    state = step(step(state, 2), 2)  # n = 3, s = 0
    assert state.s == 0
    with pytest.raises(PrecisionExhausted):
        step(state, 2)


def test_trivial_ring_steps_while_unit_index():
    # p = 5, r = 1: n = 5 drops s to 0; n = 6..9 are units and keep stepping
    states = trajectory(2, 2, 5, 1, 9)
    assert [s.n for s in states] == list(range(1, 10))
    assert all(s.residue == 0 for s in states[4:])


def test_run_completes():
    out = run(2, 2, 3, 2, 5)
    assert out.stop_reason is StopReason.COMPLETED
    assert out.first_failure is None and out.reached == 5


def test_run_detects_n2_failure_at_43():
    r = factorial_valuation(50, 43)
    assert r == 1
    out = run(2, 2, 43, r, 50)
    assert out.first_failure == 43
    assert out.stop_reason is StopReason.FAILED
    assert out.terminal_state.failed and out.reached == 43


@pytest.mark.parametrize("p, r", [(2, 1), (2, 3), (3, 1), (3, 4), (5, 2), (7, 1)])
def test_run_precision_ladder(p, r):
    out = run(2, 2, p, r, 10**4)
    assert out.stop_reason is StopReason.PRECISION_EXHAUSTED
    assert factorial_valuation(out.reached, p) <= r < factorial_valuation(out.reached + 1, p)
    assert out.terminal_state.s == r - factorial_valuation(out.reached, p)


def test_run_precision_example_r1_p2():
    out = run(2, 2, 2, 1, 10)
    assert out.stop_reason is StopReason.PRECISION_EXHAUSTED
    assert out.reached == 3  # v_2(3!) = 1, v_2(4!) = 3


def test_precision_ladder_along_trajectory():
    for p, r in [(2, 8), (3, 5), (5, 3), (7, 2)]:
        states = trajectory(3, 4, p, r, 100)
        for prev, cur in zip(states, states[1:]):
            assert cur.s == r - factorial_valuation(cur.n, p)
            v = factorial_valuation(cur.n, p) - factorial_valuation(prev.n, p)
            assert cur.s == prev.s - v
            if not cur.failed:
                assert 0 <= cur.residue < p**cur.s


@settings(max_examples=200, deadline=None)
@given(
    p=st.sampled_from([2, 3, 5, 7, 11, 13, 19, 43]),
    r=st.integers(1, 12),
    k=st.one_of(st.integers(2, 60), st.integers(2, 10**25)),
    l=st.integers(2, 10**6),
    n_max=st.integers(1, 120),
)
def test_run_agrees_with_step(p, r, k, l, n_max):
    states = trajectory(k, l, p, r, n_max)
    expected_failure = next((s.n for s in states if s.failed), None)
    for accelerate in (False, True):
        out = run(k, l, p, r, n_max, accelerate=accelerate)
        assert out.first_failure == expected_failure
        if expected_failure is None:
            assert out.terminal_state == states[-1]
            assert out.reached == states[-1].n


def _check_against_exact(k, l, p, r, terms):
    states = trajectory(k, l, p, r, len(terms))
    seen_failure = False
    for state, term in zip(states, terms):
        residue = exact_residue(term, PrimePowerModulus(p, state.s))
        if seen_failure:
            assert state.failed
        elif residue is None:
            # first term outside Z_(p): the modular run must fail right here
            assert state.failed, (k, l, p, r, state.n)
            seen_failure = True
        else:
            assert state.residue == residue, (k, l, p, r, state.n)


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("l", [2, 3, 5, 10])
def test_oracle_consistency(k, l):
    terms = exact_terms(k, l, 9, digit_budget=10**6)
    for p in [2, 3, 5, 7, 11, 13, 17, 19, 23]:
        for r in range(1, 9):
            _check_against_exact(k, l, p, r, terms)


def test_oracle_catches_p_denominator():
    # (2, 3)-Göbel: first non-integer at n = 7 with 7 in the denominator
    terms = exact_terms(2, 3, 7)
    assert terms[-1].denominator % 7 == 0
    assert run(2, 3, 7, 1, 7).first_failure == 7
    _check_against_exact(2, 3, 7, 1, terms)


def test_periodicity_randomized():
    rng = random.Random(20240607)
    for _ in range(100):
        p = rng.choice([2, 3, 5, 7])
        r = rng.randint(1, 6)
        phi = euler_phi_prime_power(p, r)
        k = rng.randint(max(r, 2), 300)
        k2 = k + phi * rng.randint(1, 10**12)
        l = rng.randint(2, 1000)
        assert trajectory(k, l, p, r, 200) == trajectory(k2, l, p, r, 200)


@pytest.mark.parametrize("p, r, l, n_max", [(2, 5, 2, 40), (3, 4, 2, 40), (5, 3, 7, 40), (7, 2, 3, 30)])
def test_failure_monotone_in_precision(p, r, l, n_max):
    for k in range(2, 40):
        out = run(k, l, p, r, n_max)
        if out.first_failure is None:
            continue
        for extra in (1, 2):
            assert run(k, l, p, r + extra, n_max).first_failure == out.first_failure


def test_closed_form_examples():
    # p=3, r=2, l=6, k_p = 7: n=2 -> 6 * inv(2) = 3 mod 9; n=3 -> 2 mod 3
    states = trajectory(7, 6, 3, 2, 3)
    assert [(s.residue, s.s) for s in states] == [(6, 2), (3, 2), (2, 1)]
    assert closed_form_check_kp(3, 2, 6)
    assert closed_form_check_kp(3, 2, 2)
    assert closed_form_check_kp(2, 7, 2)


def test_closed_form_detects_wrong_k():
    # sanity: with a k not congruent to k_p the two-branch form does not hold
    states = trajectory(4, 2, 3, 2, 6)
    assert any(s.residue != 2 % s.modulus for s in states if not s.failed)
