"""Integrality of k-Göbel sequences via p-adic modular recursion."""

from goebel.arith import (
    PrimePowerModulus,
    euler_phi_prime_power,
    factorial_over_primorial,
    factorial_valuation,
    is_prime,
    mod_inverse,
    mod_pow_reduced,
    padic_valuation,
    primes_up_to,
    primorial,
)
from goebel.exact import (
    DigitBudgetExceeded,
    ExactTerm,
    exact_first_noninteger,
    exact_residue,
    exact_terms,
)
from goebel.padic import (
    PadicTermState,
    PrecisionExhausted,
    RunOutcome,
    closed_form_check_kp,
    init,
    run,
    step,
    trajectory,
)
from goebel.solver import (
    BoundPolicy,
    BudgetExceeded,
    NkResult,
    RunCache,
    SweepRecord,
    SweepResult,
    TheoremWitness,
    compute_Nk,
    construct_k_for_m,
    sweep,
    verify_theorem,
)

__version__ = "0.1.0"
