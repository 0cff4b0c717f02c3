"""Exact binomial parity, 2-adic valuations and the K-theory counting functions.

All functions work on plain Python integers.  Binomial coefficients follow the
truncating convention ``C(a, b) = 0`` when ``b < 0`` or ``a < b``, except in
:func:`binom_parity_int`, which uses the analytic definition for a negative
upper index.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_ARG = 2**20


def _guard(*values: int) -> None:
    for v in values:
        if v > MAX_ARG or v < -MAX_ARG:
            raise ValueError(f"argument {v} outside supported range |v| <= 2**20")


def binom_parity(b: int, a: int) -> int:
    """Parity of C(b, a): 1 iff 0 <= a <= b and every set bit of a is set in b."""
    _guard(b, a)
    if a < 0 or a > b:
        return 0
    return 1 if a & ~b == 0 else 0


def binom_val2(b: int, a: int) -> int:
    """2-adic valuation of C(b, a), counted as the carries of a + (b - a) in base 2."""
    _guard(b, a)
    if a < 0 or a > b:
        raise ValueError(f"binom_val2 needs 0 <= a <= b, got b={b}, a={a}")
    return a.bit_count() + (b - a).bit_count() - b.bit_count()


def binom_parity_int(u: int, v: int) -> int:
    """Parity of the analytic binomial u(u-1)...(u-v+1)/v!.

    For ``u < 0`` the reflection ``C(u, v) = (-1)^v C(v - u - 1, v)`` keeps the
    computation in non-negative integers.
    """
    if v < 0:
        return 0
    if u >= 0:
        return binom_parity(u, v)
    return binom_parity(v - u - 1, v)


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def two_adic_order(s: int) -> int:
    """Exponent of the largest power of 2 dividing ``s`` (s > 0)."""
    if s <= 0:
        raise ValueError("two_adic_order needs s > 0")
    return (s & -s).bit_length() - 1


def two_power_pair(n: int) -> tuple[int, int] | None:
    """Return ``(a, b)`` with ``n = 2**a + 2**b - 1`` and ``a > b >= 0``, else None."""
    m = n + 1
    if n < 2 or m.bit_count() != 2:
        return None
    return (m.bit_length() - 1, two_adic_order(m))


# K-theory of real projective spaces ------------------------------------------

def phi(m: int) -> int:
    """Number of 0 < s <= m with s = 0, 1, 2 or 4 mod 8."""
    if m < 0:
        raise ValueError("phi needs m >= 0")
    q, rem = divmod(m, 8)
    return 4 * q + sum(1 for r in (1, 2, 4) if r <= rem)


def r_exp(m: int) -> int:
    """Greatest s >= 1 such that 2**(s-1) * C(m+1, s) is not divisible by 2**phi(m).

    Returns 0 when no such s exists.  The search is capped at
    ``min(m + 1, phi(m))``: beyond ``m + 1`` the binomial vanishes and beyond
    ``phi(m)`` the power ``2**(s-1)`` alone is divisible.
    """
    _guard(m + 1)
    f = phi(m)
    for s in range(min(m + 1, f), 0, -1):
        if binom_val2(m + 1, s) + s - 1 < f:
            return s
    return 0


def kappa(n: int) -> int:
    """max{0 < s < 2**(n-1) : s - R(s) < 2**(n-1) - n}, R(s) the 2-adic order; 0 if empty."""
    if n < 1:
        raise ValueError("kappa needs n >= 1")
    half = 1 << (n - 1)
    bound = half - n
    # R(s) <= n - 2 on the range, so no s above bound + n - 3 can qualify.
    for s in range(min(half - 1, bound + n - 3), 0, -1):
        if s - two_adic_order(s) < bound:
            return s
    return 0


def s0(n: int) -> int:
    """2**(n-1) - 2**r with r the least integer such that r + 2**r > n."""
    if n < 1:
        raise ValueError("s0 needs n >= 1")
    r = 0
    while r + (1 << r) <= n:
        r += 1
    return (1 << (n - 1)) - (1 << r)


@dataclass(frozen=True)
class KTheoryProfile:
    """Counting data for RP^(2**n - 1)."""

    n: int
    phi: int
    kappa: int
    r_exp: int
    s0: int


def ktheory_profile(n: int) -> KTheoryProfile:
    """Profile of RP^(2**n - 1) for 3 <= n <= 20.

    Asserts the identities phi(2**n - 1) = 2**(n-1) - 1 and, for n >= 4,
    kappa(n) = r_exp(2**n - 1) instead of assuming them.
    """
    if not 3 <= n <= 20:
        raise ValueError(f"ktheory_profile supports 3 <= n <= 20, got {n}")
    m = (1 << n) - 1
    prof = KTheoryProfile(n=n, phi=phi(m), kappa=kappa(n), r_exp=r_exp(m), s0=s0(n))
    if prof.phi != (1 << (n - 1)) - 1:
        raise AssertionError(f"phi(2^{n}-1) = {prof.phi}")
    if n >= 4 and prof.kappa != prof.r_exp:
        raise AssertionError(f"kappa({n}) = {prof.kappa} but r_exp = {prof.r_exp}")
    return prof
