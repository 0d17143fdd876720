"""Exact counts of derangements and of permutations by number of unfixed points."""

import math

from .errors import ParameterError


def count_derangements(n: int) -> int:
    """D(n) = n! * sum_{k=0}^{n} (-1)^k / k!, evaluated in exact integers."""
    if n < 0:
        raise ParameterError("derangement count needs n >= 0")
    fact_n = math.factorial(n)
    return sum((-1) ** k * (fact_n // math.factorial(k)) for k in range(n + 1))


def orbit_size(n: int, t: int) -> int:
    """Number of permutations of [n] with exactly t unfixed points: C(n,t) * D(t)."""
    if not 0 <= t <= n:
        raise ParameterError("need 0 <= t <= n")
    return math.comb(n, t) * count_derangements(t)
