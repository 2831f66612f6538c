"""Shared helpers: a brute-force closest-vector oracle over a coefficient box."""

import itertools
from fractions import Fraction

from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def box_cvp(basis, target, bound):
    """Exact minimum squared distance and the set of optimal coefficient tuples.

    Scans every integer coefficient vector with entries in [-bound, bound],
    so it is only trustworthy when the true optimum lies inside that box.
    """
    target = tuple(Fraction(x) for x in target)
    best = None
    argmin = set()
    for coeffs in itertools.product(range(-bound, bound + 1), repeat=basis.rank):
        vec = basis.vector(coeffs)
        sq = sum((a - b) ** 2 for a, b in zip(vec, target))
        if best is None or sq < best:
            best, argmin = sq, {coeffs}
        elif sq == best:
            argmin.add(coeffs)
    return best, argmin


def frac_vector(ints, den):
    return tuple(Fraction(int(v), den) for v in ints)
