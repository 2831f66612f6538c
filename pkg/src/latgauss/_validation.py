"""Input validation helpers shared by the public entry points.

Exact quantities are fractions.Fraction throughout; floats are converted
exactly (every float is a dyadic rational), never by decimal approximation.
"""

from fractions import Fraction

import numpy as np


def as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as an exact rational")


def as_fraction_vector(v, length=None):
    vec = tuple(as_fraction(x) for x in v)
    if length is not None and len(vec) != length:
        raise ValueError(f"expected a vector of length {length}, got {len(vec)}")
    return vec


def as_fraction_matrix(rows):
    mat = tuple(as_fraction_vector(r) for r in rows)
    if mat and any(len(r) != len(mat[0]) for r in mat):
        raise ValueError("rows have inconsistent lengths")
    return mat


def as_float_vector(v, length=None):
    arr = np.asarray([float(x) for x in v], dtype=np.float64)
    if length is not None and arr.shape != (length,):
        raise ValueError(f"expected a vector of length {length}, got shape {arr.shape}")
    return arr


def check_eps(eps, upper=1.0):
    eps = float(eps)
    if not 0.0 < eps < upper:
        raise ValueError(f"eps must lie in (0, {upper}), got {eps}")
    return eps


def check_positive(name, x):
    x = float(x)
    if not x > 0.0 or not np.isfinite(x):
        raise ValueError(f"{name} must be a positive finite number, got {x}")
    return x


def check_count(name, k):
    k = int(k)
    if k <= 0:
        raise ValueError(f"{name} must be a positive integer, got {k}")
    return k
