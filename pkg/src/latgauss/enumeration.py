"""Lattice point enumeration and the exact solvers built on it.

The search walks coefficient space depth-first in Schnorr-Euchner zigzag
order using float64 Gram-Schmidt data, with a small relative slack on the
pruning bound so rounding can only over-include. Every emitted candidate is
then accepted or rejected by an exact integer comparison after denominators
are cleared, so the returned point sets, shortest vectors, and closest
vectors are exact. A node budget guards against runaway trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import config
from ._validation import as_fraction_vector
from .lattice import (
    LatticeBasis,
    _gram_schmidt,
    invert_matrix,
    nearest_plane,
    project_lattice,
    sqdist,
)

# relative slack applied to float pruning bounds; desk-scale float error is
# ~1e-10 relative, so this only admits extra candidates for the exact filter
SLACK = 1e-6
ABS_SLACK = 1e-9

_CHUNK = 1 << 14


class BudgetExceeded(RuntimeError):
    def __init__(self, nodes, budget):
        super().__init__(
            f"enumeration visited {nodes} nodes, exceeding the budget of {budget}; "
            "raise LATGAUSS_BUDGET or pass a larger budget if this is intended"
        )
        self.nodes = nodes
        self.budget = budget


def _lcm(a, b):
    return a * b // math.gcd(a, b)


def _integerize(basis, center):
    """Clear denominators: return (int rows, int center, d) for d*L and d*center."""
    d = basis.denominator
    for x in center:
        d = _lcm(d, x.denominator)
    rows_int = [[int(x * d) for x in row] for row in basis.rows]
    center_int = [int(x * d) for x in center]
    return rows_int, center_int, d


def _search(mu, bstar2, tau, const, bound, budget, emit):
    """DFS over coefficient space.

    mu[i][j] (j < i) are float Gram-Schmidt coefficients, bstar2 the squared
    orthogonal norms, tau the center's Gram-Schmidt coordinates, const an
    additive squared offset (off-span component of the center). emit is
    called with (coeff list, float sqdist) for complete assignments inside
    bound[0] and may tighten bound[0] in place. Returns the node count.
    """
    n = len(bstar2)
    if n == 0:
        emit([], const)
        return 0
    x = [0] * n
    x0 = [0] * n
    sgn = [1] * n
    off = [0] * n
    center = [0.0] * n
    part = [0.0] * (n + 1)
    part[n] = const
    nodes = 0

    def reset(i):
        acc = tau[i]
        mi = mu[i]
        for j in range(i + 1, n):
            acc -= mi[j] * x[j]
        center[i] = acc
        x[i] = int(round(acc))
        x0[i] = x[i]
        sgn[i] = 1 if acc >= x[i] else -1
        off[i] = 0

    def advance(i):
        o = off[i]
        if o == 0:
            o = sgn[i]
        elif (o > 0) == (sgn[i] > 0):
            o = -o
        else:
            o = -o + sgn[i]
        off[i] = o
        x[i] = x0[i] + o

    i = n - 1
    reset(i)
    while True:
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(nodes, budget)
        diff = x[i] - center[i]
        p = part[i + 1] + diff * diff * bstar2[i]
        if p <= bound[0]:
            if i == 0:
                emit(x, p)
                advance(0)
            else:
                part[i] = p
                i -= 1
                reset(i)
        else:
            # zigzag order is monotone in the level contribution, so the
            # first failure exhausts the level
            i += 1
            if i == n:
                return nodes
            advance(i)


def _prepare(basis, center):
    center = as_fraction_vector(center, basis.ambient)
    rows_int, center_int, d = _integerize(basis, center)
    gs = basis.gram_schmidt
    n = basis.rank
    # transposed so row i holds the influence of x_j (j > i) on level i's center
    mu = [[float(gs.mu[j][i]) if j > i else 0.0 for j in range(n)] for i in range(n)]
    d2 = d * d
    bstar2 = [float(s * d2) for s in gs.sqnorms]
    tau = []
    perp = center
    for w, s in zip(gs.orthogonal, gs.sqnorms):
        t = sum((a * b for a, b in zip(perp, w)), Fraction(0)) / s
        tau.append(float(t))
        perp = tuple(a - t * b for a, b in zip(perp, w))
    sq_perp = sum((a * a for a in perp), Fraction(0))
    return rows_int, center_int, d, mu, bstar2, tau, float(sq_perp * d2), sq_perp


def _exact_sqdists(coeffs, rows_int, center_int):
    """Exact scaled squared distances for an (K, n) int coefficient array."""
    k, n = coeffs.shape
    m = len(center_int)
    max_b = max((abs(v) for row in rows_int for v in row), default=0)
    max_c = int(np.abs(coeffs).max()) if coeffs.size else 0
    max_t = max((abs(v) for v in center_int), default=0)
    coord_bound = n * max_c * max_b + max_t
    if m * coord_bound * coord_bound < 2 ** 62:
        b_arr = np.array(rows_int, dtype=np.int64).reshape(n, m)
        pts = coeffs @ b_arr if n else np.zeros((k, m), dtype=np.int64)
        diff = pts - np.array(center_int, dtype=np.int64)
        return np.einsum("ij,ij->i", diff, diff), None
    # big-integer fallback
    out = []
    cols = list(zip(*rows_int)) if n else [()] * m
    for row in coeffs.tolist():
        acc = 0
        for j in range(m):
            v = sum(c * b for c, b in zip(row, cols[j])) - center_int[j]
            acc += v * v
        out.append(acc)
    return None, out


@dataclass
class BallPoints:
    """All lattice points within an exact radius of a center.

    sqdist of point i is scaled_sqdist[i] / scale_sq as an exact rational.
    """

    basis: LatticeBasis
    center: tuple
    coeffs: np.ndarray
    scaled_sqdist: np.ndarray
    scale_sq: int
    nodes: int

    def __len__(self):
        return self.coeffs.shape[0]

    def points_float(self):
        if self.basis.rank == 0:
            return np.zeros((len(self), self.basis.ambient))
        return self.coeffs.astype(np.float64) @ self.basis.float_rows

    def sqdists_float(self):
        return self.scaled_sqdist.astype(np.float64) / float(self.scale_sq)

    def exact_sqdist(self, i):
        return Fraction(int(self.scaled_sqdist[i]), self.scale_sq)


def enumerate_ball(basis, center, radius, budget=None):
    """Exactly the lattice points y with ||y - center|| <= radius.

    radius may be a float or Fraction; the boundary is included exactly.
    Output coefficients are sorted lexicographically.
    """
    budget = config.enum_budget(budget)
    r = radius if isinstance(radius, Fraction) else Fraction(float(radius))
    if r < 0:
        raise ValueError("radius must be nonnegative")
    center = as_fraction_vector(center, basis.ambient)
    rows_int, center_int, d, mu, bstar2, tau, perp_f, sq_perp = _prepare(basis, center)
    n = basis.rank
    r2 = r * r * d * d
    thr = r2.numerator // r2.denominator

    chunks = []
    buf = np.empty((_CHUNK, n), dtype=np.int64)
    fill = [0]

    def emit(x, _p):
        k = fill[0]
        buf[k, :] = x
        fill[0] = k + 1
        if fill[0] == _CHUNK:
            chunks.append(buf.copy())
            fill[0] = 0

    bound = [float(r2) * (1.0 + SLACK) + ABS_SLACK]
    nodes = _search(mu, bstar2, tau, perp_f, bound, budget, emit)
    chunks.append(buf[: fill[0]].copy())
    coeffs = np.concatenate(chunks, axis=0)

    sq64, sqbig = _exact_sqdists(coeffs, rows_int, center_int)
    if sq64 is not None:
        keep = sq64 <= thr
        coeffs, sq = coeffs[keep], sq64[keep]
    else:
        keep = [i for i, s in enumerate(sqbig) if s <= thr]
        coeffs = coeffs[keep]
        sq = np.array([sqbig[i] for i in keep], dtype=object)
    if len(coeffs) and n:
        order = np.lexsort(coeffs.T[::-1])
        coeffs, sq = coeffs[order], sq[order]
    return BallPoints(basis, center, coeffs, sq, d * d, nodes)


def _best_candidate(cands, rows_int, center_int, d, hard_thr=None):
    """Exact argmin over float-screened candidates; lexicographic tie-break."""
    best = None
    for x in cands:
        acc = 0
        for j in range(len(center_int)):
            v = sum(c * b for c, b in zip(x, (row[j] for row in rows_int))) - center_int[j]
            acc += v * v
        if hard_thr is not None and acc > hard_thr:
            continue
        key = (acc, x)
        if best is None or key < best:
            best = key
    if best is None:
        return None
    sq, x = best
    return tuple(x), Fraction(sq, d * d)


def shortest_vector(basis, budget=None):
    """A shortest nonzero lattice vector, ties broken by smallest coefficients.

    Returns (vector, coeffs, sqnorm) with exact entries.
    """
    if basis.rank == 0:
        raise ValueError("the zero lattice has no nonzero vector")
    budget = config.enum_budget(budget)
    zero = (Fraction(0),) * basis.ambient
    rows_int, center_int, d, mu, bstar2, tau, perp_f, _ = _prepare(basis, zero)
    start = min(sum(v * v for v in row) for row in rows_int)
    bound = [float(start) * (1.0 + SLACK) + ABS_SLACK]
    cands = []

    def emit(x, p):
        # only nonzero points count; the origin never tightens the bound
        if not any(x):
            return
        cands.append(list(x))
        if p < bound[0]:
            bound[0] = p * (1.0 + SLACK) + ABS_SLACK

    _search(mu, bstar2, tau, perp_f, bound, budget, emit)
    coeffs, sq = _best_candidate(cands, rows_int, center_int, d)
    return basis.vector(coeffs), coeffs, sq


def closest_vector(basis, target, budget=None, radius=None):
    """The exact closest lattice vector to target (full CVP by enumeration).

    With radius given, only points within that exact distance are considered
    and None is returned when there are none. Ties broken by lexicographically
    smallest coefficient vector.
    """
    t = as_fraction_vector(target, basis.ambient)
    if basis.rank == 0:
        zero = (Fraction(0),) * basis.ambient
        if radius is not None and sqdist(zero, t) > Fraction(radius) ** 2:
            return None
        return zero, (), sqdist(zero, t)
    budget = config.enum_budget(budget)
    rows_int, center_int, d, mu, bstar2, tau, perp_f, _ = _prepare(basis, t)
    bvec, _bc = nearest_plane(basis, t)
    babai_sq = sqdist(bvec, t) * d * d
    start = float(babai_sq)
    hard_thr = None
    if radius is not None:
        r = radius if isinstance(radius, Fraction) else Fraction(float(radius))
        r2 = r * r * d * d
        hard_thr = r2.numerator // r2.denominator
        start = min(start, float(r2))
    bound = [start * (1.0 + SLACK) + ABS_SLACK]
    cands = []

    def emit(x, p):
        cands.append(list(x))
        if p < bound[0]:
            bound[0] = p * (1.0 + SLACK) + ABS_SLACK

    _search(mu, bstar2, tau, perp_f, bound, budget, emit)
    got = _best_candidate(cands, rows_int, center_int, d, hard_thr=hard_thr)
    if got is None:
        return None
    coeffs, sq = got
    return basis.vector(coeffs), coeffs, sq


def lambda1(basis, budget=None):
    """Exact squared length of the shortest nonzero vector."""
    return shortest_vector(basis, budget=budget)[2]


def _xgcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def complete_to_unimodular(a):
    """An integer matrix with determinant +-1 whose first row is a.

    Requires gcd(a) = 1. Built by accumulating the 2x2 gcd column operations
    that reduce a to e_1 and inverting exactly.
    """
    a = [int(v) for v in a]
    n = len(a)
    c = [[int(i == j) for j in range(n)] for i in range(n)]
    for i in range(1, n):
        if a[i] == 0:
            continue
        g, u, v = _xgcd(a[0], a[i])
        p, q = a[0] // g, a[i] // g
        for row in c:
            r0, ri = row[0], row[i]
            row[0] = u * r0 + v * ri
            row[i] = -q * r0 + p * ri
        a[0], a[i] = g, 0
    if a[0] == -1:
        for row in c:
            row[0] = -row[0]
        a[0] = 1
    if a[0] != 1:
        raise ValueError("coefficient vector is not primitive")
    inv = invert_matrix(tuple(tuple(Fraction(v) for v in row) for row in c))
    return [[int(x) for x in row] for row in inv]


def _size_reduce(rows):
    """Make |mu_ij| <= 1/2 by integer row operations (exact)."""
    rows = [list(r) for r in rows]
    for i in range(1, len(rows)):
        gs = _gram_schmidt(tuple(tuple(r) for r in rows[: i + 1]))
        for j in range(i - 1, -1, -1):
            c = round(gs.mu[i][j])
            if c:
                rows[i] = [x - c * y for x, y in zip(rows[i], rows[j])]
                gs = _gram_schmidt(tuple(tuple(r) for r in rows[: i + 1]))
    return rows


def hkz_reduce(basis, svp=None, budget=None):
    """A Hermite-Korkine-Zolotarev reduced basis of the same lattice.

    b*_k is a shortest vector of the k-th projected lattice for every k, and
    the result is size-reduced. svp, when given, maps a LatticeBasis to the
    coefficient vector of a short vector; plugging in an approximate solver
    yields the relaxed (factor-g) variant with identical bookkeeping.
    """
    if svp is None:
        svp = lambda b: shortest_vector(b, budget=budget)[1]
    rows = [tuple(r) for r in basis.rows]
    n = len(rows)
    for k in range(n - 1):
        work = LatticeBasis(rows, ambient=basis.ambient)
        coeffs = list(svp(project_lattice(work, k)))
        g = 0
        for v in coeffs:
            g = math.gcd(g, abs(int(v)))
        if g > 1:
            coeffs = [v // g for v in coeffs]
        u = complete_to_unimodular(coeffs)
        tail = rows[k:]
        new_tail = []
        for urow in u:
            vec = [Fraction(0)] * basis.ambient
            for c, r in zip(urow, tail):
                if c:
                    for j, x in enumerate(r):
                        vec[j] += c * x
            new_tail.append(tuple(vec))
        rows[k:] = new_tail
    rows = _size_reduce(rows)
    return LatticeBasis(rows, ambient=basis.ambient)


def shortest_via_promise_cvp(basis, cvp_solver):
    """Shortest-vector search through closest-vector queries.

    For each basis row b_i, queries the sublattice where the i-th coefficient
    is doubled with target b_i; the difference b_i - answer is a nonzero
    lattice vector, and the best one over i is shortest up to the solver's
    approximation factor. Returns the coefficient vector wrt basis.
    """
    n = basis.rank
    best = None
    for i in range(n):
        doubled = LatticeBasis(
            [tuple(2 * x for x in r) if j == i else r for j, r in enumerate(basis.rows)],
            ambient=basis.ambient,
        )
        ans = cvp_solver(doubled, basis.rows[i])
        if ans is None:
            continue
        vec, coeffs = ans
        full = [-2 * c if j == i else -c for j, c in enumerate(coeffs)]
        full[i] += 1
        diff = tuple(a - b for a, b in zip(basis.rows[i], vec))
        sq = sum((x * x for x in diff), Fraction(0))
        if sq == 0:
            continue
        key = (sq, tuple(full))
        if best is None or key < best:
            best = key
    if best is None:
        raise RuntimeError("no closest-vector query produced a nonzero vector")
    return best[1]
