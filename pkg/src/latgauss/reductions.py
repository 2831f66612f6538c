"""Reductions from full closest-vector search to promise solvers.

A promise solver is any callable ``solver(basis, target) -> vector`` that
returns an exact lattice vector close to the target, or None on failure.
``oracle_inner`` wraps the exact enumeration solver and never fails;
``bdd_inner`` adapts a fitted decoder, surfacing its refusals as None.
The reducers treat a failed level or trial as a removed candidate, so a
partial solver degrades the approximation factor instead of the output's
validity: every returned vector is an exact lattice member.

Three schemes are implemented. The projection scan queries the solver on
each tail projection of an HKZ basis, lifts the answer, and completes it
below the cut with Babai's nearest plane. The block variant prepares
solver state only for short slices of the projections, chained by lifting
each answer r cuts forward. The sparsification scheme restricts to a
random index-p sublattice coset so that the solver sees a lattice whose
minimum distance is large relative to the target distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ._estimator import ParamMixin
from ._validation import as_fraction, as_fraction_vector, check_count, check_positive
from .decoder import EXACT, BddDecoder, bdd_param_plan
from .enumeration import (
    BudgetExceeded,
    closest_vector,
    enumerate_ball,
    hkz_reduce,
    shortest_via_promise_cvp,
)
from .lattice import (
    ZERO,
    LatticeBasis,
    _dot,
    _sub_scaled,
    lattice_coefficients,
    nearest_plane,
    project_away_from_prefix,
    project_lattice,
    sqdist,
)
from .rng import stream


def oracle_inner(budget=None):
    """The exact closest-vector callback; satisfies any promise trivially.

    Pairing the reducers with this solver isolates their approximation
    bookkeeping, which is how the factor audits are run.
    """

    def solve(basis, target):
        return closest_vector(basis, target, budget=budget)[0]

    return solve


def bdd_inner(alpha=0.15, seed=0, advice_factor=2.0, budget=None):
    """A promise solver backed by BddDecoder, one fit per distinct lattice.

    Decoder parameters come from bdd_param_plan(alpha, rank). A decode
    that trips the denominator guard reports failure (None) rather than
    handing back a vector without its certificate.
    """
    check_positive("alpha", alpha)
    fitted = {}

    def solve(basis, target):
        dec = fitted.get(basis)
        if dec is None:
            eps, count = bdd_param_plan(alpha, basis.rank, factor=advice_factor)
            dec = BddDecoder(eps=eps, n_advice=count, seed=seed, budget=budget).fit(basis)
            fitted[basis] = dec
        res = dec.decode([float(x) for x in target])
        return res.vector if res.status == EXACT else None

    return solve


@dataclass(frozen=True)
class KannanAdvice:
    """HKZ basis plus the tail projections handed to the inner solver.

    per_level[i] is the rank n-i lattice obtained by projecting away the
    first i basis rows, for i = 0..n; the last entry has rank 0.
    """

    hkz: LatticeBasis
    per_level: tuple


def kannan_prepare(basis, budget=None):
    """Advice for kannan_reduce: HKZ basis and all tail projections."""
    hkz = hkz_reduce(basis, budget=budget)
    levels = tuple(project_lattice(hkz, i) for i in range(hkz.rank + 1))
    return KannanAdvice(hkz, levels)


def _prefix_babai(hkz, i, target):
    """Babai's nearest-plane point using only the first i basis rows.

    The prefix shares its Gram-Schmidt data with the full basis, and only
    the components of the target inside the prefix span influence the
    rounding, so no explicit projection is needed.
    """
    gs = hkz.gram_schmidt
    resid = tuple(target)
    out = (ZERO,) * hkz.ambient
    for j in range(i - 1, -1, -1):
        c = round(_dot(resid, gs.orthogonal[j]) / gs.sqnorms[j])
        if c:
            step = Fraction(c)
            resid = _sub_scaled(resid, hkz.rows[j], step)
            out = tuple(a + step * b for a, b in zip(out, hkz.rows[j]))
    return out


def _scan(hkz, levels, target, inner):
    """Query the solver at every cut, lift, complete with Babai; nearest wins.

    The cut at full rank never fails (its projection is the zero lattice
    and the candidate is the plain Babai point), so a vector is always
    returned. Distances are compared exactly.
    """
    t = as_fraction_vector(target, hkz.ambient)
    best = None
    for i, level in enumerate(levels):
        if level.rank == 0:
            y = (ZERO,) * hkz.ambient
        else:
            x = inner(level, project_away_from_prefix(hkz, i, t))
            if x is None:
                continue
            coeffs = lattice_coefficients(level, x)
            if coeffs is None:
                continue
            y = hkz.vector((0,) * i + tuple(coeffs))
        resid = tuple(a - b for a, b in zip(t, y))
        z = _prefix_babai(hkz, i, resid)
        cand = tuple(a + b for a, b in zip(y, z))
        score = sqdist(cand, t)
        if best is None or score < best[0]:
            best = (score, cand)
    return best[1]


def kannan_reduce(basis, target, alpha, inner=None, advice=None, budget=None):
    """Closest-vector approximation through promise queries at every cut.

    alpha records the promise the inner solver honors (distance below
    alpha * lambda_1 of each projection); it enters the guarantee, not the
    computation. With a solver of factor gamma the output is within
    max_i sqrt(gamma(n-i)^2 + i/(4 alpha^2)) of the true distance, taking
    gamma(0) = 0.
    """
    check_positive("alpha", alpha)
    if inner is None:
        inner = oracle_inner(budget)
    if advice is None:
        advice = kannan_prepare(basis, budget=budget)
    return _scan(advice.hkz, advice.per_level, target, inner)


class KannanReducer(ParamMixin):
    """Estimator form of kannan_reduce; fit computes the advice once."""

    def __init__(self, alpha=0.5, inner=None, budget=None):
        self.alpha = alpha
        self.inner = inner
        self.budget = budget

    def fit(self, basis):
        check_positive("alpha", self.alpha)
        self.advice_ = kannan_prepare(basis, budget=self.budget)
        return self

    def reduce(self, target):
        inner = self.inner if self.inner is not None else oracle_inner(self.budget)
        return _scan(self.advice_.hkz, self.advice_.per_level, target, inner)


@dataclass(frozen=True)
class MasterAdvice:
    """HKZ basis, cut indices, and the block lattices prepared per cut.

    indices decrease from the rank to 0. Block k is the projection at cut
    i_k of basis rows i_k+1 .. i_{max(k-r,0)}, so each row appears in at
    most r blocks and the block dimensions sum to at most rank * r.
    """

    hkz: LatticeBasis
    indices: tuple
    r: int
    c: Fraction
    per_block: tuple


def master_indices(hkz, g, h):
    """Cut indices with geometrically separated Gram-Schmidt prefix maxima.

    The next index below i is the smallest one whose following orthogonal
    row already reaches a 1/c fraction of the prefix maximum at i, with
    c = g; equivalently the largest whose own prefix maximum falls below
    that fraction. Comparisons are exact on squared norms. The sequence
    always reaches 0 because the prefix maximum over an empty range is 0.
    """
    n = hkz.rank
    c = as_fraction(g)
    if c < 1:
        raise ValueError("g must be at least 1")
    h = int(h)
    if not 0 <= h < n:
        raise ValueError(f"h must lie in [0, {n})")
    if h > 1 and c ** (2 * (h - 1)) > n:
        raise ValueError("g^(h-1) must not exceed sqrt(rank)")
    sq = hkz.gram_schmidt.sqnorms
    c2 = c * c
    indices = [n]
    while indices[-1] > 0:
        cur = indices[-1]
        peak = max(sq[:cur])
        for i in range(cur):
            if sq[i] * c2 >= peak:
                indices.append(i)
                break
    return tuple(indices)


def master_prepare(basis, g=1.0, h=0, budget=None):
    """Advice for master_reduce: HKZ basis, cut indices, block lattices."""
    hkz = hkz_reduce(basis, budget=budget)
    indices = master_indices(hkz, g, h)
    r = int(h) + 1
    blocks = []
    for k, ik in enumerate(indices):
        hi = indices[max(k - r, 0)]
        rows = [project_away_from_prefix(hkz, ik, hkz.rows[j]) for j in range(ik, hi)]
        blocks.append(LatticeBasis(rows, ambient=hkz.ambient))
    return MasterAdvice(hkz, indices, r, as_fraction(g), tuple(blocks))


def _block_solutions(advice, levels, t, inner):
    """Per-cut answers in the projected lattices, chained through blocks.

    For k <= r the block is the whole projection and the solver answers
    directly. Deeper cuts lift the answer from r cuts back into the block
    coset and query the solver on the residual; failures propagate to the
    cuts that depend on them.
    """
    hkz = advice.hkz
    idx = advice.indices
    xs = []
    for k, ik in enumerate(idx):
        level = levels[k]
        if level.rank == 0:
            xs.append((ZERO,) * hkz.ambient)
            continue
        pt = project_away_from_prefix(hkz, ik, t)
        if k <= advice.r:
            xs.append(inner(advice.per_block[k], pt))
            continue
        prev = xs[k - advice.r]
        if prev is None:
            xs.append(None)
            continue
        coeffs = lattice_coefficients(levels[k - advice.r], prev)
        if coeffs is None:
            xs.append(None)
            continue
        shift = idx[k - advice.r] - ik
        y = level.vector((0,) * shift + tuple(coeffs))
        w = inner(advice.per_block[k], tuple(a - b for a, b in zip(pt, y)))
        if w is None:
            xs.append(None)
            continue
        xs.append(tuple(a + b for a, b in zip(w, y)))
    return xs


def _block_query(advice, levels, target, inner):
    hkz = advice.hkz
    t = as_fraction_vector(target, hkz.ambient)
    xs = _block_solutions(advice, levels, t, inner)
    best = None
    for k, ik in enumerate(advice.indices):
        x = xs[k]
        if x is None:
            continue
        if levels[k].rank == 0:
            y = (ZERO,) * hkz.ambient
        else:
            coeffs = lattice_coefficients(levels[k], x)
            if coeffs is None:
                continue
            y = hkz.vector((0,) * ik + tuple(coeffs))
        resid = tuple(a - b for a, b in zip(t, y))
        z = _prefix_babai(hkz, ik, resid)
        cand = tuple(a + b for a, b in zip(y, z))
        score = sqdist(cand, t)
        if best is None or score < best[0]:
            best = (score, cand)
    return best[1]


def master_reduce(advice, target, alpha, inner=None, budget=None):
    """Closest-vector approximation with block-prepared promise queries.

    Same contract as kannan_reduce, but the solver state covers only the
    block lattices in the advice; the achieved factor is within
    c * sqrt(n) / (2 alpha) when the solver honors its promise.
    """
    check_positive("alpha", alpha)
    if inner is None:
        inner = oracle_inner(budget)
    levels = tuple(project_lattice(advice.hkz, ik) for ik in advice.indices)
    return _block_query(advice, levels, target, inner)


class MasterReducer(ParamMixin):
    """Estimator form of master_reduce; fit prepares blocks and projections."""

    def __init__(self, g=1.0, h=0, alpha=0.5, inner=None, budget=None):
        self.g = g
        self.h = h
        self.alpha = alpha
        self.inner = inner
        self.budget = budget

    def fit(self, basis):
        check_positive("alpha", self.alpha)
        self.advice_ = master_prepare(basis, self.g, self.h, budget=self.budget)
        self.levels_ = tuple(
            project_lattice(self.advice_.hkz, ik) for ik in self.advice_.indices
        )
        return self

    def reduce(self, target):
        inner = self.inner if self.inner is not None else oracle_inner(self.budget)
        return _block_query(self.advice_, self.levels_, target, inner)


def _relaxed_hkz(basis, inner, budget=None):
    """HKZ-style basis whose orthogonal rows come from the promise solver.

    Each projected shortest vector is found through closest-vector queries
    on doubled sublattices, so an approximate solver yields the relaxed
    (factor-g) variant of the reduction.
    """

    def solver(doubled, tgt):
        vec = inner(doubled, tgt)
        if vec is None:
            return None
        coeffs = lattice_coefficients(doubled, vec)
        return None if coeffs is None else (vec, coeffs)

    return hkz_reduce(basis, svp=lambda b: shortest_via_promise_cvp(b, solver), budget=budget)


def cvp_promise_reduce(basis, target, inner=None, budget=None):
    """Preprocessing-free variant: the solver also builds the reduced basis.

    The promise here is distance below lambda_1 of each projection. With a
    factor-g solver the output is within g * sqrt(n+3) / 2 of the true
    distance.
    """
    if inner is None:
        inner = oracle_inner(budget)
    hkz = _relaxed_hkz(basis, inner, budget=budget)
    levels = tuple(project_lattice(hkz, i) for i in range(hkz.rank + 1))
    return _scan(hkz, levels, target, inner)


class PromiseReducer(ParamMixin):
    """Estimator form of cvp_promise_reduce; fit builds the reduced basis."""

    def __init__(self, inner=None, budget=None):
        self.inner = inner
        self.budget = budget

    def fit(self, basis):
        inner = self.inner if self.inner is not None else oracle_inner(self.budget)
        hkz = _relaxed_hkz(basis, inner, budget=self.budget)
        levels = tuple(project_lattice(hkz, i) for i in range(hkz.rank + 1))
        self.advice_ = KannanAdvice(hkz, levels)
        return self

    def reduce(self, target):
        inner = self.inner if self.inner is not None else oracle_inner(self.budget)
        return _scan(self.advice_.hkz, self.advice_.per_level, target, inner)


_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(m):
    """Deterministic Miller-Rabin; the witness set is exact below 2^64."""
    m = int(m)
    if m < 2:
        return False
    for q in _MR_WITNESSES:
        if m % q == 0:
            return m == q
    d = m - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_WITNESSES:
        x = pow(a, d, m)
        if x == 1 or x == m - 1:
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def _next_prime(lo):
    m = max(int(lo), 2)
    while not is_prime(m):
        m += 1
    return m


@dataclass(frozen=True)
class SparseCoset:
    """A coset of the index-p sublattice cut out by a mod-p functional.

    A lattice vector with coefficient vector x belongs when <z, x> = c
    mod p. With c = 0 the members form a sublattice of index p (z is
    nonzero mod p), and scaling any basis row by p shows p*L always lies
    inside it.
    """

    basis: LatticeBasis
    p: int
    z: tuple
    c: int

    def contains(self, vector):
        """Exact membership; False for vectors outside the parent lattice."""
        coeffs = lattice_coefficients(self.basis, vector)
        if coeffs is None:
            return False
        return sum(zi * xi for zi, xi in zip(self.z, coeffs)) % self.p == self.c

    def point(self):
        """One member, supported on the pivot row."""
        j = self._pivot()
        k = self.c * pow(self.z[j], -1, self.p) % self.p
        return self.basis.vector(tuple(k if i == j else 0 for i in range(self.basis.rank)))

    def sublattice(self):
        """Basis of the c = 0 members; index p in the parent lattice."""
        j = self._pivot()
        inv = pow(self.z[j], -1, self.p)
        rows = []
        for i in range(self.basis.rank):
            if i == j:
                rows.append(tuple(self.p * x for x in self.basis.rows[j]))
            else:
                m = self.z[i] * inv % self.p
                rows.append(
                    tuple(a - m * b for a, b in zip(self.basis.rows[i], self.basis.rows[j]))
                )
        return LatticeBasis(rows, ambient=self.basis.ambient)

    def _pivot(self):
        for j, v in enumerate(self.z):
            if v % self.p:
                return j
        raise ValueError("z vanishes mod p")


def _sample_coset(basis, p, rng):
    while True:
        z = tuple(int(v) for v in rng.integers(0, p, size=basis.rank))
        if any(z):
            break
    return SparseCoset(basis, p, z, int(rng.integers(0, p)))


def sparse_coset_sample(basis, p, seed):
    """A uniform functional z (nonzero mod p) and uniform residue c."""
    if basis.denominator != 1:
        raise ValueError("coset sampling wants an integer basis; scale first")
    p = int(p)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return _sample_coset(basis, p, stream(seed))


def _ball_count(basis, sq_radius, budget=None):
    """Exact count of lattice points with squared norm <= sq_radius.

    Enumerates at a slightly inflated float radius and cuts with the exact
    rational comparison, so boundary points are neither lost nor double
    counted. The origin is included.
    """
    if sq_radius < 0:
        return 0
    r = math.sqrt(float(sq_radius)) * (1.0 + 1e-9) + 1e-12
    pts = enumerate_ball(basis, (0,) * basis.ambient, Fraction(r), budget=budget)
    thr = sq_radius.numerator * pts.scale_sq
    den = sq_radius.denominator
    return sum(1 for s in pts.scaled_sqdist.tolist() if int(s) * den <= thr)


@dataclass(frozen=True)
class SparsifyResult:
    """Output vector, whether any trial produced it, and the trial count."""

    vector: tuple
    ok: bool
    trials: int


def sparsify_reduce(basis, target, tau, inner=None, seed=0, trials=1, mode="paper",
                    budget=None, sweep=40):
    """Random-coset reduction: solve on index-p sublattices, nearest wins.

    Each trial draws a coset, shifts the target by a representative, and
    hands the solver the sublattice, whose minimum distance is large
    relative to the shifted distance for a good draw. In paper mode the
    right prime scale is unknown, so one prime just above each power of
    two is tried per trial; the sweep stops once the primes provably
    exceed the useful window (bounded through the Babai distance, with
    the origin-ball count capped by the enumeration budget). In oracle
    mode (for audits) the exact distance fixes N = |L within tau*dist of
    the origin| and a single prime in [2N, 8N]. When every solver call
    fails the Babai point is returned with ok False.
    """
    tau_f = as_fraction(tau)
    check_positive("tau", tau_f)
    trials = check_count("trials", trials)
    if basis.rank != basis.ambient:
        raise ValueError("sparsification needs a full-rank lattice")
    if inner is None:
        inner = oracle_inner(budget)
    t = as_fraction_vector(target, basis.ambient)
    scale = basis.denominator
    work = basis.scaled(scale) if scale > 1 else basis
    tw = tuple(scale * x for x in t) if scale > 1 else t

    if mode == "oracle":
        opt_sq = closest_vector(work, tw, budget=budget)[2]
        counted = _ball_count(work, tau_f * tau_f * opt_sq, budget)
        primes = (_next_prime(2 * counted),)
    elif mode == "paper":
        bv, _ = nearest_plane(work, tw)
        try:
            cap = _ball_count(work, tau_f * tau_f * sqdist(bv, tw), budget)
        except BudgetExceeded:
            cap = None
        top = sweep if cap is None else min(int(sweep), max(1, (2 * cap).bit_length()))
        primes = tuple(_next_prime((1 << i) + 1) for i in range(1, top + 1))
    else:
        raise ValueError(f"unknown mode {mode!r}")

    best = None
    produced = False
    for k in range(trials):
        for j, p in enumerate(primes):
            coset = _sample_coset(work, p, stream(seed, k, j))
            y = coset.point()
            try:
                w = inner(coset.sublattice(), tuple(a - b for a, b in zip(tw, y)))
            except BudgetExceeded:
                w = None
            if w is None:
                continue
            cand = tuple(a + b for a, b in zip(w, y))
            produced = True
            score = sqdist(cand, tw)
            if best is None or score < best[0]:
                best = (score, cand)
    if best is None:
        cand, _ = nearest_plane(work, tw)
        best = (sqdist(cand, tw), cand)
    vec = best[1] if scale == 1 else tuple(x / scale for x in best[1])
    return SparsifyResult(vec, produced, trials)


class SparsifyReducer(ParamMixin):
    """Estimator form of sparsify_reduce; fit pins the (integer) lattice."""

    def __init__(self, tau=1.0, inner=None, mode="paper", trials=1, seed=0, budget=None):
        self.tau = tau
        self.inner = inner
        self.mode = mode
        self.trials = trials
        self.seed = seed
        self.budget = budget

    def fit(self, basis):
        check_positive("tau", self.tau)
        if basis.rank != basis.ambient:
            raise ValueError("sparsification needs a full-rank lattice")
        self.basis_ = basis
        return self

    def reduce(self, target):
        return sparsify_reduce(
            self.basis_, target, self.tau, inner=self.inner, seed=self.seed,
            trials=self.trials, mode=self.mode, budget=self.budget,
        )
