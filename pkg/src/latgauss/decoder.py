"""Bounded-distance decoding by gradient ascent on the estimated density.

fit computes the smoothing parameter of the dual lattice, rescales the
lattice so that parameter equals 1, draws dual Gaussian advice, and picks
the first short linearly independent advice vectors together with their
exact biorthogonal frame. decode rescales the target, runs a fixed number
of guarded ascent steps on the estimator, rounds the iterate against the
frame, and maps the result back to original units. Membership of the
output is checked exactly, so a claimed-exact result is always a true
lattice point.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._estimator import ParamMixin
from ._validation import check_count, check_eps
from .advice import GaussianAdvice, advice_count, default_denom_floor
from .gaussian import decoding_width, sample_lattice_gaussian, smoothing_parameter
from .lattice import LatticeBasis, format_basis, lattice_coefficients, parse_basis
from .rng import stream

EXACT = "exact-claimed"
GUARD = "denominator-guard"


class FrameAbort(RuntimeError):
    """The advice held no full set of short linearly independent vectors."""


def iteration_count(n, eps):
    """Number of ascent rounds before rounding is safe.

    An in-promise iterate starts within delta_max * s_eps of its lattice
    point, at worst halves that distance in the first round, and contracts
    by at least eps^(1/8) in every later one; this many rounds land it
    inside the rounding-safe ball of radius 1/(2 sqrt(n)). At least one
    round always follows the first.
    """
    eps = check_eps(eps, upper=1.0 / 200.0)
    n = check_count("n", n)
    s_eps, dmax = decoding_width(eps)
    need = math.ceil(8.0 * math.log(math.sqrt(n) * dmax * s_eps) / math.log(1.0 / eps))
    return 1 + max(1, need)


def decoding_radius(basis, eps, budget=None):
    """Guaranteed decoding radius delta_max * s_eps / eta_eps(L*).

    Standalone form that runs only the smoothing computation, for radius
    planning at ranks where drawing the advice itself would be infeasible.
    """
    eps = check_eps(eps, upper=1.0 / 200.0)
    s_eps, dmax = decoding_width(eps)
    eta = smoothing_parameter(basis.dual, eps, budget=budget)
    return dmax * s_eps / eta.value


def bdd_param_plan(alpha, n, factor=2.0):
    """(eps, n_advice) reaching decoding radius alpha * lambda_1 on rank n.

    eps comes from the closed form 1/eps = exp(2 a^2 n / (1-2a)^2 +
    8/(1-2a)) / 2 - 1; the advice count follows from advice_count with the
    given factor.
    """
    n = check_count("n", n)
    alpha = float(alpha)
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    gap = 1.0 - 2.0 * alpha
    inv_eps = 0.5 * math.exp(2.0 * alpha * alpha * n / (gap * gap) + 8.0 / gap) - 1.0
    if not inv_eps > 200.0:
        raise ValueError(
            f"planned 1/eps = {inv_eps:.1f} does not clear 200; increase n or adjust alpha"
        )
    eps = 1.0 / inv_eps
    return eps, advice_count(n, eps, factor)


@dataclass(frozen=True)
class DecodeResult:
    """Decoded vector with its diagnostics.

    vector is exact (a tuple of rationals); coeffs are its coefficients
    over the fitted basis, or None when the rounded output is not a lattice
    point. trace holds one (norm of the iterate in scaled units, estimator
    value) pair per visited iterate.
    """

    vector: tuple
    coeffs: tuple
    status: str
    iterations_run: int
    trace: tuple
    note: str = ""


def _sqnorm_exact(gram, ints):
    acc = Fraction(0)
    for i, ci in enumerate(ints):
        if ci:
            acc += ci * sum(gram[i][j] * cj for j, cj in enumerate(ints) if cj)
    return acc


def _eliminate(reduced, row):
    """Reduce row against the echelon rows; (pivot, row) if independent."""
    for piv, ref in reduced:
        if row[piv]:
            f = row[piv] / ref[piv]
            row = [a - f * b for a, b in zip(row, ref)]
    for j, a in enumerate(row):
        if a:
            return j, row
    return None


def _frame_indices(advice):
    """First rank linearly independent draws with norm <= sqrt(rank).

    The norm cut is checked exactly on the integer coefficient records; a
    float prescreen only decides which rows are worth the exact check.
    """
    n = advice.basis.rank
    gram = advice.basis.dual.gram
    screen = float(n) * (1.0 + 1e-9) + 1e-9
    sq = np.einsum("ij,ij->i", advice.vectors, advice.vectors)
    reduced, chosen = [], []
    for i in np.flatnonzero(sq <= screen):
        ints = [int(c) for c in advice.coeffs[i]]
        if _sqnorm_exact(gram, ints) > n:
            continue
        got = _eliminate(reduced, [Fraction(c) for c in ints])
        if got is None:
            continue
        reduced.append(got)
        chosen.append(int(i))
        if len(chosen) == n:
            return chosen
    raise FrameAbort(
        f"advice holds only {len(chosen)} of the {n} short independent vectors "
        "needed for the rounding frame"
    )


class BddDecoder(ParamMixin):
    """Decoder for targets within a guaranteed radius of the lattice.

    Parameters
    ----------
    eps : promise parameter in (0, 1/200); smaller values buy a larger
        decoding radius at the cost of more advice.
    n_advice : number of dual Gaussian draws; None uses
        advice_count(rank, eps, advice_factor).
    advice_factor : leading constant of the default advice count.
    seed : master seed for the draws.
    denom_floor : ascent guard floor; None uses eps^(1/4)/4.
    budget : enumeration node budget override for preprocessing.

    Fitted attributes carry a trailing underscore; radius_ is the decoding
    radius in original units and iterations_ the fixed ascent length.
    """

    def __init__(self, eps, n_advice=None, advice_factor=2.0, seed=0,
                 denom_floor=None, budget=None):
        self.eps = eps
        self.n_advice = n_advice
        self.advice_factor = advice_factor
        self.seed = seed
        self.denom_floor = denom_floor
        self.budget = budget

    def fit(self, basis):
        """Preprocess the lattice: smoothing, normalization, advice, frame."""
        eps = check_eps(self.eps, upper=1.0 / 200.0)
        if basis.rank == 0:
            raise ValueError("cannot decode against a rank-0 lattice")
        s_eps, dmax = decoding_width(eps)
        eta = smoothing_parameter(basis.dual, eps, budget=self.budget)
        scale = Fraction(eta.value)
        count = self.n_advice
        if count is None:
            count = advice_count(basis.rank, eps, self.advice_factor)
        count = check_count("n_advice", count)
        scaled = basis.scaled(scale)
        draws = sample_lattice_gaussian(
            scaled.dual, s=1.0, count=count, rng=stream(self.seed, 0), budget=self.budget
        )
        advice = GaussianAdvice(scaled, draws.coeffs, eps, self.seed, source_scale=scale)
        idx = _frame_indices(advice)
        raw_dual = basis.dual
        vstar = LatticeBasis(
            [raw_dual.vector([int(c) for c in advice.coeffs[i]]) for i in idx],
            ambient=basis.ambient,
        )
        self.basis_ = basis
        self.eta_ = eta
        self.scale_ = scale
        self.scaled_basis_ = scaled
        self.advice_ = advice
        self.vstar_indices_ = tuple(idx)
        self.vstar_ = vstar
        self.frame_ = vstar.dual
        self._vstar_float = advice.vectors[idx]
        self.s_eps_ = s_eps
        self.delta_max_ = dmax
        self.iterations_ = iteration_count(basis.rank, eps)
        self.radius_ = dmax * s_eps / eta.value
        return self

    def _check_fitted(self):
        if getattr(self, "basis_", None) is None:
            raise RuntimeError("decoder is not fitted; call fit(basis) first")

    def decode_batch(self, targets):
        """One DecodeResult per row of targets."""
        self._check_fitted()
        ts = np.atleast_2d(np.asarray(targets, dtype=np.float64))
        if ts.shape[1] != self.basis_.ambient:
            raise ValueError(
                f"targets must have {self.basis_.ambient} coordinates, got {ts.shape[1]}"
            )
        floor = self.denom_floor
        if floor is None:
            floor = default_denom_floor(self.advice_.eps)
        cur = float(self.scale_) * ts
        k = cur.shape[0]
        guarded_at = np.full(k, -1)
        traces = [[] for _ in range(k)]
        for it in range(self.iterations_):
            live = np.flatnonzero(guarded_at < 0)
            if live.size == 0:
                break
            stepped, vals = self.advice_.step_batch(cur[live], floor)
            norms = np.sqrt((cur[live] ** 2).sum(axis=1))
            for j, i in enumerate(live):
                traces[i].append((float(norms[j]), float(vals[j])))
            tripped = np.abs(vals) < floor
            cur[live[~tripped]] = stepped[~tripped]
            guarded_at[live[tripped]] = it
        live = np.flatnonzero(guarded_at < 0)
        if live.size:
            vals = self.advice_.f_batch(cur[live])
            norms = np.sqrt((cur[live] ** 2).sum(axis=1))
            for j, i in enumerate(live):
                traces[i].append((float(norms[j]), float(vals[j])))
        rounded = cur @ self._vstar_float.T
        out = []
        for i in range(k):
            coeffs = [int(round(x)) for x in rounded[i]]
            y = self.frame_.vector(coeffs)
            basis_coeffs = lattice_coefficients(self.basis_, y)
            if guarded_at[i] >= 0:
                status = GUARD
                note = f"denominator guard tripped at iteration {guarded_at[i]}"
                runs = int(guarded_at[i])
            elif basis_coeffs is None:
                status = GUARD
                note = "rounded output is not a lattice point"
                runs = self.iterations_
            else:
                status, note, runs = EXACT, "", self.iterations_
            out.append(
                DecodeResult(
                    vector=y,
                    coeffs=basis_coeffs,
                    status=status,
                    iterations_run=runs,
                    trace=tuple(traces[i]),
                    note=note,
                )
            )
        return out

    def decode(self, target):
        return self.decode_batch([target])[0]

    def predict(self, targets):
        """Decoded lattice vectors as float rows, one per target."""
        return np.array(
            [[float(x) for x in r.vector] for r in self.decode_batch(targets)]
        )

    def save(self, path):
        """Write the full decoding state: basis, advice, frame, all exact."""
        self._check_fitted()
        a = self.advice_
        with open(path, "w", encoding="ascii") as fh:
            fh.write("latgauss-decoder 1\n")
            fh.write(format_basis(self.basis_))
            fh.write(f"advice {len(a)} {a.eps!r} {a.seed} {a.source_scale}\n")
            for row in a.coeffs:
                fh.write(" ".join(str(int(c)) for c in row) + "\n")
            fh.write("frame " + " ".join(str(i) for i in self.vstar_indices_) + "\n")
            for row in self.frame_.rows:
                fh.write(" ".join(str(x) for x in row) + "\n")

    @classmethod
    def load(cls, path):
        """Rebuild a fitted decoder from save output.

        The stored frame is verified against the advice rows it references:
        every inner product <w_i, u_j> must equal delta_ij exactly, so a
        corrupted file fails loudly instead of mis-decoding quietly. The
        smoothing certificate is not stored; eta_ is None on a loaded
        decoder and the recorded scale stands in for its value.
        """
        with open(path, encoding="ascii") as fh:
            lines = fh.read().splitlines()
        if not lines or lines[0].split() != ["latgauss-decoder", "1"]:
            raise ValueError(f"{path} is not a decoder file")
        pos = 1
        n = int(lines[pos].split()[0])
        basis = parse_basis("\n".join(lines[pos:pos + 1 + n]))
        pos += 1 + n
        head = lines[pos].split()
        if len(head) != 5 or head[0] != "advice":
            raise ValueError("decoder file is missing its advice header")
        count, eps, seed = int(head[1]), float(head[2]), int(head[3])
        scale = Fraction(head[4])
        pos += 1
        coeffs = [[int(t) for t in lines[pos + i].split()] for i in range(count)]
        pos += count
        head = lines[pos].split()
        if head[0] != "frame" or len(head) != 1 + n:
            raise ValueError("decoder file is missing its frame section")
        idx = [int(t) for t in head[1:]]
        pos += 1
        frame_rows = [[Fraction(t) for t in lines[pos + i].split()] for i in range(n)]
        dec = cls(eps=eps, n_advice=count, seed=seed)
        dec._restore(basis, coeffs, eps, seed, scale, idx, frame_rows)
        return dec

    def _restore(self, basis, coeffs, eps, seed, scale, idx, frame_rows):
        scaled = basis.scaled(scale)
        advice = GaussianAdvice(scaled, coeffs, eps, seed, source_scale=scale)
        raw_dual = basis.dual
        vstar = LatticeBasis(
            [raw_dual.vector([int(c) for c in advice.coeffs[i]]) for i in idx],
            ambient=basis.ambient,
        )
        frame = LatticeBasis(frame_rows, ambient=basis.ambient)
        for i, w in enumerate(vstar.rows):
            for j, u in enumerate(frame.rows):
                want = 1 if i == j else 0
                if sum(a * b for a, b in zip(w, u)) != want:
                    raise FrameAbort(
                        "stored frame fails the biorthogonality identity; file corrupt"
                    )
        s_eps, dmax = decoding_width(eps)
        self.basis_ = basis
        self.eta_ = None
        self.scale_ = scale
        self.scaled_basis_ = scaled
        self.advice_ = advice
        self.vstar_indices_ = tuple(int(i) for i in idx)
        self.vstar_ = vstar
        self.frame_ = frame
        self._vstar_float = advice.vectors[list(self.vstar_indices_)]
        self.s_eps_ = s_eps
        self.delta_max_ = dmax
        self.iterations_ = iteration_count(basis.rank, eps)
        self.radius_ = dmax * s_eps / float(scale)


def preprocess(basis, eps, n_advice=None, seed=0, budget=None):
    """Fitted decoder for the lattice: advice, frame, and iteration count."""
    return BddDecoder(eps=eps, n_advice=n_advice, seed=seed, budget=budget).fit(basis)
