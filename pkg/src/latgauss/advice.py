"""Dual-lattice sampling advice and the cosine-average density estimator.

The preprocessing stage draws vectors from the discrete Gaussian on the
dual lattice at the smoothing width. Averaging cosines over those draws
estimates the periodic Gaussian density of the primal lattice; the matching
sine and outer-product averages estimate its gradient and Hessian. Every
draw keeps its exact integer coefficient record next to the cached float
coordinates, so membership stays exact and saved files reload to
bit-identical evaluators.
"""

import math
from fractions import Fraction

import numpy as np

from ._validation import as_float_vector, check_count, check_eps
from .gaussian import sample_lattice_gaussian, smoothing_parameter
from .rng import stream

_PI = math.pi

# cap on entries of one targets-by-advice phase block, to bound peak memory
_CHUNK_ENTRIES = 1 << 23


class DenominatorTooSmall(ArithmeticError):
    """The estimated density is too close to zero to divide by.

    Raised by the gradient step when |f_W| falls below the guard floor,
    which signals a point outside the region where the analysis keeps the
    denominator bounded away from zero.
    """

    def __init__(self, value, floor):
        super().__init__(
            f"estimated density {value:.3e} is inside the guard band (floor "
            f"{floor:.3e}); the point sits outside the reliable decoding region"
        )
        self.value = value
        self.floor = floor


def default_denom_floor(eps):
    """Guard floor eps^(1/4)/4, half the in-region lower bound on the density."""
    return 0.25 * check_eps(eps) ** 0.25


def advice_count(n, eps, factor=2.0):
    """Sample count ceil(factor * n * ln(1/eps) / sqrt(eps)) for a rank-n lattice."""
    eps = check_eps(eps)
    n = check_count("n", n)
    return int(math.ceil(factor * n * math.log(1.0 / eps) / math.sqrt(eps)))


class GaussianAdvice:
    """Dual Gaussian draws and the density estimator they induce.

    coeffs rows are exact integer coordinates over basis.dual, so every
    advice vector is a dual lattice point by construction. f(t) averages
    cos(2 pi <w_i, t>) over the draws: it is periodic over the lattice,
    equals 1 on it, and for draws at the smoothing width it concentrates
    around the true periodic Gaussian. source_scale records the
    normalization factor applied to the lattice this advice was built for
    (1 when nothing was rescaled); it is carried through serialization so
    advice reloads against the original lattice file.
    """

    def __init__(self, basis, coeffs, eps, seed, source_scale=1):
        if basis.rank == 0:
            raise ValueError("advice needs a lattice of positive rank")
        coeffs = np.asarray(coeffs, dtype=np.int64)
        if coeffs.ndim != 2 or coeffs.shape[1] != basis.rank:
            raise ValueError(
                f"coefficient array must be N x {basis.rank}, got {coeffs.shape}"
            )
        if coeffs.shape[0] == 0:
            raise ValueError("advice must hold at least one draw")
        self.basis = basis
        self.coeffs = coeffs
        self.eps = check_eps(eps)
        self.seed = int(seed)
        self.source_scale = Fraction(source_scale)
        if self.source_scale <= 0:
            raise ValueError("source_scale must be positive")
        self.vectors = coeffs.astype(np.float64) @ basis.dual.float_rows

    def __len__(self):
        return self.coeffs.shape[0]

    def __repr__(self):
        return (
            f"GaussianAdvice(N={len(self)}, rank={self.basis.rank}, "
            f"eps={self.eps:g}, seed={self.seed})"
        )

    def dual_vector(self, i):
        """Exact coordinates of the i-th draw."""
        return self.basis.dual.vector([int(c) for c in self.coeffs[i]])

    def _phases(self, t):
        return 2.0 * _PI * (self.vectors @ t)

    def f(self, t):
        """The estimator value: mean of cos(2 pi <w_i, t>), in [-1, 1]."""
        t = as_float_vector(t, self.basis.ambient)
        return float(np.cos(self._phases(t)).mean())

    def grad(self, t):
        """Gradient -(2 pi / N) sum of w_i sin(2 pi <w_i, t>)."""
        t = as_float_vector(t, self.basis.ambient)
        sins = np.sin(self._phases(t))
        return -(2.0 * _PI / len(self)) * (self.vectors.T @ sins)

    def hessian(self, t):
        """Hessian -(4 pi^2 / N) sum of w_i w_i^T cos(2 pi <w_i, t>)."""
        t = as_float_vector(t, self.basis.ambient)
        coss = np.cos(self._phases(t))
        w = self.vectors
        return -(4.0 * _PI * _PI / len(self)) * ((w * coss[:, None]).T @ w)

    def step(self, t, floor=None):
        """One gradient-ascent step t + grad(t) / (2 pi f(t)).

        Raises DenominatorTooSmall when |f(t)| is below floor (default
        eps^(1/4)/4) rather than divide by a denominator the in-region
        analysis does not control.
        """
        t = as_float_vector(t, self.basis.ambient)
        floor = default_denom_floor(self.eps) if floor is None else float(floor)
        phases = self._phases(t)
        val = float(np.cos(phases).mean())
        if abs(val) < floor:
            raise DenominatorTooSmall(val, floor)
        grad = -(2.0 * _PI / len(self)) * (self.vectors.T @ np.sin(phases))
        return t + grad / (2.0 * _PI * val)

    def f_batch(self, ts):
        ts = np.asarray(ts, dtype=np.float64)
        out = np.empty(ts.shape[0])
        chunk = max(1, _CHUNK_ENTRIES // len(self))
        for k in range(0, ts.shape[0], chunk):
            ph = 2.0 * _PI * (ts[k:k + chunk] @ self.vectors.T)
            out[k:k + chunk] = np.cos(ph).mean(axis=1)
        return out

    def step_batch(self, ts, floor=None):
        """Vectorized gradient steps over the rows of ts.

        Returns (stepped targets, estimator values). Rows whose |f| falls
        below the floor are returned unchanged; callers recognize them by
        comparing the values against the floor.
        """
        ts = np.array(np.atleast_2d(ts), dtype=np.float64)
        floor = default_denom_floor(self.eps) if floor is None else float(floor)
        vals = np.empty(ts.shape[0])
        chunk = max(1, _CHUNK_ENTRIES // len(self))
        for k in range(0, ts.shape[0], chunk):
            block = ts[k:k + chunk]
            ph = 2.0 * _PI * (block @ self.vectors.T)
            f = np.cos(ph).mean(axis=1)
            vals[k:k + chunk] = f
            ok = np.abs(f) >= floor
            if np.any(ok):
                g = -(1.0 / len(self)) * (np.sin(ph[ok]) @ self.vectors)
                block[ok] += g / f[ok, None]
        return ts, vals

    def save(self, path):
        """Write the header "N eps seed scale", then one coefficient row per line."""
        with open(path, "w", encoding="ascii") as fh:
            fh.write(f"{len(self)} {self.eps!r} {self.seed} {self.source_scale}\n")
            for row in self.coeffs:
                fh.write(" ".join(str(int(c)) for c in row) + "\n")

    @classmethod
    def load(cls, path, basis):
        """Reload advice saved by save against the primal basis it came from.

        The recorded scale is reapplied to the basis, so advice generated on
        a normalized copy reloads from the original lattice file.
        """
        with open(path, encoding="ascii") as fh:
            head = fh.readline().split()
            if len(head) != 4:
                raise ValueError("advice header must read 'N eps seed scale'")
            n_rows, eps, seed = int(head[0]), float(head[1]), int(head[2])
            scale = Fraction(head[3])
            rows = [[int(tok) for tok in line.split()] for line in fh if line.strip()]
        if len(rows) != n_rows:
            raise ValueError(f"advice file announces {n_rows} rows but holds {len(rows)}")
        if scale != 1:
            basis = basis.scaled(scale)
        return cls(basis, rows, eps, seed, source_scale=scale)


def generate_advice(basis, eps, count, seed, eta=None, budget=None):
    """count i.i.d. draws from the dual Gaussian at the smoothing width.

    The sampling width is eta_eps(L*) computed here unless eta is given; a
    caller that already normalized its lattice passes eta=1.0 so the two
    stay consistent. Randomness comes from the (seed, 0) stream.
    """
    eps = check_eps(eps, upper=1.0 / 200.0)
    count = check_count("count", count)
    if eta is None:
        eta = smoothing_parameter(basis.dual, eps, budget=budget).value
    draws = sample_lattice_gaussian(
        basis.dual, s=eta, count=count, rng=stream(seed, 0), budget=budget
    )
    return GaussianAdvice(basis, draws.coeffs, eps, seed)
