"""Cumulative smoothed Hamming objective over a normalized sample set.

The objective at a query point ``x`` is

    C(x) = sum_n -1 / (alpha_n(x) + m),  alpha_n(x) = 2 cosh(k (x - x_n)),

optionally divided by ``N``. Value and derivatives go through the
overflow-safe closed forms in :mod:`pseudomode.losses` and are summed with
:func:`math.fsum` in ascending sample order, so every evaluation is
exactly rounded and reproducible.

The weight, expectation and certificate helpers use the ``alpha`` form
directly and require ``m = 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .losses import SmoothedHammingLoss

__all__ = [
    "SampleSet",
    "Objective",
    "WeightDistribution",
    "CheckResult",
    "alpha_n",
    "certificate_bound",
    "certificate_threshold_k",
    "F_hessian",
    "unimodality_check",
]

AGGREGATIONS = ("average", "sum")


@dataclass(frozen=True)
class SampleSet:
    """Samples mapped onto ``[0, 1]`` together with the map back to raw units.

    ``raw[i] == offset + scale * values[i]``.
    """

    values: np.ndarray
    offset: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("a sample set needs at least one value")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")
        if values.min() < 0 or values.max() > 1:
            raise ValueError("sample values must lie in [0, 1]")
        if not self.scale >= 0:
            raise ValueError("scale must be nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def count(self):
        return self.values.size

    def __len__(self):
        return self.values.size

    def to_raw(self, x):
        return self.offset + self.scale * x

    def reflected(self):
        """Sample set ``{1 - v}``; same offset and scale."""
        return SampleSet(1.0 - self.values, self.offset, self.scale)


class WeightDistribution(NamedTuple):
    probs: np.ndarray
    Z: float


class CheckResult(NamedTuple):
    """Outcome of a grid diagnostic. ``violation_x`` is ``None`` when it passed."""

    passed: bool
    violation_x: float | None
    margin: float

    def __bool__(self):
        return bool(self.passed)


def alpha_n(k, samples, x, n=None):
    """``exp(k (x - x_n)) + exp(-k (x - x_n))`` for one sample or all of them."""
    values = samples.values if isinstance(samples, SampleSet) else np.asarray(samples, dtype=float)
    d = x - (values if n is None else values[n])
    with np.errstate(over="ignore"):
        out = 2.0 * np.cosh(k * d)
    return float(out) if np.ndim(out) == 0 else out


def certificate_bound(k):
    """Upper bound ``1 + (e^k + e^-k - 2) / 4`` on the certificate over ``[0, 1]``."""
    if not k > 0:
        raise ValueError("k must be positive")
    return 1.0 + 0.5 * (math.cosh(k) - 1.0)


def certificate_threshold_k():
    """Largest ``k`` with ``certificate_bound(k) <= 4``, i.e. ``arccosh(7)``."""
    return math.acosh(7.0)


class Objective:
    """Average (default) or summed smoothed Hamming loss over ``samples``.

    Parameters
    ----------
    samples : SampleSet or array-like
        Sample coordinates, expected in ``[0, 1]`` for the certificate helpers.
    k : float
        Loss scale.
    m : float, default 2.0
        Loss smoothing. Only ``m = 2`` supports the weight and certificate
        machinery.
    aggregation : {"average", "sum"}
    """

    def __init__(self, samples, k, m=2.0, aggregation="average"):
        if not isinstance(samples, SampleSet):
            samples = SampleSet(samples)
        if aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")
        self.samples = samples
        self.loss = SmoothedHammingLoss(k, m)
        self.aggregation = aggregation
        self._x = samples.values

    @property
    def k(self):
        return self.loss.k

    @property
    def m(self):
        return self.loss.m

    @property
    def n_samples(self):
        return self._x.size

    @property
    def n_eff(self):
        """Multiplier of the per-term bounds: ``N`` for sums, 1 for averages."""
        return self.n_samples if self.aggregation == "sum" else 1

    def _reduce(self, terms):
        total = math.fsum(terms)
        if self.aggregation == "average":
            total /= self._x.size
        return total

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        return self._reduce(self.loss(float(x) - self._x))

    def d1(self, x):
        return self._reduce(self.loss.derivatives(float(x) - self._x)[0])

    def d2(self, x):
        return self._reduce(self.loss.derivatives(float(x) - self._x)[1])

    def values(self, xs, chunk=1 << 15):
        """Vectorized objective over an array of query points.

        Terms are accumulated sample by sample in ascending index order
        (plain, not compensated, summation), so results may differ from
        :meth:`value` in the last bits.
        """
        xs = np.asarray(xs, dtype=float).ravel()
        out = np.zeros_like(xs)
        k, m = self.k, self.m
        buf = np.empty(min(chunk, xs.size))
        den = np.empty_like(buf)
        for start in range(0, xs.size, chunk):
            seg = xs[start:start + chunk]
            t, d, acc = buf[:seg.size], den[:seg.size], out[start:start + chunk]
            for xn in self._x:
                np.subtract(seg, xn, out=t)
                np.abs(t, out=t)
                t *= -k
                np.exp(t, out=t)
                np.add(t, m, out=d)
                d *= t
                d += 1.0
                t /= d
                acc -= t
        if self.aggregation == "average":
            out /= self._x.size
        return out

    # -- identities that only hold for m = 2 -------------------------------

    def _require_m2(self):
        if self.m != 2:
            raise ValueError("weights and certificates are defined for m = 2 only")

    def _scale(self):
        return 1.0 / self._x.size if self.aggregation == "average" else 1.0

    def weights(self, x):
        """Probabilities proportional to ``(alpha_n(x) + 2)**-2`` and their sum ``Z``.

        ``Z`` carries the aggregation factor, so ``d1 == Z * E[alpha']`` holds
        in both modes.
        """
        self._require_m2()
        raw = (alpha_n(self.k, self._x, float(x)) + 2.0) ** -2
        total = math.fsum(raw)
        return WeightDistribution(raw / total, total * self._scale())

    def expectation_d1(self, x):
        """First derivative as ``Z * E_p[alpha_n'(x)]``."""
        p, Z = self.weights(x)
        dalpha = 2.0 * self.k * np.sinh(self.k * (float(x) - self._x))
        return Z * math.fsum(p * dalpha)

    def expectation_d2(self, x):
        """Second derivative as ``k**2 * Z * E_p[4 - alpha_n(x)]``."""
        p, Z = self.weights(x)
        return self.k**2 * Z * math.fsum(p * (4.0 - alpha_n(self.k, self._x, float(x))))

    def certificate_F(self, x):
        """``E_p[exp(k (x - x_n))] * E_p[exp(-k (x - x_n))]``.

        Equal to the double sum ``sum_{m,n} p_m p_n exp(k (x_n - x_m))``;
        quasi-convexity follows wherever it stays below 4.
        """
        p, _ = self.weights(x)
        d = self.k * (float(x) - self._x)
        return math.fsum(p * np.exp(d)) * math.fsum(p * np.exp(-d))

    def default_delta(self):
        return 1e-3 * self.k * self.n_eff

    def _zero_tol(self):
        return 1e-10 * self.k**2 * self.n_eff

    def derivatives_grid(self, xs):
        """Vectorized ``(C', C'')`` over an array of query points."""
        xs = np.asarray(xs, dtype=float).ravel()
        d1 = np.empty_like(xs)
        d2 = np.empty_like(xs)
        for start in range(0, xs.size, 1 << 12):
            sl = slice(start, start + (1 << 12))
            a, b, _ = self.loss.derivatives(xs[sl, None] - self._x[None, :])
            d1[sl] = a.sum(axis=1)
            d2[sl] = b.sum(axis=1)
        if self.aggregation == "average":
            d1 /= self._x.size
            d2 /= self._x.size
        return d1, d2

    def certificate_grid(self, xs):
        """Vectorized :meth:`certificate_F`."""
        self._require_m2()
        xs = np.asarray(xs, dtype=float).ravel()
        out = np.empty_like(xs)
        for start in range(0, xs.size, 1 << 12):
            sl = slice(start, start + (1 << 12))
            d = self.k * (xs[sl, None] - self._x[None, :])
            w = (2.0 * np.cosh(d) + 2.0) ** -2
            w /= w.sum(axis=1, keepdims=True)
            out[sl] = (w * np.exp(d)).sum(axis=1) * (w * np.exp(-d)).sum(axis=1)
        return out

    def quasiconvexity_check(self, delta=None, grid_size=10_001, bounds=(0.0, 1.0)):
        """Grid check that ``C'' >= 0`` wherever ``|C'| <= delta``.

        ``margin`` is the smallest ``C''`` among small-slope grid points
        (``inf`` if there were none); ``violation_x`` is the first failing
        grid point.
        """
        if delta is None:
            delta = self.default_delta()
        xs = np.linspace(bounds[0], bounds[1], grid_size)
        d1, d2 = self.derivatives_grid(xs)
        flat = np.abs(d1) <= delta
        if not flat.any():
            return CheckResult(True, None, math.inf)
        margin = float(d2[flat].min())
        bad = np.flatnonzero(flat & (d2 < -self._zero_tol()))
        if bad.size:
            return CheckResult(False, float(xs[bad[0]]), margin)
        return CheckResult(True, None, margin)

    def exp_convexify_check(self, lam, grid_size=10_001, bounds=(0.0, 1.0)):
        """Grid check that ``exp(lam * C)`` is convex: ``C'' + lam * C'**2 >= 0``."""
        if lam < 0:
            raise ValueError("lam must be nonnegative")
        xs = np.linspace(bounds[0], bounds[1], grid_size)
        d1, d2 = self.derivatives_grid(xs)
        s = d2 + lam * d1 * d1
        bad = np.flatnonzero(s < -self._zero_tol())
        if bad.size:
            return CheckResult(False, float(xs[bad[0]]), float(s.min()))
        return CheckResult(True, None, float(s.min()))

    def certificate_max(self, grid_size=10_001, bounds=(0.0, 1.0)):
        """Largest certificate value on the grid, as ``(x, F)``."""
        xs = np.linspace(bounds[0], bounds[1], grid_size)
        F = self.certificate_grid(xs)
        i = int(np.argmax(F))
        return float(xs[i]), float(F[i])


def unimodality_check(values, xs=None, tie_tol=1e-14):
    """Whether the first differences change sign at most once, from down to up.

    Differences with ``|diff| <= tie_tol`` are treated as ties and skipped.
    On failure ``violation_x`` is the grid point where the sequence turns
    down again after having gone up.
    """
    values = np.asarray(values, dtype=float)
    if xs is None:
        xs = np.arange(values.size, dtype=float)
    diffs = np.diff(values)
    rising = False
    for i, d in enumerate(diffs):
        if d > tie_tol:
            rising = True
        elif d < -tie_tol and rising:
            return CheckResult(False, float(xs[i]), float(d))
    return CheckResult(True, None, 0.0)


def F_hessian(k, positions, weights):
    """Hessian of ``sum_{m,n} p_m p_n exp(k (x_n - x_m))`` in the positions, weights held fixed.

    Diagonal entries are ``k**2 p_n sum_{i != n} p_i (e^{k(x_n-x_i)} + e^{k(x_i-x_n)})``
    and off-diagonals ``-k**2 p_n p_m (e^{k(x_n-x_m)} + e^{k(x_m-x_n)})``.
    """
    x = np.asarray(positions, dtype=float)
    p = np.asarray(weights, dtype=float)
    if x.shape != p.shape or x.ndim != 1:
        raise ValueError("positions and weights must be 1-D arrays of equal length")
    d = k * (x[:, None] - x[None, :])
    pair = 2.0 * np.cosh(d)
    H = -k * k * np.outer(p, p) * pair
    off = pair * p[None, :]
    np.fill_diagonal(off, 0.0)
    np.fill_diagonal(H, k * k * p * off.sum(axis=1))
    return H
