"""Extended generalized Huber losses and the smoothed Hamming loss.

All losses here are univariate and even. The smoothed Hamming loss

    L(x) = -1 / (exp(k x) + exp(-k x) + m)

is evaluated through ``t = exp(-k |x|)`` so that no intermediate ever
overflows: for large ``|k x|`` the value underflows towards ``-0.0``
instead of producing ``inf / inf``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "SaturationError",
    "Region",
    "RegionBoundaries",
    "SmoothedHammingLoss",
    "PiecewiseLoss",
    "PseudoHuberLoss",
    "GeneralizedHuberLoss",
    "Transform",
    "ExtendedLoss",
    "NearZeroQuadratic",
    "smoothed_hamming_eval",
    "smoothed_hamming_derivs",
    "region_boundaries",
    "region_from_alpha",
    "region_classify",
    "lipschitz_bound",
    "max_slope",
    "catalog_eval",
]


class SaturationError(FloatingPointError):
    """Raised when an auxiliary function overflows while evaluating a loss."""

    def __init__(self, term, x):
        self.term = term
        self.x = x
        super().__init__(f"{term} is not finite at x={x!r}")


class Region(str, enum.Enum):
    CONVEX = "convex"
    CONCAVE = "concave"
    TAIL = "tail"


class RegionBoundaries(NamedTuple):
    alpha_convex_end: float
    alpha_concave_end: float
    degenerate: bool


def _check_km(k, m):
    if not (np.isfinite(k) and k > 0):
        raise ValueError(f"k must be a positive finite number, got {k!r}")
    if not (np.isfinite(m) and m > -2):
        raise ValueError(f"m must be a finite number greater than -2, got {m!r}")


def _decay(k, x):
    """Return ``(t, sign)`` with ``t = exp(-k|x|)`` and ``sign = sign(x)``."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    return np.exp(-k * ax), np.sign(x), ax


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def smoothed_hamming_eval(loss, x):
    """Value of the smoothed Hamming loss at ``x`` (scalar or array).

    Overflow saturates to ``-0.0`` once ``exp(-k|x|)`` underflows.
    """
    t, _, _ = _decay(loss.k, x)
    return _scalar(-t / (1.0 + loss.m * t + t * t))


def smoothed_hamming_derivs(loss, x):
    """First, second and third derivatives of the smoothed Hamming loss.

    With ``a = 2 cosh(k x)`` the closed forms are::

        L'   = a' / (a + m)**2
        L''  = k**2 (8 + m a - a**2) / (a + m)**3
        L''' = k**2 a' (a**2 - 4 m a + m**2 - 24) / (a + m)**4

    They are evaluated after multiplying through by powers of
    ``t = exp(-k|x|)``.
    """
    k, m = loss.k, loss.m
    t, sign, ax = _decay(k, x)
    t2 = t * t
    one_m_t2 = -np.expm1(-2.0 * k * ax)  # 1 - t**2 without cancellation near 0
    one_p_t2 = 1.0 + t2
    den = 1.0 + m * t + t2
    d1 = sign * k * one_m_t2 * t / den**2
    d2 = k * k * t * (8.0 * t2 + m * t * one_p_t2 - one_p_t2**2) / den**3
    d3 = sign * k**3 * one_m_t2 * t * (one_p_t2**2 - 4.0 * m * t * one_p_t2 + (m * m - 24.0) * t2) / den**4
    return _scalar(d1), _scalar(d2), _scalar(d3)


def region_boundaries(m):
    """Values of ``2 cosh(k x)`` where the loss changes operating region.

    ``alpha_convex_end`` is the positive root of ``8 + m a - a**2`` (second
    derivative vanishes); ``alpha_concave_end`` is the larger root of
    ``a**2 - 4 m a + m**2 - 24`` (third derivative vanishes). For ``m = 2``
    these are 4 and 10.
    """
    if not (np.isfinite(m) and m > -2):
        raise ValueError(f"m must be a finite number greater than -2, got {m!r}")
    convex_end = (m + math.sqrt(m * m + 32.0)) / 2.0
    concave_end = 2.0 * m + math.sqrt(3.0 * m * m + 24.0)
    degenerate = convex_end < 2.0 or concave_end < 2.0 or concave_end <= convex_end
    return RegionBoundaries(convex_end, concave_end, degenerate)


def region_from_alpha(alpha, m):
    """Classify a value ``alpha = 2 cosh(k x) >= 2``; intervals are half-open."""
    bounds = region_boundaries(m)
    if alpha < bounds.alpha_convex_end:
        return Region.CONVEX
    if alpha < bounds.alpha_concave_end:
        return Region.CONCAVE
    return Region.TAIL


def region_classify(loss, x):
    with np.errstate(over="ignore"):
        alpha = 2.0 * np.cosh(loss.k * float(x))
    return region_from_alpha(alpha, loss.m)


def max_slope(loss):
    """Exact maximum of ``|L'|``, attained where ``2 cosh(k x)`` meets the convex-region end."""
    a = region_boundaries(loss.m).alpha_convex_end
    return loss.k * math.sqrt(a * a - 4.0) / (a + loss.m) ** 2


def lipschitz_bound(loss):
    """Lipschitz constant used by the global optimizer.

    ``k / 9`` for ``m = 2`` (a slightly loose but simple bound, the true
    maximum slope being ``k sqrt(3) / 18``); the exact maximum slope otherwise.
    """
    if loss.m == 2:
        return loss.k / 9.0
    return max_slope(loss)


@dataclass(frozen=True)
class SmoothedHammingLoss:
    """Bounded, even loss ``-1 / (exp(kx) + exp(-kx) + m)``.

    Parameters
    ----------
    k : float
        Scaling parameter, ``k > 0``. Larger values approach the 0-1 loss.
    m : float
        Smoothing parameter, ``m > -2``. With ``m = 2`` the convex, concave and
        tail regions split the loss range ``[-1/4, 0)`` into equal thirds.
    """

    k: float
    m: float = 2.0

    def __post_init__(self):
        _check_km(self.k, self.m)

    def __call__(self, x):
        return smoothed_hamming_eval(self, x)

    def derivatives(self, x):
        return smoothed_hamming_derivs(self, x)

    def d1(self, x):
        return smoothed_hamming_derivs(self, x)[0]

    def d2(self, x):
        return smoothed_hamming_derivs(self, x)[1]

    def d3(self, x):
        return smoothed_hamming_derivs(self, x)[2]

    @property
    def minimum(self):
        return -1.0 / (2.0 + self.m)

    def region(self, x):
        return region_classify(self, x)

    def boundaries(self):
        return region_boundaries(self.m)

    def boundary_points(self):
        """Nonnegative ``x`` at which the region changes, ``(convex_end, concave_end)``."""
        b = region_boundaries(self.m)
        return (
            math.acosh(b.alpha_convex_end / 2.0) / self.k,
            math.acosh(b.alpha_concave_end / 2.0) / self.k,
        )

    def lipschitz_bound(self):
        return lipschitz_bound(self)


@dataclass(frozen=True)
class PiecewiseLoss:
    """Quadratic / linear / constant loss with thresholds ``sigma1 < sigma2``."""

    sigma1: float
    sigma2: float
    alpha: float = 1.0

    def __post_init__(self):
        if not self.sigma1 > 0:
            raise ValueError("sigma1 must be positive")
        if not self.sigma2 > self.sigma1:
            raise ValueError("sigma2 must exceed sigma1")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.alpha * self.sigma1**2 > 1:
            raise ValueError("alpha * sigma1**2 must not exceed 1")

    @property
    def slope(self):
        return (1.0 - self.alpha * self.sigma1**2) / (self.sigma2 - self.sigma1)

    @property
    def intercept(self):
        s1, s2 = self.sigma1, self.sigma2
        return (self.alpha * s1 * s1 * s2 - s1) / (s2 - s1)

    def __call__(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        out = np.where(
            ax <= self.sigma1,
            self.alpha * ax * ax,
            np.where(ax <= self.sigma2, self.slope * ax + self.intercept, 1.0),
        )
        return _scalar(out)

    def derivatives(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        inner = ax <= self.sigma1
        middle = (ax > self.sigma1) & (ax <= self.sigma2)
        d1 = np.where(inner, 2.0 * self.alpha * x, np.where(middle, np.sign(x) * self.slope, 0.0))
        d2 = np.where(inner, 2.0 * self.alpha, 0.0)
        return _scalar(d1), _scalar(d2), _scalar(np.zeros_like(x))


@dataclass(frozen=True)
class PseudoHuberLoss:
    delta: float = 1.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar(self.delta * np.hypot(1.0, x / self.delta))

    def derivatives(self, x):
        x = np.asarray(x, dtype=float)
        d = self.delta
        s = np.hypot(1.0, x / d)
        return _scalar(x / (d * s)), _scalar(1.0 / (d * s**3)), _scalar(-3.0 * x / (d**3 * s**5))


@dataclass(frozen=True)
class GeneralizedHuberLoss:
    """``log(exp(a x) + exp(-a x) + beta) / a``; log-cosh (plus ``log 2 / a``) at ``beta = 0``."""

    a: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not self.beta > -2:
            raise ValueError("beta must be greater than -2")

    def __call__(self, x):
        t, _, ax = _decay(self.a, x)
        return _scalar(ax + np.log1p(t * t + self.beta * t) / self.a)

    def derivatives(self, x):
        a, b = self.a, self.beta
        t, sign, ax = _decay(a, x)
        t2 = t * t
        one_m_t2 = -np.expm1(-2.0 * a * ax)
        den = 1.0 + t2 + b * t
        d1 = sign * one_m_t2 / den
        d2 = a * (b * t * (1.0 + t2) + 4.0 * t2) / den**2
        d3 = sign * a * a * one_m_t2 * t * (t * (b * b - 8.0) - b * (1.0 + t2)) / den**3
        return _scalar(d1), _scalar(d2), _scalar(d3)


def catalog_eval(entry, x):
    """Evaluate any loss from the catalog at ``x``."""
    return entry(x)


class Transform(NamedTuple):
    """A scalar function with its first two derivatives."""

    value: Callable[[float], float]
    d1: Callable[[float], float]
    d2: Callable[[float], float]


class NearZeroQuadratic(NamedTuple):
    a: float
    b: float
    curvature_ok: bool


_EXP = Transform(math.exp, math.exp, math.exp)
_LOG = Transform(math.log, lambda u: 1.0 / u, lambda u: -1.0 / (u * u))


@dataclass(frozen=True)
class ExtendedLoss:
    """Loss built as ``g(f(x) + f(-x))`` or, dissected, ``g(f(x)) + g(f(-x))``.

    ``f`` should be convex, finite everywhere and divergent at ``+inf``;
    ``g`` should be monotone increasing on the range it is evaluated on.
    Neither is proven; :meth:`spot_check` samples random secants.
    """

    f: Transform
    g: Transform
    mode: str = "composite"
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.mode not in ("composite", "dissected"):
            raise ValueError(f"mode must be 'composite' or 'dissected', got {self.mode!r}")

    def _f(self, x):
        try:
            v = self.f.value(x)
        except OverflowError:
            raise SaturationError(f"f({x!r})", x) from None
        if not math.isfinite(v):
            raise SaturationError(f"f({x!r})", x)
        return v

    def __call__(self, x):
        x = float(x)
        fp, fm = self._f(x), self._f(-x)
        if self.mode == "composite":
            return self.g.value(fp + fm)
        return self.g.value(fp) + self.g.value(fm)

    def near_zero_quadratic(self):
        """Coefficients of ``a x**2 + b``, the quadratic the loss approaches at 0.

        For the composite form ``a = g'(2 f(0)) f''(0)`` and ``b = g(2 f(0))``.
        ``curvature_ok`` is false when ``a <= 0``, i.e. the loss is not
        strictly curved at its minimum.
        """
        f0 = self.f.value(0.0)
        if self.mode == "composite":
            a = self.g.d1(2.0 * f0) * self.f.d2(0.0)
            b = self.g.value(2.0 * f0)
        else:
            a = self.g.d2(f0) * self.f.d1(0.0) ** 2 + self.g.d1(f0) * self.f.d2(0.0)
            b = 2.0 * self.g.value(f0)
        return NearZeroQuadratic(a, b, a > 0)

    def curvature_at_zero(self):
        """Second derivative at 0; equals ``2 a`` from :meth:`near_zero_quadratic`."""
        return 2.0 * self.near_zero_quadratic().a

    def derivative(self, x):
        x = float(x)
        fp, fm = self._f(x), self._f(-x)
        if self.mode == "composite":
            return self.g.d1(fp + fm) * (self.f.d1(x) - self.f.d1(-x))
        return self.g.d1(fp) * self.f.d1(x) - self.g.d1(fm) * self.f.d1(-x)

    def dissected_quasiconvexity_check(self, xs):
        """Sampled check of ``L'(x) >= 0`` for ``x >= 0``; returns the failing points."""
        bad = [float(x) for x in np.abs(np.asarray(xs, dtype=float)) if self.derivative(x) < 0]
        return bad

    def spot_check(self, n=100, scale=5.0, seed=0):
        """Random secant tests for convexity of ``f`` and monotonicity of ``g``.

        Returns a list of human readable failure descriptions (empty if none).
        """
        rng = np.random.default_rng(seed)
        failures = []
        for x1, x2, lam in zip(rng.uniform(-scale, scale, n), rng.uniform(-scale, scale, n), rng.uniform(0, 1, n)):
            mid = self._f(lam * x1 + (1 - lam) * x2)
            chord = lam * self._f(x1) + (1 - lam) * self._f(x2)
            if mid > chord + 1e-12 * max(1.0, abs(chord)):
                failures.append(f"f not convex between {x1:.4g} and {x2:.4g}")
        us = [self._f(x) + self._f(-x) for x in rng.uniform(0, scale, n)]
        for u in us:
            if not self.g.d1(u) > 0:
                failures.append(f"g not increasing at {u:.4g}")
        return failures

    @classmethod
    def log_exp(cls):
        """``f = exp`` and ``g = log``: a smooth absolute-value (log-cosh type) loss."""
        return cls(_EXP, _LOG, name="log-exp")

    @classmethod
    def sqrt_log_exp(cls):
        """``g = sqrt o log``: asymptote ``sqrt(|x|)``."""
        g = Transform(
            lambda u: math.sqrt(math.log(u)),
            lambda u: 1.0 / (2.0 * u * math.sqrt(math.log(u))),
            lambda u: -(2.0 * math.log(u) + 1.0) / (4.0 * u * u * math.log(u) ** 1.5),
        )
        return cls(_EXP, g, name="sqrt-log-exp")

    @classmethod
    def smoothed_hamming(cls, k, m=2.0):
        """Smoothed Hamming loss as ``f(x) = exp(k x) + m / 2`` and ``g(u) = -1/u``."""
        _check_km(k, m)
        f = Transform(
            lambda x: math.exp(k * x) + m / 2.0,
            lambda x: k * math.exp(k * x),
            lambda x: k * k * math.exp(k * x),
        )
        g = Transform(lambda u: -1.0 / u, lambda u: 1.0 / (u * u), lambda u: -2.0 / u**3)
        return cls(f, g, name=f"smoothed-hamming(k={k}, m={m})")
