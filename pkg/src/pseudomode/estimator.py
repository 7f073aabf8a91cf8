"""Pseudo-mode location estimates and the baseline statistics they are compared with.

Raw data are mapped affinely onto ``[0, 1]`` before optimizing, which makes
every estimate equivariant under ``y = a x + b`` with ``a > 0``. The
objective is nonincreasing left of the smallest sample and nondecreasing
right of the largest (each term is), so searching ``[0, 1]`` loses nothing.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import lipschitz, quasiconvex
from .losses import SmoothedHammingLoss, lipschitz_bound
from .objective import Objective, SampleSet, certificate_bound

__all__ = [
    "DEFAULT_K",
    "METHODS",
    "EstimateReport",
    "Baselines",
    "normalize",
    "baselines",
    "grid_oracle",
    "pseudo_mode",
    "estimate",
    "PseudoModeEstimator",
]

DEFAULT_K = 2.633
METHODS = ("mean", "median", "mode", "pseudo-lipschitz", "pseudo-quasi", "oracle")
_PSEUDO = {"lipschitz": "pseudo-lipschitz", "quasiconvex": "pseudo-quasi", "quasi": "pseudo-quasi"}


class UncertifiedQuasiConvexityWarning(UserWarning):
    """The quasi-convex optimizer was asked to run where no certificate holds."""


@dataclass
class EstimateReport:
    method: str
    location_raw: float
    location_normalized: float
    objective_value: float | None
    evaluations: int
    certified: bool
    k: float | None = None
    m: float | None = None
    epsilon: float | None = None
    bracket: tuple | None = None
    gap: float | None = None
    diagnostics: list = field(default_factory=list)
    trace: list = field(default_factory=list, repr=False)

    @property
    def parameters(self):
        return self.k, self.m, self.epsilon

    def to_dict(self, include_trace=False):
        d = asdict(self)
        if d["bracket"] is not None:
            d["bracket"] = list(d["bracket"])
        if not include_trace:
            d.pop("trace")
        else:
            d["trace"] = [list(row) for row in self.trace]
        return d


class Baselines(NamedTuple):
    mean: float
    median: float
    mode: float


def _as_raw(raw):
    a = np.asarray(raw, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("need at least one value")
    if not np.all(np.isfinite(a)):
        raise ValueError("values must be finite")
    return a


def normalize(raw):
    """Min-max map onto ``[0, 1]``; a constant dataset maps to zeros with scale 0."""
    a = _as_raw(raw)
    lo, hi = float(a.min()), float(a.max())
    scale = hi - lo
    if scale == 0:
        return SampleSet(np.zeros_like(a), lo, 0.0)
    # clip guards against rounding just outside [0, 1]
    return SampleSet(np.clip((a - lo) / scale, 0.0, 1.0), lo, scale)


def baselines(raw, midpoint_median=False):
    """Mean, median and most frequent value.

    The median of an even-sized sample is the lower central order statistic
    unless ``midpoint_median`` is set. Ties for the mode go to the smallest
    value.
    """
    a = _as_raw(raw)
    s = np.sort(a)
    n = s.size
    if n % 2 or not midpoint_median:
        median = float(s[(n - 1) // 2])
    else:
        median = float(0.5 * (s[n // 2 - 1] + s[n // 2]))
    counts = Counter(s.tolist())
    mode = min(counts, key=lambda v: (-counts[v], v))
    return Baselines(float(np.mean(a)), median, float(mode))


def grid_oracle(samples, k, m=2.0, grid_size=1_000_001):
    """Brute-force minimum of the average objective on a uniform grid over ``[0, 1]``.

    Returns ``(x, value)``; ties go to the smallest ``x``.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    obj = Objective(samples, k, m)
    xs = np.linspace(0.0, 1.0, grid_size)
    vals = obj.values(xs)
    i = int(np.argmin(vals))
    return float(xs[i]), float(vals[i])


def _check_method(method):
    method = _PSEUDO.get(method, method)
    if method not in METHODS + ("auto",):
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return method


def resolve_method(k, m):
    """Quasi-convex search where the certificate holds, global search otherwise."""
    if m == 2 and certificate_bound(k) < 4:
        return "pseudo-quasi"
    return "pseudo-lipschitz"


def pseudo_mode(samples, k=DEFAULT_K, m=2.0, method="auto", epsilon=1e-6, max_evals=None, trace=False):
    """Minimizer of the average smoothed Hamming loss over ``samples``.

    Parameters
    ----------
    samples : SampleSet or array-like
        Normalized samples, or raw data (normalized here).
    k, m : float
        Loss parameters, in normalized units.
    method : {"auto", "pseudo-lipschitz", "pseudo-quasi"}
        ``"auto"`` picks the quasi-convex search when ``m == 2`` and the
        certificate bound for ``k`` is below 4 (``k <= arccosh 7``), and the
        Lipschitz search otherwise.
    epsilon : float
        Value gap for the Lipschitz search, bracket width for the
        quasi-convex one.
    max_evals : int, optional
        Evaluation budget; defaults to 10**6 (Lipschitz) or 10**4 (quasi-convex).

    Returns
    -------
    EstimateReport
    """
    if not isinstance(samples, SampleSet):
        samples = normalize(samples)
    SmoothedHammingLoss(k, m)
    method = _check_method(method)
    if method == "auto":
        method = resolve_method(k, m)
    if method not in ("pseudo-lipschitz", "pseudo-quasi"):
        raise ValueError(f"pseudo_mode does not run {method!r}")

    common = dict(method=method, k=k, m=m, epsilon=epsilon)
    if samples.scale == 0:
        return EstimateReport(
            location_raw=samples.offset, location_normalized=0.0, objective_value=-1.0 / (2.0 + m),
            evaluations=0, certified=True, bracket=(0.0, 0.0), gap=0.0, **common,
        )

    obj = Objective(samples, k, m)
    if method == "pseudo-lipschitz":
        res = lipschitz.optimize(
            obj, lipschitz_bound(obj.loss), epsilon,
            max_evals=1_000_000 if max_evals is None else max_evals, record_trace=trace,
        )
        rows = res.rows() if trace else []
        return EstimateReport(
            location_raw=samples.to_raw(res.best_x), location_normalized=res.best_x,
            objective_value=res.best_value, evaluations=res.evaluations, certified=res.certified,
            gap=res.certified_gap, trace=rows, **common,
        )

    if m != 2:
        raise ValueError("the quasi-convex search requires m = 2")
    diagnostics = []
    if certificate_bound(k) >= 4:
        msg = f"k={k} exceeds arccosh(7); quasi-convexity is not certified"
        diagnostics.append(msg)
        warnings.warn(msg, UncertifiedQuasiConvexityWarning, stacklevel=2)
    res = quasiconvex.optimize(obj, epsilon, max_evals=10_000 if max_evals is None else max_evals)
    return EstimateReport(
        location_raw=samples.to_raw(res.best_x), location_normalized=res.best_x,
        objective_value=res.best_value, evaluations=res.evaluations, certified=res.certified,
        bracket=res.bracket, diagnostics=diagnostics + res.diagnostics,
        trace=list(res.trace) if trace else [], **common,
    )


def estimate(raw, method="auto", k=DEFAULT_K, m=2.0, epsilon=1e-6, grid_size=1_000_001,
             max_evals=None, trace=False):
    """Any supported location statistic of ``raw`` as an :class:`EstimateReport`."""
    method = _check_method(method)
    samples = normalize(raw)
    if method in ("auto", "pseudo-lipschitz", "pseudo-quasi"):
        return pseudo_mode(samples, k, m, method, epsilon, max_evals, trace)

    def to_norm(v):
        return 0.0 if samples.scale == 0 else (v - samples.offset) / samples.scale

    if method == "oracle":
        if samples.scale == 0:
            x, v = 0.0, -1.0 / (2.0 + m)
        else:
            x, v = grid_oracle(samples, k, m, grid_size)
        return EstimateReport(
            method=method, location_raw=samples.to_raw(x), location_normalized=x,
            objective_value=v, evaluations=grid_size if samples.scale else 0, certified=True,
            k=k, m=m, epsilon=1.0 / (grid_size - 1),
        )
    b = baselines(raw)
    loc = {"mean": b.mean, "median": b.median, "mode": b.mode}[method]
    return EstimateReport(
        method=method, location_raw=loc, location_normalized=to_norm(loc),
        objective_value=None, evaluations=0, certified=True,
    )


class PseudoModeEstimator(TransformerMixin, BaseEstimator):
    """Per-column pseudo-mode location estimator.

    ``fit`` estimates one location per feature; ``transform`` subtracts it,
    ``inverse_transform`` adds it back.

    Parameters
    ----------
    k : float, default 2.633
        Loss scale in normalized (min-max) units. Larger values seek the mode.
    m : float, default 2.0
    method : str, default "auto"
        One of ``"auto"``, ``"pseudo-lipschitz"``, ``"pseudo-quasi"``,
        ``"oracle"``, ``"mean"``, ``"median"``, ``"mode"``.
    epsilon : float, default 1e-6
    max_evals : int or None

    Attributes
    ----------
    location_ : ndarray of shape (n_features,)
    reports_ : list of EstimateReport
    n_features_in_ : int
    """

    def __init__(self, k=DEFAULT_K, m=2.0, method="auto", epsilon=1e-6, max_evals=None):
        self.k = k
        self.m = m
        self.method = method
        self.epsilon = epsilon
        self.max_evals = max_evals

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=False, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        self.reports_ = [
            estimate(X[:, j], self.method, self.k, self.m, self.epsilon, max_evals=self.max_evals)
            for j in range(X.shape[1])
        ]
        self.location_ = np.array([r.location_raw for r in self.reports_])
        self.certified_ = all(r.certified for r in self.reports_)
        self.n_features_in_ = X.shape[1]
        return self

    def _check_X(self, X):
        check_is_fitted(self, "location_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def transform(self, X):
        return self._check_X(X) - self.location_

    def inverse_transform(self, X):
        return self._check_X(X) + self.location_
