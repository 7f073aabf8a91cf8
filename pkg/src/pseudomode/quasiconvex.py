"""Midpoint refinement of the sampled minimizer set for quasi-convex functions on [0, 1].

Starting from ``{0, 1/2, 1}``, every round keeps the points attaining the
sampled minimum together with their immediate neighbours, queries the
midpoint of every adjacent pair among them, and discards everything else.
For a strictly quasi-convex function the bracket halves every two
evaluations (or quarters every five), so the cost is logarithmic in the
target width.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "NonQuasiConvexWarning",
    "MinimizerSet",
    "QuasiTraceRow",
    "QuasiOptResult",
    "minimizer_set",
    "optimize",
    "optimize_discrete",
]


class NonQuasiConvexWarning(RuntimeWarning):
    """The sampled minimizers were not contiguous."""


class MinimizerSet(NamedTuple):
    start: int
    stop: int  # inclusive
    contiguous: bool

    def indices(self):
        return range(self.start, self.stop + 1)


class QuasiTraceRow(NamedTuple):
    iteration: int
    queried: tuple
    low: float
    high: float
    width: float
    evaluations: int


@dataclass
class QuasiOptResult:
    best_x: float
    best_value: float
    bracket: tuple
    evaluations: int
    certified: bool
    diagnostics: list = field(default_factory=list)
    trace: list = field(default_factory=list, repr=False)

    @property
    def width(self):
        return self.bracket[1] - self.bracket[0]


def minimizer_set(values, tie_tol=0.0):
    """Index range of the sampled values within ``tie_tol`` of the minimum.

    ``values`` must be ordered by coordinate. If the minimizers are not
    contiguous, which cannot happen for a quasi-convex function, the range
    spans the leftmost to the rightmost minimizer and ``contiguous`` is false.

    >>> minimizer_set([2.0, 1.0, 1.0, 2.0])
    MinimizerSet(start=1, stop=2, contiguous=True)
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("no sampled values")
    hits = np.flatnonzero(values <= values.min() + tie_tol)
    start, stop = int(hits[0]), int(hits[-1])
    return MinimizerSet(start, stop, hits.size == stop - start + 1)


def optimize(objective, epsilon=1e-6, tie_tol=None, max_evals=10_000, data_points=None):
    """Minimize a quasi-convex ``objective`` on ``[0, 1]``.

    Parameters
    ----------
    objective : callable
        Function of one float.
    epsilon : float
        Stop once the bracket around the minimizer set is at most this wide.
    tie_tol : float, optional
        Values within ``tie_tol`` of the sampled minimum count as minimizers.
        Defaults to exact comparison.
    max_evals : int
        Evaluation budget; hitting it returns ``certified=False``.
    data_points : array-like, optional
        If given, also stop as soon as a minimizer lies within ``epsilon``
        of one of these coordinates.

    Returns
    -------
    QuasiOptResult
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if tie_tol is not None and tie_tol < 0:
        raise ValueError("tie_tol must be nonnegative")
    data = None if data_points is None else np.sort(np.asarray(data_points, dtype=float))

    cache = {}
    trace = []
    diagnostics = []

    def evaluate(x):
        if x not in cache:
            cache[x] = float(objective(x))
        return cache[x]

    xs = [0.0, 0.5, 1.0]
    vs = [evaluate(x) for x in xs]
    iteration = 0
    certified = False
    while True:
        ms = minimizer_set(vs, tie_tol or 0.0)
        if not ms.contiguous:
            msg = f"non-contiguous minimizer set at iteration {iteration}; bracket widened to its span"
            diagnostics.append(msg)
            warnings.warn(msg, NonQuasiConvexWarning, stacklevel=2)
        lo, hi = max(ms.start - 1, 0), min(ms.stop + 1, len(xs) - 1)
        px, pv = xs[lo:hi + 1], vs[lo:hi + 1]
        width = px[-1] - px[0]
        if width <= epsilon:
            certified = True
            break
        if data is not None and _near_data(xs[ms.start:ms.stop + 1], data, epsilon):
            certified = True
            break
        if len(cache) >= max_evals:
            break
        queries = [0.5 * (a + b) for a, b in zip(px[:-1], px[1:])]
        if all(q in (a, b) for q, a, b in zip(queries, px[:-1], px[1:])):
            diagnostics.append("bracket reached floating-point resolution")
            break
        iteration += 1
        qv = [evaluate(q) for q in queries]
        trace.append(QuasiTraceRow(iteration, tuple(queries), px[0], px[-1], width, len(cache)))
        merged = sorted(zip(px + queries, pv + qv))
        xs = [x for x, _ in merged]
        vs = [v for _, v in merged]

    bracket = (px[0], px[-1])
    trace.append(QuasiTraceRow(iteration + 1, (), bracket[0], bracket[1], width, len(cache)))
    best_x, best_value = min(cache.items(), key=lambda kv: (kv[1], kv[0]))
    return QuasiOptResult(
        best_x=best_x,
        best_value=best_value,
        bracket=bracket,
        evaluations=len(cache),
        certified=certified,
        diagnostics=diagnostics,
        trace=trace,
    )


def _near_data(points, data, tol):
    for x in points:
        j = np.searchsorted(data, x)
        for i in (j - 1, j):
            if 0 <= i < data.size and abs(data[i] - x) <= tol:
                return True
    return False


def optimize_discrete(objective, candidates):
    """Same refinement over a sorted finite candidate set, splitting in index space.

    Returns ``(x, value, evaluations)`` for the best candidate reached; exact for
    a quasi-convex objective restricted to the candidates. Uses
    ``O(log len(candidates))`` evaluations.
    """
    cand = np.unique(np.asarray(candidates, dtype=float))
    if cand.size == 0:
        raise ValueError("no candidates")
    cache = {}

    def evaluate(i):
        if i not in cache:
            cache[i] = float(objective(cand[i]))
        return cache[i]

    last = cand.size - 1
    idx = sorted({0, last // 2, last})
    while True:
        vals = [evaluate(i) for i in idx]
        ms = minimizer_set(vals, 0.0)
        lo, hi = max(ms.start - 1, 0), min(ms.stop + 1, len(idx) - 1)
        pidx = idx[lo:hi + 1]
        queries = [(a + b) // 2 for a, b in zip(pidx[:-1], pidx[1:]) if b - a > 1]
        if not queries:
            break
        idx = sorted(set(pidx) | set(queries))
    i = min(cache, key=lambda j: (cache[j], j))
    return float(cand[i]), cache[i], len(cache)
