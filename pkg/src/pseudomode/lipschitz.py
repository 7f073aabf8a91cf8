"""Derivative-free global minimization of a Lipschitz function on [0, 1].

Each open bracket ``[x0, x1]`` with endpoint values ``v0, v1`` is scored by

    min(v0, v1) - L * (x1 - x0) / 2,

a lower bound on the function over the bracket. The bracket with the lowest
score is split at its midpoint, and the search stops once the best observed
value is within ``epsilon`` of the best lower bound.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple

__all__ = ["CandidateInterval", "TraceEvent", "GlobalOptResult", "score", "optimize"]

MIN_WIDTH = 1e-14


class CandidateInterval(NamedTuple):
    """Heap entry. Tuple order gives score first, then the smaller left end."""

    score: float
    x_left: float
    x_right: float
    value_left: float
    value_right: float

    @property
    def query(self):
        return 0.5 * (self.x_left + self.x_right)


class TraceEvent(NamedTuple):
    kind: str  # "boundary", "insert", "extract" or "final"
    iteration: int
    x: float
    value: float
    score: float
    gap: float
    evaluations: int


@dataclass
class GlobalOptResult:
    best_x: float
    best_value: float
    evaluations: int
    certified_gap: float
    certified: bool
    lower_bound: float
    trace: list = field(default_factory=list, repr=False)

    def rows(self):
        """``(iteration, x, value, score, gap, evaluations)`` per extraction, then the final state.

        ``gap`` is the certified gap before the extraction; the final row
        carries the best point, the lower bound as its score, and the
        terminal gap.
        """
        return [
            (e.iteration, e.x, e.value, e.score, e.gap, e.evaluations)
            for e in self.trace
            if e.kind in ("extract", "final")
        ]


def score(x0, x1, v0, v1, lipschitz_L):
    """Midpoint query of ``[x0, x1]`` and its lower-bound score."""
    return 0.5 * (x0 + x1), min(v0, v1) - lipschitz_L * abs(x1 - x0) / 2.0


def optimize(objective, lipschitz_L, epsilon=1e-3, max_evals=1_000_000, record_trace=True):
    """Minimize ``objective`` over ``[0, 1]`` to within ``epsilon`` in value.

    Parameters
    ----------
    objective : callable
        Function of one float. It must be ``lipschitz_L``-Lipschitz for the
        certificate to be meaningful.
    lipschitz_L : float
        Lipschitz constant.
    epsilon : float
        Target gap between the best value found and the certified lower bound.
    max_evals : int
        Evaluation budget. Exhausting it returns ``certified=False``.

    Returns
    -------
    GlobalOptResult
        ``certified_gap`` is ``best_value - lower_bound``, where
        ``lower_bound`` is the largest lower bound on the global minimum
        established so far.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not lipschitz_L > 0:
        raise ValueError("lipschitz_L must be positive")
    if max_evals < 2:
        raise ValueError("max_evals must allow the two boundary evaluations")

    trace = []
    seen = {}

    def evaluate(x):
        key = round(x / MIN_WIDTH)
        if key not in seen:
            seen[key] = float(objective(x))
        return seen[key]

    v0, v1 = evaluate(0.0), evaluate(1.0)
    best_x, best_value = (0.0, v0) if v0 <= v1 else (1.0, v1)
    if record_trace:
        trace.append(TraceEvent("boundary", 0, 0.0, v0, math.nan, math.inf, 1))
        trace.append(TraceEvent("boundary", 0, 1.0, v1, math.nan, math.inf, 2))

    heap = []
    # smallest score among brackets too narrow to split further
    floor = math.inf
    lower_bound = -math.inf

    def push(x0, x1, va, vb, iteration):
        nonlocal floor
        q, s = score(x0, x1, va, vb, lipschitz_L)
        if x1 - x0 < MIN_WIDTH or not x0 < q < x1:
            floor = min(floor, s)
            return
        heapq.heappush(heap, CandidateInterval(s, x0, x1, va, vb))
        if record_trace:
            trace.append(TraceEvent("insert", iteration, q, math.nan, s, math.nan, len(seen)))

    push(0.0, 1.0, v0, v1, 0)
    iteration = 0
    while True:
        outstanding = min(heap[0].score if heap else math.inf, floor)
        if outstanding == math.inf:
            outstanding = best_value
        lower_bound = max(lower_bound, outstanding)
        gap = max(best_value - lower_bound, 0.0)
        if gap <= epsilon:
            certified = True
            break
        if len(seen) >= max_evals or not heap:
            certified = False
            break
        iteration += 1
        cand = heapq.heappop(heap)
        xm = cand.query
        vm = evaluate(xm)
        if vm < best_value:
            best_x, best_value = xm, vm
        if record_trace:
            trace.append(TraceEvent("extract", iteration, xm, vm, cand.score, gap, len(seen)))
        push(cand.x_left, xm, cand.value_left, vm, iteration)
        push(xm, cand.x_right, vm, cand.value_right, iteration)

    if record_trace:
        trace.append(TraceEvent("final", iteration, best_x, best_value, lower_bound, gap, len(seen)))
    return GlobalOptResult(
        best_x=best_x,
        best_value=best_value,
        evaluations=len(seen),
        certified_gap=gap,
        certified=certified,
        lower_bound=lower_bound,
        trace=trace,
    )
