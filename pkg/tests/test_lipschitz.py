import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudomode.lipschitz import CandidateInterval, optimize, score
from pseudomode.losses import lipschitz_bound
from pseudomode.objective import Objective

from _instances import random_dataset


def test_score_example():
    q, s = score(0.0, 1.0, 0.2, 0.5, 1.0)
    assert q == 0.5
    assert s == pytest.approx(-0.3)


def test_candidate_ordering():
    a = CandidateInterval(-1.0, 0.5, 1.0, 0.0, 0.0)
    b = CandidateInterval(-1.0, 0.0, 0.5, 0.0, 0.0)
    assert min(a, b) is b
    assert a.query == 0.75


def test_argument_validation():
    with pytest.raises(ValueError):
        optimize(abs, 1.0, epsilon=0)
    with pytest.raises(ValueError):
        optimize(abs, 0.0)
    with pytest.raises(ValueError):
        optimize(abs, 1.0, max_evals=1)


def test_simple_abs():
    res = optimize(lambda x: abs(x - 0.3), 1.0, epsilon=1e-4)
    assert res.certified
    assert res.best_value <= 1e-4
    assert abs(res.best_x - 0.3) <= 1e-4
    assert res.lower_bound <= 0.0 <= res.best_value


def test_boundary_minimum():
    res = optimize(lambda x: x, 1.0, epsilon=1e-6)
    assert res.best_x == 0.0 and res.certified


def test_constant_terminates_immediately():
    res = optimize(lambda x: 1.0, 1.0, epsilon=0.5)
    assert res.certified and res.evaluations == 2


def test_budget_exhaustion_is_uncertified():
    res = optimize(lambda x: math.sin(40 * x), 40.0, epsilon=1e-9, max_evals=50)
    assert not res.certified
    assert res.evaluations == 50
    assert res.certified_gap > 1e-9


@settings(max_examples=40, deadline=None)
@given(c=st.floats(0, 1), L=st.floats(0.5, 20), eps=st.sampled_from([1e-2, 1e-3, 1e-4]))
def test_certificate_is_sound_for_vee(c, L, eps):
    f = lambda x: L * abs(x - c)  # noqa: E731
    res = optimize(f, L, epsilon=eps)
    assert res.certified
    assert res.best_value - 0.0 <= eps * (1 + 1e-9)
    assert res.lower_bound <= 1e-12


def test_multimodal_function():
    f = lambda x: math.sin(13 * x) + 0.5 * math.cos(29 * x)  # noqa: E731
    res = optimize(f, 13 + 0.5 * 29, epsilon=1e-5)
    grid = np.linspace(0, 1, 2_000_001)
    truth = np.min(np.sin(13 * grid) + 0.5 * np.cos(29 * grid))
    assert res.certified
    assert truth - 1e-12 <= res.best_value <= truth + 1e-5


@pytest.mark.parametrize("seed", range(8))
def test_objective_against_grid(seed):
    rng = np.random.default_rng(500 + seed)
    k = float(rng.uniform(1, 30))
    obj = Objective(random_dataset(rng), k)
    res = optimize(obj, lipschitz_bound(obj.loss), epsilon=1e-4)
    grid = np.linspace(0, 1, 200_001)
    truth = float(np.min(obj.values(grid)))
    assert res.certified
    assert res.best_value <= truth + 1e-4
    assert res.best_value >= res.lower_bound


def test_trace_gap_monotone_and_rows():
    obj = Objective([0.1, 0.15, 0.8, 0.82, 0.85], 20.0)
    res = optimize(obj, lipschitz_bound(obj.loss), epsilon=1e-5)
    rows = res.rows()
    gaps = [r[4] for r in rows]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert rows[-1][4] == res.certified_gap <= 1e-5
    evals = [r[5] for r in rows]
    assert all(b >= a for a, b in zip(evals, evals[1:]))
    assert {e.kind for e in res.trace} == {"boundary", "insert", "extract", "final"}


def test_trace_can_be_disabled():
    res = optimize(lambda x: abs(x - 0.5), 1.0, epsilon=1e-3, record_trace=False)
    assert res.trace == [] and res.certified


def test_evaluations_scale_gently_with_epsilon():
    obj = Objective([0.05, 0.5, 0.52, 0.9], 12.0)
    L = lipschitz_bound(obj.loss)
    counts = [optimize(obj, L, epsilon=e, record_trace=False).evaluations for e in (1e-2, 1e-3, 1e-4)]
    assert counts[0] <= counts[1] <= counts[2]
    assert counts[2] / counts[1] < 12
