"""Deterministic quantile search and its traces."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsearch.deterministic import FeasibleInterval, bisection, dqs, dqs_with_init
from qsearch.errors import ConfigurationError, ContradictionError, MisuseError
from qsearch.oracle import StepOracle
from qsearch.theory import dqs_expected_distance


def test_second_sample_after_quarter():
    t = dqs(StepOracle(3 / 8), m=4, max_samples=2, epsilon=0)
    assert t.locations.tolist() == [0.25, 7 / 16]
    assert t.labels[0] == 1


def test_hand_trace_m5():
    t = dqs(StepOracle(1 / 3), m=5, max_samples=4, epsilon=0)
    np.testing.assert_allclose(t.locations, [0.2, 0.36, 0.328, 0.3344])
    assert t.labels.tolist() == [1, 0, 1, 0]
    assert t.estimate == pytest.approx(0.3312)


def test_m2_is_bisection():
    t = dqs(StepOracle(1 / 3), m=2, max_samples=3, epsilon=0)
    assert t.locations.tolist() == [0.5, 0.25, 0.375]
    b = bisection(StepOracle(1 / 3), max_samples=3, epsilon=0)
    assert b.locations.tolist() == t.locations.tolist()


def test_mean_distance_m2_on_grid():
    thetas = (np.arange(1000) + 0.5) / 1000
    d = [dqs(StepOracle(th), m=2, epsilon=1e-4).distance for th in thetas]
    assert np.mean(d) == pytest.approx(dqs_expected_distance(2), abs=1e-3)


def test_init_hand_trace():
    t = dqs_with_init(StepOracle(0.52), m=2, epsilon=1e-4, x0=0.5)
    assert t.locations[:4].tolist() == [0.5, 0.75, 0.625, 0.5625]
    assert t.labels[:4].tolist() == [1, 0, 0, 0]
    assert abs(t.estimate - 0.52) <= 1e-4


def test_init_at_theta_goes_left_only():
    t = dqs_with_init(StepOracle(0.3), m=3, epsilon=1e-4, x0=0.3)
    assert t.labels[0] == 0 and t.columns["b"][0] == 0.3
    assert (t.locations <= 0.3).all()
    assert abs(t.estimate - 0.3) <= 1e-4


def test_init_at_zero_is_plain_search():
    a = dqs_with_init(StepOracle(0.61), m=3, epsilon=1e-4, x0=0.0)
    b = dqs(StepOracle(0.61), m=3, epsilon=1e-4)
    assert a.locations.tolist() == b.locations.tolist()


def test_init_counts_approach_from_position():
    t = dqs_with_init(StepOracle(0.52), m=2, epsilon=1e-3, x0=0.5, position=0.1)
    assert t.legs()[0] == pytest.approx(0.4)
    assert t.distance == pytest.approx(t.legs().sum())
    u = dqs_with_init(StepOracle(0.52), m=2, epsilon=1e-3, x0=0.5)
    assert u.distance == pytest.approx(t.distance - 0.4)


def test_noisy_oracle_rejected():
    with pytest.raises(MisuseError):
        dqs(StepOracle(0.5, 0.1))


@pytest.mark.parametrize("kw", [dict(m=1.5), dict(epsilon=0), dict(epsilon=-1)])
def test_bad_parameters(kw):
    with pytest.raises(ConfigurationError):
        dqs(StepOracle(0.5), **kw)


def test_feasible_interval_contradiction():
    iv = FeasibleInterval()
    iv.observe(0.6, 0)
    with pytest.raises(ContradictionError):
        iv.observe(0.7, 1)


def test_trace_csv():
    t = dqs(StepOracle(1 / 3), m=5, max_samples=2, epsilon=0)
    lines = t.to_csv().splitlines()
    assert lines[0] == "step,x,y,a,b,cum_distance"
    assert lines[1].split(",")[:3] == ["1", "0.2", "1"]
    assert float(lines[2].split(",")[-1]) == pytest.approx(0.36)


@given(st.floats(0, 1), st.floats(2, 50), st.sampled_from([1e-2, 1e-3, 1e-4]))
@settings(max_examples=100, deadline=None)
def test_error_within_epsilon(theta, m, eps):
    t = dqs(StepOracle(theta), m=m, epsilon=eps)
    assert t.converged
    assert abs(t.estimate - theta) <= eps + 1e-12


@given(st.floats(0, 1), st.floats(2, 50))
@settings(max_examples=100, deadline=None)
def test_width_contracts_by_quantile_factors(theta, m):
    t = dqs(StepOracle(theta), m=m, epsilon=1e-4)
    w = np.concatenate([[1.0], t.columns["b"] - t.columns["a"]])
    ratio = w[1:] / w[:-1]
    ok = np.isclose(ratio, 1 / m, rtol=1e-6) | np.isclose(ratio, (m - 1) / m, rtol=1e-6)
    assert ok.all()


@given(st.floats(0, 1), st.floats(2, 50), st.floats(0, 1))
@settings(max_examples=100, deadline=None)
def test_distance_sums_legs(theta, m, x0):
    t = dqs_with_init(StepOracle(theta), m=m, epsilon=1e-3, x0=x0, position=0.0)
    assert t.distance == pytest.approx(t.legs().sum(), abs=1e-12)
    assert abs(t.estimate - theta) <= 1e-3 + 1e-12


def test_tradeoff_over_m():
    thetas = (np.arange(1000) + 0.5) / 1000
    n, d = [], []
    for m in (2, 5, 10, 20):
        runs = [dqs(StepOracle(th), m=m, epsilon=1e-4) for th in thetas]
        n.append(np.mean([r.n for r in runs]))
        d.append(np.mean([r.distance for r in runs]))
    assert np.all(np.diff(n) >= 0)
    assert np.all(np.diff(d) <= 0)
