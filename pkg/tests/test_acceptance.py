"""The twelve acceptance criteria at full size.

Each test records a ``PASS``/``FAIL`` line that the terminal summary prints
under "acceptance criteria".
"""

import math

import pytest

from conftest import ACCEPTANCE_LINES
from qsearch import theory as T
from qsearch.montecarlo import StrategySpec, simulate
from qsearch.verify import (
    check_bound_dominance,
    check_compare_grid,
    check_distance_law,
    check_dominance,
    check_envelope,
    check_error_law,
    check_m2_identity,
    check_mission_accuracy,
    check_mission_ordering,
    check_monotone,
    check_optimizer_trend,
    check_posterior,
    check_proactive_bisection,
    check_tpqs_noiseless,
    report_json,
    run_suite,
    sweep,
)

NOISY_M = (2, 5, 10, 20, 50)


def record(number, title, passed, detail=""):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


@pytest.fixture(scope="module")
def noisy_sweeps():
    """PQS and TPQS at p = 0.1 on 100 thetas x 100 replicates; shared by 3 and 5."""
    return {
        "pqs": sweep("pqs", 0.1, NOISY_M, 100, 100, seed=0),
        "tpqs": sweep("tpqs", 0.1, NOISY_M, 100, 100, seed=0),
    }


def test_criterion_01_error_law():
    c = check_error_law((2, 3, 5, 10, 20), n=20, n_theta=1000)
    m2 = next(r for r in c.detail["rows"] if r["m"] == 2)
    special = abs(m2["mean"] - 2.0**-22) <= 3 * m2["se"]
    assert record(1, "mean error after 20 samples matches the closed form", c.passed and special), c.detail


def test_criterion_02_distance_law():
    c = check_distance_law((2, 3, 5, 10, 20), epsilon=1e-4, n_theta=1000)
    worst = max(abs(r["mean"] - r["theory"]) for r in c.detail["rows"])
    assert record(2, "mean distance matches m/(2m-2)", c.passed, f"worst gap {worst:.2e}"), c.detail


def test_criterion_03_monotone_tradeoff(noisy_sweeps):
    dq = {m: simulate(StrategySpec("dqs", m=m), n_theta=1000) for m in (2, 3, 5, 10, 20)}
    checks = [check_monotone(dq, "dqs"), check_monotone(noisy_sweeps["pqs"], "pqs p=0.1"),
              check_monotone(noisy_sweeps["tpqs"], "tpqs p=0.1")]
    ok = all(c.passed for c in checks)
    assert record(3, "samples rise and distance falls with m", ok), [c.detail for c in checks if not c.passed]


def test_criterion_04_equivalences():
    a = check_m2_identity(p=0.1, n_theta=100)
    b = check_tpqs_noiseless((2, 3, 5, 10, 20), n_theta=100, delta=1e-3)
    c = check_proactive_bisection((0.0, 0.1), n_theta=100)
    ok = a.passed and b.passed and c.passed
    detail = f"TPQS gap {b.detail['worst_gap']:.1e}, proactive gap {c.detail['worst_gap']:.1e}"
    assert record(4, "m=2 identity, noiseless TPQS = DQS, lam=0 proactive = bisection", ok, detail), \
        (a.detail, b.detail, c.detail)


def test_criterion_05_tpqs_dominance(noisy_sweeps):
    c = check_dominance(noisy_sweeps["pqs"], noisy_sweeps["tpqs"])
    assert record(5, "TPQS no worse than PQS in samples and distance", c.passed), c.detail


def test_criterion_06_error_envelope():
    c = check_envelope((2, 5, 10), (0.05, 0.1, 0.2), tuple(range(5, 51, 5)), n_theta=50, replicates=40)
    worst = max(r["worst_ratio"] for r in c.detail["rows"])
    assert record(6, "conservative PQS error under the geometric bound", c.passed, f"worst ratio {worst:.3f}"), \
        c.detail
    assert check_bound_dominance().passed


def test_criterion_07_posterior():
    c = check_posterior(n_updates=100_000, delta=1e-3)
    assert record(7, "posterior normalization, reconstruction, truncation, MI argmax", c.passed), c.detail


def test_criterion_08_optimizer_trend():
    c = check_optimizer_trend((1.0, 10.0, 30.0, 60.0), (4.0, 2.0, 1.0, 0.5), 40_000.0)
    assert record(8, "optimal m nondecreasing as velocity drops", c.passed), c.detail


def test_criterion_09_mission_ordering():
    c = check_mission_ordering(seed=0, K_strips=11, gamma=10.0, velocity=0.5, factor=0.8)
    assert record(9, "DQS+I1 < bisection+I1 < bisection, with 0.8 margin", c.passed,
                  f"ratio {c.detail['ratio']:.2f}"), c.detail


def test_criterion_10_mission_accuracy():
    c = check_mission_accuracy(seed=0, K_strips=11, epsilon=1e-3)
    assert record(10, "noiseless mission within eps + one cell", c.passed,
                  f"max error {c.detail['max_abs_error']:.2e}"), c.detail


def test_criterion_11_compare_grid():
    c = check_compare_grid(
        p_values=(0.0, 0.1), seed=0, n_theta=50, replicates=10,
        m_grid=(2, 3, 5, 10, 20, 40, 60, 100), lambda_grid=tuple(i / 10 for i in range(11)),
        gammas=(1.0, 10.0, 30.0, 60.0), velocities=(0.5, 1.0, 2.0, 4.0), epsilon=1e-4,
    )
    assert record(11, "quantile search faster than proactive at 10 s, 0.5 m/s", c.passed), c.detail
    assert all(not math.isnan(v["quantile"]) for v in c.detail.values())


def test_criterion_12_determinism():
    a = report_json(run_suite("all", seed=0), "all", 0)
    b = report_json(run_suite("all", seed=0), "all", 0)
    assert record(12, "verify all is byte-identical across runs", a == b and a.encode() == b.encode())
