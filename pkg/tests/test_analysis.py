"""Lower-bound model, sweeps and the speedup table."""

import math

import numpy as np
import pytest

from itergrover.analysis import (
    SOLE_PG3_PLATEAU,
    LowerBoundModel,
    approx_error_sweep,
    closed_form_error_sweep,
    cubic_involution_sweep,
    fit_loglog_slope,
    lower_bound_constant,
    minimal_pg_coefficient,
    minimal_sg2_coefficient,
    perturbation_power_check,
    ptilde_crossing_time,
    sole_pg_failure_sweep,
    speedup_table,
)
from itergrover.reduced import ProblemParams


def test_lower_bound_constant_values():
    # independent route: direct factorial arithmetic
    assert lower_bound_constant(1) == pytest.approx(0.5, abs=1e-12)
    assert lower_bound_constant(2) == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-12)
    assert lower_bound_constant(3) == pytest.approx(6.0 ** (1.0 / 3.0) / 2.0, abs=1e-12)
    for k in (1, 2, 3, 5, 8, 13):
        direct = math.factorial(k) ** (1.0 / k) / 2.0
        assert lower_bound_constant(k) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(ValueError):
        lower_bound_constant(0)


def test_lower_bound_inequality_up_to_64():
    for k in range(1, 65):
        assert lower_bound_constant(k) >= k / (2.0 * math.e)


def test_lower_bound_model_matrix():
    m = LowerBoundModel(3, 1 << 10).matrix
    assert m.shape == (4, 4)
    np.testing.assert_allclose(np.diag(m), 1.0)
    np.testing.assert_allclose(np.diag(m, k=1), 2.0 / 32.0)
    assert np.max(np.abs(np.tril(m, k=-1))) == 0.0


def test_ptilde_crossing_k1():
    # C(t,1) * 2/sqrt(N) >= 1 at t = sqrt(N)/2
    assert ptilde_crossing_time(1, 1 << 20) == 512


def test_ptilde_crossing_matches_constant():
    N = 1 << 20
    for k in range(1, 7):
        c = ptilde_crossing_time(k, N) / math.sqrt(N)
        assert abs(c - lower_bound_constant(k)) / lower_bound_constant(k) <= 0.02


def test_ptilde_binomial_identity():
    # closed form against an independent matrix-power route
    k, N = 3, 1 << 16
    M = LowerBoundModel(k, N).matrix
    u = np.zeros(k + 1)
    u[k] = 1.0
    t = 700
    first = (np.linalg.matrix_power(M, t) @ u)[0]
    closed = math.comb(t, k) * (2.0 / math.sqrt(N)) ** k
    assert first == pytest.approx(closed, rel=1e-9)


def test_fit_loglog_slope_recovers_power_law():
    sizes = [2 ** n for n in range(10, 22, 2)]
    slope, _ = fit_loglog_slope(sizes, [3.0 * N ** -0.5 for N in sizes])
    assert slope == pytest.approx(-0.5, abs=1e-9)
    with pytest.raises(ValueError):
        fit_loglog_slope([2, 4, 8], [1.0, 0.5, 0.25])


def test_sole_pg_failure_plateau():
    sizes = [1 << 14, 1 << 16, 1 << 18]
    res = sole_pg_failure_sweep(sizes)
    for _, v in res.rows:
        assert v < 0.99
        assert abs(v - SOLE_PG3_PLATEAU) <= 0.01
    assert res.extra["spread"] <= 0.01
    with pytest.raises(ValueError):
        sole_pg_failure_sweep(sizes, k=1)


def test_approx_error_sweep_slope():
    sizes = [2 ** n for n in range(10, 19, 2)]
    for k in (2, 3):
        res = approx_error_sweep(sizes, k)
        assert -0.6 <= res.slope <= -0.4
        for N, v in res.rows:
            assert v * math.sqrt(N) <= 5.0


def test_closed_form_error_sweep_slope():
    res = closed_form_error_sweep([2 ** n for n in range(10, 23, 2)])
    assert -0.6 <= res.slope <= -0.4


def test_cubic_involution_sweeps():
    sizes = [2 ** n for n in range(10, 21, 2)]
    exact = cubic_involution_sweep(sizes, 3, leading_order=False)
    for N, v in exact.rows:
        assert v <= 1e-12
    approx = cubic_involution_sweep(sizes, 3, leading_order=True)
    assert -1.15 <= approx.slope <= -0.85


def test_perturbation_power_check():
    sizes = [2 ** n for n in range(10, 23, 2)]
    res = perturbation_power_check(sizes, seeds=4)
    assert -0.6 <= res.slope <= -0.4
    # doubling the coefficient roughly doubles the accumulated error
    base = perturbation_power_check([1 << 16, 1 << 18], seeds=6, c=1.0)
    double = perturbation_power_check([1 << 16, 1 << 18], seeds=6, c=2.0)
    for (_, e1), (_, e2) in zip(base.rows, double.rows):
        assert 1.4 <= e2 / e1 <= 2.8


def test_perturbation_zero_is_exact():
    rng = np.random.default_rng(5)
    A, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    assert np.max(np.abs(np.linalg.matrix_power(A + 0.0, 900) - np.linalg.matrix_power(A, 900))) == 0.0


def test_minimal_coefficients_sqrt2_ratio():
    params = ProblemParams(2, 20)
    threshold = 1.0 - 10.0 / math.sqrt(params.N)
    pg = minimal_pg_coefficient(params, threshold)
    sg = minimal_sg2_coefficient(params, threshold)
    assert abs(sg / pg - math.sqrt(2.0)) <= 0.01


def test_speedup_table_contents():
    rows = speedup_table(n=18)
    by_method = {(r.method, r.k): r for r in rows}
    sg2 = by_method[("sequential-grover", 2)]
    pg2 = by_method[("pg2", 2)]
    assert sg2.coefficient / pg2.coefficient == pytest.approx(math.sqrt(2.0), abs=0.01)

    k3 = sorted(r.coefficient for r in rows if r.k == 3 and r.method != "pg3-sole(control)")
    bound3 = lower_bound_constant(3)
    # bound < k3 schedule < composite < sequential
    assert bound3 < k3[0] < k3[1] < k3[2]
    assert k3[0] == pytest.approx(1.51, abs=0.02)
    assert k3[1] == pytest.approx(1.898, abs=0.01)
    assert k3[2] == pytest.approx(2.356, abs=0.01)

    threshold = 1.0 - 10.0 / math.sqrt(2.0 ** 18)
    for r in rows:
        assert r.coefficient > r.lower_bound
        if r.method == "pg3-sole(control)":
            assert r.success < 0.99
        else:
            assert r.success >= threshold


def test_sole_pg_k2_control_reaches_certainty():
    res = sole_pg_failure_sweep([1 << 16, 1 << 18], k=2)
    for N, v in res.rows:
        assert v >= 1.0 - 10.0 / math.sqrt(N)
