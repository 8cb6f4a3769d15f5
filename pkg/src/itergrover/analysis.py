"""Quantitative studies: lower-bound model, error-scaling sweeps, the
sole-parallel-Grover failure demonstration and the speedup table.

Scaling claims are checked empirically: a sweep measures one error metric
over a geometric ladder of N values and fits the log-log slope by least
squares, separating 1/sqrt(N) behaviour (slope -1/2) from 1/N (slope -1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import approximate_graph, build_pg_graph, full_cubic_operator, graph_to_operator
from .reduced import ProblemParams, grover_iteration_count, initial_state
from .schedules import (
    PAPER_K3_CONSTANTS,
    k3_paper_schedule,
    named_schedule,
    pg2_then_grover_schedule,
    phase_operator,
    run_schedule,
    sequential_grover_schedule,
)

__all__ = [
    "LowerBoundModel",
    "SweepResult",
    "SpeedupRow",
    "lower_bound_constant",
    "ptilde_crossing_time",
    "fit_loglog_slope",
    "sole_pg_failure_sweep",
    "approx_error_sweep",
    "closed_form_error_sweep",
    "cubic_involution_sweep",
    "perturbation_power_check",
    "speedup_table",
    "minimal_pg_coefficient",
    "minimal_sg2_coefficient",
    "SOLE_PG3_PLATEAU",
]

# measured max sink probability of the sole k=3 parallel Grover within
# 3*[pi*sqrt(N)/4] iterations; N-stable regression constant (see tests)
SOLE_PG3_PLATEAU = 0.6141


@dataclass(frozen=True)
class LowerBoundModel:
    """Bidiagonal upper-triangular model of a (k+1)-state Grover path:
    ones on the diagonal, 2/sqrt(N) on the superdiagonal."""

    k: int
    N: int

    @property
    def matrix(self) -> np.ndarray:
        M = np.eye(self.k + 1)
        off = 2.0 / math.sqrt(self.N)
        for i in range(self.k):
            M[i, i + 1] = off
        return M


@dataclass
class SweepResult:
    metric: str
    rows: list[tuple[int, float]]  # (N, value)
    slope: float = float("nan")
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.rows])

    def sizes(self) -> np.ndarray:
        return np.array([N for N, _ in self.rows])


def lower_bound_constant(k: int) -> float:
    """(k!)^(1/k) / 2 via log-gamma, the path-crossing coefficient."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return math.exp(math.lgamma(k + 1) / k) / 2.0


def ptilde_crossing_time(k: int, N: int) -> int:
    """Smallest t whose t-step path model moves unit weight from the last to
    the first component: first component of M^t u_{k+1} reaches 1.

    The first component after t steps equals C(t, k) * (2/sqrt(N))^k, which
    the implementation cross-checks against the matrix iteration.
    """
    M = LowerBoundModel(k, N).matrix
    u = np.zeros(k + 1)
    u[k] = 1.0
    t = 0
    cap = 20 * (k + 1) * round(math.sqrt(N))
    while u[0] < 1.0:
        u = M @ u
        t += 1
        if t > cap:
            raise RuntimeError(f"no crossing within {cap} iterations (k={k}, N={N})")
    closed = math.comb(t, k) * (2.0 / math.sqrt(N)) ** k
    if abs(closed - u[0]) > 1e-9 * max(1.0, abs(u[0])):
        raise RuntimeError(f"binomial cross-check failed: {closed} vs {u[0]}")
    return t


def fit_loglog_slope(sizes, values) -> tuple[float, float]:
    """Least-squares slope and intercept of log2(value) against log2(N)."""
    x = np.log2(np.asarray(sizes, dtype=float))
    y = np.log2(np.asarray(values, dtype=float))
    if len(x) < 4:
        raise ValueError("need at least 4 points for a slope fit")
    A = np.vstack([x, np.ones_like(x)]).T
    slope, intercept = np.linalg.lstsq(A, y, rcond=None)[0]
    return float(slope), float(intercept)


def _fit_if_possible(res: SweepResult) -> SweepResult:
    if len(res.rows) >= 4:
        res.slope, _ = fit_loglog_slope(res.sizes(), res.values())
    return res


def _max_sink_probability(params: ProblemParams, t_max: int) -> float:
    M = phase_operator(f"pg:1-{params.k}", params).matrix
    v = initial_state(params)
    best = v[0] ** 2
    for _ in range(t_max):
        v = M @ v
        best = max(best, v[0] ** 2)
    return float(best)


def sole_pg_failure_sweep(sizes: list[int], k: int = 3) -> SweepResult:
    """Max sink probability of the sole parallel Grover within 3*t_G(N):
    plateaus strictly below 1 for k >= 3 (the diverted-amplitude effect).
    k=2 serves as the control with no diversion, reaching certainty."""
    if k < 2:
        raise ValueError(f"failure sweep needs k >= 2, got k={k}")
    rows = []
    for N in sizes:
        params = ProblemParams.from_size(k, N)
        t_max = 3 * grover_iteration_count(N)
        rows.append((N, _max_sink_probability(params, t_max)))
    res = SweepResult(metric=f"sole-pg{k}-max-sink", rows=rows)
    res.extra["plateau"] = rows[-1][1]
    res.extra["spread"] = max(v for _, v in rows) - min(v for _, v in rows)
    return res


def approx_error_sweep(sizes: list[int], k: int) -> SweepResult:
    """Worst trajectory deviation between the exact parallel Grover and its
    rewritten graph over t <= 3*t_G(N), from the source state."""
    g = build_pg_graph(k)
    ga = approximate_graph(g)
    rows = []
    for N in sizes:
        params = ProblemParams.from_size(k, N)
        E = graph_to_operator(g, params).matrix
        A = graph_to_operator(ga, params).matrix
        ve = initial_state(params, ideal=True)
        va = ve.copy()
        worst = 0.0
        for _ in range(3 * grover_iteration_count(N)):
            ve = E @ ve
            va = A @ va
            worst = max(worst, float(np.linalg.norm(ve - va)))
        rows.append((N, worst))
    return _fit_if_possible(SweepResult(metric=f"approx-error-k{k}", rows=rows))


def closed_form_error_sweep(sizes: list[int], c: float = 0.7) -> SweepResult:
    """Deviation of the simulated k=2 parallel Grover from the closed-form
    amplitudes at scaled count c, swept over N."""
    from .closed_form import pg2_amplitudes

    rows = []
    for N in sizes:
        params = ProblemParams.from_size(2, N)
        M = phase_operator("pg:1-2", params).matrix
        v = initial_state(params, ideal=True)
        t = round(c * math.sqrt(N))
        v = np.linalg.matrix_power(M, t) @ v
        a_ee, a_en, a_nn = pg2_amplitudes(c)
        target = np.array([a_ee, a_en, 0.0, a_nn])
        rows.append((N, float(np.max(np.abs(v - target)))))
    return _fit_if_possible(SweepResult(metric="closed-form-error", rows=rows, extra={"c": c}))


def cubic_involution_sweep(sizes: list[int], k: int, leading_order: bool = True) -> SweepResult:
    """Max-entry deviation of the squared cubic IAM composition from the
    identity.  With exact entries the composition is an exact involution
    (deviation at rounding level); the leading-order entries reproduce the
    replacement-theorem defect, which scales like 4k/N."""
    rows = []
    for N in sizes:
        params = ProblemParams.from_size(k, N)
        C = full_cubic_operator(params, leading_order=leading_order).matrix
        rows.append((N, float(np.max(np.abs(C @ C - np.eye(params.dim))))))
    res = SweepResult(metric=f"cubic-involution-k{k}", rows=rows)
    return _fit_if_possible(res) if leading_order else res


def perturbation_power_check(
    sizes: list[int],
    dim: int = 8,
    seeds: int = 8,
    c: float = 1.0,
    seed: int = 20240803,
) -> SweepResult:
    """Empirical rate of the power-perturbation bound: for random orthogonal
    A and perturbations with entries of magnitude 1/N, the max-entry error of
    (A+E)^round(c*sqrt(N)) against A^(...) should scale like 1/sqrt(N)."""
    rng = np.random.default_rng(seed)
    rows = []
    for N in sizes:
        t = round(c * math.sqrt(N))
        errs = []
        for _ in range(seeds):
            A, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
            E = rng.uniform(-1.0, 1.0, size=(dim, dim)) / N
            diff = np.linalg.matrix_power(A + E, t) - np.linalg.matrix_power(A, t)
            errs.append(float(np.max(np.abs(diff))))
        rows.append((N, float(np.mean(errs))))
    return _fit_if_possible(
        SweepResult(metric="perturbation-power", rows=rows, seed=seed, extra={"c": c, "dim": dim})
    )


def minimal_pg_coefficient(params: ProblemParams, threshold: float) -> float:
    """Smallest t/sqrt(N) at which iterating the full parallel Grover from
    the uniform start reaches the sink-probability threshold."""
    M = phase_operator(f"pg:1-{params.k}", params).matrix
    v = initial_state(params)
    t_max = 3 * grover_iteration_count(params.N)
    for t in range(1, t_max + 1):
        v = M @ v
        if v[0] ** 2 >= threshold:
            return t / math.sqrt(params.N)
    raise RuntimeError(f"threshold {threshold} never reached within {t_max} iterations")


def minimal_sg2_coefficient(params: ProblemParams, threshold: float) -> float:
    """Exact minimum of (t1 + t2)/sqrt(N) over both stage counts of the
    two-stage sequential Grover reaching the threshold."""
    if params.k != 2:
        raise ValueError("minimal two-stage search defined for k=2")
    S1 = phase_operator("stage:1", params).matrix
    S2 = phase_operator("stage:2", params).matrix
    t_cap = round(1.2 * grover_iteration_count(params.N))
    states = np.empty((t_cap + 1, 4))
    v = initial_state(params)
    states[0] = v
    for t in range(1, t_cap + 1):
        v = S1 @ v
        states[t] = v
    sink_rows = np.empty((t_cap + 1, 4))
    P = np.eye(4)
    for t in range(t_cap + 1):
        sink_rows[t] = P[0]
        P = S2 @ P
    amps = states @ sink_rows.T  # amps[t1, t2] = sink amplitude
    ok = amps ** 2 >= threshold
    best = None
    for t1 in range(t_cap + 1):
        hits = np.nonzero(ok[t1])[0]
        if hits.size:
            total = t1 + int(hits[0])
            if best is None or total < best:
                best = total
    if best is None:
        raise RuntimeError(f"threshold {threshold} never reached (k=2 sequential)")
    return best / math.sqrt(params.N)


@dataclass(frozen=True)
class SpeedupRow:
    method: str
    k: int
    coefficient: float
    success: float
    lower_bound: float


def speedup_table(n: int = 20) -> list[SpeedupRow]:
    """Iteration-cost comparison at N = 2^n.

    Coefficients are the schedules' nominal costs; success probabilities are
    measured by running each schedule.  The sole-k=3 row reports the failure
    plateau (its best achievable probability) instead of a final value.
    """
    rows = []

    def final_success(schedule) -> float:
        traj = run_schedule(schedule, sample_every=max(1, schedule.total_iterations()))
        return float(traj.final_state[0] ** 2)

    for k in (1, 2, 3):
        params = ProblemParams(k, n)
        sched = sequential_grover_schedule(params)
        rows.append(
            SpeedupRow("sequential-grover", k, sched.coefficient(), final_success(sched), lower_bound_constant(k))
        )

    params2 = ProblemParams(2, n)
    sched = named_schedule("pg2", params2)
    rows.append(SpeedupRow("pg2", 2, sched.coefficient(), final_success(sched), lower_bound_constant(2)))

    params3 = ProblemParams(3, n)
    sched = pg2_then_grover_schedule(params3)
    rows.append(
        SpeedupRow("pg2-grover", 3, sched.coefficient(), final_success(sched), lower_bound_constant(3))
    )

    sched = k3_paper_schedule(params3, PAPER_K3_CONSTANTS)
    rows.append(
        SpeedupRow("k3-schedule", 3, sched.coefficient(), final_success(sched), lower_bound_constant(3))
    )

    plateau = _max_sink_probability(params3, 3 * grover_iteration_count(params3.N))
    rows.append(
        SpeedupRow("pg3-sole(control)", 3, 3.0 * math.pi / 4.0, plateau, lower_bound_constant(3))
    )
    return rows
