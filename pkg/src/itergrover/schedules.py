"""Schedule assembly and execution.

A schedule is an ordered list of phases, each repeating one stage-product
operator a fixed number of times or round(c*sqrt(N)) times for a coefficient
c.  One application of any stage product counts as one iteration (all its
oracles fire in one parallel layer, all its IAM reflections in another), so
the cost of a schedule is the plain sum of repetitions and the cost
coefficient is that sum divided by sqrt(N).

Operator references are strings: "stage:i" is the level-i Grover stage
(IAM(i) @ oracle(i)), "pg:lo-hi" the product of stages lo..hi with the
highest level applied first, and "pg" the full product over all levels.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .closed_form import PG2_FULL_TRANSFER_COEFF
from .reduced import (
    ProblemParams,
    ReducedOperator,
    enumerate_labels,
    grover_iteration_count,
    initial_state,
    label_index,
    reduced_grover_register,
)

__all__ = [
    "Phase",
    "Schedule",
    "Trajectory",
    "K3Constants",
    "PAPER_K3_CONSTANTS",
    "phase_operator",
    "run_schedule",
    "sequential_grover_schedule",
    "pg_sole_schedule",
    "k3_paper_schedule",
    "pg2_then_grover_schedule",
    "pg2_target_split",
    "optimize_k3_constants",
    "mk_generalization",
    "named_schedule",
    "schedule_to_json",
    "schedule_from_json",
    "golden_section_min",
    "SCHEDULE_NAMES",
]

PAPER_K3_CONSTANTS = (0.78, 0.17, 0.05, 0.5, 0.0)

_OP_RE = re.compile(r"^(pg|stage)(?::(\d+)(?:-(\d+))?)?$")


@dataclass(frozen=True)
class Phase:
    """One schedule phase: an operator reference repeated a number of times.

    Exactly one of ``reps`` (fixed count) and ``coeff`` (multiples of sqrt(N))
    is set; ``adjoint`` applies the transposed operator.
    """

    op: str
    reps: int | None = None
    coeff: float | None = None
    adjoint: bool = False

    def __post_init__(self):
        if (self.reps is None) == (self.coeff is None):
            raise ValueError("exactly one of reps and coeff must be given")
        if self.reps is not None and self.reps < 0:
            raise ValueError(f"reps must be >= 0, got {self.reps}")
        if self.coeff is not None and self.coeff < 0:
            raise ValueError(f"coeff must be >= 0, got {self.coeff}")

    def resolved_reps(self, N: int) -> int:
        if self.reps is not None:
            return self.reps
        return round(self.coeff * math.sqrt(N))


@dataclass(frozen=True)
class Schedule:
    params: ProblemParams
    phases: tuple[Phase, ...]

    def total_iterations(self) -> int:
        return sum(p.resolved_reps(self.params.N) for p in self.phases)

    def coefficient(self) -> float:
        return self.total_iterations() / math.sqrt(self.params.N)


@dataclass
class Trajectory:
    """Sampled states along a schedule run; sink probability = squared
    amplitude of the first (all-solution) label."""

    labels: tuple[str, ...]
    iterations: np.ndarray
    states: np.ndarray
    phase_boundaries: tuple[int, ...] = field(default_factory=tuple)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def sink_probability(self) -> np.ndarray:
        return self.states[:, 0] ** 2


def _parse_op(op: str, k: int) -> tuple[str, int, int]:
    m = _OP_RE.match(op)
    if not m:
        raise ValueError(f"bad operator reference {op!r}")
    name, a, b = m.group(1), m.group(2), m.group(3)
    if name == "stage":
        if a is None or b is not None:
            raise ValueError(f"stage reference needs one level: {op!r}")
        lo = hi = int(a)
    else:
        lo = int(a) if a is not None else 1
        hi = int(b) if b is not None else (k if a is None else lo)
    if not 1 <= lo <= hi <= k:
        raise ValueError(f"operator levels {lo}-{hi} out of range for k={k}")
    return name, lo, hi


def phase_operator(op: str, params: ProblemParams) -> ReducedOperator:
    """Resolve an operator reference to its matrix: product of Grover stages
    over the referenced levels, highest level applied first."""
    _, lo, hi = _parse_op(op, params.k)
    M = np.eye(params.dim)
    for i in range(hi, lo - 1, -1):
        M = reduced_grover_register(i, params).matrix @ M
    return ReducedOperator(M, op)


def _shift_op(op: str, offset: int, k: int) -> str:
    name, lo, hi = _parse_op(op, k)
    if name == "stage":
        return f"stage:{lo + offset}"
    return f"pg:{lo + offset}-{hi + offset}"


def run_schedule(schedule: Schedule, start: np.ndarray | None = None, sample_every: int = 1) -> Trajectory:
    """Apply the phases in order, sampling the state every ``sample_every``
    iterations plus at every phase boundary."""
    if sample_every < 1:
        raise ValueError(f"sample_every must be >= 1, got {sample_every}")
    params = schedule.params
    v = initial_state(params) if start is None else np.asarray(start, dtype=float)
    if v.shape != (params.dim,):
        raise ValueError(f"start state has shape {v.shape}, expected ({params.dim},)")
    iters = [0]
    states = [v.copy()]
    boundaries = []
    t = 0
    for phase in schedule.phases:
        M = phase_operator(phase.op, params).matrix
        if phase.adjoint:
            M = M.T
        for _ in range(phase.resolved_reps(params.N)):
            v = M @ v
            t += 1
            if t % sample_every == 0:
                iters.append(t)
                states.append(v.copy())
        boundaries.append(t)
        if iters[-1] != t:
            iters.append(t)
            states.append(v.copy())
    return Trajectory(
        labels=tuple(enumerate_labels(params.k)),
        iterations=np.array(iters),
        states=np.array(states),
        phase_boundaries=tuple(boundaries),
    )


def sequential_grover_schedule(params: ProblemParams) -> Schedule:
    """k stages in level order, each run the nominal Grover count."""
    t = grover_iteration_count(params.N)
    return Schedule(
        params,
        tuple(Phase(f"stage:{i}", reps=t) for i in range(1, params.k + 1)),
    )


def pg_sole_schedule(params: ProblemParams, coeff: float) -> Schedule:
    """The full parallel Grover iterated round(coeff*sqrt(N)) times."""
    return Schedule(params, (Phase(f"pg:1-{params.k}", coeff=coeff),))


def k3_paper_schedule(params: ProblemParams, constants: tuple[float, ...] = PAPER_K3_CONSTANTS) -> Schedule:
    """Five-coefficient schedule solving the three-level problem.

    Run the full parallel Grover for c1*sqrt(N); reflect the diverted label
    with a single level-2 stage; run for c2*sqrt(N) until the diverted
    amplitude returns; rotate amplitude back from the sink to its neighbour
    with the adjoint level-3 stage for c3*sqrt(N); finish the transfer with
    the combined level-2/level-3 product for c4*sqrt(N) and a residual
    level-3 phase of c5*sqrt(N).
    """
    if params.k != 3:
        raise ValueError(f"schedule requires k=3, got k={params.k}")
    if len(constants) != 5:
        raise ValueError(f"need 5 constants, got {len(constants)}")
    c1, c2, c3, c4, c5 = constants
    return Schedule(
        params,
        (
            Phase("pg:1-3", coeff=c1),
            Phase("stage:2", reps=1),
            Phase("pg:1-3", coeff=c2),
            Phase("stage:3", coeff=c3, adjoint=True),
            Phase("pg:2-3", coeff=c4),
            Phase("stage:3", coeff=c5),
        ),
    )


def pg2_then_grover_schedule(params: ProblemParams) -> Schedule:
    """Solve three levels as a two-level parallel-Grover block followed by a
    plain Grover stage: coefficient (1 + sqrt(2)) * pi/4 in total."""
    if params.k != 3:
        raise ValueError(f"composite requires k=3, got k={params.k}")
    return Schedule(
        params,
        (
            Phase("pg:1-2", coeff=PG2_FULL_TRANSFER_COEFF),
            Phase("stage:3", coeff=math.pi / 4.0),
        ),
    )


def pg2_target_split(a3: float) -> tuple[float, float, float]:
    """Redistribution targets for a remaining source amplitude a3.

    Solves cos^2(sqrt(2) d) = a3 and returns (a1', a2', d) with
    a1' = sin^2(sqrt(2) d) and a2' = sqrt(2) sin cos: the unique amplitude
    split over (sink, middle, source) that lies on the two-level parallel
    Grover trajectory, so the remaining transfer completes cleanly.
    """
    if not 0.0 <= a3 <= 1.0:
        raise ValueError(f"a3 must be in [0, 1], got {a3}")
    d = math.acos(math.sqrt(a3)) / math.sqrt(2.0)
    a = math.sqrt(2.0) * d
    return math.sin(a) ** 2, math.sqrt(2.0) * math.sin(a) * math.cos(a), d


@dataclass(frozen=True)
class K3Constants:
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    branch: str  # "retransfer" (a2' > a2) or "skip" (a2' <= a2)
    final_success: float
    observables: dict

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.c1, self.c2, self.c3, self.c4, self.c5)

    def total_coefficient(self, N: int) -> float:
        rN = math.sqrt(N)
        reps = sum(round(c * rN) for c in self.as_tuple())
        return (reps + 1) / rN  # +1: the single reflection iteration


def golden_section_min(f, a: float, b: float, tol: float = 1e-4) -> float:
    """Locate the minimizer of a unimodal f on [a, b] within tol."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def optimize_k3_constants(params: ProblemParams, grid_step: float = 0.01) -> K3Constants:
    """Search the five schedule constants from the phase conditions.

    c1 and c2 solve a two-condition root problem: after running the parallel
    Grover for c1*sqrt(N), reflecting the diverted label once and continuing
    until that label's amplitude crosses zero (this crossing defines c2), the
    source amplitude must also vanish.  The source residual at the crossing
    is monotone in c1, so a coarse grid brackets its sign change and a
    golden-section pass refines it.  c3 follows from the closed-form
    redistribution targets, c4 and c5 from transfer-complete detection
    (maximum of the sink probability, where the departing amplitudes are
    zero at the search resolution).

    Needs N large enough (>= 2^18) that O(1/sqrt(N)) noise stays below the
    grid resolution.
    """
    if params.k != 3:
        raise ValueError(f"optimizer requires k=3, got k={params.k}")
    N = params.N
    rN = math.sqrt(N)
    labels = enumerate_labels(3)
    i_sink = label_index("eee")
    i_eeN = label_index("eeN")
    i_eNN = label_index("eNN")
    i_NNN = label_index("NNN")
    i_Nee = label_index("Nee")

    PG3 = phase_operator("pg:1-3", params).matrix
    S2 = phase_operator("stage:2", params).matrix
    S3 = phase_operator("stage:3", params).matrix
    M45 = phase_operator("pg:2-3", params).matrix

    # states after t iterations of the sole parallel Grover, one pass
    t1_max = round(1.2 * rN)
    states1 = np.empty((t1_max + 1, 8))
    v = initial_state(params)
    states1[0] = v
    for t in range(1, t1_max + 1):
        v = PG3 @ v
        states1[t] = v

    crossing_cache: dict[int, tuple[int, np.ndarray]] = {}

    def fee_crossing(t1: int) -> tuple[int, np.ndarray]:
        """Reflect after t1 iterations, continue until the diverted amplitude
        changes sign; returns (t2, state) at the better of the two endpoints."""
        if t1 in crossing_cache:
            return crossing_cache[t1]
        w = S2 @ states1[t1]
        sign0 = 1.0 if w[i_Nee] >= 0 else -1.0
        prev = w
        for t2 in range(1, round(2.5 * rN) + 1):
            prev, w = w, PG3 @ w
            if w[i_Nee] * sign0 < 0:
                if abs(prev[i_Nee]) < abs(w[i_Nee]):
                    t2, w = t2 - 1, prev
                crossing_cache[t1] = (t2, w)
                return crossing_cache[t1]
        raise RuntimeError(f"no zero crossing of the diverted amplitude for t1={t1}")

    def source_residual(t1: int) -> float:
        return float(fee_crossing(t1)[1][i_NNN])

    # bracket the sign change of the source residual on the coarse grid
    step = max(1, round(grid_step * rN))
    bracket = None
    prev_t1, prev_f = 0, source_residual(0)
    for t1 in range(step, t1_max + 1, step):
        f = source_residual(t1)
        if f == 0.0 or (f < 0) != (prev_f < 0):
            bracket = (prev_t1, t1)
            break
        prev_t1, prev_f = t1, f
    if bracket is None:
        raise RuntimeError("no zero crossing of the source amplitude found")

    c1 = golden_section_min(
        lambda c: abs(source_residual(round(c * rN))),
        bracket[0] / rN,
        bracket[1] / rN,
        tol=1e-4,
    )
    t1 = round(c1 * rN)
    t1 = min(
        range(max(0, t1 - 1), min(t1_max, t1 + 1) + 1),
        key=lambda t: abs(source_residual(t)),
    )
    t2, v = fee_crossing(t1)

    a1, a2, a3 = float(v[i_sink]), float(v[i_eeN]), float(v[i_eNN])
    a1p, a2p, d = pg2_target_split(min(1.0, max(0.0, a3)))

    t3 = 0
    if a2p > a2:
        w = v
        while w[i_eeN] < a2p:
            prev, w = w, S3.T @ w
            t3 += 1
            if t3 > rN:
                raise RuntimeError("redistribution target not reached")
        if t3 and abs(prev[i_eeN] - a2p) < abs(w[i_eeN] - a2p):
            t3 -= 1
            w = prev
        v = w
        branch = "retransfer"
    else:
        branch = "skip"

    def transfer_complete(M: np.ndarray, w0: np.ndarray, t_cap: int) -> tuple[int, np.ndarray]:
        """Iterate M until the sink probability peaks; argmax of sink**2."""
        best_t, best_p, best_w = 0, w0[i_sink] ** 2, w0
        w = w0
        for t in range(1, t_cap + 1):
            w = M @ w
            p = w[i_sink] ** 2
            if p > best_p:
                best_t, best_p, best_w = t, p, w.copy()
            elif t - best_t > 50:  # well past the peak
                break
        return best_t, best_w

    t4, v = transfer_complete(M45, v, round(1.2 * rN))
    t5 = 0
    if branch == "skip":
        t5, v = transfer_complete(S3, v, round(0.8 * rN))

    return K3Constants(
        c1=t1 / rN,
        c2=t2 / rN,
        c3=t3 / rN,
        c4=t4 / rN,
        c5=t5 / rN,
        branch=branch,
        final_success=float(v[i_sink] ** 2),
        observables={
            "a1": a1,
            "a2": a2,
            "a3": a3,
            "a1_target": a1p,
            "a2_target": a2p,
            "d": d,
            "labels": labels,
        },
    )


def mk_generalization(base: Schedule, m: int, validate: bool = True) -> Schedule:
    """Solve m*k levels by applying a k-level schedule to each block of k
    consecutive levels, lowest block executed first.

    With ``validate`` the base schedule is run once and must reach sink
    probability >= 1 - 10/sqrt(N).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if validate:
        final = run_schedule(base, sample_every=max(1, base.total_iterations())).final_state
        threshold = 1.0 - 10.0 / math.sqrt(base.params.N)
        if final[0] ** 2 < threshold:
            raise ValueError(
                f"base schedule reaches sink probability {final[0] ** 2:.6f} "
                f"< {threshold:.6f}; refusing to compose"
            )
    k = base.params.k
    params = ProblemParams(k * m, base.params.n)
    phases = []
    for block in range(m):
        offset = block * k
        for p in base.phases:
            phases.append(
                Phase(_shift_op(p.op, offset, k), reps=p.reps, coeff=p.coeff, adjoint=p.adjoint)
            )
    return Schedule(params, tuple(phases))


SCHEDULE_NAMES = ("sg", "pg-sole", "pg2", "pg3-sole", "k3-paper", "pg2-grover")


def named_schedule(
    name: str,
    params: ProblemParams,
    coeff: float | None = None,
    constants: tuple[float, ...] | None = None,
) -> Schedule:
    """Build one of the predefined schedules by name."""
    if name == "sg":
        return sequential_grover_schedule(params)
    if name == "pg-sole":
        return pg_sole_schedule(params, coeff if coeff is not None else 3.0 * math.pi / 4.0)
    if name == "pg2":
        if params.k != 2:
            raise ValueError("schedule pg2 requires k=2")
        return pg_sole_schedule(params, coeff if coeff is not None else PG2_FULL_TRANSFER_COEFF)
    if name == "pg3-sole":
        if params.k != 3:
            raise ValueError("schedule pg3-sole requires k=3")
        return pg_sole_schedule(params, coeff if coeff is not None else 3.0 * math.pi / 4.0)
    if name == "k3-paper":
        return k3_paper_schedule(params, constants or PAPER_K3_CONSTANTS)
    if name == "pg2-grover":
        return pg2_then_grover_schedule(params)
    raise ValueError(f"unknown schedule {name!r}; known: {', '.join(SCHEDULE_NAMES)}")


def schedule_to_json(schedule: Schedule) -> str:
    phases = []
    for p in schedule.phases:
        d: dict = {"op": p.op}
        if p.reps is not None:
            d["reps"] = p.reps
        else:
            d["coeff"] = p.coeff
        if p.adjoint:
            d["adjoint"] = True
        phases.append(d)
    payload = {"k": schedule.params.k, "N": schedule.params.N, "phases": phases}
    return json.dumps(payload, indent=2) + "\n"


def schedule_from_json(text: str) -> Schedule:
    payload = json.loads(text)
    params = ProblemParams.from_size(int(payload["k"]), int(payload["N"]))
    phases = tuple(
        Phase(
            op=d["op"],
            reps=d.get("reps"),
            coeff=d.get("coeff"),
            adjoint=bool(d.get("adjoint", False)),
        )
        for d in payload["phases"]
    )
    for p in phases:
        _parse_op(p.op, params.k)
    return Schedule(params, phases)
