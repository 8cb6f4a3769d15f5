"""Command-line interface: simulate, verify, graph, analyze.

All commands are deterministic given their flags and seed; numeric output is
printed with 12 significant digits.  Exit codes: 0 success, 1 verification
failure, 2 usage error.  ``--out`` writes to a file (relative paths resolve
against $ITERGROVER_OUTDIR when set); without it output goes to stdout.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, graph as graphmod, schedules, statevector as svmod
from .reduced import (
    ProblemParams,
    initial_state,
    reduced_iam_register,
    reduced_oracle,
)

FMT = ".12g"


def _fmt(x: float) -> str:
    return format(float(x), FMT)


def _write_out(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if not path.is_absolute():
        base = os.environ.get("ITERGROVER_OUTDIR")
        if base:
            path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}")


def _params(args, parser) -> ProblemParams:
    if args.n is None:
        parser.error("--n is required")
    try:
        return ProblemParams(args.k, args.n)
    except ValueError as exc:
        parser.error(str(exc))


def _trajectory_csv(traj: schedules.Trajectory) -> str:
    buf = io.StringIO()
    buf.write("iteration," + ",".join(traj.labels) + ",sink_probability\n")
    for t, state in zip(traj.iterations, traj.states):
        cells = [str(int(t))] + [_fmt(a) for a in state] + [_fmt(state[0] ** 2)]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def _trajectory_json(traj: schedules.Trajectory) -> str:
    payload = {
        "labels": list(traj.labels),
        "samples": [
            {"iteration": int(t), "amplitudes": [float(a) for a in st], "sink_probability": float(st[0] ** 2)}
            for t, st in zip(traj.iterations, traj.states)
        ],
        "phase_boundaries": [int(b) for b in traj.phase_boundaries],
    }
    return json.dumps(payload, indent=2) + "\n"


def cmd_simulate(args, parser) -> int:
    params = _params(args, parser)
    constants = None
    if args.constants:
        try:
            constants = tuple(float(x) for x in args.constants.split(","))
        except ValueError:
            parser.error(f"bad constants list {args.constants!r}")
    try:
        if args.schedule in schedules.SCHEDULE_NAMES:
            sched = schedules.named_schedule(args.schedule, params, coeff=args.coeff, constants=constants)
        else:
            sched = schedules.schedule_from_json(Path(args.schedule).read_text())
        traj = schedules.run_schedule(sched, sample_every=args.sample_every)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    text = _trajectory_json(traj) if args.format == "json" else _trajectory_csv(traj)
    _write_out(text, args.out)
    return 0


def cmd_graph(args, parser) -> int:
    if not 1 <= args.k <= 8:
        parser.error(f"graph command supports k in 1..8, got {args.k}")
    if args.kind == "sg":
        if args.stage is None:
            parser.error("--stage is required for --kind sg")
        g = graphmod.build_sg_graph(args.k, args.stage)
    else:
        g = graphmod.build_pg_graph(args.k)
    if args.approx:
        g = graphmod.approximate_graph(g)
    text = graphmod.graph_to_json(g) if args.format == "json" else graphmod.emit_dot(g)
    _write_out(text, args.out)
    return 0


def cmd_verify(args, parser) -> int:
    if args.k > 3 or args.n > 5:
        parser.error(f"verification gate runs at k <= 3, n <= 5 (got k={args.k}, n={args.n})")
    rng = np.random.default_rng(args.seed)
    lines = []
    failures = []

    if args.parallel_form:
        params = ProblemParams(2, args.n)
        solution = tuple(int(x) for x in rng.integers(0, params.N, size=2))
        seq = svmod.apply_pg2_sequential_circuit(svmod.init_uniform(params), solution)
        for variant in svmod.PARALLEL_FORM_VARIANTS:
            sv = svmod.init_uniform(params, ancilla=True)
            sv = svmod.apply_pg2_parallel_circuit(sv, solution, variant=variant)
            dev = float(np.max(np.abs(sv.psi[..., 0] - seq.psi)))
            anc = float(np.linalg.norm(sv.psi[..., 1:]))
            ok = dev <= 1e-10 and anc <= 1e-10
            lines.append(
                f"parallel-form {variant}: max deviation from sequential {_fmt(dev)}, "
                f"ancilla residual {_fmt(anc)} -> {'MATCHES' if ok else 'differs'}"
            )
        text = "\n".join(lines) + "\n"
        _write_out(text, args.out)
        return 0

    worst = 0.0
    worst_case = ""
    for k in range(1, args.k + 1):
        for n in range(1, args.n + 1):
            params = ProblemParams(k, n)
            for seq_idx in range(args.sequences):
                solution = tuple(int(x) for x in rng.integers(0, params.N, size=k))
                length = int(rng.integers(1, args.max_len + 1))
                sv = svmod.init_uniform(params)
                red = initial_state(params)
                for _ in range(length):
                    level = int(rng.integers(1, k + 1))
                    if rng.random() < 0.5:
                        sv = svmod.apply_oracle_full(level, solution, sv)
                        red = reduced_oracle(level, params).matrix @ red
                    else:
                        sv = svmod.apply_diffusion_register(level, sv)
                        red = reduced_iam_register(level, params).matrix @ red
                proj, residual = svmod.project_to_reduced(sv, solution)
                dev = float(np.max(np.abs(proj - red)))
                dev = max(dev, residual)
                if dev > worst:
                    worst, worst_case = dev, f"k={k} n={n} seq={seq_idx}"
    lines.append(f"max reduced-vs-full amplitude deviation: {_fmt(worst)} ({worst_case})")
    if worst > 1e-10:
        failures.append(f"oracle equivalence failed: {worst_case} at {_fmt(worst)}")

    # parallel-vs-sequential check at the default sizes
    params = ProblemParams(2, min(args.n, 4))
    solution = (0,) * 2
    sv = svmod.init_uniform(params, ancilla=True)
    seq = svmod.init_uniform(params)
    for _ in range(3):
        sv = svmod.apply_pg2_parallel_circuit(sv, solution, variant="uncompute")
        seq = svmod.apply_pg2_sequential_circuit(seq, solution)
    par_dev = float(np.max(np.abs(sv.psi[..., 0] - seq.psi)))
    lines.append(f"parallel-vs-sequential deviation (uncompute variant): {_fmt(par_dev)}")
    if par_dev > 1e-10:
        failures.append(f"parallel form deviates: {_fmt(par_dev)}")

    lines.append("FAIL: " + "; ".join(failures) if failures else "PASS")
    _write_out("\n".join(lines) + "\n", args.out)
    return 1 if failures else 0


def _sweep_csv(res: analysis.SweepResult) -> str:
    buf = io.StringIO()
    buf.write("metric,N,value,seed\n")
    seed = "" if res.seed is None else str(res.seed)
    for N, v in res.rows:
        buf.write(f"{res.metric},{N},{_fmt(v)},{seed}\n")
    return buf.getvalue()


def cmd_analyze(args, parser) -> int:
    metric = args.metric
    sizes = [2 ** n for n in (args.ns or range(10, 23, 2))]
    if metric == "lower-bound":
        c = analysis.lower_bound_constant(args.k)
        _write_out(f"{_fmt(c)}\n", args.out)
        return 0
    if metric == "speedup":
        rows = analysis.speedup_table(args.n or 20)
        buf = io.StringIO()
        buf.write("method,k,coefficient,success,lower_bound\n")
        for r in rows:
            buf.write(f"{r.method},{r.k},{_fmt(r.coefficient)},{_fmt(r.success)},{_fmt(r.lower_bound)}\n")
        _write_out(buf.getvalue(), args.out)
        return 0
    if metric == "optimize-k3":
        params = ProblemParams(3, args.n or 20)
        res = schedules.optimize_k3_constants(params)
        lines = [
            f"c1 = {_fmt(res.c1)}",
            f"c2 = {_fmt(res.c2)}",
            f"c3 = {_fmt(res.c3)}",
            f"c4 = {_fmt(res.c4)}",
            f"c5 = {_fmt(res.c5)}",
            f"branch = {res.branch}",
            f"total coefficient = {_fmt(res.total_coefficient(params.N))}",
            f"final success probability = {_fmt(res.final_success)}",
        ]
        _write_out("\n".join(lines) + "\n", args.out)
        return 0
    if metric == "sole-pg":
        res = analysis.sole_pg_failure_sweep(sizes, k=args.k)
    elif metric == "approx-error":
        res = analysis.approx_error_sweep(sizes, k=args.k if args.k >= 2 else 2)
    elif metric == "perturbation":
        res = analysis.perturbation_power_check(sizes, seed=args.seed)
    else:
        parser.error(f"unknown metric {metric!r}")
    text = _sweep_csv(res)
    if not math.isnan(res.slope):
        text += f"# log-log slope: {_fmt(res.slope)}\n"
    _write_out(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itergrover",
        description="Simulate and analyze nested-oracle Grover search in the symmetric subspace.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a schedule and dump the trajectory")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, default=None, help="register qubits; N = 2^n")
    p.add_argument("--schedule", required=True, help=f"one of {', '.join(schedules.SCHEDULE_NAMES)} or a JSON file")
    p.add_argument("--coeff", type=float, default=None, help="iteration coefficient (multiples of sqrt(N))")
    p.add_argument("--constants", default=None, help="five comma-separated schedule constants")
    p.add_argument("--sample-every", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("graph", help="emit an operator graph")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kind", choices=("pg", "sg"), default="pg")
    p.add_argument("--stage", type=int, default=None)
    p.add_argument("--approx", action="store_true", help="apply the rewrite theorems")
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("verify", help="check the reduced simulator against the statevector oracle")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--sequences", type=int, default=10, help="random layer sequences per size")
    p.add_argument("--max-len", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallel-form", action="store_true", help="report which CNOT ordering matches the sequential form")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", help="run one analysis metric")
    p.add_argument(
        "metric",
        choices=("lower-bound", "speedup", "approx-error", "sole-pg", "perturbation", "optimize-k3"),
    )
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--ns", type=int, nargs="*", default=None, help="exponents of the N sweep")
    p.add_argument("--seed", type=int, default=20240803)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
