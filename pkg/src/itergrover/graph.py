"""Operator graphs: one iteration of a circuit as ordered local edge operations.

Nodes are basis labels; a directed edge applies a 2x2 Grover or IAM block to
the pair of labels it connects (edge source = upper space), and a reflection
edge flips the sign of a single label.  Edges sharing an ``order`` value form
one parallel layer and must act on disjoint labels.  The parallel Grover
iteration is built by a recursion that joins two (k-1)-level graphs with one
Grover edge between their all-solution-prefix labels and IAM edges on every
other bipartite pair; converting a graph to a matrix and iterating it must
reproduce the register-level simulator, which the tests enforce.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .reduced import (
    ProblemParams,
    ReducedOperator,
    label_from_index,
    label_index,
    local_edge_op,
    validate_label,
)

__all__ = [
    "EdgeOp",
    "OperatorGraph",
    "build_pg_graph",
    "build_sg_graph",
    "build_cubic_graph",
    "cubic_iam_operator",
    "full_cubic_operator",
    "graph_to_operator",
    "approximate_graph",
    "emit_dot",
    "graph_to_json",
    "graph_from_json",
    "main_path_labels",
]

GROVER = "grover"
IAM = "iam"
REFLECTION = "reflection"


@dataclass(frozen=True)
class EdgeOp:
    """One edge operation: kind, upper label (src), lower label (dst), layer order."""

    kind: str
    src: str
    dst: str | None
    order: int


@dataclass(frozen=True)
class OperatorGraph:
    k: int
    edges: tuple[EdgeOp, ...]

    def layers(self) -> list[list[EdgeOp]]:
        """Edges grouped by ascending order (order value = execution step)."""
        out: dict[int, list[EdgeOp]] = {}
        for e in self.edges:
            out.setdefault(e.order, []).append(e)
        return [out[o] for o in sorted(out)]

    def validate(self) -> None:
        for e in self.edges:
            validate_label(e.src, self.k)
            if e.kind == REFLECTION:
                if e.dst is not None:
                    raise ValueError("reflection edge carries a single label")
                continue
            if e.dst is None:
                raise ValueError(f"{e.kind} edge needs two labels")
            validate_label(e.dst, self.k)
            if sum(a != b for a, b in zip(e.src, e.dst)) != 1:
                raise ValueError(f"edge {e} joins labels differing in != 1 position")
        for layer in self.layers():
            seen: set[str] = set()
            for e in layer:
                support = {e.src} if e.dst is None else {e.src, e.dst}
                if support & seen:
                    raise ValueError(
                        f"overlapping supports in layer {layer[0].order}: {support & seen}"
                    )
                seen |= support


def build_pg_graph(k: int) -> OperatorGraph:
    """One parallel-Grover iteration for k levels.

    Recursive construction: a single Grover edge for k=1; otherwise the
    level-k layer (Grover between the two all-e-prefix labels, IAM on every
    other pair differing at position k) followed by two (k-1)-graphs acting in
    parallel on the e- and N-halves of position k.  Level k executes first
    (order 1), level 1 last (order k), matching the register-product form.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    def recurse(levels: int, suffix: str) -> list[EdgeOp]:
        order = k - levels + 1
        if levels == 1:
            return [EdgeOp(GROVER, "e" + suffix, "N" + suffix, order)]
        edges = []
        for g in itertools.product("eN", repeat=levels - 1):
            prefix = "".join(g)
            kind = GROVER if prefix == "e" * (levels - 1) else IAM
            edges.append(EdgeOp(kind, prefix + "e" + suffix, prefix + "N" + suffix, order))
        edges += recurse(levels - 1, "e" + suffix)
        edges += recurse(levels - 1, "N" + suffix)
        return edges

    edges = recurse(k, "")
    edges.sort(key=lambda e: (e.order, label_index(e.src)))
    return OperatorGraph(k, tuple(edges))


def build_sg_graph(k: int, stage: int) -> OperatorGraph:
    """Single sequential-Grover stage at the given level, acting on all labels.

    The level-``stage`` oracle turns the pairs whose prefix is all-e into
    Grover edges; every other pair differing at that position gets an IAM
    edge.  All edges form one parallel layer.
    """
    if not 1 <= stage <= k:
        raise ValueError(f"stage {stage} out of range 1..{k}")
    edges = []
    for g in itertools.product("eN", repeat=stage - 1):
        for h in itertools.product("eN", repeat=k - stage):
            prefix, suffix = "".join(g), "".join(h)
            kind = GROVER if prefix == "e" * (stage - 1) else IAM
            edges.append(EdgeOp(kind, prefix + "e" + suffix, prefix + "N" + suffix, 1))
    edges.sort(key=lambda e: label_index(e.src))
    return OperatorGraph(k, tuple(edges))


def build_cubic_graph(k: int, first_pos: int, prefix: str) -> OperatorGraph:
    """Cubic IAM structure: one IAM edge along every hypercube edge of the
    label block fixed by ``prefix`` and free on positions first_pos..k.

    Recursion: layer of IAM edges pairing the highest free position first,
    then the two sub-cubes in parallel.
    """
    if len(prefix) != first_pos - 1:
        raise ValueError("prefix must cover positions before first_pos")
    if first_pos > k:
        raise ValueError("cubic structure needs at least one free position")

    def recurse(hi: int, suffix_assign: dict[int, str], order: int) -> list[EdgeOp]:
        free = list(range(first_pos, hi))

        def mk(assign, sym_hi):
            syms = dict(assign)
            syms[hi] = sym_hi
            return prefix + "".join(syms[p] for p in range(first_pos, hi + 1)) + "".join(
                suffix_assign[p] for p in range(hi + 1, k + 1)
            )

        layer = []
        for w in itertools.product("eN", repeat=len(free)):
            assign = dict(zip(free, w))
            layer.append(EdgeOp(IAM, mk(assign, "e"), mk(assign, "N"), order))
        if hi == first_pos:
            return layer
        sub_e = recurse(hi - 1, {hi: "e", **suffix_assign}, order + 1)
        sub_n = recurse(hi - 1, {hi: "N", **suffix_assign}, order + 1)
        return layer + sub_e + sub_n

    edges = recurse(k, {}, 1)
    edges.sort(key=lambda e: (e.order, label_index(e.src)))
    return OperatorGraph(k, tuple(edges))


def cubic_iam_operator(prefix_len: int, params: ProblemParams, leading_order: bool = False) -> ReducedOperator:
    """Operator of the cubic IAM structure embedded in the parallel Grover:
    solution prefix of the given length, one N symbol, cube on the rest."""
    k = params.k
    if not 0 <= prefix_len <= k - 2:
        raise ValueError(f"prefix_len {prefix_len} invalid for k={k} (need 0..{k - 2})")
    g = build_cubic_graph(k, prefix_len + 2, "e" * prefix_len + "N")
    op = graph_to_operator(g, params, leading_order=leading_order)
    return ReducedOperator(op.matrix, f"cubic(prefix_len={prefix_len})")


def full_cubic_operator(params: ProblemParams, leading_order: bool = False) -> ReducedOperator:
    """Cubic structure over all k positions (the full IAM composition)."""
    g = build_cubic_graph(params.k, 1, "")
    op = graph_to_operator(g, params, leading_order=leading_order)
    return ReducedOperator(op.matrix, "cubic(full)")


def _leading_order_block(kind: str, N: int) -> np.ndarray:
    # first-order blocks used by the replacement-theorem arithmetic
    s = 2.0 / math.sqrt(N)
    if kind == GROVER:
        return np.array([[1.0, s], [-s, 1.0]])
    return np.array([[-1.0, s], [s, 1.0]])


def graph_to_operator(graph: OperatorGraph, params: ProblemParams, leading_order: bool = False) -> ReducedOperator:
    """Product of the edge operators, ascending order applied first.

    Equal-order edges have disjoint supports (validated), so each layer is a
    single well-defined matrix.  With ``leading_order=True`` the 2x2 blocks
    keep only their O(1/sqrt(N)) terms, which is the arithmetic the
    replacement theorems reason in; the default uses the exact entries.
    """
    if graph.k != params.k:
        raise ValueError(f"graph has k={graph.k}, params k={params.k}")
    graph.validate()
    dim = params.dim
    M = np.eye(dim)
    for layer in graph.layers():
        L = np.eye(dim)
        for e in layer:
            if leading_order and e.kind != REFLECTION:
                B = _leading_order_block(e.kind, params.N)
                i1, i2 = label_index(e.src), label_index(e.dst)
                E = np.eye(dim)
                E[i1, i1] = B[0, 0]
                E[i1, i2] = B[0, 1]
                E[i2, i1] = B[1, 0]
                E[i2, i2] = B[1, 1]
            else:
                E = local_edge_op(e.kind, e.src, e.dst, params).matrix
            L = E @ L
        M = L @ M
    return ReducedOperator(M, "graph")


def main_path_labels(k: int) -> list[str]:
    """Source-to-sink chain flipping one N to e per step, source first."""
    return ["e" * j + "N" * (k - j) for j in range(k + 1)]


def approximate_graph(graph: OperatorGraph) -> OperatorGraph:
    """Rewrite a parallel-Grover graph per the replacement theorems.

    Every cubic IAM structure collapses to a composition of single-label
    reflections: each IAM edge reflects its upper label, so a label keeps a
    net reflection exactly when it is the upper end of an odd number of IAM
    edges.  A Grover edge whose lower label carries a net reflection is
    absorbed into it (the pair acts as the reflection alone up to
    O(1/sqrt(N))); with an even count the reflections cancel and the edge
    stays.  The surviving reflections are emitted as one aggregate layer
    ahead of the retained Grover edges.
    """
    upper_count: dict[str, int] = {}
    for e in graph.edges:
        if e.kind == IAM:
            upper_count[e.src] = upper_count.get(e.src, 0) + 1
    reflected = {s for s, c in upper_count.items() if c % 2 == 1}

    kept = [
        e
        for e in graph.edges
        if e.kind == GROVER and e.dst not in reflected
    ]
    new_edges = [
        EdgeOp(REFLECTION, s, None, 1)
        for s in sorted(reflected, key=label_index)
    ]
    order_map = {o: i + 2 for i, o in enumerate(sorted({e.order for e in kept}))}
    new_edges += [
        EdgeOp(e.kind, e.src, e.dst, order_map[e.order]) for e in kept
    ]
    new_edges.sort(key=lambda e: (e.order, label_index(e.src)))
    return OperatorGraph(graph.k, tuple(new_edges))


def emit_dot(graph: OperatorGraph) -> str:
    """Deterministic DOT rendering: Grover edges solid black, IAM edges gray,
    reflections dotted self-loops, layer order as the edge label."""
    lines = ["digraph operator_graph {"]
    for idx in range(2 ** graph.k):
        lines.append(f'  "{label_from_index(idx, graph.k)}";')
    for e in sorted(graph.edges, key=lambda e: (e.order, label_index(e.src))):
        if e.kind == REFLECTION:
            lines.append(f'  "{e.src}" -> "{e.src}" [style=dotted, label="{e.order}"];')
        elif e.kind == IAM:
            lines.append(f'  "{e.src}" -> "{e.dst}" [color=gray, label="{e.order}"];')
        else:
            lines.append(f'  "{e.src}" -> "{e.dst}" [color=black, label="{e.order}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(graph: OperatorGraph) -> str:
    payload = {
        "k": graph.k,
        "edges": [
            {"kind": e.kind, "from": e.src, "to": e.dst, "order": e.order}
            for e in graph.edges
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def graph_from_json(text: str) -> OperatorGraph:
    payload = json.loads(text)
    edges = tuple(
        EdgeOp(d["kind"], d["from"], d.get("to"), d["order"]) for d in payload["edges"]
    )
    g = OperatorGraph(int(payload["k"]), edges)
    g.validate()
    return g
