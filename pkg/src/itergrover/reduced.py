"""Exact simulation of iterated-search circuits in the symmetric subspace.

For k nested oracles over registers of size N, every circuit layer used here
(per-level phase oracles and per-register inversion about the mean) preserves
the 2^k-dimensional subspace spanned by tensor products of the per-register
solution state ``e`` and the uniform bundle ``N`` of non-solutions.  This
module builds all elementary operators as small real orthogonal matrices in
the normalized version of that basis, which is the ground-truth path every
approximation in the package is tested against.

Basis labels are strings over ``{"e", "N"}``, one symbol per oracle level
(``"eNN"`` = solution at level 1, non-solution bundles at levels 2 and 3).
Enumeration order reads the label as a binary integer with e=0, N=1 and
level 1 as the most significant bit, so index 0 is the sink ``"ee...e"`` and
index 2^k - 1 is the source ``"NN...N"``.

States are plain float64 numpy vectors of length 2^k over that ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProblemParams",
    "ReducedOperator",
    "enumerate_labels",
    "label_index",
    "label_from_index",
    "validate_label",
    "weight_of_label",
    "reduced_oracle",
    "reduced_iam_register",
    "reduced_grover_register",
    "local_edge_op",
    "apply",
    "operator_power",
    "initial_state",
    "grover_iteration_count",
    "iam_block",
    "grover_block",
]


@dataclass(frozen=True)
class ProblemParams:
    """Problem size: k oracle levels, N = 2^n candidates per register."""

    k: int
    n: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")

    @property
    def N(self) -> int:
        return 2 ** self.n

    @property
    def dim(self) -> int:
        """Dimension of the symmetric subspace."""
        return 2 ** self.k

    @classmethod
    def from_size(cls, k: int, N: int) -> "ProblemParams":
        """Build from the register size N, which must be a power of two."""
        if N < 2 or N & (N - 1):
            raise ValueError(f"N must be a power of two >= 2, got {N}")
        return cls(k, N.bit_length() - 1)


@dataclass(frozen=True)
class ReducedOperator:
    """Real orthogonal matrix on the symmetric subspace, with a provenance tag."""

    matrix: np.ndarray
    provenance: str = "product"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> "ReducedOperator":
        """Transpose; the exact inverse, since every construction is orthogonal."""
        return ReducedOperator(self.matrix.T.copy(), f"adjoint({self.provenance})")

    def __matmul__(self, other: "ReducedOperator") -> "ReducedOperator":
        return ReducedOperator(self.matrix @ other.matrix, "product")


def enumerate_labels(k: int) -> list[str]:
    """All 2^k basis labels in enumeration order (sink first, source last)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return [label_from_index(i, k) for i in range(2 ** k)]


def label_from_index(index: int, k: int) -> str:
    return "".join("N" if (index >> (k - 1 - pos)) & 1 else "e" for pos in range(k))


def label_index(label: str) -> int:
    idx = 0
    for ch in label:
        idx = (idx << 1) | (1 if ch == "N" else 0)
    return idx


def validate_label(label: str, k: int) -> None:
    if len(label) != k or any(ch not in "eN" for ch in label):
        raise ValueError(f"invalid basis label {label!r} for k={k}")


def weight_of_label(label: str, N: int) -> float:
    """Conversion factor (N-1)^(#N/2) between unnormalized and normalized basis."""
    return (N - 1.0) ** (label.count("N") / 2.0)


def _iam_entries(N: int) -> tuple[float, float]:
    return 1.0 - 2.0 / N, 2.0 * math.sqrt(N - 1.0) / N


def iam_block(N: int) -> np.ndarray:
    """2x2 inversion-about-the-mean block in the normalized basis, e-component first."""
    a, b = _iam_entries(N)
    return np.array([[-a, b], [b, a]])


def grover_block(N: int) -> np.ndarray:
    """2x2 Grover rotation block: iam_block @ diag(-1, 1)."""
    a, b = _iam_entries(N)
    return np.array([[a, b], [-b, a]])


def reduced_oracle(i: int, params: ProblemParams) -> ReducedOperator:
    """Level-i phase oracle: -1 on every label whose first i symbols are all e."""
    _check_level(i, params.k)
    diag = np.ones(params.dim)
    # all-e prefix of length i <=> the i leading bits of the index are zero
    block = 1 << (params.k - i)
    diag[:block] = -1.0
    return ReducedOperator(np.diag(diag), f"oracle({i})")


def reduced_iam_register(i: int, params: ProblemParams) -> ReducedOperator:
    """Inversion about the mean on register i: identical 2x2 blocks on every
    pair of labels differing only at position i."""
    _check_level(i, params.k)
    dim = params.dim
    B = iam_block(params.N)
    M = np.zeros((dim, dim))
    bit = 1 << (params.k - i)
    for e_idx in range(dim):
        if e_idx & bit:
            continue
        n_idx = e_idx | bit
        M[e_idx, e_idx] = B[0, 0]
        M[e_idx, n_idx] = B[0, 1]
        M[n_idx, e_idx] = B[1, 0]
        M[n_idx, n_idx] = B[1, 1]
    return ReducedOperator(M, f"iam_register({i})")


def reduced_grover_register(i: int, params: ProblemParams) -> ReducedOperator:
    """Level-i Grover stage: reduced_iam_register(i) @ reduced_oracle(i).

    This is the single sequential-Grover stage and equally the level-i factor
    of the parallel Grover (both are IAM(x_i) composed with the level-i
    oracle); which algorithm it belongs to is decided by how it is scheduled.
    """
    iam = reduced_iam_register(i, params)
    orc = reduced_oracle(i, params)
    return ReducedOperator(iam.matrix @ orc.matrix, f"grover_register({i})")


def local_edge_op(kind: str, s1: str, s2: str | None, params: ProblemParams) -> ReducedOperator:
    """Operator of a single graph edge: identity outside span{s1, s2}.

    ``kind`` is "grover", "iam" or "reflection".  For the two-state kinds the
    labels must differ in exactly one position and s1 is the upper space
    (first coordinate of the 2x2 block); a reflection takes s1 only and flips
    its sign.
    """
    k = params.k
    validate_label(s1, k)
    i1 = label_index(s1)
    M = np.eye(params.dim)
    if kind == "reflection":
        if s2 is not None:
            raise ValueError("reflection takes a single label")
        M[i1, i1] = -1.0
        return ReducedOperator(M, f"reflection({s1})")
    if s2 is None:
        raise ValueError(f"{kind} edge needs two labels")
    validate_label(s2, k)
    if sum(a != b for a, b in zip(s1, s2)) != 1:
        raise ValueError(f"labels {s1!r}, {s2!r} must differ in exactly one position")
    i2 = label_index(s2)
    if kind == "grover":
        B = grover_block(params.N)
    elif kind == "iam":
        B = iam_block(params.N)
    else:
        raise ValueError(f"unknown edge kind {kind!r}")
    M[i1, i1] = B[0, 0]
    M[i1, i2] = B[0, 1]
    M[i2, i1] = B[1, 0]
    M[i2, i2] = B[1, 1]
    return ReducedOperator(M, "edge_op")


def apply(op: ReducedOperator, state: np.ndarray) -> np.ndarray:
    """Matrix-vector product with a dimension check."""
    state = np.asarray(state, dtype=float)
    if state.shape != (op.dim,):
        raise ValueError(f"state has shape {state.shape}, operator dim {op.dim}")
    return op.matrix @ state


def operator_power(op: ReducedOperator, t: int) -> ReducedOperator:
    """op^t by repeated multiplication (binary powering); op^0 is the identity."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return ReducedOperator(np.linalg.matrix_power(op.matrix, t), f"{op.provenance}^{t}")


def initial_state(params: ProblemParams, ideal: bool = False) -> np.ndarray:
    """Reduction of the uniform superposition over all registers.

    Amplitude on label s is (N-1)^(#N/2) / N^(k/2): almost all weight on the
    source label.  With ``ideal=True`` returns the source basis state itself,
    which is the idealized start the closed-form models describe.
    """
    v = np.zeros(params.dim)
    if ideal:
        v[-1] = 1.0
        return v
    scale = params.N ** (params.k / 2.0)
    for idx in range(params.dim):
        v[idx] = weight_of_label(label_from_index(idx, params.k), params.N) / scale
    return v


def grover_iteration_count(N: int) -> int:
    """Nominal iteration count [pi*sqrt(N)/4] of a single Grover stage."""
    return round(math.pi * math.sqrt(N) / 4.0)


def _check_level(i: int, k: int) -> None:
    if not 1 <= i <= k:
        raise ValueError(f"oracle level {i} out of range 1..{k}")
