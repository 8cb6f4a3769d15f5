"""Brute-force full-Hilbert-space simulation for small register sizes.

This is the verification side of the package: it simulates the same circuits
on all 2^(k*n) computational basis states (complex amplitudes, no symmetry
assumption) so the reduced-subspace simulator can be checked against it by
projection.  Only the layers the circuits need exist: uniform initialization,
per-level phase oracles, per-register diffusion and register-wise CNOT layers
for the explicit parallel-form circuit.

The statevector is kept as a numpy array of shape (N,) * r, one axis per
register; the ancilla register, when present, is the last axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .reduced import ProblemParams

__all__ = [
    "Statevector",
    "MAX_QUBITS",
    "init_uniform",
    "apply_oracle_full",
    "apply_diffusion_register",
    "apply_stage_full",
    "apply_cnot_layer",
    "apply_pg2_parallel_circuit",
    "apply_pg2_sequential_circuit",
    "project_to_reduced",
    "PARALLEL_FORM_VARIANTS",
]

MAX_QUBITS = 26  # ~1 GiB of complex doubles

PARALLEL_FORM_VARIANTS = ("literal", "reversed", "uncompute")


@dataclass(frozen=True)
class Statevector:
    """Complex amplitudes over r registers of n qubits, one axis per register."""

    psi: np.ndarray
    k: int
    n: int
    ancilla: bool = False

    @property
    def N(self) -> int:
        return 2 ** self.n

    @property
    def registers(self) -> int:
        return self.k + (1 if self.ancilla else 0)

    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))


def init_uniform(params: ProblemParams, ancilla: bool = False) -> Statevector:
    """Uniform superposition over the k search registers; the ancilla
    register, if present, starts in the all-zero basis state."""
    r = params.k + (1 if ancilla else 0)
    if r * params.n > MAX_QUBITS:
        raise ValueError(f"{r} registers of {params.n} qubits exceed {MAX_QUBITS} total")
    N = params.N
    psi = np.zeros((N,) * r, dtype=complex)
    amp = 1.0 / N ** (params.k / 2.0)
    if ancilla:
        psi[..., 0] = amp
    else:
        psi[...] = amp
    return Statevector(psi, params.k, params.n, ancilla)


def _check_solution(solution: tuple[int, ...], sv: Statevector) -> tuple[int, ...]:
    if len(solution) != sv.k:
        raise ValueError(f"solution has {len(solution)} entries, expected {sv.k}")
    if any(not 0 <= e < sv.N for e in solution):
        raise ValueError(f"solution entries out of range 0..{sv.N - 1}: {solution}")
    return tuple(solution)


def apply_oracle_full(i: int, solution: tuple[int, ...], sv: Statevector) -> Statevector:
    """Phase oracle at level i: -1 on states whose registers 1..i equal the
    solution prefix."""
    solution = _check_solution(solution, sv)
    if not 1 <= i <= sv.k:
        raise ValueError(f"level {i} out of range 1..{sv.k}")
    psi = sv.psi.copy()
    psi[tuple(solution[:i])] *= -1.0
    return Statevector(psi, sv.k, sv.n, sv.ancilla)


def apply_diffusion_register(i: int, sv: Statevector) -> Statevector:
    """Inversion about the mean (2|u><u| - I) on register i alone."""
    if not 1 <= i <= sv.registers:
        raise ValueError(f"register {i} out of range 1..{sv.registers}")
    axis = i - 1
    mean = sv.psi.sum(axis=axis, keepdims=True) / sv.N
    return Statevector(2.0 * mean - sv.psi, sv.k, sv.n, sv.ancilla)


def apply_stage_full(i: int, solution: tuple[int, ...], sv: Statevector) -> Statevector:
    """Level-i Grover stage: diffusion on register i after the level-i oracle."""
    return apply_diffusion_register(i, apply_oracle_full(i, solution, sv))


def apply_cnot_layer(control: int, target: int, sv: Statevector) -> Statevector:
    """Bitwise CNOTs between two registers: target index ^= control index."""
    if control == target:
        raise ValueError("control and target registers must differ")
    c_ax, t_ax = control - 1, target - 1
    psi = np.moveaxis(sv.psi, (c_ax, t_ax), (0, 1))
    out = np.empty_like(psi)
    idx = np.arange(sv.N)
    for cval in range(sv.N):
        out[cval, idx ^ cval] = psi[cval, idx]
    return Statevector(np.moveaxis(out, (0, 1), (c_ax, t_ax)), sv.k, sv.n, sv.ancilla)


def apply_pg2_parallel_circuit(
    sv: Statevector,
    solution: tuple[int, ...],
    variant: str = "uncompute",
) -> Statevector:
    """One iteration of the explicit parallel-form circuit for two levels.

    Layers, first to last: a CNOT layer copying register 1 into the ancilla,
    both oracles in parallel (level 1 on the ancilla copy, level 2 on the
    search registers), a second CNOT layer, then diffusion on both search
    registers.  ``variant`` selects the CNOT pair:

    - "uncompute": copy in and copy out with the same layer (control 1,
      target 3 both times), the reading that restores the ancilla;
    - "literal": control 1 -> target 3 first, control 3 -> target 1 second
      (the printed operator order read right to left);
    - "reversed": the printed order read left to right.
    """
    if sv.k != 2 or not sv.ancilla:
        raise ValueError("parallel form needs two search registers plus an ancilla")
    if variant not in PARALLEL_FORM_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    solution = _check_solution(solution, sv)
    anc_zero = np.linalg.norm(sv.psi[..., 1:])
    if anc_zero > 1e-12:
        raise ValueError(f"ancilla register not in the zero state (residual {anc_zero:.3e})")

    first, second = {
        "uncompute": ((1, 3), (1, 3)),
        "literal": ((1, 3), (3, 1)),
        "reversed": ((3, 1), (1, 3)),
    }[variant]

    sv = apply_cnot_layer(*first, sv)
    # both oracles commute; level-1 oracle reads the ancilla copy
    psi = sv.psi.copy()
    psi[:, :, solution[0]] *= -1.0
    psi[solution[0], solution[1], :] *= -1.0
    sv = Statevector(psi, sv.k, sv.n, sv.ancilla)
    sv = apply_cnot_layer(*second, sv)
    sv = apply_diffusion_register(1, sv)
    return apply_diffusion_register(2, sv)


def apply_pg2_sequential_circuit(sv: Statevector, solution: tuple[int, ...]) -> Statevector:
    """One iteration of the sequential form: level-2 stage then level-1 stage."""
    if sv.k != 2:
        raise ValueError("sequential form defined for two search registers")
    return apply_stage_full(1, solution, apply_stage_full(2, solution, sv))


def project_to_reduced(sv: Statevector, solution: tuple[int, ...]) -> tuple[np.ndarray, float]:
    """Project onto the symmetric subspace.

    Returns the reduced amplitude vector in enumeration order (complex; real
    part is the physics for these circuits) and the norm of the component
    outside the subspace.  The amplitude of a label is the sum of matching
    computational amplitudes divided by sqrt(match count); the ancilla, if
    present, must hold its zero state.
    """
    solution = _check_solution(solution, sv)
    psi = sv.psi
    outside = 0.0
    if sv.ancilla:
        outside = float(np.linalg.norm(psi[..., 1:])) ** 2
        psi = psi[..., 0]
    N = sv.N
    projectors = []
    out = psi
    for reg in range(sv.k):
        P = np.zeros((2, N), dtype=complex)
        P[0, solution[reg]] = 1.0
        P[1, :] = 1.0 / math.sqrt(N - 1.0)
        P[1, solution[reg]] = 0.0
        projectors.append(P)
        # consume the leading register axis, append the 2-dim label axis
        out = np.tensordot(out, P, axes=([0], [1]))
    reduced = out.reshape(-1)  # register 1 is the most significant axis
    # reconstruct the symmetric component; direct subtraction avoids the
    # cancellation a norm-difference formula would suffer
    back = out
    for P in projectors:
        back = np.tensordot(back, P, axes=([0], [0]))
    residual = math.sqrt(float(np.linalg.norm(psi - back)) ** 2 + outside)
    return reduced, residual
