"""Indirect tomography of the classical system through a swapped-in qubit.

A C-to-Q copy applied to the stage-1 pair leaves states ``alpha_+-`` on the
classical system.  They cannot be reconstructed there because only Z may be
measured on it, so a fresh qubit ``Q'`` (prepared in ``|0>``) is swapped in
with three CNOTs and tomography is done on ``Q'`` instead.

The swap needs coherent control over the classical system and is labelled
``conjectural coupling`` in reports to keep it apart from the witness, which
needs none.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import constants
from .channels import CopyChannel, Direction, cnot_matrix
from .errors import ChannelDirectionError, DimensionError
from .operators import (
    DensityState,
    StateLike,
    as_matrix,
    eigendecompose_hermitian,
    expectation,
    fidelity,
    kron,
    pauli_matrix,
    partial_trace,
    projector,
)
from .witness import EXACT, Shots, _check_shots, run_stage1, sample_pauli_mean

SWAP_STAGE_LABEL = "conjectural coupling"

# Factor order of the three-system register.
PROBE, CLASSICAL, FRESH = 0, 1, 2

_SWAP_SEQUENCE = (
    cnot_matrix(CLASSICAL, FRESH, 3),
    cnot_matrix(FRESH, CLASSICAL, 3),
    cnot_matrix(CLASSICAL, FRESH, 3),
)


def induce_alpha_states(ch_qc: CopyChannel, ch_cq: CopyChannel) -> tuple[DensityState, DensityState]:
    """States left on the classical system after stage 1 and a C-to-Q copy."""
    if ch_qc.direction is not Direction.Q_TO_C:
        raise ChannelDirectionError("first channel must copy Q-to-C")
    if ch_cq.direction is not Direction.C_TO_Q:
        raise ChannelDirectionError("second channel must copy C-to-Q")
    stage = run_stage1(ch_qc)
    return tuple(partial_trace(ch_cq.apply(rho), keep=[CLASSICAL]) for rho in stage)


def three_cnot_swap(joint: StateLike) -> DensityState:
    """Swap the classical system with ``Q'`` on an (S_Q, S_C, S_Q') register."""
    m = as_matrix(joint)
    if m.shape != (8, 8):
        raise DimensionError(f"three_cnot_swap needs an 8x8 state, got {m.shape}")
    for u in _SWAP_SEQUENCE:
        m = u @ m @ u.conj().T
    return DensityState(m)


def swap_out(rho_pair: StateLike) -> DensityState:
    """Attach ``Q'`` in ``|0>``, swap, and return the state of ``Q'``."""
    joint = kron(as_matrix(rho_pair), projector("0"))
    return partial_trace(three_cnot_swap(joint), keep=[FRESH])


@dataclass(frozen=True)
class TomographyResult:
    reconstructed: DensityState
    bloch: tuple[float, float, float]
    shots_per_basis: Shots
    std_errors: tuple[float, float, float]
    fidelity_to_reference: Optional[float] = None

    def __post_init__(self):
        if math.sqrt(sum(b * b for b in self.bloch)) > 1 + 1e-9:
            raise ValueError("reconstructed Bloch vector is longer than 1")


def project_to_state(m: np.ndarray) -> DensityState:
    """Clip negative eigenvalues at zero and renormalise the trace."""
    evals, vecs = eigendecompose_hermitian((m + m.conj().T) / 2)
    evals = np.clip(evals, 0.0, None)
    evals = evals / evals.sum()
    out = (vecs * evals) @ vecs.conj().T
    return DensityState((out + out.conj().T) / 2)


def tomography_single_qubit(
    rho: StateLike,
    shots_per_basis: Shots = EXACT,
    seed: Union[int, np.random.SeedSequence] = 0,
    reference: Optional[StateLike] = None,
) -> TomographyResult:
    """Linear-inversion tomography from X, Y and Z measurements."""
    _check_shots(shots_per_basis)
    m = as_matrix(rho)
    if m.shape != (2, 2):
        raise DimensionError("single-qubit tomography needs a 2x2 state")
    rng = None if shots_per_basis == EXACT else np.random.default_rng(seed)
    raw, errs = [], []
    for axis in "XYZ":
        mean = expectation(m, axis)
        if rng is None:
            raw.append(mean)
            errs.append(0.0)
        else:
            est, se = sample_pauli_mean(mean, int(shots_per_basis), rng)
            raw.append(est)
            errs.append(se)
    linear = (np.eye(2) + sum(b * pauli_matrix(a) for b, a in zip(raw, "XYZ"))) / 2
    state = project_to_state(linear)
    bloch = tuple(expectation(state, a) for a in "XYZ")
    fid = None if reference is None else fidelity(state, reference)
    return TomographyResult(state, bloch, shots_per_basis, tuple(errs), fid)


@dataclass(frozen=True)
class OverlapReport:
    overlap: float
    orthogonal: bool
    implied_observables: int
    tolerance: float

    def __post_init__(self):
        if self.orthogonal != (self.overlap <= self.tolerance):
            raise ValueError("orthogonal must equal overlap <= tolerance")


def overlap_analysis(
    a: TomographyResult, b: TomographyResult, tol: float = constants.CONTRACT_ATOL
) -> OverlapReport:
    """Fidelity between the two reconstructions.

    Orthogonal states are the eigenstates of a single extra observable of the
    classical system.  Non-orthogonal ones need two, one per state.
    """
    ov = fidelity(a.reconstructed, b.reconstructed)
    orth = ov <= tol
    return OverlapReport(ov, orth, 1 if orth else 2, tol)


@dataclass(frozen=True)
class SwapTomographyRun:
    alpha: tuple[DensityState, DensityState]
    swapped: tuple[DensityState, DensityState]
    tomography: tuple[TomographyResult, TomographyResult]
    overlap: OverlapReport
    stage_label: str = SWAP_STAGE_LABEL


def run_swap_tomography(
    ch_qc: CopyChannel,
    ch_cq: CopyChannel,
    shots_per_basis: Shots = EXACT,
    seed: int = 0,
    tol: float = constants.CONTRACT_ATOL,
) -> SwapTomographyRun:
    """Whole second experiment; tomography of ``Q'`` is compared with ``alpha``."""
    stage = run_stage1(ch_qc)
    if ch_cq.direction is not Direction.C_TO_Q:
        raise ChannelDirectionError("second channel must copy C-to-Q")
    after = [ch_cq.apply(rho) for rho in stage]
    alpha = tuple(partial_trace(rho, keep=[CLASSICAL]) for rho in after)
    swapped = tuple(swap_out(rho) for rho in after)
    seeds = np.random.SeedSequence(seed).spawn(2)
    tomo = tuple(
        tomography_single_qubit(q, shots_per_basis, s, reference=a)
        for q, s, a in zip(swapped, seeds, alpha)
    )
    return SwapTomographyRun(alpha, swapped, tomo, overlap_analysis(*tomo, tol=tol))
