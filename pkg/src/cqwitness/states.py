"""Joint states of the probe qubit and the classical system.

The classical system is the second tensor factor.  Its only observable is
``I (x) Z``, so a state "classical on side 2" has no ``X`` or ``Y`` weight on
that factor:

    rho = 1/4 (I + r . (sigma (x) I) + s_z (I (x) Z) + t . (sigma (x) Z))
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import constants
from .errors import DimensionError, InvalidStateError
from .operators import (
    DensityState,
    StateLike,
    as_matrix,
    eigendecompose_hermitian,
    expectation,
    kron_all,
    pauli_matrix,
    projector,
    trace_distance,
)

_AXES = ("X", "Y", "Z")

# Parameter order used by the flat 7-vector view of the family.
PARAMETER_LABELS = ("XI", "YI", "ZI", "IZ", "XZ", "YZ", "ZZ")


def _family_basis() -> np.ndarray:
    return np.array([kron_all(pauli_matrix(a), pauli_matrix(b)) for a, b in PARAMETER_LABELS])


_BASIS = _family_basis()


def family_matrix(params: np.ndarray) -> np.ndarray:
    """Matrices of the family for parameter vectors of shape ``(..., 7)``."""
    params = np.asarray(params, dtype=float)
    return (np.eye(4) + np.tensordot(params, _BASIS, axes=([-1], [0]))) / 4


@dataclass(frozen=True)
class ClassicalBlochState:
    """Parameters ``(r, s_z, t)`` of a state classical on the second factor.

    Construction fails with ``InvalidStateError`` when the parameters do not
    give a positive semidefinite matrix.
    """

    r: tuple[float, float, float] = (0.0, 0.0, 0.0)
    s_z: float = 0.0
    t: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        r = tuple(float(x) for x in self.r)
        t = tuple(float(x) for x in self.t)
        if len(r) != 3 or len(t) != 3:
            raise ValueError("r and t must be 3-vectors")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "s_z", float(self.s_z))
        evals, _ = eigendecompose_hermitian(family_matrix(self.as_vector()))
        if evals[0] < -constants.PSD_ATOL:
            raise InvalidStateError(
                f"parameters r={r}, s_z={self.s_z}, t={t} give minimum eigenvalue {evals[0]:.3e}"
            )

    def as_vector(self) -> np.ndarray:
        return np.array([*self.r, self.s_z, *self.t])

    @classmethod
    def from_vector(cls, v) -> "ClassicalBlochState":
        v = [float(x) for x in v]
        return cls(r=tuple(v[0:3]), s_z=v[3], t=tuple(v[4:7]))

    def matrix(self) -> np.ndarray:
        return family_matrix(self.as_vector())


def bloch_to_state(b: ClassicalBlochState) -> DensityState:
    return DensityState(b.matrix())


def state_to_bloch(rho: StateLike) -> tuple[ClassicalBlochState, float]:
    """Project a two-qubit state onto the family and report what was lost.

    The residual is the Frobenius norm of ``rho`` minus its family member; it
    vanishes exactly when ``rho`` has no X/Y weight on the second factor.
    """
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise DimensionError("state_to_bloch needs a 4x4 state")
    v = np.array([expectation(m, label) for label in PARAMETER_LABELS])
    member = family_matrix(v)
    residual = float(np.linalg.norm(m - member))
    # The family member equals the z-dephased input, so it is always a state.
    return ClassicalBlochState.from_vector(v), residual


def dephase_factor(rho: StateLike, factor: int = 1) -> np.ndarray:
    """Full z-dephasing of one qubit factor (default: the classical system)."""
    m = as_matrix(rho)
    n = int(round(math.log2(m.shape[0])))
    if not 0 <= factor < n:
        raise DimensionError(f"factor {factor} out of range for {n} qubits")
    bits = (np.arange(m.shape[0]) >> (n - 1 - factor)) & 1
    return np.where(bits[:, None] == bits[None, :], m, 0)


def is_discord_free_cq(rho: StateLike, tol: float = constants.PREDICATE_ATOL) -> bool:
    """True when z-dephasing the classical factor leaves ``rho`` unchanged."""
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise DimensionError("is_discord_free_cq needs a 4x4 state")
    return trace_distance(m, dephase_factor(m, 1)) <= tol


def prepare_initial(sign: str) -> DensityState:
    """``|+-><+-| (x) |0><0|``: probe in an X eigenstate, T sharp with value +1."""
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return DensityState(projector(sign + "0"))


class Stage(str, enum.Enum):
    AFTER_FIRST_COPY = "after-first-copy"
    AFTER_SECOND_COPY = "after-second-copy"


@dataclass(frozen=True)
class ProtocolStates:
    rho_plus: DensityState
    rho_minus: DensityState
    stage: Stage

    def __post_init__(self):
        if self.rho_plus.dim != 4 or self.rho_minus.dim != 4:
            raise DimensionError("protocol states live on the 4-dimensional joint system")

    def __iter__(self):
        yield self.rho_plus
        yield self.rho_minus
