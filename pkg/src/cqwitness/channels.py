"""Dynamics backends for the copy operation.

The copy is pinned down only on two computational basis inputs:

* ``Q-to-C`` copies the probe's z value onto the classical system:
  ``|00> -> |00>``, ``|10> -> |11>``.
* ``C-to-Q`` copies the classical value onto the probe:
  ``|00> -> |00>``, ``|01> -> |11>``.

Every backend is a Kraus-form channel on the 4-dimensional joint system.
Whether it treats the classical system classically is a property checked by
:func:`is_dephasing_covariant`, not a separate representation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import constants
from .errors import DimensionError
from .operators import DensityState, StateLike, as_matrix, projector, trace_distance
from .states import dephase_factor


class Direction(str, enum.Enum):
    Q_TO_C = "Q-to-C"
    C_TO_Q = "C-to-Q"

    @property
    def control(self) -> int:
        return 0 if self is Direction.Q_TO_C else 1

    @property
    def target(self) -> int:
        return 1 - self.control


TRUTH_TABLES = {
    Direction.Q_TO_C: (("00", "00"), ("10", "11")),
    Direction.C_TO_Q: (("00", "00"), ("01", "11")),
}


def cnot_matrix(control: int, target: int, n_qubits: int = 2) -> np.ndarray:
    """Permutation matrix of a CNOT in the z basis (factor 0 = leftmost)."""
    if control == target or not (0 <= control < n_qubits and 0 <= target < n_qubits):
        raise ValueError(f"bad CNOT wiring control={control} target={target} on {n_qubits} qubits")
    dim = 2**n_qubits
    m = np.zeros((dim, dim), dtype=complex)
    cbit = n_qubits - 1 - control
    tbit = n_qubits - 1 - target
    for i in range(dim):
        j = i ^ (((i >> cbit) & 1) << tbit)
        m[j, i] = 1
    return m


def _z_projector(factor: int, value: int, n_qubits: int = 2) -> np.ndarray:
    dim = 2**n_qubits
    bits = (np.arange(dim) >> (n_qubits - 1 - factor)) & 1
    return np.diag((bits == value).astype(complex))


def _apply_kraus(kraus: Sequence[np.ndarray], m: np.ndarray) -> np.ndarray:
    return sum(k @ m @ k.conj().T for k in kraus)


@dataclass(frozen=True, eq=False)
class CopyChannel:
    """CPTP map in Kraus form, tagged with the copy direction it implements."""

    kraus_ops: tuple[np.ndarray, ...]
    direction: Direction
    label: str = field(default="")

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if dim not in (4, 8) or any(k.shape != (dim, dim) for k in ops):
            raise DimensionError("Kraus operators must all be 4x4 or all 8x8")
        gram = sum(k.conj().T @ k for k in ops)
        err = np.abs(gram - np.eye(dim)).max()
        if err > constants.COMPLETENESS_ATOL:
            raise ValueError(f"Kraus completeness violated by {err:.3e}")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "direction", Direction(self.direction))

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        """Apply to any operator (not necessarily a state); no validation."""
        return _apply_kraus(self.kraus_ops, np.asarray(m, dtype=complex))

    def apply(self, rho: StateLike) -> DensityState:
        m = as_matrix(rho)
        if m.shape[0] != self.dim:
            raise DimensionError(f"channel dim {self.dim} does not match state dim {m.shape[0]}")
        out = self.apply_matrix(m)
        return DensityState((out + out.conj().T) / 2)

    @cached_property
    def covariance_flag(self) -> bool:
        return is_dephasing_covariant(self)

    def __repr__(self) -> str:
        return f"CopyChannel({self.label or 'unnamed'}, {self.direction.value}, {len(self.kraus_ops)} Kraus ops)"


def apply(ch: CopyChannel, rho: StateLike) -> DensityState:
    return ch.apply(rho)


def truth_table_error(ch: CopyChannel) -> float:
    """Largest trace distance between an actual and the required basis output."""
    worst = 0.0
    for src, dst in TRUTH_TABLES[ch.direction]:
        out = ch.apply_matrix(projector(src))
        worst = max(worst, trace_distance(out, projector(dst)))
    return worst


def satisfies_truth_table(ch: CopyChannel, atol: float = constants.CONTRACT_ATOL) -> bool:
    return truth_table_error(ch) <= atol


def make_unitary_cnot(direction: Direction | str = Direction.Q_TO_C) -> CopyChannel:
    direction = Direction(direction)
    u = cnot_matrix(direction.control, direction.target)
    return CopyChannel((u,), direction, label="unitary-cnot")


def make_dephased_cnot(direction: Direction | str, lam: float) -> CopyChannel:
    """Dephase the control with strength ``lam`` and then apply the CNOT.

    ``lam = 0`` is the unitary CNOT; ``lam = 1`` is a fully classical copy.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    direction = Direction(direction)
    u = cnot_matrix(direction.control, direction.target)
    ops = [math.sqrt(1.0 - lam) * u]
    if lam > 0:
        ops += [math.sqrt(lam) * u @ _z_projector(direction.control, v) for v in (0, 1)]
    return CopyChannel(tuple(ops), direction, label=f"dephased-cnot(lambda={lam:g})")


@dataclass(frozen=True)
class ClassicalStochasticChannel:
    """Stochastic map on the joint populations of (probe bit, classical bit).

    ``transition[i, j]`` is the probability of moving from joint basis state
    ``j`` to ``i`` with index ``2*q + c``.  Columns must sum to one.  The Kraus
    embedding ``sqrt(T_ij) |i><j|`` fully dephases both factors.
    """

    transition: np.ndarray
    direction: Direction = Direction.Q_TO_C
    label: str = "classical-stochastic"

    def __post_init__(self):
        t = np.array(self.transition, dtype=float)
        if t.shape != (4, 4):
            raise DimensionError("transition matrix must be 4x4")
        if (t < 0).any():
            raise ValueError("transition probabilities must be non-negative")
        if not np.allclose(t.sum(axis=0), 1.0, rtol=0, atol=constants.PREDICATE_ATOL):
            raise ValueError("transition columns must sum to 1")
        t.setflags(write=False)
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "direction", Direction(self.direction))

    def to_copy_channel(self) -> CopyChannel:
        ops = []
        for i in range(4):
            for j in range(4):
                p = self.transition[i, j]
                if p > 0:
                    k = np.zeros((4, 4), dtype=complex)
                    k[i, j] = math.sqrt(p)
                    ops.append(k)
        return CopyChannel(tuple(ops), self.direction, label=self.label)


def make_classical_rotation_copy(t: float, direction: Direction | str = Direction.Q_TO_C) -> CopyChannel:
    """Classically controlled population rotation ``cos^2 t`` / ``sin^2 t``.

    When the control bit is 1 the target bit flips with probability
    ``sin(t)**2``; when it is 0 the target is left alone.  ``t = pi/2`` is a
    perfect copy.
    """
    direction = Direction(direction)
    c2, s2 = math.cos(t) ** 2, math.sin(t) ** 2
    trans = np.zeros((4, 4))
    for j in range(4):
        bits = [(j >> 1) & 1, j & 1]
        if bits[direction.control] == 0:
            trans[j, j] = 1.0
            continue
        flipped = list(bits)
        flipped[direction.target] ^= 1
        i = 2 * flipped[0] + flipped[1]
        trans[j, j] += c2
        trans[i, j] += s2
    stoch = ClassicalStochasticChannel(trans, direction, label=f"classical-rotation(t={t:g})")
    return stoch.to_copy_channel()


def dephasing_twirl(ch: CopyChannel) -> CopyChannel:
    """``D o E o D`` with ``D`` the z-dephasing of the classical factor."""
    n = int(round(math.log2(ch.dim)))
    proj = [_z_projector(1, v, n) for v in (0, 1)]
    ops = []
    for k in ch.kraus_ops:
        for a in proj:
            for b in proj:
                kk = a @ k @ b
                if np.abs(kk).max() > 1e-14:
                    ops.append(kk)
    return CopyChannel(tuple(ops), ch.direction, label=f"twirled({ch.label})")


def is_dephasing_covariant(ch: CopyChannel, tol: float = constants.PREDICATE_ATOL) -> bool:
    """True when ``D o E = E o D = D o E o D`` on all matrix units."""
    dim = ch.dim
    for i in range(dim):
        for j in range(dim):
            unit = np.zeros((dim, dim), dtype=complex)
            unit[i, j] = 1
            e_d = ch.apply_matrix(dephase_factor(unit, 1))
            d_e = dephase_factor(ch.apply_matrix(unit), 1)
            d_e_d = dephase_factor(e_d, 1)
            if np.abs(e_d - d_e).max() > tol or np.abs(d_e - d_e_d).max() > tol:
                return False
    return True


def _random_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_covariant_copy_channel(
    seed: int,
    direction: Direction | str = Direction.Q_TO_C,
    ancilla_dim: int = 4,
) -> CopyChannel:
    """Random dephasing-covariant channel that satisfies the copy contract.

    Draws a random Stinespring isometry into system (x) ancilla whose two
    contract columns are forced (``|in> -> |out> (x) a`` with random ancilla
    vectors ``a``) while the two remaining columns are random orthonormal
    vectors in the complement.  Truncating the ancilla gives the Kraus set,
    which is then twirled.  Both invariants hold exactly, and the behaviour
    on every input outside the contract is left random.
    """
    direction = Direction(direction)
    rng = np.random.default_rng(seed)
    big = 4 * ancilla_dim
    iso = np.zeros((big, 4), dtype=complex)
    fixed = []
    for src, dst in TRUTH_TABLES[direction]:
        col = np.kron(np.eye(4)[int(dst, 2)], _random_unit_vector(ancilla_dim, rng))
        iso[:, int(src, 2)] = col
        fixed.append(int(src, 2))
    basis = [iso[:, c] for c in fixed]
    for c in range(4):
        if c in fixed:
            continue
        v = _random_unit_vector(big, rng)
        for b in basis:
            v = v - np.vdot(b, v) * b
        v = v / np.linalg.norm(v)
        basis.append(v)
        iso[:, c] = v
    cube = iso.reshape(4, ancilla_dim, 4)
    raw = CopyChannel(tuple(cube[:, k, :] for k in range(ancilla_dim)), direction, label="random")
    twirled = dephasing_twirl(raw)
    return CopyChannel(twirled.kraus_ops, direction, label=f"twirled-random(seed={seed})")
