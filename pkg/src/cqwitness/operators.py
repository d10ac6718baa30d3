"""Dense linear algebra and Pauli algebra for systems of one to three qubits.

Operators are plain ``numpy`` complex arrays of dimension 2, 4 or 8.  Tensor
factors are ordered left to right, and the leftmost factor is the most
significant bit of a computational-basis index, so ``|10>`` is index 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np

from . import constants
from .errors import DimensionError, InvalidStateError, NotHermitianError

PAULI_LABELS = ("I", "X", "Y", "Z")

_PAULI = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
for _m in _PAULI.values():
    _m.setflags(write=False)

_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
}


def pauli_matrix(label: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for ``label`` in ``{"I", "X", "Y", "Z"}``."""
    try:
        return _PAULI[label].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli label {label!r}") from None


def _check_square(m: np.ndarray) -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    if dim not in (1, 2, 4, 8):
        raise DimensionError(f"unsupported dimension {dim}")
    return dim


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a (x) b``; the result may not exceed 8x8."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_square(a)
    _check_square(b)
    if a.shape[0] * b.shape[0] > constants.MAX_DIM:
        raise DimensionError(
            f"kron of dims {a.shape[0]} and {b.shape[0]} exceeds {constants.MAX_DIM}"
        )
    return np.kron(a, b)


def kron_all(*ops: np.ndarray) -> np.ndarray:
    return reduce(kron, ops)


def ket(label: str) -> np.ndarray:
    """Product ket from a string over ``0 1 + -``, e.g. ``ket("+0")``."""
    if not label:
        raise ValueError("empty ket label")
    try:
        return reduce(np.kron, (_KETS[c] for c in label))
    except KeyError as exc:
        raise ValueError(f"unknown ket symbol {exc.args[0]!r}") from None


def projector(label_or_vector: Union[str, np.ndarray]) -> np.ndarray:
    v = ket(label_or_vector) if isinstance(label_or_vector, str) else np.asarray(label_or_vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class PauliString:
    """Tensor product of 1-3 single-qubit Pauli factors, written e.g. ``"XZ"``."""

    factors: tuple[str, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not 1 <= len(factors) <= 3:
            raise ValueError(f"PauliString needs 1-3 factors, got {len(factors)}")
        bad = [f for f in factors if f not in PAULI_LABELS]
        if bad:
            raise ValueError(f"unknown Pauli labels {bad}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def parse(cls, label: Union[str, "PauliString"]) -> "PauliString":
        if isinstance(label, PauliString):
            return label
        return cls(tuple(label))

    @property
    def label(self) -> str:
        return "".join(self.factors)

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    def is_identity(self) -> bool:
        return all(f == "I" for f in self.factors)

    def matrix(self) -> np.ndarray:
        return kron_all(*(_PAULI[f] for f in self.factors))

    def __str__(self) -> str:
        return self.label


# -- predicates ---------------------------------------------------------------


def is_hermitian(m: np.ndarray, atol: float = constants.PREDICATE_ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.allclose(m, m.conj().T, rtol=0, atol=atol))


def is_unitary(m: np.ndarray, atol: float = constants.PREDICATE_ATOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), rtol=0, atol=atol))


def is_psd(m: np.ndarray, atol: float = constants.PSD_ATOL) -> bool:
    if not is_hermitian(m):
        return False
    evals, _ = eigendecompose_hermitian(m)
    return bool(evals[0] >= -atol)


# -- eigendecomposition -------------------------------------------------------


def eigendecompose_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    Uses cyclic complex Jacobi rotations.  Each rotation first removes the
    phase of the pivot ``m[p, q]`` and then applies a real Givens rotation
    that zeroes it.  Columns of the returned matrix are the eigenvectors.

    Raises:
        NotHermitianError: if ``m`` is not Hermitian within 1e-10.
    """
    a = np.array(m, dtype=complex)
    n = _check_square(a)
    if not is_hermitian(a):
        raise NotHermitianError("eigendecompose_hermitian needs a Hermitian matrix")
    a = (a + a.conj().T) / 2
    v = np.eye(n, dtype=complex)
    total = np.linalg.norm(a)
    for _ in range(constants.JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= constants.JACOBI_REL_TOL * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                mag = abs(b)
                if mag == 0.0:
                    continue
                phase = np.conj(b) / mag
                theta = 0.5 * math.atan2(2.0 * mag, a[p, p].real - a[q, q].real)
                c, s = math.cos(theta), math.sin(theta)
                g = np.array([[c, -s], [phase * s, phase * c]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ g
    evals = np.diag(a).real.copy()
    order = np.argsort(evals, kind="stable")
    return evals[order], v[:, order]


# -- density states -----------------------------------------------------------


class DensityState:
    """Validated, immutable density matrix.

    Construction checks unit trace (1e-12), Hermiticity (1e-12) and a minimum
    eigenvalue of at least -1e-10.
    """

    __slots__ = ("_m",)

    def __init__(self, matrix: Union[np.ndarray, "DensityState"], *, check: bool = True):
        if isinstance(matrix, DensityState):
            m = matrix._m
        else:
            m = np.array(matrix, dtype=complex)
            dim = _check_square(m)
            if dim == 1:
                raise DimensionError("density states need dimension 2, 4 or 8")
            if check:
                _validate_state(m)
            m.setflags(write=False)
        object.__setattr__(self, "_m", m)

    def __setattr__(self, name, value):
        raise AttributeError("DensityState is immutable")

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.dim)))

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __repr__(self) -> str:
        return f"DensityState(dim={self.dim})"

    @classmethod
    def from_label(cls, label: str) -> "DensityState":
        return cls(projector(label))


def _validate_state(m: np.ndarray) -> None:
    tr = np.trace(m)
    if abs(tr - 1) > constants.TRACE_ATOL:
        raise InvalidStateError(f"trace {tr.real:.3e} differs from 1")
    if not np.allclose(m, m.conj().T, rtol=0, atol=constants.STATE_HERMITIAN_ATOL):
        raise InvalidStateError("density matrix is not Hermitian")
    evals, _ = eigendecompose_hermitian(m)
    if evals[0] < -constants.PSD_ATOL:
        raise InvalidStateError(f"minimum eigenvalue {evals[0]:.3e} is negative")


StateLike = Union[DensityState, np.ndarray]


def as_matrix(x: Union[StateLike, PauliString]) -> np.ndarray:
    if isinstance(x, DensityState):
        return x.matrix
    if isinstance(x, PauliString):
        return x.matrix()
    return np.asarray(x, dtype=complex)


def expectation(rho: StateLike, obs: Union[np.ndarray, PauliString, str]) -> float:
    """``Tr(rho obs)`` for a Hermitian observable, as a real number."""
    if isinstance(obs, str):
        obs = PauliString.parse(obs)
    r = as_matrix(rho)
    o = as_matrix(obs)
    if r.shape != o.shape:
        raise DimensionError(f"state dim {r.shape[0]} and observable dim {o.shape[0]} differ")
    if not is_hermitian(o):
        raise NotHermitianError("observable is not Hermitian")
    value = np.trace(r @ o)
    if abs(value.imag) > constants.EXPECTATION_IMAG_ATOL:
        raise NotHermitianError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def partial_trace(rho: StateLike, keep: Iterable[int]) -> DensityState:
    """Reduced state on the qubit factors listed in ``keep``."""
    m = as_matrix(rho)
    n = int(round(math.log2(m.shape[0])))
    if 2**n != m.shape[0]:
        raise DimensionError(f"dimension {m.shape[0]} is not a power of two")
    keep = sorted(set(keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"invalid subsystem set {keep} for {n} factors")
    t = m.reshape([2] * (2 * n))
    current = n
    for axis in reversed(range(n)):
        if axis in keep:
            continue
        t = np.trace(t, axis1=axis, axis2=axis + current)
        current -= 1
    d = 2 ** len(keep)
    return DensityState(t.reshape(d, d))


def trace_distance(a: StateLike, b: StateLike) -> float:
    """Half the trace norm of ``a - b``."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError(f"dims {ma.shape[0]} and {mb.shape[0]} differ")
    evals, _ = eigendecompose_hermitian(ma - mb)
    return float(0.5 * np.sum(np.abs(evals)))


def _clean_spectrum(evals: np.ndarray) -> np.ndarray:
    # Rounding noise around zero would otherwise enter through sqrt at ~1e-8.
    floor = constants.SPECTRAL_FLOOR * max(float(np.abs(evals).max()), 1.0)
    return np.where(evals > floor, evals, 0.0)


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    evals, vecs = eigendecompose_hermitian(m)
    root = np.sqrt(_clean_spectrum(evals))
    return (vecs * root) @ vecs.conj().T


def fidelity(a: StateLike, b: StateLike) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))**2``; 1/2 for |0> and |+>."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError(f"dims {ma.shape[0]} and {mb.shape[0]} differ")
    ra = psd_sqrt(ma)
    inner = ra @ mb @ ra
    evals, _ = eigendecompose_hermitian((inner + inner.conj().T) / 2)
    value = float(np.sum(np.sqrt(_clean_spectrum(evals))) ** 2)
    return min(max(value, 0.0), 1.0)


# -- random sampling ----------------------------------------------------------


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_state(dim: int, rng: np.random.Generator) -> DensityState:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return DensityState(projector(v))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityState:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityState((m + m.conj().T) / 2)


def random_product_state(dims: Sequence[int], rng: np.random.Generator) -> DensityState:
    return DensityState(kron_all(*(random_density(d, rng).matrix for d in dims)))
