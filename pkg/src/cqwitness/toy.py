"""Spekkens toy bits as a stand-in for the classical system.

One toy bit has four ontic states ``1..4``.  We label them by phase-space
points ``(x, p)`` over Z_2: ``1=(0,0)``, ``2=(0,1)``, ``3=(1,0)``, ``4=(1,1)``.
The three dichotomic observables are ``x`` (the T analog, ``{1,2}`` vs
``{3,4}``), ``p`` (the X analog, ``{1,3}`` vs ``{2,4}``) and ``x+p`` (the Y
analog, ``{1,4}`` vs ``{2,3}``).

Valid epistemic states are uniform distributions over the solution sets of
commuting families of such linear functionals (cosets of isotropic
subspaces), which is the knowledge-balance restriction.  All probabilities
are exact fractions.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

OnticPoint = tuple[int, ...]  # (x1, p1, ..., xn, pn)

# -- phase space --------------------------------------------------------------

_LABEL_TO_POINT = {1: (0, 0), 2: (0, 1), 3: (1, 0), 4: (1, 1)}
_POINT_TO_LABEL = {v: k for k, v in _LABEL_TO_POINT.items()}

# Dichotomic functionals on one toy bit, as (coefficient of x, coefficient of p).
TOY_OBSERVABLES = {"Z": (1, 0), "X": (0, 1), "Y": (1, 1)}


def _points(n_bits: int) -> list[OnticPoint]:
    return list(itertools.product((0, 1), repeat=2 * n_bits))


def _eval(f: tuple[int, ...], m: OnticPoint) -> int:
    return sum(a * b for a, b in zip(f, m)) % 2


def _symplectic(f: tuple[int, ...], g: tuple[int, ...]) -> int:
    return sum(f[2 * i] * g[2 * i + 1] + f[2 * i + 1] * g[2 * i] for i in range(len(f) // 2)) % 2


def _span(vectors: Iterable[tuple[int, ...]], length: int) -> frozenset:
    span = {tuple([0] * length)}
    for v in vectors:
        span |= {tuple((a + b) % 2 for a, b in zip(s, v)) for s in span}
    return frozenset(span)


@lru_cache(maxsize=None)
def valid_supports(n_bits: int) -> frozenset:
    """Every valid epistemic support on ``n_bits`` toy bits, as point sets."""
    if n_bits not in (1, 2):
        raise ValueError("only one or two toy bits are supported")
    length = 2 * n_bits
    nonzero = [v for v in itertools.product((0, 1), repeat=length) if any(v)]
    points = _points(n_bits)
    supports = {frozenset(points)}
    seen = set()
    for k in range(1, n_bits + 1):
        for basis in itertools.combinations(nonzero, k):
            span = _span(basis, length)
            if len(span) != 2**k or span in seen:
                continue
            if any(_symplectic(f, g) for f, g in itertools.combinations(basis, 2)):
                continue
            seen.add(span)
            for values in itertools.product((0, 1), repeat=k):
                supports.add(
                    frozenset(m for m in points if all(_eval(f, m) == c for f, c in zip(basis, values)))
                )
    return frozenset(supports)


# -- epistemic states ---------------------------------------------------------


def _to_point(element) -> OnticPoint:
    if isinstance(element, int):
        return _LABEL_TO_POINT[element]
    return tuple(itertools.chain.from_iterable(_LABEL_TO_POINT[e] for e in element))


def _from_point(m: OnticPoint):
    labels = tuple(_POINT_TO_LABEL[m[i:i + 2]] for i in range(0, len(m), 2))
    return labels[0] if len(labels) == 1 else labels


@dataclass(frozen=True)
class ToyEpistemicState:
    """Uniform distribution over a valid support.

    One toy bit uses labels ``1..4``; two toy bits use pairs ``(a, b)``.
    """

    support: frozenset

    def __post_init__(self):
        support = frozenset(self.support)
        if not support:
            raise ValueError("empty support")
        try:
            points = frozenset(_to_point(e) for e in support)
        except (KeyError, TypeError):
            raise ValueError(f"unknown ontic labels in {sorted(support, key=str)}") from None
        n_bits = {len(p) // 2 for p in points}
        if len(n_bits) != 1:
            raise ValueError("mixed one- and two-bit labels")
        if points not in valid_supports(n_bits.pop()):
            raise ValueError(f"support {sorted(support, key=str)} violates knowledge balance")
        object.__setattr__(self, "support", support)

    @classmethod
    def from_points(cls, points: Iterable[OnticPoint]) -> "ToyEpistemicState":
        return cls(frozenset(_from_point(m) for m in points))

    @property
    def points(self) -> frozenset:
        return frozenset(_to_point(e) for e in self.support)

    @property
    def n_bits(self) -> int:
        return len(next(iter(self.points))) // 2


def toy_measure_T(s: ToyEpistemicState) -> dict[int, Fraction]:
    """Outcome distribution of T on a single toy bit: +1 on ``{1,2}``, -1 on ``{3,4}``."""
    if s.n_bits != 1:
        raise ValueError("toy_measure_T acts on a single toy bit")
    n = len(s.support)
    plus = sum(1 for m in s.points if m[0] == 0)
    return {+1: Fraction(plus, n), -1: Fraction(n - plus, n)}


def correlator(points: frozenset, probe: str | None, classical: bool) -> Fraction:
    """Mean of ``(-1)**(A(probe) + x(classical))`` over a two-bit support."""
    f = [0, 0, 0, 0]
    if probe is not None:
        f[0], f[1] = TOY_OBSERVABLES[probe]
    if classical:
        f[2] = 1
    total = sum(1 - 2 * _eval(tuple(f), m) for m in points)
    return Fraction(total, len(points))


# -- dynamics -----------------------------------------------------------------

_TWO_BIT_POINTS = _points(2)
_INDEX = {m: i for i, m in enumerate(_TWO_BIT_POINTS)}


@dataclass(frozen=True)
class ToyDynamics:
    """Permutation of the 16 two-bit ontic states; ``permutation[i]`` is the image of point ``i``."""

    permutation: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        if sorted(self.permutation) != list(range(16)):
            raise ValueError("not a permutation of the 16 ontic states")

    def apply_points(self, points: Iterable[OnticPoint]) -> frozenset:
        return frozenset(_TWO_BIT_POINTS[self.permutation[_INDEX[m]]] for m in points)

    def apply(self, s: ToyEpistemicState) -> ToyEpistemicState:
        return ToyEpistemicState.from_points(self.apply_points(s.points))

    def preserves_validity(self) -> bool:
        valid = valid_supports(2)
        return all(self.apply_points(s) in valid for s in valid)


def _perm_from_map(fn) -> tuple[int, ...]:
    return tuple(_INDEX[fn(m)] for m in _TWO_BIT_POINTS)


def ontic_cnot() -> ToyDynamics:
    """Toy controlled-NOT: ``x2 += x1`` and ``p1 += p2``."""
    return ToyDynamics(
        _perm_from_map(lambda m: (m[0], (m[1] + m[3]) % 2, (m[2] + m[0]) % 2, m[3])), "CNOT"
    )


def _local(bit: int, cycle: dict[int, int]) -> tuple[int, ...]:
    def fn(m):
        out = list(m)
        label = _POINT_TO_LABEL[m[2 * bit:2 * bit + 2]]
        out[2 * bit:2 * bit + 2] = _LABEL_TO_POINT[cycle.get(label, label)]
        return tuple(out)

    return _perm_from_map(fn)


def generators() -> dict[str, tuple[int, ...]]:
    """Transposition ``(1 2)`` and 4-cycle ``(1 2 3 4)`` on each bit, plus CNOT."""
    swap12 = {1: 2, 2: 1}
    cycle = {1: 2, 2: 3, 3: 4, 4: 1}
    return {
        "A(12)": _local(0, swap12),
        "A(1234)": _local(0, cycle),
        "B(12)": _local(1, swap12),
        "B(1234)": _local(1, cycle),
        "CNOT": ontic_cnot().permutation,
    }


@lru_cache(maxsize=None)
def generated_group() -> tuple[ToyDynamics, ...]:
    """Breadth-first closure of :func:`generators`, labelled by shortest word."""
    gens = generators()
    identity = tuple(range(16))
    seen = {identity: "id"}
    order = [identity]
    queue = deque([identity])
    while queue:
        g = queue.popleft()
        for name, h in gens.items():
            new = tuple(h[g[i]] for i in range(16))
            if new not in seen:
                seen[new] = name if seen[g] == "id" else f"{name}*{seen[g]}"
                order.append(new)
                queue.append(new)
    return tuple(ToyDynamics(p, seen[p]) for p in order)


def _sharp(x1: int, x2: int) -> frozenset:
    return frozenset(m for m in _TWO_BIT_POINTS if m[0] == x1 and m[2] == x2)


def satisfies_copy_table(d: ToyDynamics) -> bool:
    """``{x1=0,x2=0} -> itself`` and ``{x1=1,x2=0} -> {x1=1,x2=1}`` as sets."""
    return d.apply_points(_sharp(0, 0)) == _sharp(0, 0) and d.apply_points(_sharp(1, 0)) == _sharp(1, 1)


@lru_cache(maxsize=None)
def enumerate_copy_dynamics() -> tuple[ToyDynamics, ...]:
    """Copy-table-respecting, validity-preserving members of the generated group.

    The group has no repeated elements by construction, so the result is
    deduplicated.  Order is breadth-first discovery order.
    """
    return tuple(d for d in generated_group() if satisfies_copy_table(d) and d.preserves_validity())


# -- protocol analog ----------------------------------------------------------

STAGE1_LABELS = ("ZZ", "XZ", "YZ", "ZI", "XI", "YI")
STAGE2_LABELS = ("XZ", "YZ", "ZZ")


def _initial(sign: str) -> frozenset:
    # Probe sharp in the X analog (p1), classical bit sharp in T (x2 = 0).
    p1 = 0 if sign == "+" else 1
    return frozenset(m for m in _TWO_BIT_POINTS if m[1] == p1 and m[2] == 0)


def _moments(points: frozenset, labels: Iterable[str]) -> dict[str, Fraction]:
    out = {}
    for label in labels:
        probe = None if label[0] == "I" else label[0]
        out[label] = correlator(points, probe, label[1] == "Z")
    return out


def toy_protocol_row(d: ToyDynamics) -> dict:
    """Run both stages of the witness analog under one toy dynamics."""
    stage1 = {s: d.apply_points(_initial(s)) for s in "+-"}
    stage2 = {s: d.apply_points(stage1[s]) for s in "+-"}
    m1 = {s: _moments(stage1[s], STAGE1_LABELS) for s in "+-"}
    m2 = {s: _moments(stage2[s], STAGE2_LABELS) for s in "+-"}
    c1 = all(m1[s]["ZZ"] == 1 for s in "+-")
    c2 = all(m1[s][lab] == 0 for s in "+-" for lab in ("XZ", "YZ"))
    c3 = all(m1[s][lab] == 0 for s in "+-" for lab in ("XI", "YI", "ZI"))
    seps = {lab: abs(m2["+"][lab] - m2["-"][lab]) for lab in STAGE2_LABELS}
    c4 = any(v > 0 for v in seps.values())
    return {
        "label": d.label,
        "permutation": list(d.permutation),
        "stage1": {f"rho{s}": {k: str(v) for k, v in m1[s].items()} for s in "+-"},
        "stage2": {f"rho~{s}": {k: str(v) for k, v in m2[s].items()} for s in "+-"},
        "separations": {k: str(v) for k, v in seps.items()},
        "c1": c1,
        "c2": c2,
        "c3": c3,
        "c4": c4,
        "all_conditions": c1 and c2 and c3 and c4,
    }


def toy_witness_sweep() -> dict:
    """Witness analog for every enumerated toy copy dynamics.

    Rows are observations about this finite model, not general claims.
    """
    dynamics = enumerate_copy_dynamics()
    rows = [toy_protocol_row(d) for d in dynamics]
    cnot = ontic_cnot().permutation
    return {
        "n_group_elements": len(generated_group()),
        "n_dynamics": len(rows),
        "n_c1": sum(r["c1"] for r in rows),
        "n_c1_c3": sum(r["c1"] and r["c2"] and r["c3"] for r in rows),
        "n_all_conditions": sum(r["all_conditions"] for r in rows),
        "cnot_row": next(i for i, d in enumerate(dynamics) if d.permutation == cnot),
        "rows": rows,
    }
