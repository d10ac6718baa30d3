"""The two-stage witness experiment and its classical no-go checks.

Stage 1 copies the probe's z value onto the classical system starting from
``|+-> (x) |0>``.  Stage 2 applies the same copy again.  Only ``I`` or ``Z`` is
ever measured on the classical factor; :func:`measure_correlators` refuses
anything else.

Witness conditions:

* C1 ``<ZZ>`` equals 1 for both signs.
* C2 ``<XZ>`` and ``<YZ>`` vanish for both signs.
* C3 all local probe moments ``<XI>, <YI>, <ZI>`` vanish, which rules out
  every eigenstate of ``ZZ`` (each has ``|<ZI>| = 1``).
* C4 some ``A in {X, Y, Z}`` separates the stage-2 pair through ``<AZ>``.

A classical model of the second system forces the stage-1 pair to be
``(I + ZZ)/4`` for both signs, so C4 cannot hold once C1-C3 do.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from . import constants
from .channels import CopyChannel, Direction, random_covariant_copy_channel
from .errors import ChannelDirectionError, DimensionError, ProtocolViolation, StageError
from .operators import DensityState, PauliString, StateLike, expectation
from .states import (
    PARAMETER_LABELS,
    ClassicalBlochState,
    ProtocolStates,
    Stage,
    bloch_to_state,
    family_matrix,
    prepare_initial,
)

EXACT = "exact"
Shots = Union[int, str]

STAGE1_OBSERVABLES = ("ZZ", "XZ", "YZ", "ZI", "XI", "YI")
CANDIDATE_PROBES = ("X", "Y", "Z")
STAGE2_OBSERVABLES = tuple(a + "Z" for a in CANDIDATE_PROBES)
STATE_LABELS = ("rho+", "rho-", "rho~+", "rho~-")

FORCING_CONSTRAINTS = {"ZZ": 1.0, "XZ": 0.0, "YZ": 0.0, "XI": 0.0, "YI": 0.0, "ZI": 0.0}

C3_READING = "C3: all local probe moments vanish within tolerance"


class Verdict(str, enum.Enum):
    NON_CLASSICALITY_WITNESSED = "NonClassicalityWitnessed"
    CONSISTENT_WITH_CLASSICAL = "ConsistentWithClassical"
    INCONCLUSIVE = "Inconclusive"


def _check_shots(shots: Shots) -> None:
    if shots == EXACT:
        return
    if isinstance(shots, bool) or not isinstance(shots, (int, np.integer)) or shots < 1:
        raise ValueError(f"shots must be a positive integer or 'exact', got {shots!r}")


# -- stages -------------------------------------------------------------------


def run_stage1(ch: CopyChannel) -> ProtocolStates:
    if ch.direction is not Direction.Q_TO_C:
        raise ChannelDirectionError("stage 1 needs a Q-to-C copy channel")
    return ProtocolStates(
        ch.apply(prepare_initial("+")), ch.apply(prepare_initial("-")), Stage.AFTER_FIRST_COPY
    )


def run_stage2(ch: CopyChannel, s: ProtocolStates) -> ProtocolStates:
    if ch.direction is not Direction.Q_TO_C:
        raise ChannelDirectionError("stage 2 needs a Q-to-C copy channel")
    if s.stage is not Stage.AFTER_FIRST_COPY:
        raise StageError(f"stage 2 needs states after the first copy, got {s.stage.value}")
    return ProtocolStates(ch.apply(s.rho_plus), ch.apply(s.rho_minus), Stage.AFTER_SECOND_COPY)


# -- measurement --------------------------------------------------------------


@dataclass(frozen=True)
class CorrelatorRecord:
    """Estimated correlators of one protocol state.

    ``values`` maps a Pauli label such as ``"XZ"`` to ``(estimate, std_error)``.
    """

    state_label: str
    values: Mapping[str, tuple[float, float]]
    shots: Shots

    def __post_init__(self):
        _check_shots(self.shots)
        for label, (est, se) in self.values.items():
            if se < 0:
                raise ValueError(f"{label}: negative standard error")
            if self.shots == EXACT and se != 0:
                raise ValueError(f"{label}: exact records carry zero standard error")
            if abs(est) > 1 + 3 * se + constants.PREDICATE_ATOL:
                raise ValueError(f"{label}: estimate {est} outside [-1, 1]")

    def estimate(self, label: str) -> float:
        return self.values[label][0]

    def std_error(self, label: str) -> float:
        return self.values[label][1]


def check_protocol_observable(obs: PauliString) -> None:
    """Raise ``ProtocolViolation`` unless the classical factor carries I or Z."""
    if obs.n_qubits != 2:
        raise DimensionError(f"{obs} is not a two-factor observable")
    if obs.factors[1] not in ("I", "Z"):
        raise ProtocolViolation(
            f"{obs} measures {obs.factors[1]} on the classical system; only I or Z is allowed"
        )


def sample_pauli_mean(
    true_mean: float, shots: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Sample mean and standard error of ``shots`` +-1 outcomes with mean ``true_mean``."""
    p_plus = min(max((1.0 + true_mean) / 2.0, 0.0), 1.0)
    k = rng.binomial(shots, p_plus)
    m = (2.0 * k - shots) / shots
    return m, math.sqrt(max(1.0 - m * m, 0.0) / shots)


def measure_correlators(
    rho: StateLike,
    observables: Sequence[Union[str, PauliString]],
    shots: Shots = EXACT,
    seed: Union[int, np.random.SeedSequence] = 0,
    state_label: str = "rho+",
) -> CorrelatorRecord:
    """Estimate ``<O>`` for each observable, exactly or from ``shots`` samples.

    Raises:
        ProtocolViolation: an observable acts on the classical factor with X or Y.
    """
    _check_shots(shots)
    paulis = [PauliString.parse(o) for o in observables]
    for p in paulis:
        check_protocol_observable(p)
    rng = None if shots == EXACT else np.random.default_rng(seed)
    values = {}
    for p in paulis:
        mean = expectation(rho, p)
        if rng is None:
            values[p.label] = (mean, 0.0)
        else:
            values[p.label] = sample_pauli_mean(mean, int(shots), rng)
    return CorrelatorRecord(state_label, values, shots)


# -- verdict ------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessReport:
    c1_copy_correlation: bool
    c2_cross_terms_zero: bool
    c3_not_eigenstate: bool
    c4_stage2_distinguishable: bool
    discriminating_observable: Optional[PauliString]
    verdict: Verdict
    tolerance_used: float
    significance: float
    separations: Mapping[str, float] = field(default_factory=dict)
    notes: tuple[str, ...] = (C3_READING,)

    def __post_init__(self):
        all_true = (
            self.c1_copy_correlation
            and self.c2_cross_terms_zero
            and self.c3_not_eigenstate
            and self.c4_stage2_distinguishable
        )
        if (self.verdict is Verdict.NON_CLASSICALITY_WITNESSED) != all_true:
            raise ValueError("verdict is NonClassicalityWitnessed exactly when C1-C4 hold")
        if (self.discriminating_observable is not None) != self.c4_stage2_distinguishable:
            raise ValueError("a discriminating observable is reported exactly when C4 holds")

    @property
    def separation(self) -> float:
        if self.discriminating_observable is None:
            return max(self.separations.values(), default=0.0)
        return self.separations[self.discriminating_observable.label + "Z"]


def _require(rec: CorrelatorRecord, labels: Sequence[str]) -> None:
    missing = [label for label in labels if label not in rec.values]
    if missing:
        raise ValueError(f"record {rec.state_label} lacks {missing}")


def _matches(rec: CorrelatorRecord, label: str, target: float, tol: float, significance: float) -> bool:
    est, se = rec.values[label]
    return abs(est - target) <= tol + significance * se


def evaluate_witness(
    stage1: tuple[CorrelatorRecord, CorrelatorRecord],
    stage2: tuple[CorrelatorRecord, CorrelatorRecord],
    tol: float = constants.WITNESS_TOL,
    significance: float = constants.SIGNIFICANCE_SIGMA,
) -> WitnessReport:
    """Evaluate C1-C4 and assemble the verdict.

    In shot mode every equality test accepts deviations up to
    ``tol + significance * std_error`` and the C4 separation must exceed
    ``2 * tol + significance * sqrt(se_plus**2 + se_minus**2)``.
    """
    for rec in stage1:
        _require(rec, STAGE1_OBSERVABLES)
    candidates = [a for a in CANDIDATE_PROBES if all(a + "Z" in r.values for r in stage2)]
    if not candidates:
        raise ValueError("stage-2 records contain no A(x)Z candidate observable")

    c1 = all(_matches(r, "ZZ", 1.0, tol, significance) for r in stage1)
    c2 = all(_matches(r, lab, 0.0, tol, significance) for r in stage1 for lab in ("XZ", "YZ"))
    c3 = all(_matches(r, lab, 0.0, tol, significance) for r in stage1 for lab in ("XI", "YI", "ZI"))

    plus, minus = stage2
    separations = {}
    passing = []
    for a in candidates:
        label = a + "Z"
        sep = abs(plus.estimate(label) - minus.estimate(label))
        separations[label] = sep
        noise = math.hypot(plus.std_error(label), minus.std_error(label))
        if sep > 2 * tol + significance * noise:
            passing.append((sep, a))
    c4 = bool(passing)
    best = None
    if passing:
        # Largest separation wins; ties go to the earlier letter.
        top = max(sep for sep, _ in passing)
        best = PauliString((min(a for sep, a in passing if sep == top),))

    if c1 and c2 and c3:
        verdict = Verdict.NON_CLASSICALITY_WITNESSED if c4 else Verdict.CONSISTENT_WITH_CLASSICAL
    else:
        verdict = Verdict.INCONCLUSIVE
    return WitnessReport(c1, c2, c3, c4, best, verdict, tol, significance, separations)


@dataclass(frozen=True)
class WitnessRun:
    stage1: ProtocolStates
    stage2: ProtocolStates
    records: tuple[CorrelatorRecord, CorrelatorRecord, CorrelatorRecord, CorrelatorRecord]
    report: WitnessReport


def record_seeds(seed: int, n: int = 4) -> list[np.random.SeedSequence]:
    """Independent child seeds, one per record, split from a single seed."""
    return np.random.SeedSequence(seed).spawn(n)


def run_witness(
    ch: CopyChannel,
    shots: Shots = EXACT,
    seed: int = 0,
    tol: float = constants.WITNESS_TOL,
    significance: float = constants.SIGNIFICANCE_SIGMA,
) -> WitnessRun:
    """Both stages, all correlators and the verdict for one channel."""
    s1 = run_stage1(ch)
    s2 = run_stage2(ch, s1)
    seeds = record_seeds(seed)
    recs = (
        measure_correlators(s1.rho_plus, STAGE1_OBSERVABLES, shots, seeds[0], "rho+"),
        measure_correlators(s1.rho_minus, STAGE1_OBSERVABLES, shots, seeds[1], "rho-"),
        measure_correlators(s2.rho_plus, STAGE2_OBSERVABLES, shots, seeds[2], "rho~+"),
        measure_correlators(s2.rho_minus, STAGE2_OBSERVABLES, shots, seeds[3], "rho~-"),
    )
    report = evaluate_witness(recs[:2], recs[2:], tol, significance)
    return WitnessRun(s1, s2, recs, report)


# -- classical uniqueness -----------------------------------------------------


@dataclass(frozen=True)
class UniquenessResult:
    """Outcome of the constrained search over the classical family.

    ``solution`` is ``None`` when no positive member meets the constraints.
    """

    solution: Optional[ClassicalBlochState]
    diameter: float
    n_grid_points: int
    n_grid_feasible: int
    feasible_points: np.ndarray

    @property
    def feasible(self) -> bool:
        return self.solution is not None


def _min_eigs(points: np.ndarray) -> np.ndarray:
    out = np.empty(len(points))
    chunk = 200_000
    for start in range(0, len(points), chunk):
        mats = family_matrix(points[start:start + chunk])
        out[start:start + chunk] = np.linalg.eigvalsh(mats)[:, 0]
    return out


def _min_eig(x: np.ndarray) -> float:
    return float(_min_eigs(x[None, :])[0])


def _ternary_max(x: np.ndarray, axis: int, lo: float, hi: float, iters: int = 100) -> float:
    # The smallest eigenvalue is concave in the parameters, so ternary search finds its maximum.
    def f(v):
        trial = x.copy()
        trial[axis] = v
        return _min_eig(trial)

    a, b = lo, hi
    for _ in range(iters):
        if b - a < 1e-15:
            break
        m1, m2 = a + (b - a) / 3, b - (b - a) / 3
        if f(m1) < f(m2):
            a = m1
        else:
            b = m2
    return (a + b) / 2


def _diameter(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    if len(points) > 2000:
        idx = np.unique(np.concatenate([np.argmin(points, axis=0), np.argmax(points, axis=0)]))
        points = points[idx]
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


def classical_uniqueness_solve(
    constraints: Optional[Mapping[str, float]] = None,
    tol: float = constants.WITNESS_TOL,
    grid_points: int = 21,
    refine_tol: float = 1e-8,
) -> UniquenessResult:
    """Find every positive family member meeting moment constraints.

    ``constraints`` maps labels from ``PARAMETER_LABELS`` (``"ZZ"``, ``"XI"``,
    ...) to target values; each holds within ``tol``.  Free parameters are
    scanned on a ``grid_points`` grid over ``[-1, 1]`` with a positivity
    filter.  Constrained parameters are pinned to their targets on the grid,
    which selects exactly the grid cells the full 7-D filter would keep.
    Refinement is coordinate ascent of the smallest eigenvalue by ternary
    line search (when the grid misses the feasible set) followed by bisection for the extent of the
    convex feasible set along every axis.
    """
    constraints = dict(FORCING_CONSTRAINTS if constraints is None else constraints)
    unknown = set(constraints) - set(PARAMETER_LABELS)
    if unknown:
        raise ValueError(f"unknown constraint labels {sorted(unknown)}")

    lo = np.full(7, -1.0)
    hi = np.full(7, 1.0)
    axes = []
    for i, label in enumerate(PARAMETER_LABELS):
        if label in constraints:
            target = float(constraints[label])
            lo[i] = max(-1.0, target - tol)
            hi[i] = min(1.0, target + tol)
            axes.append(np.array([min(max(target, lo[i]), hi[i])]))
        else:
            axes.append(np.linspace(-1.0, 1.0, grid_points))
    infeasible = UniquenessResult(None, 0.0, 0, 0, np.empty((0, 7)))
    if (lo > hi).any():
        return infeasible

    grid = np.array(list(itertools.product(*axes)))
    eigs = _min_eigs(grid)
    ok = eigs >= -constants.PSD_ATOL
    feasible_grid = grid[ok]

    def feasible(x: np.ndarray) -> bool:
        return _min_eig(x) >= -constants.PSD_ATOL

    if len(feasible_grid):
        x0 = feasible_grid.mean(axis=0)
    else:
        x0 = grid[int(np.argmax(eigs))].copy()
        best = _min_eig(x0)
        for _ in range(50):
            before = best
            for i in range(7):
                x0[i] = _ternary_max(x0, i, lo[i], hi[i])
            best = _min_eig(x0)
            if best >= -constants.PSD_ATOL or best - before <= 1e-15:
                break
        if best < -constants.PSD_ATOL:
            return UniquenessResult(None, 0.0, len(grid), 0, np.empty((0, 7)))

    extremes = [x0]
    for i in range(7):
        for bound in (lo[i], hi[i]):
            reach = bound - x0[i]
            end = x0.copy()
            end[i] = bound
            if feasible(end):
                extremes.append(end)
                continue
            a, b = 0.0, 1.0
            while abs(b - a) * abs(reach) > refine_tol:
                mid = (a + b) / 2
                trial = x0.copy()
                trial[i] += mid * reach
                if feasible(trial):
                    a = mid
                else:
                    b = mid
            pt = x0.copy()
            pt[i] += a * reach
            extremes.append(pt)
    points = np.vstack([feasible_grid, np.array(extremes)]) if len(feasible_grid) else np.array(extremes)

    solution = x0.copy()
    for i, label in enumerate(PARAMETER_LABELS):
        if label in constraints:
            snapped = solution.copy()
            snapped[i] = min(max(float(constraints[label]), lo[i]), hi[i])
            if feasible(snapped):
                solution = snapped
    return UniquenessResult(
        ClassicalBlochState.from_vector(solution),
        _diameter(points),
        len(grid),
        int(ok.sum()),
        points,
    )


# -- no-go sweep --------------------------------------------------------------


def stage2_separation(ch: CopyChannel, rho_plus: StateLike, rho_minus: StateLike) -> float:
    """``max_A |<AZ>(E(rho_plus)) - <AZ>(E(rho_minus))|`` over ``A in {X, Y, Z}``."""
    out_p, out_m = ch.apply(rho_plus), ch.apply(rho_minus)
    return max(abs(expectation(out_p, lab) - expectation(out_m, lab)) for lab in STAGE2_OBSERVABLES)


@dataclass(frozen=True)
class NoGoReport:
    n_channels: int
    seed: int
    tolerance: float
    forced_state: ClassicalBlochState
    max_separation_forced: float
    max_separation_protocol: float
    n_c1_c3_pass: int
    n_theorem_violations: int
    separations_forced: tuple[float, ...]
    control_label: Optional[str] = None
    control_separation: Optional[float] = None
    control_verdict: Optional[Verdict] = None

    @property
    def passed(self) -> bool:
        return self.max_separation_forced <= self.tolerance and self.n_theorem_violations == 0


def _one_channel(seed: int, forced: DensityState, tol: float) -> tuple[float, float, bool]:
    ch = random_covariant_copy_channel(seed)
    sep_forced = stage2_separation(ch, forced, forced)
    run = run_witness(ch, EXACT, seed, tol)
    r = run.report
    c123 = r.c1_copy_correlation and r.c2_cross_terms_zero and r.c3_not_eigenstate
    sep_protocol = stage2_separation(ch, run.stage1.rho_plus, run.stage1.rho_minus)
    return sep_forced, sep_protocol, c123


def no_go_demonstration(
    n_channels: int,
    seed: int = 0,
    tol: float = constants.WITNESS_TOL,
    control_channel: Optional[CopyChannel] = None,
) -> NoGoReport:
    """Push the forced classical pair through many covariant copy channels.

    Channel ``i`` is drawn with seed ``seed + i``.  For each one the stage-2
    separation is measured twice: from the forced pair ``(I + ZZ)/4`` on both
    signs, and from the actual stage-1 outputs of ``|+-> (x) |0>``.  A
    theorem violation is a channel whose exact run passes C1-C3 yet separates
    the stage-2 pair by more than ``tol``.  ``control_channel`` is run through
    the ordinary protocol for comparison.
    """
    if n_channels < 1:
        raise ValueError("n_channels must be at least 1")
    solved = classical_uniqueness_solve(FORCING_CONSTRAINTS, tol)
    if solved.solution is None:
        raise RuntimeError("the classical constraints admit no state")
    forced = bloch_to_state(solved.solution)

    results = [_one_channel(seed + i, forced, tol) for i in range(n_channels)]
    sep_forced = tuple(r[0] for r in results)
    violations = sum(1 for f, p, c in results if c and p > tol)
    max_protocol = max(p for _, p, _ in results)

    control = {}
    if control_channel is not None:
        run = run_witness(control_channel, EXACT, seed, tol)
        control = dict(
            control_label=control_channel.label,
            control_separation=stage2_separation(
                control_channel, run.stage1.rho_plus, run.stage1.rho_minus
            ),
            control_verdict=run.report.verdict,
        )
    return NoGoReport(
        n_channels=n_channels,
        seed=seed,
        tolerance=tol,
        forced_state=solved.solution,
        max_separation_forced=max(sep_forced),
        max_separation_protocol=max_protocol,
        n_c1_c3_pass=sum(1 for r in results if r[2]),
        n_theorem_violations=violations,
        separations_forced=sep_forced,
        **control,
    )
