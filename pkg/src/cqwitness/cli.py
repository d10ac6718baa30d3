"""Command-line entry point.

Subcommands: ``witness``, ``sweep``, ``swap-tomography``, ``nogo``, ``toy-sweep``.
Exit codes report execution health only: 0 for any completed run, 2 for an
invalid configuration, 3 for an I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import re
import sys
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from . import __version__, constants
from .channels import (
    CopyChannel,
    Direction,
    make_classical_rotation_copy,
    make_dephased_cnot,
    make_unitary_cnot,
    random_covariant_copy_channel,
)
from .operators import expectation
from .reports import build_report, csv_text, dumps_report, to_jsonable, write_text
from .swap import run_swap_tomography
from .toy import ontic_cnot, toy_protocol_row, toy_witness_sweep
from .witness import EXACT, no_go_demonstration, run_witness

BACKENDS = ("unitary-cnot", "dephased-cnot", "classical-rotation", "twirled-random", "toy-model")
SWEEP_COLUMNS = ("parameter", "zz_plus", "xz_separation", "verdict")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"invalid {field}: {message}")
        self.field = field


@dataclass(frozen=True)
class RunConfig:
    backend: Optional[str] = "unitary-cnot"
    lam: Optional[float] = None
    t: Optional[float] = None
    shots: Union[int, str] = EXACT
    seed: int = 0
    tolerance: float = constants.WITNESS_TOL
    significance: float = constants.SIGNIFICANCE_SIGMA
    output_path: Optional[str] = None
    channels: int = 1000
    parameter: Optional[str] = None
    grid: tuple[float, ...] = ()

    def validate(self) -> "RunConfig":
        if self.backend is not None and self.backend not in BACKENDS:
            raise ConfigError("--backend", f"unknown backend {self.backend!r}")
        if self.lam is not None and not 0.0 <= self.lam <= 1.0:
            raise ConfigError("--lambda", f"{self.lam} is outside [0, 1]")
        if self.shots != EXACT and (not isinstance(self.shots, int) or self.shots < 1):
            raise ConfigError("--shots", "must be a positive integer")
        if not self.tolerance > 0:
            raise ConfigError("--tolerance", "must be positive")
        if not self.significance > 0:
            raise ConfigError("--significance", "must be positive")
        if self.channels < 1:
            raise ConfigError("--channels", "must be at least 1")
        return self

    def echo(self) -> dict:
        out = to_jsonable(dataclasses.asdict(self))
        out["lambda"] = out.pop("lam")
        out.pop("output_path")
        return out


def channels_for(config: RunConfig) -> tuple[CopyChannel, CopyChannel]:
    """Q-to-C and C-to-Q channels of the configured backend."""
    b = config.backend
    if b == "unitary-cnot":
        return make_unitary_cnot(Direction.Q_TO_C), make_unitary_cnot(Direction.C_TO_Q)
    if b == "dephased-cnot":
        if config.lam is None:
            raise ConfigError("--lambda", "required by the dephased-cnot backend")
        return (
            make_dephased_cnot(Direction.Q_TO_C, config.lam),
            make_dephased_cnot(Direction.C_TO_Q, config.lam),
        )
    if b == "classical-rotation":
        if config.t is None:
            raise ConfigError("--t", "required by the classical-rotation backend")
        return (
            make_classical_rotation_copy(config.t, Direction.Q_TO_C),
            make_classical_rotation_copy(config.t, Direction.C_TO_Q),
        )
    if b == "twirled-random":
        return (
            random_covariant_copy_channel(config.seed, Direction.Q_TO_C),
            random_covariant_copy_channel(config.seed + 1, Direction.C_TO_Q),
        )
    raise ConfigError("--backend", f"{b!r} does not define quantum copy channels")


# -- commands -----------------------------------------------------------------


def _record_json(rec) -> dict:
    return {
        "state_label": rec.state_label,
        "shots": rec.shots,
        "values": {k: {"estimate": v[0], "std_error": v[1]} for k, v in rec.values.items()},
    }


def _witness_payload(config: RunConfig) -> dict:
    if config.backend == "toy-model":
        row = toy_protocol_row(ontic_cnot())
        verdict = "NonClassicalityWitnessed" if row["all_conditions"] else (
            "ConsistentWithClassical" if row["c1"] and row["c2"] and row["c3"] else "Inconclusive"
        )
        return {"config": config.echo(), "backend": "toy-model", "toy": row, "verdict": verdict}
    ch, _ = channels_for(config)
    run = run_witness(ch, config.shots, config.seed, config.tolerance, config.significance)
    r = run.report
    return {
        "config": config.echo(),
        "channel": ch.label,
        "dephasing_covariant": ch.covariance_flag,
        "records": [_record_json(rec) for rec in run.records],
        "conditions": {
            "c1_copy_correlation": r.c1_copy_correlation,
            "c2_cross_terms_zero": r.c2_cross_terms_zero,
            "c3_not_eigenstate": r.c3_not_eigenstate,
            "c4_stage2_distinguishable": r.c4_stage2_distinguishable,
        },
        "discriminating_observable": r.discriminating_observable,
        "separations": r.separations,
        "verdict": r.verdict,
        "tolerance_used": r.tolerance_used,
        "significance": r.significance,
        "notes": list(r.notes),
    }


def cmd_witness(config: RunConfig) -> dict:
    return build_report("witness", _witness_payload(config))


def sweep_rows(config: RunConfig) -> list[tuple]:
    if not config.grid:
        raise ConfigError("--grid", "must contain at least one value")
    if config.parameter not in ("lambda", "t"):
        raise ConfigError("parameter", "must be 'lambda' or 't'")
    rows = []
    for i, value in enumerate(config.grid):
        if config.parameter == "lambda":
            if not 0.0 <= value <= 1.0:
                raise ConfigError("--grid", f"lambda value {value} is outside [0, 1]")
            ch = make_dephased_cnot(Direction.Q_TO_C, value)
        else:
            ch = make_classical_rotation_copy(value, Direction.Q_TO_C)
        run = run_witness(ch, config.shots, config.seed + i, config.tolerance, config.significance)
        rows.append(
            (value, run.records[0].estimate("ZZ"), run.report.separations["XZ"], run.report.verdict)
        )
    return rows


def cmd_sweep(config: RunConfig) -> tuple[str, dict]:
    """CSV text of the sweep and the JSON metadata written next to it."""
    rows = sweep_rows(config)
    meta = build_report("sweep", {"config": config.echo(), "columns": list(SWEEP_COLUMNS), "n_rows": len(rows)})
    return csv_text(SWEEP_COLUMNS, rows), meta


def cmd_swap_tomography(config: RunConfig) -> dict:
    ch_qc, ch_cq = channels_for(config)
    run = run_swap_tomography(ch_qc, ch_cq, config.shots, config.seed, config.tolerance)
    per_sign = {}
    for sign, alpha, tomo in zip("+-", run.alpha, run.tomography):
        per_sign[f"alpha{sign}"] = {
            "bloch": tomo.bloch,
            "std_errors": dict(zip("XYZ", tomo.std_errors)),
            "shots_per_basis": dict.fromkeys("XYZ", tomo.shots_per_basis),
            "fidelity_to_alpha": tomo.fidelity_to_reference,
            "true_bloch": [expectation(alpha, a) for a in "XYZ"],
        }
    payload = {
        "config": config.echo(),
        "channels": [ch_qc.label, ch_cq.label],
        "stage_label": run.stage_label,
        "states": per_sign,
        "overlap": run.overlap.overlap,
        "orthogonal": run.overlap.orthogonal,
        "implied_observables": run.overlap.implied_observables,
    }
    return build_report("swap-tomography", payload)


def cmd_nogo(config: RunConfig) -> dict:
    control = None
    if config.backend is not None:
        control, _ = channels_for(config)
    rep = no_go_demonstration(config.channels, config.seed, config.tolerance, control)
    payload = {
        "config": config.echo(),
        "n_channels": rep.n_channels,
        "forced_state": rep.forced_state,
        "max_separation_forced": rep.max_separation_forced,
        "max_separation_protocol": rep.max_separation_protocol,
        "n_c1_c3_pass": rep.n_c1_c3_pass,
        "n_theorem_violations": rep.n_theorem_violations,
        "passed": rep.passed,
        "control": None
        if control is None
        else {
            "channel": rep.control_label,
            "separation": rep.control_separation,
            "verdict": rep.control_verdict,
        },
    }
    return build_report("nogo", payload)


def cmd_toy_sweep(config: RunConfig) -> dict:
    return build_report("toy-sweep", {"config": config.echo(), **toy_witness_sweep()})


# -- argument parsing ---------------------------------------------------------

_PI_RE = re.compile(r"^([-+]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/(\d+(?:\.\d*)?))?$")


def parse_real(text: str) -> float:
    """Float, or a multiple of pi such as ``pi/2`` or ``3*pi/4``."""
    text = text.strip()
    m = _PI_RE.match(text)
    if m:
        coef = m.group(1)
        k = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        return k * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    return float(text)


def parse_grid(text: str) -> tuple[float, ...]:
    return tuple(parse_real(tok) for tok in text.split(",") if tok.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqwitness", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, backend_default: Optional[str] = "unitary-cnot"):
        p.add_argument("--backend", default=backend_default, help=f"one of {', '.join(BACKENDS)}")
        p.add_argument("--lambda", dest="lam", type=parse_real, help="control dephasing strength in [0, 1]")
        p.add_argument("--t", type=parse_real, help="rotation parameter in radians (accepts pi/2)")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--shots", type=int, help="shots per correlator")
        group.add_argument("--exact", action="store_true", help="exact expectation values (default)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tolerance", type=float, default=constants.WITNESS_TOL)
        p.add_argument("--significance", type=float, default=constants.SIGNIFICANCE_SIGMA)
        p.add_argument("--out", help="output path (stdout when omitted)")

    common(sub.add_parser("witness", help="run both stages and evaluate C1-C4"))
    sweep = sub.add_parser("sweep", help="witness runs over a grid of lambda or t")
    common(sweep, backend_default=None)
    sweep.add_argument("parameter", choices=("lambda", "t"))
    sweep.add_argument("--grid", required=True, type=str, help="comma-separated values")
    common(sub.add_parser("swap-tomography", help="indirect tomography through a swapped qubit"))
    nogo = sub.add_parser("nogo", help="sample covariant copy channels and check the no-go")
    common(nogo, backend_default=None)
    nogo.add_argument("--channels", type=int, default=1000)
    common(sub.add_parser("toy-sweep", help="witness analog over toy-model dynamics"), backend_default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    grid = ()
    if getattr(args, "grid", None) is not None:
        try:
            grid = parse_grid(args.grid)
        except ValueError:
            raise ConfigError("--grid", f"cannot parse {args.grid!r}") from None
    return RunConfig(
        backend=args.backend,
        lam=args.lam,
        t=args.t,
        shots=EXACT if args.shots is None else args.shots,
        seed=args.seed,
        tolerance=args.tolerance,
        significance=args.significance,
        output_path=args.out,
        channels=getattr(args, "channels", 1000),
        parameter=getattr(args, "parameter", None),
        grid=grid,
    ).validate()


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if args.command == "sweep":
            text, meta = cmd_sweep(config)
            write_text(config.output_path, text)
            if config.output_path not in (None, "-"):
                write_text(config.output_path + ".meta.json", dumps_report(meta))
            return EXIT_OK
        handler = {
            "witness": cmd_witness,
            "swap-tomography": cmd_swap_tomography,
            "nogo": cmd_nogo,
            "toy-sweep": cmd_toy_sweep,
        }[args.command]
        report = handler(config)
        write_text(config.output_path, dumps_report(report))
    except ConfigError as exc:
        print(f"cqwitness: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cqwitness: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
