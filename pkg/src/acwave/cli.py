"""Command line interface: ``acwave {eigs,ground,wave,verify,sweep,simulate}``.

Exit codes: 0 success, 2 usage or configuration error, 3 regime refusal
(speed outside the admissible range, or no nontrivial states), 4 artifact
mismatch (solution file does not fit the configured grid, or verification
checks fail), 5 solver failure.

Environment: ``ACWAVE_OUTPUT_DIR`` overrides the output directory of the
configuration (``--out`` overrides both); ``ACWAVE_THREADS`` caps the BLAS
thread pools (default 1) and is recorded in every report.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .cross_section import critical_points_J, dirichlet_eigenpairs, ground_state
from .exceptions import ACWaveError, RegimeError, SizingError
from .pipeline import (
    build_cross,
    build_grids,
    check_speed,
    identify_state,
    regime,
    run_wave,
    stage,
    zero_state,
)
from .reporting import fmt, read_table, wave_header, wave_rows, write_csv, write_json
from .critical_point_solvers import WaveSolution, gap_record, wave_to_lab_frame
from .verification import (
    axial_decay,
    check_weighted_poincare,
    energy_flux_identity,
    poincare_corpus,
    residual_te,
    sign_changes,
    simulate_evolution,
)
from .weighted_channel import ChannelGrid, WaveParameters

logger = logging.getLogger("acwave")

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_MISMATCH, EXIT_SOLVER = 0, 2, 3, 4, 5
OUTPUT_ENV = "ACWAVE_OUTPUT_DIR"
THREADS_ENV = "ACWAVE_THREADS"


class ArtifactMismatch(ACWaveError):
    """A solution file does not match the configuration, or checks failed."""


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _provenance(config: RunConfig, command: str) -> dict:
    return {
        "command": command,
        "config": config.data,
        "config_hash": config.digest(),
        "threads": thread_count(),
        "version": __version__,
    }


def _regime_record(reg, speed=None) -> dict:
    out = {
        "eigenvalues": reg.eigenvalues,
        "lambda1": reg.lambda1,
        "threshold": reg.threshold,
        "case": reg.case,
        "unstable_modes": reg.unstable_modes,
    }
    if speed is not None:
        out["speed"] = speed
        out["speed_admissible"] = bool(0 < speed < reg.threshold)
    return out


def _out_dir(config: RunConfig, args) -> Path:
    path = args.out or os.environ.get(OUTPUT_ENV) or config["output_dir"]
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args) -> RunConfig:
    config = RunConfig.load(args.config)
    changes = {}
    if getattr(args, "speed", None) is not None:
        changes["speed"] = args.speed
    if getattr(args, "speeds", None) is not None:
        changes["speeds"] = args.speeds
    return config.override(**changes) if changes else config


# --------------------------------------------------------------------------
# commands


def cmd_eigs(config: RunConfig, args) -> int:
    out = _out_dir(config, args)
    cross = build_cross(config)
    count = args.count or config["eig_count"]
    if count > cross.interior_count:
        raise SizingError(f"{count} eigenvalues requested but the grid has {cross.interior_count} interior nodes")
    pairs = dirichlet_eigenpairs(cross, count)
    reg = regime(cross, count)
    write_csv(out / "eigs.csv", ["j", "lambda"], [(p.index, p.eigenvalue) for p in pairs])
    write_json(out / "report.json", {"provenance": _provenance(config, "eigs"), "regime": _regime_record(reg)})
    return EXIT_OK


def cmd_ground(config: RunConfig, args) -> int:
    out = _out_dir(config, args)
    cross = build_cross(config)
    reg = regime(cross, config["eig_count"])
    if reg.case == "none":
        raise RegimeError(f"lambda_1 = {reg.lambda1:.6g} >= 1: only the trivial state exists")
    up = ground_state(cross, tol=config["tolerances"]["critical"])
    states = critical_points_J(cross)
    header = ["y", "u"] if cross.ndim == 1 else ["y1", "y2", "u"]
    write_csv(out / "ground.csv", header, (row[1:] for row in wave_rows(up.values[None], [0.0], cross)))
    write_json(
        out / "report.json",
        {
            "provenance": _provenance(config, "ground"),
            "regime": _regime_record(reg),
            "ground": {"energy": up.energy, "residual": up.residual, "max": float(np.max(up.values))},
            "critical_points_J": {
                "count": len(states.states),
                "expected": states.expected,
                "complete": states.complete,
                "energies": [s.energy for s in states],
                "tags": [s.morse_tag for s in states],
                "sign_changes": [s.sign_changes() for s in states],
            },
        },
    )
    return EXIT_OK


def _wave_report(res, negate: bool) -> dict:
    wave = res.wave
    gap = wave.diagnostics
    return {
        "regime": _regime_record(res.regime, res.params.speed),
        "critical_points": [
            {
                "k": p.index_hint,
                "level": p.level,
                "residual": p.residual,
                "sign_changes": p.sign_changes,
                "level_approximates_min_max": "heuristic (no genus guarantee)",
            }
            for p in res.points
        ],
        "glue": {"mu": res.glue.mu, "shift": res.glue.shift, "match_fraction": res.glue.match_fraction},
        "wave": {
            "negated": negate,
            "residual": wave.residual,
            "newton_steps": len(wave.trace) - 1,
            "end_errors": list(wave.end_errors()),
            "left_state_energy": res.left_state.energy,
            "right_state_energy": res.right_state.energy,
            "gap": {"J_left": gap.J_left, "J_right": gap.J_right, "kinetic": gap.kinetic, "mismatch": gap.mismatch},
            "sign_changes_profile": sign_changes(wave).profile,
        },
    }


def _negated(wave: WaveSolution) -> WaveSolution:
    from dataclasses import replace

    from .cross_section import CrossSectionState

    def neg(s):
        return CrossSectionState(-np.asarray(s.values), s.energy, s.residual, s.morse_tag, s.converged)

    U = -np.asarray(wave.field)
    return replace(
        wave,
        field=U,
        left_state=neg(wave.left_state),
        right_state=neg(wave.right_state),
        residual=residual_te(U, WaveParameters(wave.speed, 0.0), wave.grid),
    )


def _write_trace(path: Path, res) -> None:
    lines = []
    for p in res.points:
        lines += [f"critical k={p.index_hint} " + r.line() for r in p.trace]
    lines += ["wave " + r.line() for r in res.wave.trace]
    path.write_text("\n".join(lines) + "\n")


def cmd_wave(config: RunConfig, args) -> int:
    out = _out_dir(config, args)
    report = {"provenance": _provenance(config, "wave")}
    try:
        res = run_wave(config, force=args.force)
    except ACWaveError as exc:
        report["status"] = "failed"
        report["stage"] = getattr(exc, "stage", "unknown")
        report["error"] = f"{type(exc).__name__}: {exc}"
        write_json(out / "report.json", report)
        raise
    wave = _negated(res.wave) if args.negate else res.wave
    write_csv(out / "wave.csv", wave_header(res.cross), wave_rows(wave.field, res.full_grid.x, res.cross))
    _write_trace(out / "trace.txt", res)
    report.update(_wave_report(res, args.negate))
    report["wave"]["residual"] = wave.residual
    report["status"] = "ok"
    write_json(out / "report.json", report)
    return EXIT_OK


def load_wave(config: RunConfig, path: Path) -> tuple:
    """Read a ``wave.csv`` and check it against the configured grid."""
    cross = build_cross(config)
    _, full = build_grids(config, cross)
    try:
        header, data = read_table(path)
    except (OSError, ValueError) as exc:
        raise ArtifactMismatch(f"cannot read solution {path}: {exc}") from None
    if header != wave_header(cross):
        raise ArtifactMismatch(f"unexpected columns {header}")
    m = int(np.prod(cross.shape))
    if data.shape[0] != full.axial_nodes * m:
        raise ArtifactMismatch(f"solution has {data.shape[0]} rows, grid needs {full.axial_nodes * m}")
    expected = np.array(list(wave_rows(np.zeros(full.shape), full.x, cross)))[:, :-1]
    if not np.allclose(data[:, :-1], expected, rtol=0, atol=1e-9):
        raise ArtifactMismatch("solution coordinates do not match the configured grid")
    U = data[:, -1].reshape(full.shape)
    return cross, full, U


def _end_states(config, cross, reg, U):
    """Left state: ``u_+`` in case (i), nearest nonzero critical point otherwise."""
    up = ground_state(cross, tol=config["tolerances"]["critical"])
    if reg.case == "ii":
        nonzero = [s for s in critical_points_J(cross) if s.morse_tag != "trivial"]
        left = identify_state(U[0], nonzero)
    else:
        left = up if float(np.mean(U[0])) >= 0 else identify_state(U[0], [up, _flip(up)])
    return left, zero_state(cross)


def _flip(state):
    from .cross_section import CrossSectionState

    return CrossSectionState(-np.asarray(state.values), state.energy, state.residual, state.morse_tag)


def verification_matrix(config: RunConfig, cross, full: ChannelGrid, U: np.ndarray, evolution: bool = True) -> dict:
    """Run every check on a two-sided field; returns ``{name: {passed, ...}}``."""
    tol = config["tolerances"]
    speed = config["speed"]
    reg = regime(cross, config["eig_count"])
    params = WaveParameters(speed, reg.lambda1)
    left, right = _end_states(config, cross, reg, U)
    wave = WaveSolution(
        field=U, speed=speed, grid=full, left_state=left, right_state=right,
        residual=residual_te(U, params, full),
        diagnostics=gap_record(U, speed, full, left, right), converged=True,
    )
    checks = {}
    res = wave.residual
    checks["residual_te"] = {"passed": res <= tol["newton"], "value": res, "bound": tol["newton"]}
    neg = residual_te(-U, params, full)
    checks["oddness"] = {"passed": abs(neg - res) <= 1e-14, "value": abs(neg - res), "bound": 1e-14}
    el, er = wave.end_errors()
    checks["asymptotic_left"] = {"passed": el <= tol["asymptotic"], "value": el, "bound": tol["asymptotic"]}
    checks["asymptotic_right"] = {"passed": er <= tol["asymptotic"], "value": er, "bound": tol["asymptotic"]}
    gap = wave.diagnostics
    checks["heteroclinic_gap"] = {
        "passed": gap.gap > 0 and gap.mismatch <= tol["gap"],
        "value": gap.mismatch, "bound": tol["gap"],
        "J_left": gap.J_left, "J_right": gap.J_right, "kinetic": gap.kinetic,
    }
    rng = np.random.default_rng(config["seed"])
    pairs = []
    for _ in range(config["verification"]["flux_pairs"]):
        i, j = np.sort(rng.choice(full.axial_nodes, 2, replace=False))
        if j - i < 2:
            j = min(i + 2, full.axial_nodes - 1)
            i = j - 2
        pairs.append((float(full.x[i]), float(full.x[j]), energy_flux_identity(wave, full.x[i], full.x[j])))
    worst = max(p[2] for p in pairs)
    checks["energy_flux"] = {"passed": worst <= tol["flux"], "value": worst, "bound": tol["flux"], "pairs": pairs}
    flipped = ChannelGrid(full.x_min, full.x_max, full.axial_nodes, cross)
    decay = max(axial_decay(U, full), axial_decay(U[::-1], flipped))
    checks["axial_decay"] = {"passed": decay <= tol["asymptotic"], "value": decay, "bound": tol["asymptotic"]}
    half, _ = build_grids(config, cross)
    corpus = poincare_corpus(half, config["verification"]["poincare_samples"], np.random.default_rng(config["seed"]))
    reports = [check_weighted_poincare(w, half) for w in corpus]
    checks["weighted_poincare"] = {
        "passed": all(r.passed for r in reports),
        "value": max(r.max_ratio for r in reports),
        "bound": 4.0 * reports[0].tolerance,
        "max_trace_ratio": max(max(r.trace_ratios) for r in reports),
    }
    sc = sign_changes(wave)
    checks["sign_changes"] = {"passed": True, "value": sc.profile, "informational": True}
    if evolution:
        checks["evolution"] = _evolution_check(config, wave)
    return checks


def _lab_grid(config, cross) -> ChannelGrid:
    ev = config["evolution"]
    w = ev["lab_half_width"]
    return ChannelGrid.with_spacing(-w, w, ev["lab_spacing"], cross)


def _evolution_check(config, wave: WaveSolution) -> dict:
    ev = config["evolution"]
    lab = _lab_grid(config, wave.grid.cross)
    u0 = wave_to_lab_frame(wave, 0.0, lab.x)
    result = simulate_evolution(u0.values, lab, ev["T"], ev["dt"])
    exact = wave_to_lab_frame(wave, ev["T"], lab.x)
    amp = float(np.max(np.abs(wave.field)))
    shape = float(np.max(np.abs(result.final - exact.values))) / amp if amp > 0 else float("inf")
    speed_err = abs(result.speed - wave.speed) / wave.speed
    return {
        "passed": speed_err <= 0.05 and shape <= 0.02,
        "speed_measured": result.speed,
        "speed_relative_error": speed_err,
        "shape_error": shape,
        "clipped": bool(u0.clipped or exact.clipped),
    }


def cmd_verify(config: RunConfig, args) -> int:
    out = _out_dir(config, args)
    path = Path(args.solution) if args.solution else out / "wave.csv"
    cross, full, U = load_wave(config, path)
    checks = verification_matrix(config, cross, full, U, evolution=not args.skip_evolution)
    passed = all(c["passed"] for c in checks.values())
    write_json(out / "verify.json", {"provenance": _provenance(config, "verify"), "solution": str(path), "passed": passed, "checks": checks})
    if not passed:
        failed = sorted(k for k, c in checks.items() if not c["passed"])
        logger.error("verification failed: %s", ", ".join(failed))
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_sweep(config: RunConfig, args) -> int:
    speeds = list(config["speeds"])
    if not speeds:
        raise ConfigError("sweep needs a nonempty speed list (config 'speeds' or --speeds)")
    out = _out_dir(config, args)
    rows = []
    for c in speeds:
        sub = out / f"c_{fmt(c)}"
        sub.mkdir(exist_ok=True)
        cfg = config.override(speed=c)
        report = {"provenance": _provenance(cfg, "sweep")}
        try:
            res = run_wave(cfg, force=args.force)
            report.update(_wave_report(res, False))
            evo = _evolution_check(cfg, res.wave)
            report["evolution"] = evo
            report["status"] = "ok"
            rows.append((c, res.point.level, res.wave.diagnostics.gap, res.wave.residual, evo["speed_measured"]))
        except ACWaveError as exc:
            report["status"] = "failed"
            report["stage"] = getattr(exc, "stage", "evolution")
            report["error"] = f"{type(exc).__name__}: {exc}"
            rows.append((c, np.nan, np.nan, np.nan, np.nan))
            logger.error("c=%g failed: %s", c, exc)
        write_json(sub / "report.json", report)
    write_csv(out / "sweep.csv", ["c", "level1", "gap", "residual", "speed_measured"], rows)
    return EXIT_OK


def cmd_simulate(config: RunConfig, args) -> int:
    out = _out_dir(config, args)
    if args.solution:
        cross, full, U = load_wave(config, Path(args.solution))
        reg = regime(cross, config["eig_count"])
        left, right = _end_states(config, cross, reg, U)
        wave = WaveSolution(
            field=U, speed=config["speed"], grid=full, left_state=left, right_state=right,
            residual=residual_te(U, WaveParameters(config["speed"], reg.lambda1), full),
            diagnostics=gap_record(U, config["speed"], full, left, right),
        )
    else:
        wave = run_wave(config, force=args.force).wave
    ev = config["evolution"]
    lab = _lab_grid(config, wave.grid.cross)
    with stage("evolution"):
        u0 = wave_to_lab_frame(wave, 0.0, lab.x)
        result = simulate_evolution(u0.values, lab, ev["T"], ev["dt"])
    exact = wave_to_lab_frame(wave, ev["T"], lab.x)
    amp = float(np.max(np.abs(wave.field)))
    write_csv(out / "front.csv", ["t", "front"], zip(result.times, result.fronts))
    write_json(
        out / "report.json",
        {
            "provenance": _provenance(config, "simulate"),
            "evolution": {
                "speed": wave.speed,
                "speed_measured": result.speed,
                "speed_relative_error": abs(result.speed - wave.speed) / wave.speed,
                "shape_error": float(np.max(np.abs(result.final - exact.values))) / amp,
                "steps": result.steps,
                "clipped": bool(u0.clipped or exact.clipped),
            },
        },
    )
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help=f"output directory (overrides {OUTPUT_ENV} and the config)")
    common.add_argument("-v", "--verbose", action="store_true")
    speed = argparse.ArgumentParser(add_help=False)
    speed.add_argument("--speed", type=float, help="wave speed c")
    speed.add_argument("--force", action="store_true", help="run even if c is not below the threshold")

    parser = argparse.ArgumentParser(prog="acwave", description="Traveling waves of the Allen-Cahn equation in cylinders.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("eigs", parents=[common], help="Dirichlet eigenvalues of the cross section")
    p.add_argument("--count", type=int, help="number of eigenvalues")
    sub.add_parser("ground", parents=[common], help="ground state and critical points of J")
    p = sub.add_parser("wave", parents=[common, speed], help="compute the traveling wave")
    p.add_argument("--negate", action="store_true", help="write -U instead of U")
    p = sub.add_parser("verify", parents=[common, speed], help="check a computed wave")
    p.add_argument("--solution", help="wave.csv to check (default: <out>/wave.csv)")
    p.add_argument("--skip-evolution", action="store_true", help="skip the parabolic cross-check")
    p = sub.add_parser("sweep", parents=[common, speed], help="waves for a list of speeds")
    p.add_argument("--speeds", type=float, nargs="*", help="speed list (overrides the config)")
    p = sub.add_parser("simulate", parents=[common, speed], help="evolve the wave in the laboratory frame")
    p.add_argument("--solution", help="wave.csv to evolve (default: compute it)")
    return parser


COMMANDS = {
    "eigs": cmd_eigs,
    "ground": cmd_ground,
    "wave": cmd_wave,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _load_config(args)
        threads = thread_count()
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=threads):
            return COMMANDS[args.command](config, args)
    except (ConfigError, SizingError) as exc:
        print(f"acwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RegimeError as exc:
        print(f"acwave: regime refusal: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except ArtifactMismatch as exc:
        print(f"acwave: artifact mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except ACWaveError as exc:
        where = getattr(exc, "stage", None)
        prefix = f"solver failure in stage {where}" if where else "solver failure"
        print(f"acwave: {prefix}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main_entry() -> None:  # pragma: no cover
    sys.exit(main())
