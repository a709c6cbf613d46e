"""End-to-end orchestration shared by the command line and the estimators.

eigenpairs -> ground state -> critical points of ``I_c`` -> glue -> Newton.
Each stage runs inside :func:`stage`, which tags any escaping package error
with the stage name so callers can report where a run failed.
"""
from __future__ import annotations

import contextlib
import logging
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from .config import RunConfig
from .cross_section import (
    CrossSectionGrid,
    CrossSectionState,
    critical_points_J,
    dirichlet_eigenpairs,
    ground_state,
)
from .exceptions import ACWaveError, RegimeError
from .critical_point_solvers import (
    CriticalPoint,
    GlueParameters,
    WaveSolution,
    critical_sequence,
    glue_extend,
    newton_travel_wave,
    shift_offset,
)
from .weighted_channel import ChannelGrid, WaveParameters

logger = logging.getLogger(__name__)


@contextlib.contextmanager
def stage(name: str):
    """Attach ``name`` to package errors raised inside the block."""
    try:
        yield
    except ACWaveError as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise


def build_cross(config: RunConfig) -> CrossSectionGrid:
    cs = config["cross_section"]
    if cs["shape"] == "interval":
        return CrossSectionGrid.interval(cs["lengths"][0], cs["nodes"][0])
    return CrossSectionGrid.rectangle(cs["lengths"][0], cs["lengths"][1], cs["nodes"][0], cs["nodes"][1])


def build_grids(config: RunConfig, cross: CrossSectionGrid) -> tuple:
    """Half cylinder ``[x_min, 0]`` and two-sided channel ``[x_min, x_max]``."""
    ch = config["channel"]
    half = ChannelGrid.with_spacing(ch["x_min"], 0.0, ch["spacing"], cross)
    full = ChannelGrid.with_spacing(ch["x_min"], ch["x_max"], ch["spacing"], cross)
    return half, full


@dataclass(frozen=True)
class Regime:
    """Spectral regime of the cross section.

    ``case`` is ``"i"`` when ``lambda_1 < 1 <= lambda_2``, ``"ii"`` when
    ``lambda_2 < 1`` and ``"none"`` when ``lambda_1 >= 1`` (no wave).
    """

    eigenvalues: np.ndarray = dc_field(repr=False)
    lambda1: float
    threshold: float
    case: str
    unstable_modes: int


def regime(cross: CrossSectionGrid, count: int = 5) -> Regime:
    count = min(count, cross.interior_count)
    pairs = dirichlet_eigenpairs(cross, max(count, min(2, cross.interior_count)))
    lam = np.array([p.eigenvalue for p in pairs])
    lam1 = float(lam[0])
    unstable = int(np.count_nonzero(lam < 1.0))
    if lam1 >= 1.0:
        case = "none"
    elif unstable == 1:
        case = "i"
    else:
        case = "ii"
    thr = 2.0 * np.sqrt(1.0 - lam1) if lam1 < 1 else 0.0
    return Regime(lam, lam1, float(thr), case, unstable)


def check_speed(speed: float, reg: Regime, force: bool = False) -> None:
    if reg.case == "none":
        raise RegimeError(f"lambda_1 = {reg.lambda1:.6g} >= 1: no nontrivial states")
    if not 0 < speed < reg.threshold and not force:
        raise RegimeError(f"speed {speed:g} is not in (0, {reg.threshold:.6g}); use --force to try anyway")


def identify_state(values: np.ndarray, states) -> CrossSectionState:
    """The state in ``states`` closest in sup norm to the cross-section ``values``."""
    return min(states, key=lambda s: float(np.max(np.abs(np.asarray(s.values) - values))))


@dataclass
class PipelineResult:
    config: RunConfig
    cross: CrossSectionGrid
    regime: Regime
    params: WaveParameters
    half_grid: ChannelGrid
    full_grid: ChannelGrid
    ground: CrossSectionState
    states: list
    points: list
    glue: GlueParameters
    left_state: CrossSectionState
    right_state: CrossSectionState
    wave: WaveSolution

    @property
    def point(self) -> CriticalPoint:
        return self.points[0]


def zero_state(cross: CrossSectionGrid) -> CrossSectionState:
    return CrossSectionState(np.zeros(cross.shape), 0.0, 0.0, "trivial")


def run_wave(config: RunConfig, speed: float | None = None, force: bool = False) -> PipelineResult:
    """Full pipeline for one speed; errors carry a ``stage`` attribute."""
    speed = config["speed"] if speed is None else float(speed)
    tol = config["tolerances"]
    seeds = config["seeds"]
    with stage("config"):
        cross = build_cross(config)
        half, full = build_grids(config, cross)
    with stage("eigs"):
        reg = regime(cross, config["eig_count"])
        check_speed(speed, reg, force)
    with stage("ground"):
        up = ground_state(cross, tol=tol["critical"])
        states = list(critical_points_J(cross)) if reg.case == "ii" else [zero_state(cross), up]
    params = WaveParameters(speed, reg.lambda1)
    psi1 = dirichlet_eigenpairs(cross, 1)[0].eigenfunction
    with stage("critical"):
        points = critical_sequence(
            params, half, seeds["k_max"], psi1, L=seeds["L"], eps=seeds["eps"],
            seeds_per_mode=seeds["per_mode"], tol=tol["critical"],
        )
    point = points[0]
    with stage("glue"):
        left = identify_state(point.field[0], states)
        glue = shift_offset(point, left, half)
        initial = glue_extend(point, glue, half, full)
    right = zero_state(cross)
    with stage("wave"):
        wave = newton_travel_wave(initial, params, full, left, right, tol=tol["newton"])
    logger.info("wave at c=%g: residual %.3e, gap mismatch %.3e", speed, wave.residual, wave.diagnostics.mismatch)
    return PipelineResult(config, cross, reg, params, half, full, up, states, points, glue, left, right, wave)
