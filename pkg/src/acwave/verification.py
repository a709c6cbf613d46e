"""Independent checks of the inequalities and identities behind the solvers.

Every check returns a small report object rather than raising, so the CLI
can serialize the outcome of a failing check as well as a passing one.
Analytic inequalities are tested with the slack factor ``1 + 10 h`` (``h``
the axial spacing) to absorb quadrature error.

The parabolic cross-check integrates

    u_t = u_xixi + Lap_y u + u (1 - u^2)

with a semi-implicit Euler scheme (both diffusion terms implicit, cubic
term explicit) and tracks the half-amplitude level set of the
cross-section average.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cross_section import F, count_sign_changes, evaluate_J
from .exceptions import DomainError, IntegrationError
from .critical_point_solvers import (
    CriticalPoint,
    GapRecord,
    WaveSolution,
    axial_profile,
    gap_record,
    wave_residual_stations,
)
from .weighted_channel import ChannelGrid, WaveParameters, evaluate_Ic, weighted_norms

logger = logging.getLogger(__name__)

FLUX_FLOOR = 1e-14


def slack(grid: ChannelGrid) -> float:
    return 1.0 + 10.0 * grid.axial_spacing


# --------------------------------------------------------------------------
# weighted Poincare and trace inequalities


@dataclass(frozen=True)
class PoincareReport:
    """Ratios ``int e^x w^2 / int e^x w_x^2`` (bound 4) and trace ratios (bound 1)."""

    ratio: float
    tail_ratios: tuple
    trace_ratios: tuple
    radii: tuple
    tolerance: float
    degenerate: bool

    @property
    def max_ratio(self) -> float:
        return max((self.ratio,) + self.tail_ratios)

    @property
    def passed(self) -> bool:
        ok = self.max_ratio <= 4.0 * self.tolerance
        return ok and all(r <= self.tolerance for r in self.trace_ratios)


def _axial_sums(w: np.ndarray, grid: ChannelGrid):
    """Per-station ``int w^2 dy`` and per-edge ``e^{x_e} int w_x^2 dy``."""
    cross = grid.cross
    h = grid.axial_spacing
    w2 = cross.integrate(w * w)
    wx = np.diff(w, axis=0) / h
    k_edge = np.exp(grid.edge_x) * cross.integrate(wx * wx)
    return w2, k_edge


def check_weighted_poincare(w: np.ndarray, grid: ChannelGrid, radii=None) -> PoincareReport:
    """Weighted Poincare ratios on the whole channel and on tails ``[r, x_max]``.

    ``radii`` (snapped to stations) default to the quarter points of the
    channel.  For each ``r`` the tail ratio of the Poincare inequality and
    the trace ratio ``int w(r)^2 dy / (e^{-r} int_r e^x w_x^2)`` are
    reported.  A field with vanishing axial derivative is flagged
    ``degenerate``; its ratio is ``0`` when ``w == 0`` and ``inf`` otherwise.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != grid.shape:
        raise DomainError("field does not match the grid")
    if np.any(w[-1] != 0):
        raise DomainError("field must vanish at the right end")
    h = grid.axial_spacing
    if radii is None:
        radii = grid.x_min + (grid.x_max - grid.x_min) * np.array([0.25, 0.5, 0.75])
    idx = sorted({grid.station_index(r) for r in np.atleast_1d(radii)})
    w2, k_edge = _axial_sums(w, grid)
    mass = grid.axial_weights * np.exp(grid.x) * w2

    def ratio(num, den):
        if den > 0:
            return float(num / den)
        return 0.0 if num == 0 else float("inf")

    total_k = float(np.sum(k_edge) * h)
    degenerate = total_k == 0.0
    whole = ratio(float(np.sum(mass)), total_k)
    tails, traces = [], []
    for j in idx:
        tail_k = float(np.sum(k_edge[j:]) * h)
        # trapezoid from station j: half weight at j
        tail_m = float(np.sum(mass[j:]) - 0.5 * h * np.exp(grid.x[j]) * w2[j] * (j > 0))
        tails.append(ratio(tail_m, tail_k))
        traces.append(ratio(float(w2[j]), np.exp(-grid.x[j]) * tail_k))
    return PoincareReport(
        ratio=whole,
        tail_ratios=tuple(tails),
        trace_ratios=tuple(traces),
        radii=tuple(float(grid.x[j]) for j in idx),
        tolerance=slack(grid),
        degenerate=degenerate,
    )


def poincare_corpus(grid: ChannelGrid, count: int, rng: np.random.Generator, extremal_fraction: float = 0.1):
    """Random smooth fields vanishing on the walls and at the right end.

    Most members are sums of Gaussian bumps in ``x`` times sine modes in
    ``y``, multiplied by ``1 - e^{x - x_max}`` so they vanish at ``x_max``.
    A fraction are near-extremal profiles ``e^{-x/2} sin(pi (x - x_max)/L)``
    with ``L`` up to the channel length, whose ratios approach 4.
    """
    cross = grid.cross
    x = grid.x
    length = grid.x_max - grid.x_min
    ymodes = []
    for j in range(1, 4):
        mode = np.ones(cross.shape)
        for axis, (L, n) in enumerate(zip(cross.lengths, cross.nodes)):
            shape = [1] * cross.ndim
            shape[axis] = n
            mode = mode * np.sin(j * np.pi * np.linspace(0, L, n) / L).reshape(shape)
        ymodes.append(mode)
    ymodes = np.array(ymodes)
    # kill round-off on the walls
    ymodes[:, ~cross.interior_mask] = 0.0
    out = []
    for i in range(count):
        if rng.random() < extremal_fraction:
            L = rng.uniform(0.5, 1.0) * length
            prof = np.where(x >= x[-1] - L, np.exp(-(x - x[-1]) / 2) * np.sin(np.pi * (x - x[-1]) / L), 0.0)
            coeff = np.zeros(len(ymodes))
            coeff[0] = 1.0
        else:
            nb = rng.integers(1, 4)
            centers = rng.uniform(grid.x_min, grid.x_max, nb)
            widths = rng.uniform(0.3, 5.0, nb)
            amps = rng.normal(size=nb)
            prof = np.sum(amps[:, None] * np.exp(-(((x[None] - centers[:, None]) / widths[:, None]) ** 2)), axis=0)
            prof = prof * (1.0 - np.exp(x - x[-1]))
            coeff = rng.normal(size=len(ymodes)) / np.arange(1, len(ymodes) + 1)
        prof[-1] = 0.0
        out.append(np.multiply.outer(prof, np.tensordot(coeff, ymodes, axes=1)))
    return out


# --------------------------------------------------------------------------
# bounds on the sublevel set {I_c <= 0}


@dataclass(frozen=True)
class SublevelReport:
    """Left and right sides of the sublevel bounds; ``applicable`` iff ``I_c <= 0``."""

    applicable: bool
    level: float
    values: dict
    bounds: dict
    tolerance: float

    @property
    def checks(self) -> dict:
        return {k: self.values[k] <= self.bounds[k] * self.tolerance for k in self.values}

    @property
    def passed(self) -> bool:
        return self.applicable and all(self.checks.values())


def check_sublevel_bounds(u: np.ndarray, params: WaveParameters, grid: ChannelGrid) -> SublevelReport:
    """Evaluate the a priori bounds valid on ``{I_c <= 0}``.

    With ``V = |Omega_y| (e^{x_max} - e^{x_min})`` the weighted volume of the
    truncated half cylinder the bounds are ``int e^x u^4 <= 4V``,
    ``int e^x u^2 <= 2V``, ``int e^x u_x^2 <= 2V/c^2``,
    ``int e^x |grad_y u|^2 <= 2V`` and ``||u||_{L^4_w} <= sqrt(2) |Omega_y|^{1/4}``.
    """
    level = evaluate_Ic(u, params, grid)
    norms = weighted_norms(u, grid)
    measure = grid.cross.measure
    volume = measure * (np.exp(grid.x_max) - np.exp(grid.x_min))
    values = {
        "quartic": norms.quartic_mass,
        "mass": norms.l2w,
        "axial": norms.dx_l2w,
        "transverse": norms.grady_l2w,
        "l4": norms.quartic_mass**0.25,
    }
    bounds = {
        "quartic": 4 * volume,
        "mass": 2 * volume,
        "axial": 2 * volume / params.c2,
        "transverse": 2 * volume,
        "l4": np.sqrt(2) * measure**0.25,
    }
    return SublevelReport(level <= 0, level, values, bounds, slack(grid))


# --------------------------------------------------------------------------
# energy identities


def _snap(grid: ChannelGrid, x: float) -> int:
    j = grid.station_index(x)
    if abs(grid.x[j] - x) > 1e-9 * max(1.0, abs(x)):
        warnings.warn(f"x = {x} is not a station; snapped to {grid.x[j]:.17g}", stacklevel=3)
    return j


@dataclass(frozen=True)
class FluxRecord:
    """Both sides of the slab balance and the size of its largest single term.

    The residual is scaled by ``max(|lhs|, scale, floor)``: on a plateau the
    left side is tiny while ``E(a)`` and ``E(b)`` are not, and their
    difference carries round-off of order ``eps * |E|``.
    """

    a: float
    b: float
    lhs: float
    rhs: float
    scale: float = 0.0

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.lhs), self.scale, FLUX_FLOOR)


def energy_flux_record(wave: WaveSolution, a: float, b: float) -> FluxRecord:
    """Both sides of the slab energy balance between stations ``a < b``.

    The balance ``c^2 int_a^b int U_x^2 = E(b) - E(a) - c^2/2 [int U_x^2]_a^b``
    with ``E = int |grad_y U|^2/2 + F(U)`` is evaluated in the form that the
    conservative scheme satisfies exactly: central differences in the bulk,
    edge differences and averaged ``F`` at the slab faces.
    """
    grid = wave.grid
    ia, ib = _snap(grid, a), _snap(grid, b)
    if not 0 <= ia < ib <= grid.axial_nodes - 1 or ib - ia < 2:
        raise DomainError("need x_min <= a < b <= x_max at least two stations apart")
    U = np.asarray(wave.field, dtype=float)
    cross = grid.cross
    h = grid.axial_spacing
    c2 = wave.speed**2
    d0 = (U[ia + 2 : ib + 1] - U[ia : ib - 1]) / (2 * h)
    lhs = c2 * (2 * np.sinh(h / 2) / h) * h * float(np.sum(cross.integrate(d0 * d0)))
    dp_a = (U[ia + 1] - U[ia]) / h
    dp_b = (U[ib] - U[ib - 1]) / h
    kin = -0.5 * c2 * np.cosh(h / 2) * (cross.integrate(dp_b * dp_b) - cross.integrate(dp_a * dp_a))
    s = grid.stations(U)
    lap = cross.laplacian
    w = cross.quadrature_weights[cross.interior_mask]

    def cross_term(i):
        return float(np.dot(w * s[i], lap @ s[i + 1]))

    grad = -0.5 * (cross_term(ib - 1) - cross_term(ia))
    pot = 0.5 * cross.integrate(F(U[ib]) + F(U[ib - 1]) - F(U[ia]) - F(U[ia + 1]))
    ea = 0.5 * cross.gradient_energy(U[ia]) + abs(cross.integrate(F(U[ia])))
    eb = 0.5 * cross.gradient_energy(U[ib]) + abs(cross.integrate(F(U[ib])))
    scale = max(ea, eb, abs(kin))
    return FluxRecord(float(grid.x[ia]), float(grid.x[ib]), lhs, float(kin + grad + pot), float(scale))


def energy_flux_identity(wave: WaveSolution, a: float, b: float) -> float:
    """Relative residual of the slab energy balance (see :func:`energy_flux_record`)."""
    return energy_flux_record(wave, a, b).residual


def heteroclinic_gap(wave: WaveSolution) -> GapRecord:
    """``J`` at both ends against ``c^2 int int U_x^2``; the gap must be positive."""
    if wave.left_state is None or wave.right_state is None:
        raise DomainError("wave has no identified asymptotic states")
    rec = gap_record(wave.field, wave.speed, wave.grid, wave.left_state, wave.right_state)
    if not rec.kinetic > 0 and np.any(wave.field[0] != wave.field[-1]):
        raise DomainError("nonconstant wave with zero axial energy")
    return rec


@dataclass(frozen=True)
class BalanceRecord:
    """``J[v]`` against ``-c^2 int_{x_min}^0 int u_x^2 - c^2/2 int u_x(0)^2``."""

    J_left: float
    rhs: float

    @property
    def mismatch(self) -> float:
        return abs(self.J_left - self.rhs) / max(abs(self.J_left), FLUX_FLOOR)


def half_cylinder_balance(point: CriticalPoint, params: WaveParameters, grid: ChannelGrid, left_state) -> BalanceRecord:
    """Energy balance of a half-cylinder critical point with left limit ``left_state``.

    ``u_x(0, y)`` uses the second-order one-sided difference.
    """
    u = np.asarray(point.field, dtype=float)
    cross = grid.cross
    h = grid.axial_spacing
    ux = np.diff(u, axis=0) / h
    bulk = h * float(np.sum(cross.integrate(ux * ux)))
    ux0 = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
    rhs = -params.c2 * bulk - 0.5 * params.c2 * cross.integrate(ux0 * ux0)
    return BalanceRecord(evaluate_J(left_state.values, cross), float(rhs))


def axial_decay(u: np.ndarray, grid: ChannelGrid) -> float:
    """``max_y |u_x(x_min, y)|`` by the second-order one-sided difference."""
    u = np.asarray(u, dtype=float)
    h = grid.axial_spacing
    return float(np.max(np.abs((-3 * u[0] + 4 * u[1] - u[2]) / (2 * h))))


def residual_te(field: np.ndarray, params: WaveParameters, grid: ChannelGrid) -> float:
    """Sup norm of the discrete wave-equation residual over interior stations."""
    s = grid.stations(np.asarray(field, dtype=float))
    r = wave_residual_stations(s, params.speed, grid)
    return float(np.max(np.abs(r))) if r.size else 0.0


@dataclass(frozen=True)
class SignChangeReport:
    profile: int
    per_station: np.ndarray = dc_field(repr=False)


def sign_changes(wave, threshold: float = 1e-9) -> SignChangeReport:
    """Axial sign changes of the averaged profile and along each cross-section node."""
    field = np.asarray(getattr(wave, "field", wave), dtype=float)
    grid = wave.grid
    stations = grid.stations(field)
    per = np.array([count_sign_changes(stations[:, j], threshold) for j in range(stations.shape[1])])
    return SignChangeReport(count_sign_changes(axial_profile(field, grid.cross), threshold), per)


# --------------------------------------------------------------------------
# parabolic cross-check


@dataclass(frozen=True)
class EvolutionResult:
    speed: float
    times: np.ndarray = dc_field(repr=False)
    fronts: np.ndarray = dc_field(repr=False)
    final: np.ndarray = dc_field(repr=False)
    steps: int


def front_position(profile: np.ndarray, x: np.ndarray, level: float) -> float:
    """First downward crossing of ``level`` from the left, linearly interpolated."""
    below = np.nonzero(profile < level)[0]
    if below.size == 0 or below[0] == 0:
        raise IntegrationError("level set lost")
    j = below[0]
    p0, p1 = profile[j - 1], profile[j]
    return float(x[j - 1] + (p0 - level) / (p0 - p1) * (x[j] - x[j - 1]))


def simulate_evolution(u0: np.ndarray, lab_grid: ChannelGrid, T: float, dt: float = 0.01) -> EvolutionResult:
    """Integrate the parabolic equation from ``u0`` up to time ``T``.

    The end stations keep their initial values (Dirichlet).  Each step solves
    ``(I - dt (D_xixi + Lap_y)) u^{n+1} = u^n + dt u^n (1 - (u^n)^2)`` with one
    prefactorized sparse LU.  The front is the half-amplitude crossing of the
    cross-section average (amplitude taken from ``u0``); the speed is the
    least-squares slope of its position over ``[T/2, T]``.
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != lab_grid.shape:
        raise DomainError("initial field does not match the grid")
    if not (T > 0 and dt > 0):
        raise DomainError("T and dt must be positive")
    if np.max(np.abs(u0)) > 1.0 + 1e-12:
        raise DomainError("initial field must be bounded by 1")
    cross = lab_grid.cross
    h = lab_grid.axial_spacing
    n, m = lab_grid.axial_nodes, cross.interior_count
    s = lab_grid.stations(u0).copy()
    left, right = s[0].copy(), s[-1].copy()
    ni = n - 2
    d2 = sp.diags([np.ones(ni - 1), -2 * np.ones(ni), np.ones(ni - 1)], [-1, 0, 1]) / h**2
    A = sp.identity(ni * m) - dt * (sp.kron(d2, sp.identity(m)) + sp.kron(sp.identity(ni), cross.laplacian))
    solve = spla.factorized(sp.csc_matrix(A))
    bc = np.zeros((ni, m))
    bc[0] = dt * left / h**2
    bc[-1] = dt * right / h**2
    bc = bc.ravel()

    prof0 = axial_profile(u0, cross)
    amp = float(np.max(np.abs(prof0)))
    if amp == 0.0:
        raise IntegrationError("level set lost: zero initial profile")
    level = 0.5 * amp
    steps = int(round(T / dt))
    times, fronts = [], []
    v = s[1:-1].ravel()
    for k in range(1, steps + 1):
        v = solve(v + dt * v * (1 - v * v) + bc)
        if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > 10:
            raise IntegrationError(f"blow-up at t = {k * dt:.4g}")
        t = k * dt
        if t >= T / 2 - 1e-12:
            s[1:-1] = v.reshape(ni, m)
            prof = cross.integrate(lab_grid.from_stations(s)) / cross.measure
            times.append(t)
            fronts.append(front_position(prof, lab_grid.x, level))
    s[1:-1] = v.reshape(ni, m)
    times, fronts = np.array(times), np.array(fronts)
    if times.size < 2:
        raise IntegrationError("too few samples for a speed fit")
    speed = float(np.polyfit(times, fronts, 1)[0])
    return EvolutionResult(speed, times, fronts, lab_grid.from_stations(s), steps)
