"""Critical points of the half-cylinder energy and the full heteroclinic wave.

Pipeline: seed families -> :func:`minimize_Ic` / :func:`critical_sequence`
on the half cylinder -> :func:`shift_offset` + :func:`glue_extend` onto a
two-sided channel -> :func:`newton_travel_wave`.

The two-sided wave equation is discretized by a conservative scheme

    c^2 [e^{h/2}(U_{i+1}-U_i) - e^{-h/2}(U_i-U_{i-1})] / h^2 + Lap_y U_i
        - (F(U_{i+1}) - F(U_{i-1})) / (U_{i+1} - U_{i-1}) = 0,

whose axial part is the same divergence-form stencil used for the
half-cylinder gradient, and whose reaction term is a discrete gradient of
``F`` (a polynomial, no division happens).  With this choice the energy flux
identity between any two stations holds exactly for discrete solutions; see
:mod:`acwave.verification`.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from dataclasses import field as dc_field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._deflation import DeflationOperator, deflated_newton
from .cross_section import CrossSectionState, count_sign_changes, evaluate_J
from .exceptions import (
    DomainError,
    IterationLimitError,
    LinearSolverError,
    NoCrossingError,
    PartialResultWarning,
    SizingError,
)
from .weighted_channel import (
    ChannelGrid,
    WaveParameters,
    _gradient_stations,
    evaluate_Ic,
    genus_seed_family,
    hessian_Ic,
    truncate_unit,
    weighted_norms,
)

logger = logging.getLogger(__name__)

NEWTON_SWITCH = 1e-3
RESIDUAL_TOL = 1e-10
WAVE_TOL = 1e-8
MAX_DESCENT = 10_000
MAX_NEWTON = 50
# damped steps allowed for the wave; near the speed threshold the glued
# guess sits far from the wave and Newton needs around a hundred steps
MAX_WAVE_NEWTON = 200
STAGNATION_STEPS = 20


@dataclass(frozen=True)
class TraceRecord:
    """One solver iteration: stage name, iteration number, level, residual."""

    stage: str
    iteration: int
    level: float
    residual: float

    def line(self) -> str:
        return f"{self.stage} {self.iteration} {self.level:.17g} {self.residual:.17g}"


@dataclass(frozen=True)
class CriticalPoint:
    """A critical point of ``I_c`` on the truncated half cylinder."""

    field: np.ndarray = dc_field(repr=False)
    level: float
    residual: float
    index_hint: int
    sign_changes: int
    converged: bool = True
    trivial: bool = False
    trace: tuple = dc_field(default=(), repr=False)


def axial_profile(u: np.ndarray, cross) -> np.ndarray:
    """Cross-section average of a channel field, one value per station."""
    return cross.integrate(u) / cross.measure


def _critical_point(u, params, grid, k, tol, trace) -> CriticalPoint:
    s = grid.stations(u)
    res = float(np.max(np.abs(_gradient_stations(s, params, grid))))
    trivial = not np.any(np.abs(u) > 1e-12)
    return CriticalPoint(
        field=u,
        level=evaluate_Ic(u, params, grid),
        residual=res,
        index_hint=k,
        sign_changes=count_sign_changes(axial_profile(u, grid.cross)),
        converged=res <= tol,
        trivial=trivial,
        trace=tuple(trace),
    )


def _newton_Ic(u, params, grid, tol, maxiter, deflation=None, max_step=None):
    """Newton on the half-cylinder Euler-Lagrange equations (unknown stations 0..N-2)."""
    n = grid.axial_nodes

    def unpack(v):
        s = np.zeros((n, grid.cross.interior_count))
        s[:-1] = v.reshape(n - 1, -1)
        return s

    def residual(v):
        return _gradient_stations(unpack(v), params, grid)[:-1].ravel()

    def jacobian(v):
        return hessian_Ic(grid.from_stations(unpack(v)), params, grid)

    v0 = grid.stations(u)[:-1].ravel()
    result = deflated_newton(residual, jacobian, v0, deflation, tol=tol, maxiter=maxiter, max_step=max_step)
    return grid.from_stations(unpack(result.u)), result


def minimize_Ic(
    seed: np.ndarray,
    params: WaveParameters,
    grid: ChannelGrid,
    tol: float = RESIDUAL_TOL,
    max_descent: int = MAX_DESCENT,
    max_newton: int = MAX_NEWTON,
    index_hint: int = 1,
    callback: Callable | None = None,
    step_rule: str = "bb",
    step_size: float = 0.1,
) -> CriticalPoint:
    """Descend ``I_c`` from ``seed`` inside ``|u| <= 1``, then polish by Newton.

    Each step is a Barzilai-Borwein step along the Sobolev gradient (the
    Riesz representative in the weighted H1 product), projected by
    :func:`truncate_unit`, with Armijo backtracking so the level never
    increases.  Once the sup-norm residual falls below 1e-3, Newton takes
    over.  ``callback(iteration, u, level, residual)`` sees every accepted
    descent iterate.

    ``step_rule="fixed"`` replaces the Barzilai-Borwein step by the constant
    ``step_size`` (still backtracked), a slower but smoother flow that is
    convenient when the iterates themselves are of interest.
    """
    if step_rule not in ("bb", "fixed"):
        raise DomainError(f"unknown step rule {step_rule!r}")
    u = truncate_unit(np.asarray(seed, dtype=float))
    if u.shape != grid.shape:
        raise DomainError("seed does not match the grid")
    level = evaluate_Ic(u, params, grid)
    if level >= 0 and np.any(u):
        warnings.warn("seed has I_c >= 0; descent may end at the trivial point", stacklevel=2)
    trace = []
    if not np.any(u):
        return _critical_point(u, params, grid, index_hint, tol, [TraceRecord("descent", 0, 0.0, 0.0)])

    n, m = grid.axial_nodes, grid.cross.interior_count
    lin = params.c2 * sp.kron(grid.axial_operator()[: n - 1, : n - 1], sp.identity(m)) - sp.kron(
        sp.identity(n - 1), grid.cross.laplacian
    )
    precond = sp.csc_matrix(sp.identity((n - 1) * m) + lin)
    solve = spla.factorized(precond)
    mass = grid.stations(grid.nodal_mass)[:-1].ravel()

    def grad(v):
        return _gradient_stations(grid.stations(v), params, grid)[:-1].ravel()

    def from_vec(vec):
        s = np.zeros((n, m))
        s[:-1] = vec.reshape(n - 1, m)
        return grid.from_stations(s)

    v = grid.stations(u)[:-1].ravel()
    g = grad(u)
    res = float(np.max(np.abs(g)))
    alpha = 1.0 if step_rule == "bb" else float(step_size)
    it = 0
    stagnant = 0
    trace.append(TraceRecord("descent", 0, level, res))
    if callback is not None:
        callback(0, u, level, res)
    while res >= NEWTON_SWITCH:
        if it >= max_descent:
            raise IterationLimitError(f"descent stalled at residual {res:.3e} after {it} steps")
        direction = solve(g)
        roundoff = 8 * np.finfo(float).eps * abs(level)
        step = alpha
        while True:
            v_new = truncate_unit(v - step * direction)
            u_new = from_vec(v_new)
            level_new = evaluate_Ic(u_new, params, grid)
            decrease = float(np.dot(mass * g, v - v_new))
            if level_new <= level - 1e-4 * decrease or step < 1e-12:
                break
            # far from the origin the weight hides progress below round-off;
            # ties are still accepted so the level never goes up
            if level_new <= level and 1e-4 * decrease <= roundoff:
                break
            step *= 0.5
        if level_new > level:
            raise IterationLimitError(f"descent cannot decrease I_c (residual {res:.3e})")
        g_new = grad(u_new)
        s_vec = v_new - v
        y_vec = g_new - g
        if step_rule == "bb":
            sy = float(np.dot(mass * s_vec, y_vec))
            ss = float(np.dot(mass * s_vec, precond @ s_vec))
            alpha = ss / sy if sy > 0 else 2.0 * step
            alpha = float(np.clip(alpha, 1e-3, 1e3))
        stagnant = stagnant + 1 if level - level_new <= roundoff else 0
        v, u, g, level = v_new, u_new, g_new, level_new
        res = float(np.max(np.abs(g)))
        it += 1
        trace.append(TraceRecord("descent", it, level, res))
        if callback is not None:
            callback(it, u, level, res)
        if not np.any(np.abs(v) > 1e-12):
            break
        # the level is converged to round-off; only the far-left tail, which
        # the weight makes invisible to I_c, is still moving
        if stagnant >= STAGNATION_STEPS:
            break

    u, result = _newton_Ic(u, params, grid, tol, max_newton)
    for j, r in enumerate(result.history):
        trace.append(TraceRecord("newton", j, float("nan"), r))
    if not result.converged:
        raise IterationLimitError(f"Newton polish stalled at residual {result.residual:.3e}")
    point = _critical_point(u, params, grid, index_hint, tol, trace)
    logger.debug("minimize_Ic: %d descent steps, level %.6g", it, point.level)
    return point


def _orient(u: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """Pick the member of ``{u, -u}`` whose left end is positive (``I_c`` is even)."""
    prof = axial_profile(u, grid.cross)
    nz = prof[np.abs(prof) > 1e-12]
    return -u if nz.size and nz[0] < 0 else u


def seed_length(k: int, params: WaveParameters, grid: ChannelGrid, start: float = 10.0, step: float = 5.0) -> float:
    """Smallest ``L`` in ``start, start + step, ...`` with ``sigma_k(L) < 0``.

    ``sigma_k(L) = c^2 (1/4 + k^2 pi^2 / L^2) + lambda1 - 1`` is the sign of
    ``Q_L[phi_k]``; it decreases in ``L`` so all lower modes are negative too.
    """
    gap = 1.0 - params.lambda1 - params.c2 / 4
    if gap <= 0:
        raise SizingError("no trial function has negative Q_L at this speed")
    L = start
    while params.c2 * k**2 * np.pi**2 / L**2 >= gap:
        L += step
    if L > -grid.x_min:
        raise SizingError(f"mode {k} needs L >= {L:g}, beyond the grid [{grid.x_min:g}, 0]")
    return L


def critical_sequence(
    params: WaveParameters,
    grid: ChannelGrid,
    k_max: int,
    psi1: np.ndarray,
    L: float | None = None,
    eps: float | None = None,
    seeds_per_mode: int = 4,
    tol: float = RESIDUAL_TOL,
    max_newton: int = 100,
) -> list:
    """Critical points ``u_1, ..., u_kmax`` of ``I_c`` by seeded, deflated search.

    ``k = 1`` descends from the best member of the first seed family.  For
    ``k >= 2`` deflated Newton is started from ``seeds_per_mode`` evenly spaced
    members of the ``k``-th family, deflating the zero field and ``+-`` every
    point found so far; the lowest new level wins.  Levels only approximate
    the min-max values from below and carry no genus guarantee.  Points are
    oriented to approach ``+u_+`` on the left and returned sorted by level.

    If some ``k`` yields no new point a :class:`PartialResultWarning` is issued
    and the points found so far are returned.
    """
    if k_max < 1:
        raise SizingError("k_max must be at least 1")
    if not params.admissible:
        raise DomainError(f"speed {params.speed} is not below the threshold {params.threshold:.6g}")
    mass = grid.stations(grid.nodal_mass)[:-1].ravel()
    points = []
    for k in range(1, k_max + 1):
        Lk = seed_length(k, params, grid) if L is None else float(L)
        family = genus_seed_family(k, Lk, eps, None, params, grid, psi1)
        if k == 1:
            point = minimize_Ic(family.best_member(), params, grid, tol=tol)
            points.append(_reoriented(point, params, grid, tol))
            continue
        deflation = DeflationOperator(mass)
        deflation.add_solution(np.zeros_like(mass))
        for p in points:
            deflation.add_solution(grid.stations(p.field)[:-1].ravel())
            deflation.add_solution(-grid.stations(p.field)[:-1].ravel())
        found = []
        for idx in np.linspace(0, len(family.levels) - 1, seeds_per_mode).astype(int):
            try:
                u, result = _newton_Ic(
                    truncate_unit(family.member(int(idx))), params, grid, tol, max_newton, deflation, 0.5
                )
            except LinearSolverError:
                continue
            if result.converged and np.max(np.abs(u)) <= 1.0:
                trace = [TraceRecord("deflated-newton", j, float("nan"), r) for j, r in enumerate(result.history)]
                found.append(_critical_point(u, params, grid, k, tol, trace))
        found = [p for p in found if not p.trivial and p.level < 0]
        if not found:
            warnings.warn(
                f"no new critical point at k={k}; returning {len(points)} points",
                PartialResultWarning,
                stacklevel=2,
            )
            break
        best = min(found, key=lambda p: p.level)
        points.append(_reoriented(best, params, grid, tol))
    return sorted(points, key=lambda p: p.level)


def _reoriented(point: CriticalPoint, params, grid, tol) -> CriticalPoint:
    u = _orient(point.field, grid)
    if u is point.field:
        return point
    return _critical_point(u, params, grid, point.index_hint, tol, point.trace)


# --------------------------------------------------------------------------
# gluing


@dataclass(frozen=True)
class GlueParameters:
    """Matching data: ``mu = ||u_+||``, the shift ``x_k`` and the target fraction."""

    mu: float
    shift: float
    match_fraction: float = 0.125

    @property
    def target(self) -> float:
        return self.match_fraction * self.mu


def h1_norm(state: CrossSectionState, cross) -> float:
    """``(int |grad v|^2 + v^2 dy)^{1/2}`` of a cross-section field."""
    v = np.asarray(state.values, dtype=float)
    return float(np.sqrt(cross.gradient_energy(v) + cross.integrate(v * v)))


def window_density(u: np.ndarray, target: np.ndarray, cross) -> np.ndarray:
    """Per-station ``int |grad_y(u - target)|^2 + |u - target|^2 dy``."""
    d = np.asarray(u) - np.asarray(target)[None]
    return cross.gradient_energy(d) + cross.integrate(d * d)


def _window_integral(density: np.ndarray, x0: float, h: float):
    """``G(xb) = int_{xb-1}^{xb} d`` for the piecewise linear interpolant of ``d``."""
    cum = np.concatenate([[0.0], np.cumsum(0.5 * h * (density[1:] + density[:-1]))])

    def D(x):
        t = (x - x0) / h
        i = int(np.clip(np.floor(t), 0, density.size - 2))
        r = (t - i) * h
        slope = (density[i + 1] - density[i]) / h
        return cum[i] + density[i] * r + 0.5 * slope * r * r

    return lambda xb: D(xb) - D(xb - 1.0)


def shift_offset(
    point: CriticalPoint,
    target: CrossSectionState,
    grid: ChannelGrid,
    mu: float | None = None,
    match_fraction: float = 0.125,
    xtol: float = 1e-10,
) -> GlueParameters:
    """Locate the matching point ``x_k`` of a half-cylinder critical point.

    The window integral ``G(xb)`` of :func:`window_density` over
    ``[xb - 1, xb]`` is scanned from the left; ``x_k`` is its first crossing
    of ``match_fraction * mu``, refined by bisection, so every window further
    left stays strictly below the target.  ``mu`` defaults to the
    :func:`h1_norm` of ``target``.
    """
    if mu is None:
        mu = h1_norm(target, grid.cross)
    if not mu > 0:
        raise DomainError("mu must be positive")
    h = grid.axial_spacing
    if grid.x_max - grid.x_min <= 1.0 + h:
        raise SizingError("half cylinder shorter than one matching window")
    level = match_fraction * mu
    density = window_density(point.field, target.values, grid.cross)
    G = _window_integral(density, grid.x_min, h)
    xs = grid.x[grid.x >= grid.x_min + 1.0 - 1e-12]
    vals = np.array([G(x) for x in xs])
    if vals[0] >= level:
        raise NoCrossingError("the leftmost window already exceeds the target; lengthen the half cylinder")
    above = np.nonzero(vals >= level)[0]
    if above.size == 0:
        raise NoCrossingError(f"window integral stays below {level:.3e} (max {vals.max():.3e})")
    j = above[0]
    lo, hi = xs[j - 1], xs[j]
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if G(mid) >= level:
            hi = mid
        else:
            lo = mid
    return GlueParameters(mu=float(mu), shift=float(0.5 * (lo + hi)), match_fraction=match_fraction)


def glue_extend(
    point: CriticalPoint, glue: GlueParameters, half_grid: ChannelGrid, full_grid: ChannelGrid
) -> np.ndarray:
    """Translate ``u`` by ``x_k`` and extend by zero: ``w(x) = u(x + x_k)`` for ``x <= -x_k``.

    Values are interpolated linearly between half-grid stations; points left
    of the half grid take the leftmost station.
    """
    if full_grid.cross != half_grid.cross:
        raise DomainError("grids have different cross sections")
    junction = -glue.shift
    if not full_grid.x_min < junction < full_grid.x_max:
        raise SizingError(f"junction x = {junction:.6g} lies outside [{full_grid.x_min:g}, {full_grid.x_max:g}]")
    s = half_grid.stations(point.field)
    xs = full_grid.x + glue.shift
    out = np.zeros((full_grid.axial_nodes, s.shape[1]))
    inside = full_grid.x <= junction
    t = (np.clip(xs[inside], half_grid.x_min, half_grid.x_max) - half_grid.x_min) / half_grid.axial_spacing
    i = np.clip(np.floor(t).astype(int), 0, half_grid.axial_nodes - 2)
    r = (t - i)[:, None]
    out[inside] = (1 - r) * s[i] + r * s[i + 1]
    return full_grid.from_stations(out)


# --------------------------------------------------------------------------
# the two-sided wave


def _g(a, b):
    """Discrete gradient ``-(F(b) - F(a)) / (b - a)`` of ``F``, as a polynomial."""
    return 0.5 * (a + b) - 0.25 * (a + b) * (a * a + b * b)


def _g_da(a, b):
    return 0.5 - 0.25 * (3 * a * a + 2 * a * b + b * b)


def _g_db(a, b):
    return 0.5 - 0.25 * (a * a + 2 * a * b + 3 * b * b)


def wave_residual_stations(s: np.ndarray, speed: float, grid: ChannelGrid) -> np.ndarray:
    """Residual of the conservative scheme at stations ``1..N-2`` (shape ``(N-2, m)``)."""
    h = grid.axial_spacing
    c2 = speed * speed
    lap = grid.cross.laplacian
    mid = s[1:-1]
    axial = c2 * (np.exp(h / 2) * (s[2:] - mid) - np.exp(-h / 2) * (mid - s[:-2])) / h**2
    return axial + (lap @ mid.T).T + _g(s[:-2], s[2:])


def _wave_jacobian(s: np.ndarray, speed: float, grid: ChannelGrid) -> sp.csc_matrix:
    h = grid.axial_spacing
    c2 = speed * speed
    n, m = s.shape[0] - 2, s.shape[1]
    a, b = s[:-2], s[2:]
    lower = (c2 * np.exp(-h / 2) / h**2 + _g_da(a, b))[1:].ravel()
    upper = (c2 * np.exp(h / 2) / h**2 + _g_db(a, b))[:-1].ravel()
    axial = sp.diags(
        [lower, np.full(n * m, -c2 * (np.exp(h / 2) + np.exp(-h / 2)) / h**2), upper],
        [-m, 0, m],
        shape=(n * m, n * m),
    )
    return sp.csc_matrix(axial + sp.kron(sp.identity(n), grid.cross.laplacian))


@dataclass(frozen=True)
class GapRecord:
    """Energy balance across the wave: ``J_right - J_left`` against ``c^2 int int U_x^2``."""

    J_left: float
    J_right: float
    kinetic: float

    @property
    def gap(self) -> float:
        return self.J_right - self.J_left

    @property
    def mismatch(self) -> float:
        scale = max(abs(self.gap), abs(self.kinetic), 1e-14)
        return abs(self.gap - self.kinetic) / scale


def gap_record(U: np.ndarray, speed: float, grid: ChannelGrid, left, right) -> GapRecord:
    """Quadrature of both sides of the heteroclinic energy gap (edge differences in ``x``)."""
    h = grid.axial_spacing
    ux = np.diff(np.asarray(U, dtype=float), axis=0) / h
    kinetic = speed**2 * h * float(np.sum(grid.cross.integrate(ux * ux)))
    return GapRecord(
        J_left=evaluate_J(left.values, grid.cross),
        J_right=evaluate_J(right.values, grid.cross),
        kinetic=kinetic,
    )


@dataclass(frozen=True)
class WaveSolution:
    """Discrete traveling wave ``U`` on ``[x_min, x_max]`` with its end states."""

    field: np.ndarray = dc_field(repr=False)
    speed: float
    grid: ChannelGrid = dc_field(repr=False)
    left_state: CrossSectionState = dc_field(repr=False)
    right_state: CrossSectionState = dc_field(repr=False)
    residual: float
    diagnostics: GapRecord
    converged: bool = True
    trace: tuple = dc_field(default=(), repr=False)

    def end_errors(self, margin: float = 1.0) -> tuple:
        """Sup-norm distances from the asymptotic states over the outer ``margin`` at each end.

        The end stations carry the states exactly (Dirichlet data), so the
        check looks at the adjacent stations as well.
        """
        U = np.asarray(self.field)
        x = self.grid.x
        lo = x <= x[0] + margin
        hi = x >= x[-1] - margin
        return (
            float(np.max(np.abs(U[lo] - self.left_state.values))),
            float(np.max(np.abs(U[hi] - self.right_state.values))),
        )


def _damped_newton(residual, jacobian, v, tol, maxiter, trace):
    r = residual(v)
    res = float(np.max(np.abs(r))) if r.size else 0.0
    trace.append(TraceRecord("newton", 0, float("nan"), res))
    for it in range(1, maxiter + 1):
        if res <= tol:
            return v, res, True
        step = _solve_sparse(jacobian(v), -r)
        norm0 = float(np.linalg.norm(r))
        lam = 1.0
        while True:
            v_try = v + lam * step
            r_try = residual(v_try)
            if np.all(np.isfinite(r_try)) and np.linalg.norm(r_try) < (1 - 1e-4 * lam) * norm0:
                break
            if lam < 1e-4:
                break
            lam *= 0.5
        v, r = v_try, r_try
        res = float(np.max(np.abs(r)))
        trace.append(TraceRecord("newton", it, lam, res))
        if not np.isfinite(res):
            raise IterationLimitError("wave Newton diverged")
    return v, res, res <= tol


def _solve_sparse(jac, rhs):
    try:
        step = spla.spsolve(jac, rhs)
    except RuntimeError as exc:
        raise LinearSolverError(str(exc)) from exc
    if not np.all(np.isfinite(step)):
        raise LinearSolverError("singular wave Jacobian")
    return step


def newton_travel_wave(
    initial: np.ndarray,
    params: WaveParameters,
    full_grid: ChannelGrid,
    left_state: CrossSectionState,
    right_state: CrossSectionState,
    tol: float = WAVE_TOL,
    maxiter: int = MAX_WAVE_NEWTON,
) -> WaveSolution:
    """Solve the discrete wave equation with Dirichlet end states by damped Newton.

    The end stations are overwritten with ``left_state`` and ``right_state``;
    every interior station is unknown.  Steps are halved until the Euclidean
    residual decreases (the trace records the accepted damping factor in the
    ``level`` slot).
    """
    U0 = np.array(initial, dtype=float, copy=True)
    if U0.shape != full_grid.shape:
        raise DomainError("initial field does not match the grid")
    cross = full_grid.cross
    s = full_grid.stations(U0)
    s[0] = cross.interior(np.asarray(left_state.values, dtype=float)).ravel()
    s[-1] = cross.interior(np.asarray(right_state.values, dtype=float)).ravel()
    n, m = s.shape
    c = params.speed

    def residual(v):
        s[1:-1] = v.reshape(n - 2, m)
        return wave_residual_stations(s, c, full_grid).ravel()

    def jacobian(v):
        s[1:-1] = v.reshape(n - 2, m)
        return _wave_jacobian(s, c, full_grid)

    trace = []
    v, res, ok = _damped_newton(residual, jacobian, s[1:-1].ravel().copy(), tol, maxiter, trace)
    if not ok:
        raise IterationLimitError(f"wave Newton stalled at residual {res:.3e} after {maxiter} steps")
    s[1:-1] = v.reshape(n - 2, m)
    U = full_grid.from_stations(s)
    return WaveSolution(
        field=U,
        speed=c,
        grid=full_grid,
        left_state=left_state,
        right_state=right_state,
        residual=res,
        diagnostics=gap_record(U, c, full_grid, left_state, right_state),
        converged=ok,
        trace=tuple(trace),
    )


@dataclass(frozen=True)
class LabFrameField:
    """``u(xi, y, t) = U(c (xi - c t), y)`` sampled at the lab positions ``xi``."""

    xi: np.ndarray
    t: float
    values: np.ndarray = dc_field(repr=False)
    clipped: bool


def wave_to_lab_frame(wave: WaveSolution, t: float, xi: np.ndarray | None = None) -> LabFrameField:
    """Sample the wave in the laboratory frame at time ``t``.

    ``xi`` defaults to ``x / c`` on the wave grid (so ``t = 0`` only rescales
    the axis).  Positions whose preimage leaves the wave grid take the
    asymptotic state on that side and set ``clipped``.
    """
    c = wave.speed
    if not c > 0:
        raise DomainError("wave speed must be positive")
    grid = wave.grid
    xi = grid.x / c if xi is None else np.asarray(xi, dtype=float)
    x = c * (xi - c * t)
    s = grid.stations(wave.field)
    t_idx = (x - grid.x_min) / grid.axial_spacing
    left = t_idx < 0
    right = t_idx > grid.axial_nodes - 1
    i = np.clip(np.floor(t_idx).astype(int), 0, grid.axial_nodes - 2)
    r = np.clip(t_idx - i, 0.0, 1.0)[:, None]
    out = (1 - r) * s[i] + r * s[i + 1]
    cross = grid.cross
    out[left] = cross.interior(np.asarray(wave.left_state.values, dtype=float)).ravel()
    out[right] = cross.interior(np.asarray(wave.right_state.values, dtype=float)).ravel()
    full = np.zeros((xi.size,) + cross.shape)
    full[(slice(None),) + (slice(1, -1),) * cross.ndim] = out.reshape((xi.size,) + cross.interior_shape)
    return LabFrameField(xi=xi, t=float(t), values=full, clipped=bool(left.any() or right.any()))
