"""Fields on truncated channels carrying the exponential weight ``e^x``.

The half-cylinder energy

    I_c[u] = int int ( c^2/2 u_x^2 + |grad_y u|^2/2 - u^2/2 + u^4/4 ) e^x dx dy

is discretized by trapezoidal quadrature in ``x`` and ``y`` with the exact
nodal weight ``e^x``; the ``u_x^2`` term lives on cell edges with the
midpoint weight ``e^{x_{i+1/2}}``.  Differentiating the discrete energy gives
a symmetric divergence-form stencil for ``e^{-x} (e^x u_x)_x``.

Convention for the truncated half cylinder ``[x_min, x_max]``: the right
station is a Dirichlet end (fields vanish there), the left station is a
free end, so the natural boundary condition ``u_x = 0`` emerges at
``x_min``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.stats import norm as _normal
from scipy.stats import qmc

from .cross_section import F, CrossSectionGrid, dF, wave_speed_threshold
from .exceptions import DomainError, SeedFamilyError, SizingError

EPS_SWEEP = (0.05, 0.1, 0.2, 0.4)
PAIRS_PER_MODE = 64


@dataclass(frozen=True)
class ChannelGrid:
    """Uniform grid on ``[x_min, x_max] x cross``."""

    x_min: float
    x_max: float
    axial_nodes: int
    cross: CrossSectionGrid

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or self.x_min >= self.x_max:
            raise SizingError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.axial_nodes) < 3:
            raise SizingError("need at least 3 axial nodes")
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "axial_nodes", int(self.axial_nodes))

    @classmethod
    def with_spacing(cls, x_min: float, x_max: float, spacing: float, cross: CrossSectionGrid):
        n = int(round((x_max - x_min) / spacing)) + 1
        return cls(x_min, x_max, n, cross)

    @property
    def axial_spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.axial_nodes - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.axial_nodes)

    @property
    def shape(self) -> tuple:
        return (self.axial_nodes,) + self.cross.shape

    @property
    def is_half_cylinder(self) -> bool:
        return self.x_max == 0.0

    @staticmethod
    def weight(x):
        """The density ``e^x``."""
        return np.exp(x)

    @cached_property
    def axial_weights(self) -> np.ndarray:
        w = np.full(self.axial_nodes, self.axial_spacing)
        w[[0, -1]] /= 2
        return w

    @cached_property
    def edge_x(self) -> np.ndarray:
        return 0.5 * (self.x[1:] + self.x[:-1])

    @cached_property
    def nodal_mass(self) -> np.ndarray:
        """Quadrature weights ``omega_i e^{x_i} q_j`` on the full node array."""
        wx = self.axial_weights * self.weight(self.x)
        return np.multiply.outer(wx, self.cross.quadrature_weights)

    def axial_operator(self) -> sp.csr_matrix:
        """Strong-form ``-e^{-x}(e^x u_x)_x`` on all stations, free ends.

        Row ``i`` is the derivative of the discrete kinetic energy divided by
        the nodal mass ``omega_i e^{x_i}``; ratios of exponentials are formed
        from spacings so nothing overflows.
        """
        n, h = self.axial_nodes, self.axial_spacing
        om = self.axial_weights
        right = np.zeros(n)
        left = np.zeros(n)
        right[:-1] = np.exp(h / 2) / (h * om[:-1])
        left[1:] = np.exp(-h / 2) / (h * om[1:])
        diag = right + left
        return sp.csr_matrix(
            sp.diags([-left[1:], diag, -right[:-1]], [-1, 0, 1], shape=(n, n))
        )

    def stations(self, u: np.ndarray) -> np.ndarray:
        """Interior cross-section values per station, shape ``(N, m)``."""
        u = np.asarray(u)
        return u[(slice(None),) + (slice(1, -1),) * self.cross.ndim].reshape(self.axial_nodes, -1)

    def from_stations(self, s: np.ndarray) -> np.ndarray:
        out = np.zeros(self.shape)
        out[(slice(None),) + (slice(1, -1),) * self.cross.ndim] = np.reshape(
            s, (self.axial_nodes,) + self.cross.interior_shape
        )
        return out

    def station_index(self, x: float) -> int:
        """Index of the station nearest to ``x``."""
        return int(np.clip(np.rint((x - self.x_min) / self.axial_spacing), 0, self.axial_nodes - 1))

    def weighted_inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.sum(self.nodal_mass * a * b))


@dataclass(frozen=True)
class WaveParameters:
    """Wave speed with the admissibility threshold ``2 sqrt(1 - lambda1)``."""

    speed: float
    lambda1: float

    def __post_init__(self):
        if not np.isfinite(self.speed) or self.speed <= 0:
            raise DomainError(f"wave speed must be positive, got {self.speed}")

    @property
    def threshold(self) -> float:
        return wave_speed_threshold(self.lambda1)

    @property
    def admissible(self) -> bool:
        return self.lambda1 < 1.0 and self.speed < self.threshold

    @property
    def c2(self) -> float:
        return self.speed**2


@dataclass(frozen=True)
class NormReport:
    """Squared components of the E-norm.

    ``l4w`` is ``||u||_{L4_w}^2 = (int e^x u^4)^(1/2)``.
    """

    l2w: float
    l4w: float
    dx_l2w: float
    grady_l2w: float

    @property
    def e_norm(self) -> float:
        return float(np.sqrt(self.l2w + self.l4w + self.dx_l2w + self.grady_l2w))

    @property
    def quartic_mass(self) -> float:
        """``int e^x u^4``."""
        return self.l4w**2


def _check(u: np.ndarray, grid: ChannelGrid, half_cylinder: bool | None = None) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != grid.shape:
        raise DomainError(f"field shape {u.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(u)):
        raise DomainError("field has non-finite values")
    return u


def _require_walls(u: np.ndarray, grid: ChannelGrid) -> None:
    walls = ~grid.cross.interior_mask
    if np.any(u[:, walls] != 0.0):
        raise DomainError("field must vanish on the channel walls")
    if grid.is_half_cylinder and np.any(u[-1] != 0.0):
        raise DomainError("half-cylinder fields must vanish at x = 0")


def axial_kinetic(u: np.ndarray, grid: ChannelGrid) -> float:
    """Discrete ``int int e^x u_x^2``."""
    d = np.diff(u, axis=0) / grid.axial_spacing
    per_edge = grid.cross.integrate(d * d)
    return float(np.sum(grid.axial_spacing * grid.weight(grid.edge_x) * per_edge))


def _station_integral(values: np.ndarray, grid: ChannelGrid) -> float:
    return float(np.sum(grid.axial_weights * grid.weight(grid.x) * values))


def evaluate_Ic(u: np.ndarray, params: WaveParameters, grid: ChannelGrid) -> float:
    """Quadrature value of the weighted energy ``I_c[u]``."""
    u = _check(u, grid)
    _require_walls(u, grid)
    cross = 0.5 * grid.cross.gradient_energy(u) + grid.cross.integrate(F(u))
    return 0.5 * params.c2 * axial_kinetic(u, grid) + _station_integral(cross, grid)


def _gradient_stations(s: np.ndarray, params: WaveParameters, grid: ChannelGrid) -> np.ndarray:
    lap = grid.cross.laplacian
    g = params.c2 * (grid.axial_operator() @ s) - (lap @ s.T).T + dF(s)
    g[-1] = 0.0
    return g


def gradient_Ic(u: np.ndarray, params: WaveParameters, grid: ChannelGrid) -> np.ndarray:
    """Strong-form residual ``-c^2 e^{-x}(e^x u_x)_x - Lap_y u - u + u^3``.

    This is the gradient of :func:`evaluate_Ic` in the ``e^x``-weighted
    inner product; it is zero on the walls and at the right (Dirichlet)
    station, and carries the natural condition at the left station.
    """
    u = _check(u, grid)
    _require_walls(u, grid)
    return grid.from_stations(_gradient_stations(grid.stations(u), params, grid))


def hessian_Ic(u: np.ndarray, params: WaveParameters, grid: ChannelGrid) -> sp.csr_matrix:
    """Jacobian of :func:`gradient_Ic` on the unknown stations ``0..N-2``."""
    s = grid.stations(u)
    n, m = s.shape
    ax = grid.axial_operator()[: n - 1, : n - 1]
    lin = params.c2 * sp.kron(ax, sp.identity(m)) - sp.kron(sp.identity(n - 1), grid.cross.laplacian)
    return sp.csr_matrix(lin + sp.diags((3.0 * s[:-1] ** 2 - 1.0).ravel()))


def weighted_norms(u: np.ndarray, grid: ChannelGrid) -> NormReport:
    """Squared ``L2_w``, ``L4_w``, ``u_x`` and ``grad_y`` norms."""
    u = _check(u, grid)
    l2 = _station_integral(grid.cross.integrate(u * u), grid)
    l4 = _station_integral(grid.cross.integrate(u**4), grid)
    return NormReport(
        l2w=l2,
        l4w=float(np.sqrt(l4)),
        dx_l2w=axial_kinetic(u, grid),
        grady_l2w=_station_integral(grid.cross.gradient_energy(u), grid),
    )


def truncate_unit(u: np.ndarray) -> np.ndarray:
    """Nodewise clamp to ``[-1, 1]``."""
    return np.clip(u, -1.0, 1.0)


def trial_function(k: int, L: float, grid: ChannelGrid, psi1: np.ndarray) -> np.ndarray:
    """``e^{-x/2} sin(k pi x / L) psi1(y)`` on ``[-L, 0]``, zero elsewhere."""
    if k < 1:
        raise DomainError("trial index k must be >= 1")
    if L <= 0 or L > -grid.x_min + 1e-12 or grid.x_max < 0:
        raise SizingError(f"L = {L} does not fit in the grid [{grid.x_min}, {grid.x_max}]")
    psi1 = np.asarray(psi1, dtype=float)
    if psi1.shape != grid.cross.shape:
        raise DomainError("psi1 must live on the channel cross section")
    x = grid.x
    inside = (x >= -L - 1e-12) & (x <= 0.0)
    profile = np.where(inside, np.exp(-x / 2) * np.sin(k * np.pi * x / L), 0.0)
    # endpoints are exact zeros of the sine
    profile[np.isclose(x, 0.0, atol=1e-12) | np.isclose(x, -L, atol=1e-12)] = 0.0
    return np.multiply.outer(profile, psi1)


def _derivative_4th(f: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite-difference derivative along axis 0."""
    n = f.shape[0]
    if n < 5:
        return np.gradient(f, h, axis=0, edge_order=2)
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = -(-25 * f[-1] + 48 * f[-2] - 36 * f[-3] + 16 * f[-4] - 3 * f[-5]) / (12 * h)
    d[-2] = -(-3 * f[-1] - 10 * f[-2] + 18 * f[-3] - 6 * f[-4] + f[-5]) / (12 * h)
    return d


def quadratic_form_QL(phi: np.ndarray, params: WaveParameters, L: float, grid: ChannelGrid) -> float:
    """``Q_L[phi] = 1/2 int_{-L}^0 int (c^2 phi_x^2 + |grad_y phi|^2 - phi^2) e^x``.

    Integrated over the stations of ``[-L, 0]`` only, with fourth-order
    nodal derivatives in ``x`` and trapezoidal quadrature.
    """
    phi = _check(phi, grid)
    tol = 1e-9 * grid.axial_spacing
    outside = (grid.x < -L - tol) | (grid.x > tol)
    if np.any(phi[outside] != 0.0):
        raise DomainError("phi must be supported in [-L, 0]")
    sel = ~outside
    if np.count_nonzero(sel) < 2:
        return 0.0
    x, f = grid.x[sel], phi[sel]
    h = grid.axial_spacing
    wx = np.full(x.size, h)
    wx[[0, -1]] /= 2
    wx *= grid.weight(x)
    fx = _derivative_4th(f, h)
    dens = params.c2 * grid.cross.integrate(fx * fx) + grid.cross.gradient_energy(f) - grid.cross.integrate(f * f)
    return 0.5 * float(np.sum(wx * dens))


def sphere_design(k: int, pairs: int) -> np.ndarray:
    """Deterministic antipodal point set on the unit sphere of ``R^k``.

    Halton points are pushed through the normal quantile and normalized;
    each point is followed by its antipode.  For ``k = 1`` this is ``{1, -1}``.
    """
    if k == 1:
        pts = np.array([[1.0]])
    else:
        raw = qmc.Halton(d=k, scramble=False).random(pairs + 1)[1:]
        g = _normal.ppf(raw)
        pts = g / np.linalg.norm(g, axis=1, keepdims=True)
    out = np.empty((2 * len(pts), k))
    out[0::2], out[1::2] = pts, -pts
    return out


@dataclass(frozen=True)
class SeedFamily:
    """Sampled odd family ``alpha -> eps sum alpha_i phi_i / ||phi_i||_inf``."""

    k: int
    L: float
    eps: float
    basis: np.ndarray = field(repr=False)
    alphas: np.ndarray = field(repr=False)
    levels: np.ndarray = field(repr=False)
    quadratic_forms: tuple

    @property
    def max_level(self) -> float:
        return float(np.max(self.levels))

    @property
    def negative(self) -> bool:
        return self.max_level < 0.0

    def member(self, index: int) -> np.ndarray:
        return self.eps * np.tensordot(self.alphas[index], self.basis, axes=1)

    def best_member(self) -> np.ndarray:
        return self.member(int(np.argmin(self.levels)))


def genus_seed_family(
    k: int,
    L: float,
    eps: float | None,
    samples: int | None,
    params: WaveParameters,
    grid: ChannelGrid,
    psi1: np.ndarray,
) -> SeedFamily:
    """Sample ``I_c`` over an odd image of the unit sphere of ``R^k``.

    The trial functions are rescaled to unit sup norm.  With ``eps=None`` the
    amplitude is the smallest of 0.05, 0.1, 0.2, 0.4 that keeps every sample
    strictly negative; the maximum is an upper bound for the k-th min-max
    level.  Raises :class:`SeedFamilyError` when no amplitude works or when
    some ``Q_L[phi_i]`` is not negative.
    """
    basis, qs = [], []
    for i in range(1, k + 1):
        phi = trial_function(i, L, grid, psi1)
        q = quadratic_form_QL(phi, params, L, grid)
        if not q < 0:
            raise SeedFamilyError(f"Q_L[phi_{i}] = {q:.3e} is not negative; increase L")
        basis.append(phi / np.max(np.abs(phi)))
        qs.append(q)
    basis = np.array(basis)
    alphas = sphere_design(k, PAIRS_PER_MODE * k if samples is None else int(samples))
    fields = np.tensordot(alphas, basis, axes=1)

    candidates = EPS_SWEEP if eps is None else (float(eps),)
    for e in candidates:
        if e <= 0:
            raise DomainError("eps must be positive")
        levels = np.array([evaluate_Ic(e * f, params, grid) for f in fields])
        if np.max(levels) < 0 or eps is not None:
            family = SeedFamily(k, L, e, basis, alphas, levels, tuple(qs))
            if not family.negative:
                raise SeedFamilyError(
                    f"max I_c over the family is {family.max_level:.3e} >= 0; "
                    "try a larger L or a smaller eps"
                )
            return family
    raise SeedFamilyError("no eps in the sweep gives a strictly negative family; try a larger L")
