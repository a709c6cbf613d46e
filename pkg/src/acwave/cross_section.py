"""Problems posed on the channel cross section.

Everything here lives on a uniform Dirichlet grid over an interval (or a
rectangle, via tensor products): the Dirichlet eigenproblem, the energy

    J[v] = int ( |grad v|^2 / 2 + F(v) ) dy,   F(w) = -w^2/2 + w^4/4,

its L2 gradient, the positive ground state and the finite set of critical
points of ``J``.  Fields are plain numpy arrays of shape ``grid.shape``
that include the (zero) boundary nodes.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import LinAlgError, eigh_tridiagonal

from ._deflation import DeflationOperator, deflated_newton
from .exceptions import (
    DomainError,
    IterationLimitError,
    PartialResultWarning,
    RegimeError,
    SizingError,
)

RESIDUAL_TOL = 1e-10
MAX_NEWTON = 50
MAX_DESCENT = 10_000
DEDUP_THRESHOLD = 1e-3


def F(w):
    """Double-well potential ``-w^2/2 + w^4/4``."""
    w2 = np.square(w)
    return -0.5 * w2 + 0.25 * w2 * w2


def dF(w):
    return w * (np.square(w) - 1.0)


@dataclass(frozen=True)
class CrossSectionGrid:
    """Uniform grid on an interval or rectangle, boundary nodes included.

    Parameters
    ----------
    lengths : float or tuple of float
        Side length(s) of the cross section.
    nodes : int or tuple of int
        Node count per dimension, boundary nodes included (>= 3).
    """

    lengths: tuple
    nodes: tuple

    def __post_init__(self):
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        nodes = tuple(int(v) for v in np.atleast_1d(self.nodes))
        if len(lengths) != len(nodes) or len(lengths) not in (1, 2):
            raise SizingError("cross section must be an interval or a rectangle")
        if any(not np.isfinite(v) or v <= 0 for v in lengths):
            raise SizingError(f"lengths must be positive, got {lengths}")
        if any(n < 3 for n in nodes):
            raise SizingError(f"need at least 3 nodes per dimension, got {nodes}")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def interval(cls, length: float, nodes: int) -> "CrossSectionGrid":
        return cls((length,), (nodes,))

    @classmethod
    def rectangle(cls, lx: float, ly: float, nx: int, ny: int) -> "CrossSectionGrid":
        return cls((lx, ly), (nx, ny))

    @property
    def ndim(self) -> int:
        return len(self.nodes)

    @property
    def shape(self) -> tuple:
        return self.nodes

    @property
    def spacing(self) -> tuple:
        return tuple(L / (n - 1) for L, n in zip(self.lengths, self.nodes))

    @property
    def measure(self) -> float:
        """Area (length) of the cross section."""
        return float(np.prod(self.lengths))

    @property
    def interior_shape(self) -> tuple:
        return tuple(n - 2 for n in self.nodes)

    @property
    def interior_count(self) -> int:
        return int(np.prod(self.interior_shape))

    @property
    def coordinates(self) -> tuple:
        return tuple(np.linspace(0.0, L, n) for L, n in zip(self.lengths, self.nodes))

    @cached_property
    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[(slice(1, -1),) * self.ndim] = True
        return mask

    @cached_property
    def quadrature_weights(self) -> np.ndarray:
        """Trapezoidal weights on the full node array."""
        w = np.ones(())
        for h, n in zip(self.spacing, self.nodes):
            w1 = np.full(n, h)
            w1[[0, -1]] = h / 2
            w = np.multiply.outer(w, w1)
        return w

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        """Second-order Dirichlet Laplacian acting on flattened interior values."""
        mats = []
        for h, m in zip(self.spacing, self.interior_shape):
            mats.append(sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(m, m)) / h**2)
        if self.ndim == 1:
            return sp.csr_matrix(mats[0])
        ix, iy = sp.identity(mats[0].shape[0]), sp.identity(mats[1].shape[0])
        return sp.csr_matrix(sp.kron(mats[0], iy) + sp.kron(ix, mats[1]))

    def interior(self, v: np.ndarray) -> np.ndarray:
        """Flattened interior values of a full-shape field."""
        return np.asarray(v)[(slice(1, -1),) * self.ndim].ravel()

    def extend(self, flat: np.ndarray) -> np.ndarray:
        """Full-shape field with zero boundary from flattened interior values."""
        out = np.zeros(self.shape)
        out[(slice(1, -1),) * self.ndim] = np.reshape(flat, self.interior_shape)
        return out

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        """Discrete L2 inner product of two full-shape fields."""
        return float(np.sum(self.quadrature_weights * a * b))

    def gradient_energy(self, v: np.ndarray):
        """Discrete ``int |grad v|^2 dy`` from edge differences.

        Works on stacks: the trailing ``ndim`` axes of ``v`` are the cross
        section, leading axes are kept (a float is returned for a single field).
        """
        v = np.asarray(v, dtype=float)
        lead = v.ndim - self.ndim
        trap = []
        for h, n in zip(self.spacing, self.nodes):
            w = np.full(n, h)
            w[[0, -1]] = h / 2
            trap.append(w)
        total = 0.0
        for axis, h in enumerate(self.spacing):
            d = np.diff(v, axis=lead + axis) / h
            weight = np.ones(())
            for other, w in enumerate(trap):
                weight = np.multiply.outer(weight, np.full(self.nodes[axis] - 1, h) if other == axis else w)
            total = total + np.sum(weight * d * d, axis=tuple(range(lead, v.ndim)))
        return float(total) if lead == 0 else total

    def integrate(self, v: np.ndarray):
        """Trapezoidal integral over the trailing cross-section axes."""
        v = np.asarray(v, dtype=float)
        lead = v.ndim - self.ndim
        out = np.sum(self.quadrature_weights * v, axis=tuple(range(lead, v.ndim)))
        return float(out) if lead == 0 else out


@dataclass(frozen=True)
class SpectralPair:
    """Dirichlet eigenvalue with its unit-L2 eigenfunction (first interior value > 0)."""

    index: int
    eigenvalue: float
    eigenfunction: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class CrossSectionState:
    """A (possibly converged) critical point of ``J``."""

    values: np.ndarray = field(repr=False)
    energy: float
    residual: float
    morse_tag: str
    converged: bool = True

    def sign_changes(self, threshold: float = 1e-9) -> int:
        return count_sign_changes(np.asarray(self.values).ravel(), threshold)


def count_sign_changes(values: np.ndarray, threshold: float = 1e-9) -> int:
    """Strict sign alternations of a 1D sequence, ignoring ``|v| <= threshold``."""
    v = np.asarray(values, dtype=float)
    signs = np.sign(v[np.abs(v) > threshold])
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _check_field(v: np.ndarray, grid: CrossSectionGrid) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != grid.shape:
        raise DomainError(f"field shape {v.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError("field has non-finite values")
    if np.any(v[~grid.interior_mask] != 0.0):
        raise DomainError("field must vanish on the Dirichlet boundary")
    return v


def _eig_1d(length: float, nodes: int, count: int):
    m = nodes - 2
    h = length / (nodes - 1)
    d = np.full(m, 2.0 / h**2)
    e = np.full(m - 1, -1.0 / h**2)
    try:
        if m == 1:
            return d.copy(), np.ones((1, 1)) / np.sqrt(h)
        vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))
    except LinAlgError as exc:
        raise IterationLimitError(f"tridiagonal eigensolver failed: {exc}") from exc
    vecs = vecs / np.sqrt(h)
    vecs *= np.where(vecs[0] < 0, -1.0, 1.0)
    return vals, vecs


def dirichlet_eigenpairs(grid: CrossSectionGrid, count: int) -> list:
    """The ``count`` smallest eigenpairs of the discrete Dirichlet Laplacian.

    Eigenfunctions are orthonormal in the discrete L2 product and returned on
    the full node array.  Raises :class:`SizingError` when ``count`` exceeds
    the number of interior nodes.
    """
    count = int(count)
    if count < 1:
        raise SizingError("count must be >= 1")
    if count > grid.interior_count:
        raise SizingError(
            f"requested {count} eigenpairs but the grid has only {grid.interior_count} interior nodes"
        )
    if grid.ndim == 1:
        vals, vecs = _eig_1d(grid.lengths[0], grid.nodes[0], count)
        return [
            SpectralPair(j + 1, float(vals[j]), grid.extend(vecs[:, j]))
            for j in range(count)
        ]
    (mx, my) = grid.interior_shape
    vx, ex = _eig_1d(grid.lengths[0], grid.nodes[0], min(count, mx))
    vy, ey = _eig_1d(grid.lengths[1], grid.nodes[1], min(count, my))
    sums = np.add.outer(vx, vy)
    order = np.argsort(sums, axis=None, kind="stable")[:count]
    pairs = []
    for j, flat in enumerate(order):
        a, b = np.unravel_index(flat, sums.shape)
        psi = np.outer(ex[:, a], ey[:, b]).ravel()
        pairs.append(SpectralPair(j + 1, float(sums[a, b]), grid.extend(psi)))
    return pairs


def evaluate_J(v: np.ndarray, grid: CrossSectionGrid) -> float:
    """Quadrature value of ``J[v]``."""
    v = _check_field(v, grid)
    return 0.5 * grid.gradient_energy(v) + float(np.sum(grid.quadrature_weights * F(v)))


def gradient_J(v: np.ndarray, grid: CrossSectionGrid) -> np.ndarray:
    """Discrete L2 gradient ``-Lap v - v + v^3`` (zero on the boundary)."""
    v = _check_field(v, grid)
    return grid.extend(_grad_interior(grid.interior(v), grid))


def _grad_interior(vi: np.ndarray, grid: CrossSectionGrid) -> np.ndarray:
    return -(grid.laplacian @ vi) + dF(vi)


def _hessian_interior(vi: np.ndarray, grid: CrossSectionGrid) -> sp.csr_matrix:
    return sp.csr_matrix(-grid.laplacian + sp.diags(3.0 * vi**2 - 1.0))


def _state(vi: np.ndarray, grid: CrossSectionGrid, tag: str, tol: float) -> CrossSectionState:
    v = grid.extend(vi)
    res = float(np.max(np.abs(_grad_interior(vi, grid))))
    return CrossSectionState(v, evaluate_J(v, grid), res, tag, res <= tol)


def first_eigenvalue(grid: CrossSectionGrid) -> float:
    return dirichlet_eigenpairs(grid, 1)[0].eigenvalue


def wave_speed_threshold(lambda1: float) -> float:
    """Upper end ``2 sqrt(1 - lambda1)`` of the admissible speed range."""
    return 2.0 * np.sqrt(max(1.0 - lambda1, 0.0))


def ground_state(
    grid: CrossSectionGrid,
    tol: float = RESIDUAL_TOL,
    max_descent: int = MAX_DESCENT,
    max_newton: int = MAX_NEWTON,
) -> CrossSectionState:
    """Unique positive solution ``u_+`` of ``Lap u + u(1-u^2) = 0``.

    Semi-implicit (H1-preconditioned) gradient descent from
    ``0.1 sqrt(1 - lambda1) psi_1`` until the residual drops below 1e-3,
    then Newton polish to ``tol``.
    """
    psi1 = dirichlet_eigenpairs(grid, 1)[0]
    lam1 = psi1.eigenvalue
    if lam1 >= 1.0:
        raise RegimeError(f"lambda_1 = {lam1:.6g} >= 1: only the trivial solution exists")
    v = 0.1 * np.sqrt(1.0 - lam1) * grid.interior(psi1.eigenfunction)

    tau = 1.0
    solve = spla.factorized(sp.csc_matrix(sp.identity(grid.interior_count) - tau * grid.laplacian))
    for _ in range(max_descent):
        g = _grad_interior(v, grid)
        if np.max(np.abs(g)) < 1e-3:
            break
        v = solve(v - tau * dF(v))
    else:
        raise IterationLimitError("ground-state descent did not reach the Newton switch")

    result = deflated_newton(
        lambda w: _grad_interior(w, grid),
        lambda w: _hessian_interior(w, grid),
        v,
        tol=tol,
        maxiter=max_newton,
    )
    if not result.converged:
        raise IterationLimitError(f"ground-state Newton stalled at residual {result.residual:.3e}")
    state = _state(result.u, grid, "ground", tol)
    if not np.all(grid.interior(state.values) > 0):
        raise IterationLimitError("ground-state iteration lost positivity")
    return state


@dataclass(frozen=True)
class CriticalStates:
    """Critical points of ``J`` sorted by energy, plus completeness bookkeeping."""

    states: tuple
    expected: int | None
    unstable_modes: int
    warning: str | None = None

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, item):
        return self.states[item]

    @property
    def complete(self) -> bool:
        return self.expected is None or len(self.states) >= self.expected


def unstable_mode_count(grid: CrossSectionGrid) -> tuple:
    """Number ``k`` of eigenvalues below 1, with the eigenpairs up to ``k + 1``."""
    count = min(4, grid.interior_count)
    while True:
        pairs = dirichlet_eigenpairs(grid, count)
        k = sum(p.eigenvalue < 1.0 for p in pairs)
        if k < count or count == grid.interior_count:
            return k, pairs
        count = min(2 * count, grid.interior_count)


def critical_points_J(
    grid: CrossSectionGrid,
    max_count: int | None = None,
    tol: float = RESIDUAL_TOL,
    dedup: float = DEDUP_THRESHOLD,
    max_newton: int = MAX_NEWTON,
) -> CriticalStates:
    """Enumerate critical points of ``J`` by deflated Newton.

    Seeds are ``+-eps_j psi_j`` for every eigenvalue ``lambda_j < 1`` with
    ``eps_j = 0.1 sqrt(1 - lambda_j)``; the trivial state is always included.
    On an interval the expected count is ``2k + 1``; rectangles carry no
    completeness claim.
    """
    k, pairs = unstable_mode_count(grid)
    expected = 2 * k + 1 if grid.ndim == 1 else None
    if max_count is not None and expected is not None:
        expected = min(expected, int(max_count))

    weights = grid.interior(grid.quadrature_weights)
    deflation = DeflationOperator(weights, power=2.0, shift=1.0)
    zero = np.zeros(grid.interior_count)
    found = [zero]
    deflation.add_solution(zero)

    def residual(w):
        return _grad_interior(w, grid)

    def jacobian(w):
        return _hessian_interior(w, grid)

    for j in range(k):
        lam = pairs[j].eigenvalue
        psi = grid.interior(pairs[j].eigenfunction)
        for sign in (1.0, -1.0):
            if max_count is not None and len(found) >= max_count:
                break
            seed = sign * 0.1 * np.sqrt(1.0 - lam) * psi
            try:
                res = deflated_newton(residual, jacobian, seed, deflation, tol=tol,
                                      maxiter=max_newton, max_step=0.5)
            except Exception:  # singular Jacobian on a bad path: seed exhausted
                continue
            if not res.converged:
                continue
            if min(np.max(np.abs(res.u - f)) for f in found) < dedup:
                continue
            found.append(res.u)
            deflation.add_solution(res.u)

    energies = [evaluate_J(grid.extend(u), grid) for u in found]
    order = np.argsort(energies, kind="stable")
    e_min = energies[order[0]]
    states = []
    for idx in order:
        u = found[idx]
        if not np.any(u):
            tag = "trivial"
        elif np.isclose(energies[idx], e_min, rtol=1e-9, atol=1e-12):
            tag = "ground"
        else:
            tag = "excited"
        states.append(_state(u, grid, tag, tol))

    warning = None
    if expected is not None and len(states) < expected:
        warning = f"found {len(states)} of {expected} expected critical points"
        warnings.warn(warning, PartialResultWarning, stacklevel=2)
    return CriticalStates(tuple(states), expected, k, warning)
