"""Deflated Newton iteration shared by the cross-section and channel solvers.

A deflation operator multiplies a residual ``F`` by

    M(u) = prod_i (||u - u_i||^-p + shift)

so that Newton can no longer converge to the already known roots ``u_i``.
The deflated Newton step is a rescaling of the ordinary Newton step, so
only the undeflated Jacobian is ever factorized.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import LinearSolverError


@dataclass
class DeflationOperator:
    """Shifted deflation with a weighted Euclidean norm."""

    weights: np.ndarray
    power: float = 2.0
    shift: float = 1.0
    solutions: list = field(default_factory=list)

    def add_solution(self, u: np.ndarray) -> None:
        self.solutions.append(np.array(u, dtype=float, copy=True))

    def _norm2(self, d: np.ndarray) -> float:
        return float(np.dot(self.weights * d, d))

    def operator(self, u: np.ndarray) -> float:
        value = 1.0
        for ui in self.solutions:
            value *= self._norm2(u - ui) ** (-self.power / 2) + self.shift
        return value

    def log_gradient_dot(self, u: np.ndarray, direction: np.ndarray) -> float:
        """Directional derivative of ``log M`` at ``u`` along ``direction``."""
        total = 0.0
        for ui in self.solutions:
            d = u - ui
            n2 = self._norm2(d)
            mi = n2 ** (-self.power / 2) + self.shift
            dmi = -self.power * n2 ** (-self.power / 2 - 1) * float(np.dot(self.weights * d, direction))
            total += dmi / mi
        return total


@dataclass
class NewtonResult:
    u: np.ndarray
    residual: float
    iterations: int
    converged: bool
    history: list


def _solve(jac: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    try:
        step = spla.spsolve(sp.csc_matrix(jac), rhs)
    except RuntimeError as exc:  # singular factor
        raise LinearSolverError(str(exc)) from exc
    if not np.all(np.isfinite(step)):
        raise LinearSolverError("Newton step is not finite (singular Jacobian?)")
    return step


def deflated_newton(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], sp.spmatrix],
    u0: np.ndarray,
    deflation: DeflationOperator | None = None,
    tol: float = 1e-10,
    maxiter: int = 50,
    max_step: float | None = None,
) -> NewtonResult:
    """Newton's method on ``residual(u) = 0``, optionally deflated.

    ``max_step`` caps the sup norm of each update (a crude damping that keeps
    deflated iterates from being flung far away by the deflation factor).
    Convergence is judged on the sup norm of the undeflated residual.
    """
    u = np.array(u0, dtype=float, copy=True)
    history = []
    for it in range(maxiter + 1):
        F = residual(u)
        res = float(np.max(np.abs(F))) if F.size else 0.0
        history.append(res)
        if not np.isfinite(res):
            return NewtonResult(u, res, it, False, history)
        if res <= tol:
            return NewtonResult(u, res, it, True, history)
        if it == maxiter:
            break
        step = _solve(jacobian(u), -F)
        if deflation is not None and deflation.solutions:
            denom = 1.0 - deflation.log_gradient_dot(u, step)
            if denom != 0.0:
                step = step / denom
        if max_step is not None:
            size = float(np.max(np.abs(step)))
            if size > max_step:
                step *= max_step / size
        u = u + step
    return NewtonResult(u, res, maxiter, False, history)
