"""scikit-learn style front ends for an interval cross section.

:class:`CrossSectionModel` fits the Dirichlet spectrum and ground state and
maps sampled cross-section profiles to spectral coefficients.
:class:`TravelingWaveSolver` runs the full pipeline in ``fit`` and evaluates
the wave in the laboratory frame with ``predict``.

Both follow the usual conventions: hyperparameters are set in ``__init__``
and never modified, fitted attributes end with an underscore.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .config import RunConfig
from .cross_section import CrossSectionGrid, dirichlet_eigenpairs, evaluate_J, ground_state
from .pipeline import regime, run_wave


class CrossSectionModel(TransformerMixin, BaseEstimator):
    """Dirichlet modes and ground state of ``J`` on ``[0, length]``.

    Parameters
    ----------
    length : float
        Width of the cross section.
    nodes : int
        Grid nodes including both walls.
    n_modes : int
        Number of eigenfunctions used by :meth:`transform`.
    tol : float
        Residual tolerance of the ground state.

    Attributes
    ----------
    grid_ : CrossSectionGrid
    eigenvalues_ : ndarray of shape (n_modes,)
    components_ : ndarray of shape (n_modes, nodes)
        L2-normalized eigenfunctions.
    ground_state_ : CrossSectionState
    threshold_ : float
        Upper end ``2 sqrt(1 - lambda_1)`` of the admissible speeds (0 if none).
    case_ : str
        ``"i"``, ``"ii"`` or ``"none"``.
    """

    def __init__(self, length: float = 4.0, nodes: int = 41, n_modes: int = 5, tol: float = 1e-10):
        self.length = length
        self.nodes = nodes
        self.n_modes = n_modes
        self.tol = tol

    def fit(self, X=None, y=None):
        """Compute the spectrum and the ground state; ``X`` is ignored."""
        self.grid_ = CrossSectionGrid.interval(self.length, self.nodes)
        pairs = dirichlet_eigenpairs(self.grid_, self.n_modes)
        self.eigenvalues_ = np.array([p.eigenvalue for p in pairs])
        self.components_ = np.array([p.eigenfunction for p in pairs])
        reg = regime(self.grid_, self.n_modes)
        self.threshold_ = reg.threshold
        self.case_ = reg.case
        self.ground_state_ = ground_state(self.grid_, tol=self.tol) if reg.case != "none" else None
        self.n_features_in_ = self.nodes
        return self

    def _validate(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.nodes:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.nodes}")
        return X

    def transform(self, X):
        """Coefficients ``<x, psi_j>`` of each profile (rows of ``X``)."""
        X = self._validate(X)
        w = self.grid_.quadrature_weights
        return (X * w) @ self.components_.T

    def inverse_transform(self, C):
        check_is_fitted(self, "components_")
        C = check_array(C, dtype=float)
        return C @ self.components_

    def score_samples(self, X):
        """``J`` of each profile; profiles must vanish at both walls."""
        X = self._validate(X)
        return np.array([evaluate_J(row, self.grid_) for row in X])


class TravelingWaveSolver(BaseEstimator):
    """Traveling wave ``u(xi, y, t) = U(c (xi - c t), y)`` on ``R x [0, length]``.

    Parameters
    ----------
    speed : float
        Wave speed ``c``; must lie below the threshold unless ``force``.
    length, nodes : float, int
        Cross section.
    x_min, x_max, spacing : float
        Truncated axial domain of the profile ``U`` and its grid spacing.
    k_max : int
        Number of half-cylinder critical points to compute (the wave uses
        the first).
    force : bool
        Attempt speeds outside the admissible range.

    Attributes
    ----------
    wave_ : WaveSolution
    points_ : list of CriticalPoint
    glue_ : GlueParameters
    gap_ : GapRecord
    """

    def __init__(
        self,
        speed: float = 0.6,
        length: float = 4.0,
        nodes: int = 41,
        x_min: float = -40.0,
        x_max: float = 40.0,
        spacing: float = 0.025,
        k_max: int = 1,
        force: bool = False,
    ):
        self.speed = speed
        self.length = length
        self.nodes = nodes
        self.x_min = x_min
        self.x_max = x_max
        self.spacing = spacing
        self.k_max = k_max
        self.force = force

    def _config(self) -> RunConfig:
        return RunConfig.from_dict(
            {
                "cross_section": {"shape": "interval", "lengths": [float(self.length)], "nodes": [int(self.nodes)]},
                "channel": {"x_min": float(self.x_min), "x_max": float(self.x_max), "spacing": float(self.spacing)},
                "speed": float(self.speed),
                "seeds": {"k_max": int(self.k_max)},
            }
        )

    def fit(self, X=None, y=None):
        """Run eigenpairs, ground state, critical points, gluing and Newton."""
        result = run_wave(self._config(), force=self.force)
        self.wave_ = result.wave
        self.points_ = result.points
        self.glue_ = result.glue
        self.gap_ = result.wave.diagnostics
        self.threshold_ = result.regime.threshold
        return self

    def profile(self, x, y):
        """Bilinear interpolation of ``U`` at comoving points, clamped to the end states."""
        check_is_fitted(self, "wave_")
        grid = self.wave_.grid
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any((y < 0) | (y > self.length)):
            raise ValueError("y must lie in [0, length]")
        U = np.asarray(self.wave_.field)
        tx = np.clip((x - grid.x_min) / grid.axial_spacing, 0, grid.axial_nodes - 1)
        ty = y / grid.cross.spacing[0]
        i = np.minimum(np.floor(tx).astype(int), grid.axial_nodes - 2)
        j = np.minimum(np.floor(ty).astype(int), grid.cross.nodes[0] - 2)
        rx, ry = tx - i, ty - j
        return (
            (1 - rx) * (1 - ry) * U[i, j]
            + rx * (1 - ry) * U[i + 1, j]
            + (1 - rx) * ry * U[i, j + 1]
            + rx * ry * U[i + 1, j + 1]
        )

    def predict(self, X):
        """Lab-frame values at rows ``(xi, y, t)`` of ``X``."""
        check_is_fitted(self, "wave_")
        X = check_array(X, dtype=float)
        if X.shape[1] != 3:
            raise ValueError("X must have columns (xi, y, t)")
        c = self.wave_.speed
        xi, y, t = X.T
        return self.profile(c * (xi - c * t), y)
