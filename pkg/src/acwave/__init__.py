"""Traveling waves of the Allen-Cahn equation in infinite cylinders.

Numerical companion to the variational existence theory for waves
``u(x, y, t) = U(c (x - c t), y)`` of ``u_t = u_xx + Lap_y u + u(1 - u^2)``
in ``R x Omega_y`` with Dirichlet side walls.

Modules
-------
cross_section
    Dirichlet spectrum, ground state ``u_+`` and critical points of ``J``.
weighted_channel
    Grids with the weight ``e^x``, the energy ``I_c`` and seed families.
critical_point_solvers
    Critical points of ``I_c``, gluing and the Newton solve for the wave.
verification
    Independent checks of inequalities, identities and wave speed.
estimators
    scikit-learn style wrappers.
cli
    The ``acwave`` command.
"""
__version__ = "0.1.0"

from .cross_section import (  # noqa: E402
    CrossSectionGrid,
    CrossSectionState,
    critical_points_J,
    dirichlet_eigenpairs,
    evaluate_J,
    ground_state,
)
from .critical_point_solvers import (  # noqa: E402
    CriticalPoint,
    GlueParameters,
    WaveSolution,
    critical_sequence,
    glue_extend,
    minimize_Ic,
    newton_travel_wave,
    shift_offset,
    wave_to_lab_frame,
)
from .estimators import CrossSectionModel, TravelingWaveSolver  # noqa: E402
from .weighted_channel import ChannelGrid, WaveParameters, evaluate_Ic, genus_seed_family  # noqa: E402

__all__ = [
    "ChannelGrid",
    "CriticalPoint",
    "CrossSectionGrid",
    "CrossSectionModel",
    "CrossSectionState",
    "GlueParameters",
    "TravelingWaveSolver",
    "WaveParameters",
    "WaveSolution",
    "critical_points_J",
    "critical_sequence",
    "dirichlet_eigenpairs",
    "evaluate_Ic",
    "evaluate_J",
    "genus_seed_family",
    "glue_extend",
    "ground_state",
    "minimize_Ic",
    "newton_travel_wave",
    "shift_offset",
    "wave_to_lab_frame",
]
