"""Spectral analysis and boundary null-control of the hinged biharmonic Schrodinger equation.

    i y_t = -y_xxxx + gamma y_xx on (0, ell), gamma < 0,
    y = y_xx = 0 at x = ell, y(0) = 0, y_xx(t, 0) = f(t).
"""
from .control import ControlReport, diagnose_resonant, moment_rhs, null_control, solve_moment
from .evolution import (
    TraceSeries,
    boundary_trace,
    check_sign_convention,
    controlled_evolve,
    energy,
    free_evolve,
    rk4_oracle,
)
from .hilbert import CoeffState, ThetaWeight, norm_theta, project, synthesize, theta_weights, unit_state
from .kernels import BACKEND
from .observability import (
    GramData,
    gram_matrix,
    invisible_mode,
    observability_constant,
    resonance_scan,
)
from .signal import ControlSignal
from .spectrum import (
    MediumParams,
    Mode,
    ResonanceInfo,
    characteristic_residual,
    eigenvalue,
    enumerate_modes,
    make_params,
    resonance_check,
    spectral_gap_floor,
    trace_ratio,
    upper_density_estimate,
)

__version__ = "0.1.0"
