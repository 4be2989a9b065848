"""Semiclassical scattering by conormal potentials: 1D reflection solvers and ray dynamics."""

from .asymptotics import LeadingOrderR, gamma_coefficient, gamma_fn, is_proven_range, predicted_R
from .errors import *  # noqa: F401,F403
from .planewave import (b1_expansion, compute_b1, connect, connect_and_extract_R, default_eta, eta_window,
                        semiclassical_wronskian, solve_appendix, solve_envelope_ode)
from .potential import ConormalPotential1D, SquareBarrier, ZeroPotential, holder_exponent
from .scatter1d import (IntegratorConfig, ScatteringProblem, ScatteringResult, extract_RT, reflection_sweep,
                        solve_direct, square_barrier_oracle)
