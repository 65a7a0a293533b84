"""qslab: a desk-scale laboratory for the diffuse-interface Q-tensor system.

Simulates the coupled Navier-Stokes / Landau-de Gennes flow at a sequence of
interface widths and measures relative-entropy, bulk-error and dissipation
diagnostics against analytic mean-curvature-flow references.
"""

from .errors import ConfigError, ConvergenceError, InvariantViolation
from .geometry import AnalyticInterface, evolve, phi_cutoff, theta_trunc, zeta_tilde
from .grid import Grid2D, advect, divergence, gradient, integrate, laplacian
from .harness import RunConfig, default_config, fit_rate, run_single, sweep
from .profiles import (
    ProfileTables,
    dquasi_point,
    f_uni,
    psi_point,
    quasi_dist_uni,
    surface_tension,
    wave_profile,
)
from .qspace import (
    BulkParams,
    DEFAULT_PARAMS,
    bulk_energy,
    bulk_gradient,
    eigvals,
    uniaxial,
    uniaxial_retract,
)
from .solver import SimState, build_initial, capillary_force, ns_step, q_step, total_energy

__version__ = "0.1.0"

__all__ = [
    "AnalyticInterface",
    "BulkParams",
    "ConfigError",
    "ConvergenceError",
    "DEFAULT_PARAMS",
    "Grid2D",
    "InvariantViolation",
    "ProfileTables",
    "RunConfig",
    "SimState",
    "advect",
    "build_initial",
    "bulk_energy",
    "bulk_gradient",
    "capillary_force",
    "default_config",
    "divergence",
    "dquasi_point",
    "eigvals",
    "evolve",
    "f_uni",
    "fit_rate",
    "gradient",
    "integrate",
    "laplacian",
    "ns_step",
    "phi_cutoff",
    "psi_point",
    "q_step",
    "quasi_dist_uni",
    "run_single",
    "surface_tension",
    "sweep",
    "theta_trunc",
    "total_energy",
    "uniaxial",
    "uniaxial_retract",
    "wave_profile",
    "zeta_tilde",
]
