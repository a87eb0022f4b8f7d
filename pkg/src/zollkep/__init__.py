"""Rotationally invariant Zoll deformations of the Kepler problem."""

__version__ = "0.1.0"

from .errors import (DomainError, InadmissibleProfileError, IntegrationError,
                     JetOrderError, LadderError, SupportError, ZollkepError)
from .jets import (Jet, SmoothFnExpr, antisymmetrize, eval_jet, fd_validate,
                   make_bump, normalized_bump)
from .profiles import (BoundaryReport, DeformationProfile, ProjectiveProfile,
                       check_boundary_conditions_f, check_boundary_conditions_phi,
                       check_origin_regularity, load_profile, save_profile,
                       validate_profile, zero_profile)
from .geometry import (BesseProfile, MetricSample, RotSystem, jm_metric,
                       lagrangian_terms, metric_coeff_B, r_to_rho, rho_to_r,
                       to_besse)
from .dynamics import (OrbitState, OrbitTrace, ZollReport, hamiltonian_rhs,
                       integrate_orbit, ptheta_to_clairaut,
                       radial_period_quadrature, return_angle_quadrature,
                       zoll_scan)
from .multienergy import (Case, EnergyLadder, ExtendedProfile, ReflectionOrbit,
                          build_multi_profile, classify_pair, extend_chain,
                          extend_pair, extension_sup_norms, rational_gamma,
                          reflection_orbit, verify_F_oddness, xi_values)
from .flatmap import (ConformalMap, ExoticPotential, exotic_potential,
                      solve_conformal_map, verify_flat_zoll)
from .spectral_rigidity import RigidityMatrix, check_structure, rigidity_matrix
