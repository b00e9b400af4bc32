"""Integral-action output regulation with certified Lyapunov constructions.

Two settings are covered:

* dense (A, B, C) triples with a forwarding Lyapunov matrix and an explicit
  gain bound (``abstract_forwarding``, plus the bar-heating benchmark in
  ``heat_example``);
* 1-D n x n hyperbolic boundary-control systems with an exponential weight
  certificate, the integrator matrix Ki = T2^{-1}, and a closed-loop upwind
  simulator (``model_core``, ``fundamental_solutions``, ``gain_design``,
  ``pde_sim``).
"""

from .abstract_forwarding import (ForwardingDesign, corollary_gain,
                                  forwarding_design, lyapunov_P,
                                  verify_theorem2)
from .errors import (AssumptionError, CertificationError, CoefficientError,
                     ConfigError, NumericalFailure, RankConditionError,
                     StabilityError)
from .fundamental_solutions import (FundamentalSolution, integrate_phi,
                                    integrate_psi, split_blocks)
from .gain_design import (DesignOptions, GainCertificate, GainChoice,
                          IssCertificate, RankReport, WeightSearchConfig,
                          check_Ki_candidate, certify_iss, compute_M_and_T2,
                          compute_T1, design)
from .heat_example import (HeatGain, HeatProblem, cainv_apply, cainv_norm,
                           exact_CAinvB, heat_gain, simulate_heat)
from .model_core import (AbstractLinearSystem, DisturbanceScenario,
                         HyperbolicSystem, LyapunovWeight, eval_coefficients,
                         load_system, saint_venant_system, system_from_dict,
                         transport_system, validate_hyperbolic)
from .pde_sim import (Equilibrium, Trajectory, compute_equilibrium,
                      equilibrium_residuals, evaluate_V, evaluate_Ve,
                      simulate, simulate_open_loop)

__version__ = "0.1.0"
