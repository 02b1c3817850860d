"""
Particle gradient projection solver for stochastic optimal control and mean-field control
"""
from .config import ExperimentFile, LearningSchedule, ProbeSettings, RunConfig, Settings
from .engine import (ParticleEnsemble, backward_adjoint, backward_adjoint_mfc, backward_adjoint_socp,
                     simulate_forward)
from .errors import (ConfigError, DimensionError, DuplicateProblemError, GppError, IllConditionedFitError,
                     NumericalAbort, OracleUnavailableError, PolicyFormatError, UnknownProblemError)
from .probe import ProbeReport, unbiasedness_probe
from .problem import (FactorizedKernel, InitialLaw, MeasureSummary, MfcProblem, OracleController,
                      PairwiseKernel, PolicySequence, SocpProblem, as_mean_field, hamiltonian_partial_check,
                      measure_summary)
from .randfeatures import FeatureMap, RandomFeatureModel, RidgeSpec, evaluate, fit, new_feature_map, project_l2
from .solver import RunReport, control_l2_error, estimate_cost, solve
from .stochastics import BrownianIncrements, Purpose, SeedSpec, brownian_increments, gaussian_matrix

__version__ = "0.1.0"
