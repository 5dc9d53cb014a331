"""Multi-energy system scheduling toolkit.

Library plus batch CLI for price-based demand-response experiments: a full
plant model with exact MINLP evaluation, convex scenario relaxations, an
operator-splitting QP solver, scenario-tree seed generation, a hot-started
adaptive genetic solver, a receding-horizon controller, and two baseline
solvers for comparison studies.
"""

from .config import (ConfigError, MesConfig, GeneratorParams, GasTurbineParams,
                     ChillerParams, GridParams, TesParams, EssParams)
from .model import (DecisionVector, SystemState, ExogenousSeries, BinaryLayout,
                    FeasibilityReport, Violation, ConstraintViolationError,
                    InfeasibleStateError, DimensionMismatchError,
                    evaluate_minlp_point, initial_state, advance_state)

__version__ = "0.1.0"
