"""Event-driven Monte Carlo for the Kac collision model with a non-integrable angular kernel."""

__version__ = "0.1.0"

from .cross_section import CollisionCoefficients, CrossSection, compute_coefficients, sample_theta
from .engine import ParticleEnsemble, advance, apply_collision, init_ensemble, ou_refresh, simulate
from .errors import ClockError, ConfigError, DomainError, NumericalError
from .initial import InitialDatum
from .limit_laws import OULimitLaw, empirical_moments, m4_trajectory, ou_limit_quantile
from .metrics import EmpiricalMeasure, QuantileFunction, wasserstein_empirical, wasserstein_vs_quantile
