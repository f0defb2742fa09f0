"""q-Gevrey calculus: q-factorials, theta, formal Borel operators, q-Laplace summation
and preservation classifiers for positive sequences."""

__version__ = "0.1.0"

from .exceptions import (CutError, DegeneracyError, DimensionError, DomainError, EmptySeriesError,
                         GrowthError, InconsistentOracleError, InsufficientDataError,
                         NormalizationError, PoleError, QGevreyError, QuadratureError,
                         UnderflowError)
from .xnum import LogComplex
from .qcore import q_factorial_log, q_factorial_logs, q_number, q_pochhammer
from .theta import ThetaParams, calibrate_lower_bound, spiral_clearance, theta_eval, theta_lower_bound
from .fps import (FormalSeries, MomentBorelTransformer, QBorelTransformer, eval_partial, mborel,
                  moment_derivative, qborel)
from .growth import (GrowthFit, GrowthModel, PositiveSequence, fit_growth, is_lc, is_mg, membership,
                     preserves_q_and_gevrey_orders, preserves_q_gevrey_order, q_gevrey_order)
from .continuation import (ContinuableFunction, SectorSampling, SurfacePoint, growth_certificate_check,
                           make_continuation, pade_continue)
from .qlaplace import RayDomain, asymptotic_check, q_laplace, q_sum
from .classify import PreservationClassifier, classify, preserves_q_gevrey_asymptotics
from .config import Config
