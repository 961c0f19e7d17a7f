"""Self-correcting marked point processes.

Estimation, simulation, and global-envelope model checking for spatial
point patterns with location-dependent marks and regular (inhibitory)
spatial structure.
"""

from .errors import (
    BudgetError,
    DegenerateObjectiveError,
    DegenerateRangeError,
    EstimationFailedError,
    FeatureMismatchError,
    InvalidInputError,
    NumericalDegeneracyError,
    NumericalError,
    ParseError,
    RangeError,
    SaturationError,
    ScmppError,
    SimulationDegeneracyError,
)
from .likelihood import (
    EventHistory,
    LikelihoodContext,
    QuadratureSchedule,
    ScParameters,
    integrated_temporal_intensity,
    interaction_log_f,
    neg_log_likelihood,
    psi,
    spatial_log_density,
    temporal_intensity,
)
from .pattern import (
    DistanceMetric,
    MarkedPattern,
    MarkedPoint,
    Window,
    nn_distance_summary,
    pairwise_distances,
    window_geometry,
)
from .timemap import TemporalPattern, TimeMapping, order_by_time, size_to_time, time_to_size

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
