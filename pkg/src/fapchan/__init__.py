"""Statistics and information theory of the drift-diffusion first-arrival-position channel."""

from .errors import (
    DomainError,
    FapchanError,
    IncompatibleKernelError,
    InfiniteVarianceError,
    QuadratureError,
    UnnormalizedError,
    ValidationFailure,
    ZeroDriftError,
)
from .kernels import ChannelParams, Kernel, Regime, RegimeLabel, RegimeThresholds
from .quadrature import QuadConfig, QuadResult, TabulatedCdf
from .montecarlo import McConfig, SampleStats
from .infotheory import CapacityConfig, CapacityPoint, InterferencePoint

__version__ = "0.1.0"
