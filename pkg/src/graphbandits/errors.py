"""Exception types raised across the package.

Every error below derives from GraphBanditsError so callers can catch the
package's failures with one except clause. The CLI maps ConfigError (and
invalid inputs surfacing during config parsing) to exit code 2.
"""


class GraphBanditsError(Exception):
    """Base class for all graphbandits errors."""


class SizeLimitExceeded(GraphBanditsError):
    """Exact independence-number computation refused: graph above the size cap."""


class InvalidSubset(GraphBanditsError):
    """Subset U contains a node without a self-loop, or is empty."""


class InvalidDistribution(GraphBanditsError):
    """Vector is not a probability distribution (negative mass or sum off 1)."""


class InvalidParams(GraphBanditsError):
    """Bad structural parameters (graph construction, generators, environments)."""


class DomainError(GraphBanditsError):
    """Argument outside the mathematical domain, e.g. q not in (0,1)."""


class ConvergenceFailure(GraphBanditsError):
    """Root finder exhausted its iteration budget without meeting tolerance."""


class NonFiniteInput(GraphBanditsError):
    """NaN or infinity where a finite float array is required."""


class MissingSelfLoop(GraphBanditsError):
    """Estimator requires every node to observe itself and one does not."""


class NotStronglyObservable(GraphBanditsError):
    """Graph violates strong observability (a node neither sees itself nor is seen by all)."""


class DegenerateProbability(GraphBanditsError):
    """Neighborhood probability underflowed below the representable guard (1e-300)."""


class InvalidInputs(GraphBanditsError):
    """Tuning inputs out of range (K, horizon, or independence-number guess)."""


class ConfigError(GraphBanditsError):
    """Run/sweep configuration is malformed or inconsistent."""
