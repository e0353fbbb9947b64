"""Error types shared across the package.

The CLI maps ConfigError to exit code 2 and every other ChaosLabError
to exit code 3.
"""


class ChaosLabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ChaosLabError):
    """Invalid experiment configuration (bad key, value, or file)."""


class SingularEvaluationError(ChaosLabError):
    """A singular kernel was evaluated at coincident points."""


class PoleError(ChaosLabError):
    """A moment formula was evaluated at (or too close to) a gamma pole."""


class GridMismatchError(ChaosLabError):
    """Two grid-aligned objects do not share the same grid."""


class ProvenanceError(ChaosLabError):
    """Objects passed together were not derived from one another."""
