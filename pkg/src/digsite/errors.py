"""Exception types shared across the engine."""


class DigError(Exception):
    """Base class for all engine errors."""


class GridConfigError(DigError):
    """Grid construction rejected (dimension overflow, artifact on boundary)."""


class DegenerateArtifactError(DigError):
    """Artifact SDF produces no surface on the grid."""


class PackageParseError(DigError):
    """Artifact package document is not well-formed."""


class PackageValidationError(DigError):
    """Artifact package parsed but violates an invariant."""


class SessionError(DigError):
    """Session operation rejected (terminal status, non-monotone time)."""


class UnknownToolError(SessionError):
    """Tool name not present in the artifact spec."""


class ReplayError(DigError):
    """Replay document malformed or inconsistent with the given spec."""


class ProtocolError(DigError):
    """Wire frame malformed or of unknown type."""
