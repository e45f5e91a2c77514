"""Exception and warning types shared across the package."""


class GmsError(Exception):
    """Base class for every error raised by this package."""


class GmsWarning(UserWarning):
    """Non-fatal quirk tolerated while reading a file."""


class ChunkError(GmsError):
    """Problem at the raw chunk layer."""


class MalformedChunkIdError(ChunkError):
    """Chunk identifier is not 4 printable ASCII bytes."""


class TruncatedDataError(ChunkError):
    """Fewer bytes available than a size field or primitive width requires."""


class OversizeChunkError(ChunkError):
    """Chunk payload does not fit a 32-bit size field."""


class FormatError(GmsError):
    """Document-level decode failure."""


class BadMagicError(FormatError):
    """Input does not start with a recognized FORM header."""


class UnsupportedVersionError(FormatError):
    """File declares a major version this reader does not understand."""


class StructureError(FormatError):
    """Chunk sequence violates the document grammar."""


class IllegalCodeError(FormatError):
    """Enumeration code outside the legal set (dimension, variable or sample type)."""


class SceneValidationError(GmsError):
    """Scene or frame data failed validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"scene validation failed: {lines}")


class SampleRangeError(GmsError):
    """Sample value cannot be represented in the declared storage type."""


class WidthMismatchError(GmsError):
    """Frame row does not have one value per declared track."""


class FinalizedError(GmsError):
    """Operation on a writer that was already finalized."""


class FactorError(GmsError):
    """Resampling factor is not a positive integer."""


class UnknownPathError(GmsError):
    """No channel matches the requested (unit, channel) pair."""


class AxisRangeError(GmsError):
    """Axis index is outside the channel's track range."""


class EmptySignalError(GmsError):
    """Statistics requested over zero samples."""


class ManifestMismatchError(GmsError):
    """CSV columns disagree with the sidecar manifest structure."""
