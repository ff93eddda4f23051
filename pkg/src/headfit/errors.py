"""Exception types raised across the engine.

Every error the public API raises derives from HeadfitError so callers can
catch the whole family at a boundary (CLI, service) and map it to an exit
code or a wire error message.
"""


class HeadfitError(Exception):
    pass


# geometry
class DomainError(HeadfitError):
    """Parameter outside its mathematical domain (e.g. FOV not in (0, 180))."""


class BehindCamera(HeadfitError):
    """Point depth below the z epsilon; perspective division undefined."""


class Singular(HeadfitError):
    """4x4 pose with a non-invertible upper-left 3x3 block."""


class NonRigidPose(HeadfitError):
    """Pose failed the rigidity check (bottom row / orthonormality)."""


# GLB / mesh
class BadMagic(HeadfitError):
    """Container or chunk magic bytes are wrong."""


class UnsupportedVersion(HeadfitError):
    """GLB container version other than 2."""


class TruncatedChunk(HeadfitError):
    """Chunk framing runs past the end of the byte stream."""


class MissingPositions(HeadfitError):
    """No primitive carried a usable POSITION accessor."""


class UnsupportedEncoding(HeadfitError):
    """Draco / sparse / non-float32 geometry we deliberately do not decode."""


class EmptyMesh(HeadfitError):
    """Mesh with no vertices where at least one is required."""


# segmentation
class NoHeadDetected(HeadfitError):
    """No connected component survived thresholding and size filtering."""


class RleLengthMismatch(HeadfitError):
    """Run lengths do not cover width*height exactly (or are negative)."""


# registration
class DegenerateModelBox(HeadfitError):
    """Projected model box too small to derive scale factors from."""


class RangeError(HeadfitError):
    """Manual parameter outside its allowed range."""


# evaluation
class DegenerateGroundTruth(HeadfitError):
    """Ground-truth box has zero width or height."""


class BothEmpty(HeadfitError):
    """IoU of two zero-area boxes is undefined."""


class EmptyInput(HeadfitError):
    """Aggregation over an empty row list."""


# session files
class FormatVersionMismatch(HeadfitError):
    """Session file declares a format version this reader does not speak."""


class MalformedLine(HeadfitError):
    """A session file line failed to parse; carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class NonMonotonicSeq(HeadfitError):
    """Frame sequence numbers must be strictly increasing within a file."""


class ConfigError(HeadfitError):
    """Invalid synthetic-session configuration."""
