"""Exception hierarchy shared by all phaseforge modules."""


class PhaseForgeError(Exception):
    """Base class for every error raised by this package."""


# --- label model ---------------------------------------------------------

class EmptyTrack(PhaseForgeError):
    """A frame track with zero frames where at least one is required."""


class MalformedSegments(PhaseForgeError):
    """Segment list violates the sorted / gap-free / maximal-run contract."""


class BlankInTrack(PhaseForgeError):
    """Operation requires a blank-free track but found a BLANK frame."""


# --- consensus -----------------------------------------------------------

class LengthMismatch(PhaseForgeError):
    """Inputs that must cover the same frames have different lengths."""


class NotEnoughAnnotators(PhaseForgeError):
    """A consensus merge needs at least two source tracks."""


class CaseMismatch(PhaseForgeError):
    """Tracks being combined belong to different cases."""


class ResolutionOverreach(PhaseForgeError):
    """A resolution touches a frame the merge already agreed on."""


class OverlappingResolutions(PhaseForgeError):
    """Ledger entries cover overlapping frame ranges."""


# --- evaluation ----------------------------------------------------------

class NoOverlap(PhaseForgeError):
    """Prediction log and truth track share no frames."""


class UnknownPhase(PhaseForgeError):
    """Phase id is not part of the taxonomy / confidence columns."""


class NotNormalized(PhaseForgeError):
    """Operation requires per-frame probability rows summing to one."""


class MissingConsensus(PhaseForgeError):
    """A delta table cell has no consensus AP to subtract from."""


class KeyMismatch(PhaseForgeError):
    """Models in a deviation report do not share the same key set."""


# --- splits --------------------------------------------------------------

class TooFewCases(PhaseForgeError):
    """Not enough cases for the requested fold geometry."""


class UnknownCovariate(PhaseForgeError):
    """A balancing covariate names no metadata field."""


# --- stream replay -------------------------------------------------------

class LogTooShort(PhaseForgeError):
    """Prediction log has fewer rows than the replay window."""


# --- ingest / store ------------------------------------------------------

class DenseIndexViolation(PhaseForgeError):
    """Frame column is not a dense ascending 0..N-1 (or offset..) range."""


class SchemaError(PhaseForgeError):
    """File header or row shape does not match the declared schema."""


class NumericError(PhaseForgeError):
    """A numeric cell failed to parse or is not finite."""


class NotFound(PhaseForgeError):
    """Named fixture, project, case, or artifact does not exist."""
