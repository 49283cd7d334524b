"""Exception types raised by the toolkit.

Every contract violation raises a named subclass of :class:`VideoMixError` so
callers (and the CLI) can distinguish bad inputs from internal bugs. Messages
always name the offending field or value.
"""


class VideoMixError(Exception):
    """Base class for all toolkit errors."""


# --- container format ---------------------------------------------------


class BadMagic(VideoMixError):
    pass


class VersionUnsupported(VideoMixError):
    pass


class TruncatedPayload(VideoMixError):
    pass


class DimZero(VideoMixError):
    pass


class UnsupportedDtype(VideoMixError):
    pass


class ValueOutOfRange(VideoMixError):
    pass


# --- labels ---------------------------------------------------------------


class NegativeMass(VideoMixError):
    pass


class MassNotUnit(VideoMixError):
    pass


class LabelTooShort(VideoMixError):
    pass


# --- sampling and mixing ----------------------------------------------------


class NonPositiveAlpha(VideoMixError):
    pass


class CoordsOutOfRange(VideoMixError):
    pass


class ShapeMismatch(VideoMixError):
    pass


class LabelDimMismatch(VideoMixError):
    pass


class BatchTooSmall(VideoMixError):
    pass


class MaskTooLarge(VideoMixError):
    pass


# --- clip pipeline ----------------------------------------------------------


class SpecInfeasible(VideoMixError):
    pass


class TooFewFrames(VideoMixError):
    pass


class CropTooLarge(VideoMixError):
    pass


class DegenerateScaleRange(VideoMixError):
    pass


# --- feature mixing ----------------------------------------------------------


class TooManyBins(VideoMixError):
    pass


# --- evaluation ---------------------------------------------------------------


class BadRecord(VideoMixError):
    pass


class DimMismatch(VideoMixError):
    pass


class EmptyInterval(VideoMixError):
    pass


# --- toy training -------------------------------------------------------------


class Diverged(VideoMixError):
    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")
