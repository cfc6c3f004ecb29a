"""Exception types shared across the engine.

Every error that callers are expected to branch on gets its own class; all
inherit from TelekinError so a driver loop can catch the whole family.
"""


class TelekinError(Exception):
    """Base class for all engine errors."""


class UnknownFrame(TelekinError, KeyError):
    """Requested frame name does not exist in the kinematic model."""


class DofLengthMismatch(TelekinError, ValueError):
    """Joint vector length does not match the model's DoF count."""


class MissingCalibration(TelekinError, ValueError):
    """A frame conversion was attempted without the needed calibration."""


class DegenerateBone(TelekinError, ValueError):
    """A skeleton bone's effective length collapsed below the floor (0.01 m)."""


class MissingCorrespondence(TelekinError, KeyError):
    """No robot link is paired with the given skeleton bone."""


class NonPositiveLength(TelekinError, ValueError):
    """A measured segment length must be strictly positive."""


class MissingScale(TelekinError, KeyError):
    """rescale requires a scale factor for every segment in the chain."""


class InvalidKeypoints(TelekinError, ValueError):
    """Hand keypoint set violates its invariants (count, origin, spacing)."""


class IncompleteMapping(TelekinError, ValueError):
    """Joint-correspondence table does not cover every robot hand DoF."""


class SizeMismatch(TelekinError, ValueError):
    """Filter bank size does not match the command DoF count."""


class NonFiniteMeasurement(TelekinError, ValueError):
    """A filter measurement was NaN or infinite."""


class SingularUpdate(TelekinError, ArithmeticError):
    """IK step produced non-finite values (damping misconfiguration)."""


class MalformedFrame(TelekinError, ValueError):
    """A stream line failed schema or invariant validation."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class NonMonotonicTimestamp(MalformedFrame):
    """Frame timestamps must be strictly increasing within a stream."""

    def __init__(self, line_no: int, t_prev: float, t: float):
        MalformedFrame.__init__(
            self, line_no, f"timestamp {t} not after previous {t_prev}")
        self.t_prev = t_prev
        self.t = t


class UnsupportedModality(TelekinError, ValueError):
    """Frame modality is not one of vision / vr / mocap / exo."""


class EpisodeClosed(TelekinError, RuntimeError):
    """Tick recorded against an already-finalized episode."""


class EmptyInput(TelekinError, ValueError):
    """Aggregation requires at least one finalized episode."""


class NoOverlap(TelekinError, ValueError):
    """Correlation needs overlapping (task, modality) keys in both reports."""


class ModelFormatError(TelekinError, ValueError):
    """Robot model document violates the file format or its invariants."""


class SceneFormatError(TelekinError, ValueError):
    """Task scene document violates the file format or its invariants."""


class ConfigError(TelekinError, ValueError):
    """Session configuration is inconsistent or references missing files."""
