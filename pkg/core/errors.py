"""Error hierarchy shared by every pipeline stage.

Three families map onto CLI exit codes: configuration problems, file/data
problems and numeric degeneracies. Modules raise the most specific subclass.
"""

from __future__ import annotations


class RadiomicsError(Exception):
    """Root of all pipeline errors."""

    exit_code: int = 1


# --- Configuration ---

class ConfigError(RadiomicsError, ValueError):
    """Invalid configuration, spec or manifest."""

    exit_code = 2


# --- Data / I/O ---

class DataIOError(RadiomicsError, OSError):
    """Unreadable, missing or malformed input data."""

    exit_code = 3


class VolumeFormatError(DataIOError):
    """Volume file does not follow a supported format."""


class UnknownMagicError(VolumeFormatError):
    """NIfTI magic string is not 'n+1\\0'."""


class UnsupportedDatatypeError(VolumeFormatError):
    """Volume datatype outside int16/uint16/float32/float64."""


class PayloadSizeError(VolumeFormatError):
    """Declared dims disagree with the number of payload bytes."""


class FeatureMismatchError(DataIOError):
    """A required feature column is absent from a table."""


# --- Numeric degeneracy ---

class NumericDegeneracyError(RadiomicsError, ValueError):
    """Input is well-formed but numerically degenerate."""

    exit_code = 4


class EmptyMaskError(NumericDegeneracyError):
    """ROI mask has no voxels."""


class DegenerateExtentError(NumericDegeneracyError):
    """Resampled grid would have a zero-length axis."""


class DimsError(NumericDegeneracyError):
    """Array dims unsuitable for the requested operation."""


class DegenerateMatrixError(NumericDegeneracyError):
    """Every direction of a texture matrix is empty."""


class SingleClassError(NumericDegeneracyError):
    """Labels contain only one class."""


class FoldStratificationError(NumericDegeneracyError):
    """A cross-validation fold lacks one of the classes."""


class CohortTooSmallError(NumericDegeneracyError):
    """Cohort too small for the requested split."""


class DegenerateComparisonError(NumericDegeneracyError):
    """Paired AUC comparison has zero variance: no detectable difference."""
