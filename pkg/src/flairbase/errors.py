"""Exception types raised across the package.

Everything that signals bad input data derives from :class:`DataError`; the
CLI maps those to exit code 2.
"""


class DataError(ValueError):
    """Input data could not be interpreted."""


# nifti
class NiftiError(DataError):
    pass


class NotNifti(NiftiError):
    pass


class UnsupportedDatatype(NiftiError):
    pass


class InconsistentHeader(NiftiError):
    pass


class TruncatedPayload(NiftiError):
    pass


class DecompressFailed(NiftiError):
    pass


class NonFiniteData(NiftiError):
    pass


class ValueRangeError(NiftiError):
    pass


# volume / method
class WindowOutOfBounds(DataError):
    pass


class GtOutOfRange(DataError):
    pass


class EmptyMask(DataError):
    pass


# metrics
class DimMismatch(DataError):
    pass


class NoPositives(DataError):
    pass


class DegenerateLabels(DataError):
    pass


class ScanError(DataError):
    """Wraps a failure while processing one scan of a manifest."""

    def __init__(self, scan_id: str, cause: Exception):
        self.scan_id = scan_id
        self.cause = cause
        super().__init__(f"scan {scan_id!r}: {type(cause).__name__}: {cause}")
