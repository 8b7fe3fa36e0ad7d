"""Exception types shared across the package.

The CLI groups these onto its exit-code contract: usage errors exit 1,
file/data errors exit 2, numeric failures exit 3.
"""


class BandmixError(Exception):
    """Base class for every error this package raises on purpose."""


# file and format errors

class IoFailure(BandmixError):
    """Underlying file operation failed."""


class MalformedHeader(BandmixError):
    """Tensor container header does not parse (magic, version or dtype)."""


class TruncatedPayload(BandmixError):
    """Tensor payload byte count does not match the header dims."""


class NonFiniteValue(BandmixError):
    """Data contains NaN or Inf where finite values are required."""


class UnsupportedFormat(BandmixError):
    """Image is not binary PGM/PPM with 8-bit maxval 255."""


class MalformedImage(BandmixError):
    """Image header or raster is structurally invalid."""


class MalformedTable(BandmixError):
    """Corruption table does not match the expected CSV schema."""


# argument errors

class InvalidSize(BandmixError):
    pass


class ShapeMismatch(BandmixError):
    pass


class NonSquarePlane(ShapeMismatch):
    """Square spatial planes required; rectangular input is not padded."""


class CutoffOutOfRange(BandmixError):
    pass


class InvalidAlpha(BandmixError):
    pass


class InvalidTau(BandmixError):
    pass


class InvalidSpec(BandmixError):
    pass


class LengthMismatch(BandmixError):
    pass


class ZeroReference(BandmixError):
    pass


class EmptyTable(BandmixError):
    pass


class NoCorrectDecisions(BandmixError):
    pass


# numeric failures

class ZeroEnergyBatch(BandmixError):
    """Batch energy below the machine-zero threshold, ratio undefined."""


class DivergedTraining(BandmixError):
    """Training loss became non-finite."""
