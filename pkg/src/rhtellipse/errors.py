"""Exception hierarchy for the ellipse detection pipeline."""


class RHTError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(RHTError, ValueError):
    """Image header or payload cannot be parsed."""


class TruncatedError(FormatError):
    """Image payload is shorter than the header promises."""


class UnsupportedError(FormatError):
    """Well-formed image using a feature we do not handle (e.g. maxval != 255)."""


class TooSmallError(RHTError, ValueError):
    """Raster too small for a 3x3 operator."""


class EmptyHistogramError(RHTError, ValueError):
    """Histogram has no mass."""


class NoEdgesError(RHTError):
    """Edge map has no foreground pixels, so there is nothing to sample."""


class ConfigError(RHTError, ValueError):
    """Configuration value outside its allowed range."""
