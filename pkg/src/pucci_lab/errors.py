"""Exception types shared across the library."""


class PucciLabError(Exception):
    """Base class for library errors."""


class CutLocusError(PucciLabError):
    """A log/reflect query reached or passed the injectivity radius."""


class SingularityError(PucciLabError):
    """Kernel evaluated on the diagonal z = x."""


class DomainError(PucciLabError):
    """Evaluation point too close to the boundary of the smooth domain."""


class TailError(PucciLabError):
    """Far-field truncation tail exceeds the requested tolerance."""


class LocalizationError(PucciLabError):
    """A touching-paraboloid argmin landed on the search-grid boundary."""


class SearchExhausted(PucciLabError):
    """No qualifying ring index found below the configured cap."""


class GridExhausted(PucciLabError):
    """A parameter search ran off the end of its trial grid."""


class ConfigError(PucciLabError):
    """Invalid experiment or decomposition configuration."""


class OutOfDomain(PucciLabError):
    """Query point outside the decomposition domain."""
