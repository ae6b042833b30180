"""Exception hierarchy shared by the library and the CLI."""


class HyperTopoError(Exception):
    """Base class for every error raised by this package."""


class ShapeMismatchError(HyperTopoError, ValueError):
    pass


class InvalidGridError(HyperTopoError, ValueError):
    """A mask or probability map violates its value/shape invariants."""


class TopologyInvariantError(HyperTopoError, RuntimeError):
    """An internal topological identity failed (e.g. a negative beta1).

    This always indicates a bug; callers should never catch and clamp it.
    """


class DegenerateBatchError(HyperTopoError, ValueError):
    """No anchor in a contrastive batch has both a positive and a negative."""


class CapacityError(HyperTopoError, ValueError):
    """Synthetic placement could not fit the requested shapes."""


class FormatError(HyperTopoError, ValueError):
    """Base for file codec errors."""


class MalformedHeaderError(FormatError):
    pass


class DimensionOverflowError(FormatError):
    pass


class TruncatedPayloadError(FormatError):
    pass


class BadMagicError(FormatError):
    pass


class ValueRangeError(FormatError):
    pass
