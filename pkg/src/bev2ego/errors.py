"""Exception hierarchy shared across the toolkit."""


class Bev2EgoError(Exception):
    """Base class for all toolkit errors."""


class DepthError(Bev2EgoError):
    """Point is at or behind the camera pinhole."""


class CoincidentError(Bev2EgoError):
    """Object center coincides with the camera ground position."""


class DomainError(Bev2EgoError):
    """Argument outside a function's mathematical domain."""


class DegenerateFootprint(Bev2EgoError):
    """Projected footprint has zero area."""


class SamplingError(Bev2EgoError):
    """Constrained sampler exhausted its retry budget."""


class ConfigError(Bev2EgoError):
    """Invalid run or metric configuration."""


class ShapeMismatch(Bev2EgoError):
    """Arrays that must share dimensions do not."""


class MaskEmpty(Bev2EgoError):
    """Operation requires a non-empty mask."""


class LengthMismatch(Bev2EgoError):
    """Paired sequences differ in length."""


class SchemaError(Bev2EgoError):
    """Serialized document violates its schema."""


class CompositionError(Bev2EgoError):
    """A car footprint lands fully outside the canvas."""


class MaskMissing(Bev2EgoError):
    """A study frame is missing one of its car masks."""


class ServiceError(Bev2EgoError):
    """Base class for model-service failures."""


class ServiceUnavailable(ServiceError):
    """Service returned a 5xx or could not be reached."""


class Timeout(ServiceError):
    """Service did not answer within the configured timeout."""


class ProtocolError(ServiceError):
    """Request or response violates the wire schema."""


class RangeError(ProtocolError):
    """Request field outside its allowed range."""


class EmptyMask(ServiceError):
    """Segmentation prompt landed on background."""
