"""Exception types shared across the package."""


class CrfError(Exception):
    """Base class for all crfkit errors."""


class ValidationError(CrfError, ValueError):
    """Malformed or inconsistent input."""


class DegenerateStateError(ValidationError):
    """State vector with no usable amplitude content (e.g. all zeros)."""


class DegenerateFrameError(CrfError):
    """Frame without a single defined vertex; cannot occur for frames built from states."""


class ResourceLimitError(CrfError):
    """Requested problem size exceeds the configured dense-representation cap."""


class NumericalError(CrfError):
    """A numerical routine failed or produced an untrustworthy result."""


class UndefinedVertexError(ValidationError):
    """A zero-weight vertex was addressed where a defined one is required."""


class DegenerateAngleError(CrfError):
    """Angle requested for a direction vector of vanishing length."""


class PreconditionError(CrfError):
    """Operation called on inputs that fail its documented precondition."""
