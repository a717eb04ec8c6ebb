"""Exception types raised across the package."""


class CodedMatmulError(Exception):
    """Base class for all errors raised by hiercoded."""


class ShapeError(CodedMatmulError, ValueError):
    pass


class DivisibilityError(CodedMatmulError, ValueError):
    """A cut multiplicity does not divide the edge it is applied to."""

    def __init__(self, axis, length, parts):
        self.axis = axis
        self.length = length
        self.parts = parts
        super().__init__(
            f"axis {axis}: length {length} is not divisible into {parts} equal parts"
        )


class UnsupportedConfigurationError(CodedMatmulError, ValueError):
    pass


class InsufficientResultsError(CodedMatmulError):
    """Fewer distinct coded results than the recovery threshold."""

    def __init__(self, have, need):
        self.have = have
        self.need = need
        super().__init__(f"need {need} results with distinct evaluation points, have {have}")


class ConditioningError(CodedMatmulError):
    """The interpolation system is too ill-conditioned to trust."""

    def __init__(self, condition, limit):
        self.condition = condition
        self.limit = limit
        super().__init__(
            f"interpolation condition number {condition:.3e} exceeds limit {limit:.1e}"
        )


class IncompleteAssemblyError(CodedMatmulError):
    def __init__(self, missing, detail=""):
        self.missing = tuple(missing)
        msg = f"layers not decoded: {list(self.missing)}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class ConfigError(CodedMatmulError, ValueError):
    pass
