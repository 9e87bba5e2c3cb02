"""Exception types shared across the package."""


class ChainError(ValueError):
    """Invalid chain data: degenerate cells, non-finite coordinates, bad weights."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ChainFormatError(ChainError):
    """A chain file failed validation; ``field`` names the offending key."""

    def __init__(self, message, index=None, field=None):
        super().__init__(message, index)
        self.field = field


class PreconditionError(ValueError):
    """An operation's hypothesis does not hold for the given input."""

    def __init__(self, message, name=None, measured=None):
        super().__init__(message)
        self.name = name
        self.measured = measured


class NotClosedError(PreconditionError):
    pass


class SingularityError(PreconditionError):
    def __init__(self, message, singularity=None, cell=None, measured=None):
        super().__init__(message, name="singularity_off_support", measured=measured)
        self.singularity = singularity
        self.cell = cell


class QuadratureError(RuntimeError):
    """Adaptive refinement hit its depth bound without meeting tolerance."""

    def __init__(self, message, partial=None, worst_panel=None):
        super().__init__(message)
        self.partial = partial
        self.worst_panel = worst_panel
