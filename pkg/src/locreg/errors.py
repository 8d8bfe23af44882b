"""Exception hierarchy shared by every module in the package."""


class LocregError(Exception):
    """Base class. ``code`` is the machine-readable name used by the CLI."""

    code = "LocregError"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class EmptyPointSet(LocregError, ValueError):
    code = "EmptyPointSet"


class DimensionMismatch(LocregError, ValueError):
    code = "DimensionMismatch"


class KTooLarge(LocregError, ValueError):
    code = "KTooLarge"


class KOutOfRange(LocregError, ValueError):
    code = "KOutOfRange"


class NonPositiveBandwidth(LocregError, ValueError):
    code = "NonPositiveBandwidth"


class DegenerateCoordinate(LocregError, ValueError):
    code = "DegenerateCoordinate"


class NoSupport(LocregError, ArithmeticError):
    """Every kernel weight at the query point is zero."""

    code = "NoSupport"

    def __init__(self, message, row_id=None):
        super().__init__(message)
        self.row_id = row_id


class AllPointsDegenerate(LocregError, ArithmeticError):
    code = "AllPointsDegenerate"


class Infeasible(LocregError, ArithmeticError):
    """A candidate bandwidth cannot be scored."""

    code = "Infeasible"

    def __init__(self, h, reason):
        super().__init__(f"bandwidth {h!r} infeasible: {reason}")
        self.h = h
        self.reason = reason


class BadGrid(LocregError, ValueError):
    code = "BadGrid"


class NoFeasibleBandwidth(LocregError, ArithmeticError):
    code = "NoFeasibleBandwidth"


class BlockTooLarge(LocregError, ValueError):
    code = "BlockTooLarge"


class BadConfig(LocregError, ValueError):
    code = "BadConfig"
