"""Exception hierarchy shared by all fjbvp modules."""


class FJError(ValueError):
    """Base class for every error raised by this package."""


class NegativeWeight(FJError):
    pass


class RowSumViolation(FJError):
    def __init__(self, row: int, deviation: float):
        self.row = row
        self.deviation = deviation
        super().__init__(f"row {row} sums to 1{deviation:+.3e}")


class IsolatedNode(FJError):
    pass


class AsymmetricAdjacency(FJError):
    pass


class EmptyBoundary(FJError):
    pass


class DimensionMismatch(FJError):
    pass


class NotWellPosed(FJError):
    """The interior iteration matrix has spectral radius >= 1.

    ``witness`` holds the node ids of a closed, fully susceptible interior
    class when one was found; ``reason`` names the gate that failed.
    """

    def __init__(self, message: str, rho: float = float("nan"), witness=None, reason: str = ""):
        self.rho = rho
        self.witness = list(witness) if witness is not None else None
        self.reason = reason
        super().__init__(message)


class CapReached(FJError):
    pass


class NeumannNotConverged(FJError):
    pass


class NotRandomWalkSystem(FJError):
    pass


class SpectralGapViolation(FJError):
    pass


class PartitionMismatch(FJError):
    pass


class NotInterior(FJError):
    pass


class PowerIterationDiverged(FJError):
    pass


class ZeroVariance(FJError):
    pass


class EmptySample(FJError):
    pass


class AllRunsIllPosed(FJError):
    pass


class ParseError(FJError):
    pass
