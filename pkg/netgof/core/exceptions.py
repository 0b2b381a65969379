class NetGofError(Exception):
    """Base class for every error raised by netgof."""


class EdgeListParseError(NetGofError):
    def __init__(self, path: str, line_number: int, line: str) -> None:
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: cannot parse edge line {line!r}")


class NetworkValidationError(NetGofError):
    """Adjacency data violates the simple undirected graph contract."""


class IsolatedNodeError(NetGofError):
    def __init__(self, nodes: list[int]) -> None:
        self.nodes = nodes
        preview = nodes[:10]
        super().__init__(
            f"{len(nodes)} isolated node(s) (e.g. {preview}); restrict to the giant component first"
        )


class SolverError(NetGofError):
    def __init__(self, message: str, residuals=None) -> None:
        self.residuals = residuals
        super().__init__(message)


class UndefinedStatisticError(NetGofError):
    """The cycle statistic has a zero denominator (triangle-free network)."""


class VertexHuntingError(NetGofError):
    pass


class EmptyClusterError(NetGofError):
    pass


class FitError(NetGofError):
    def __init__(self, model: str, message: str, community: int | None = None) -> None:
        self.model = model
        self.community = community
        super().__init__(f"{model}: {message}")


class NonIdentifiableError(NetGofError):
    pass


class ReducibleMatrixError(NetGofError):
    pass


class SimConfigError(NetGofError):
    pass


class ExperimentError(NetGofError):
    pass
