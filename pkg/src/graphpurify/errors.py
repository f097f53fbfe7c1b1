"""Exception hierarchy shared by all graphpurify modules."""


class GraphPurifyError(Exception):
    """Base class for every error raised by this package."""


class SelfLoopError(GraphPurifyError):
    """An edge connects a node to itself."""


class IndexOutOfRangeError(GraphPurifyError):
    """A node index is outside [0, num_nodes)."""


class MissingEdgeError(GraphPurifyError):
    """An edge scheduled for deletion does not exist in the graph."""


class DisconnectedError(GraphPurifyError):
    """A spanning tree was requested for a graph that is not connected."""


class NonBinaryFeaturesError(GraphPurifyError):
    """Jaccard scoring requires strictly 0/1 feature entries."""


class RankOutOfRangeError(GraphPurifyError):
    """Requested approximation rank is not in [1, num_nodes]."""


class NegativeEntryError(GraphPurifyError):
    """Entropy aggregation requires non-negative matrix entries."""


class ZeroProbabilityError(GraphPurifyError):
    """A probability matrix contains a zero entry; smooth it first."""


class ShapeMismatchError(GraphPurifyError):
    """Matrix shapes disagree with the model or dataset dimensions."""


class EmptyMaskError(GraphPurifyError):
    """Accuracy was requested over an empty node mask."""


class BudgetInfeasibleError(GraphPurifyError):
    """The attack budget cannot be met with the available edge slots."""


class ParseError(GraphPurifyError):
    """A dataset file is malformed; message carries file and line number."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class DimensionMismatchError(GraphPurifyError):
    """Dataset pieces disagree on node/feature/class counts."""


class MissingFileError(GraphPurifyError):
    """A required dataset file is absent."""


class ConfigError(GraphPurifyError):
    """An invalid configuration value or combination was supplied."""
