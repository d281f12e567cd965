"""Exception taxonomy shared across the package.

The CLI maps these onto its exit-code contract, so solver code should
raise the most specific class that applies rather than bare ValueError.
"""


class InfoCouplingError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(InfoCouplingError, ValueError):
    """Operands live on incompatible alphabets."""


class SingularWeightError(InfoCouplingError, ValueError):
    """A weighted operation hit a zero probability in its reference."""


class InvalidDistributionError(InfoCouplingError, ValueError):
    """A vector failed simplex validation.

    ``index`` points at the first offending coordinate when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateOutputError(InfoCouplingError, ValueError):
    """The output distribution has a zero entry, so the output weighting
    is singular and no coupling matrix exists."""


class CapacityError(InfoCouplingError, ValueError):
    """A materialized tensor lift would exceed the configured size cap."""


class ResolutionError(InfoCouplingError, ValueError):
    """A search budget is too coarse for the requested computation."""


class BudgetError(InfoCouplingError, RuntimeError):
    """An iterative routine exhausted its budget before converging.

    ``best_gap`` carries the best residual achieved, when meaningful.
    """

    def __init__(self, message, best_gap=None):
        super().__init__(message)
        self.best_gap = best_gap


class InputMismatchError(InfoCouplingError, ValueError):
    """Multiple inputs that must share an operating point do not."""


class InfeasibleError(InfoCouplingError, ValueError):
    """An equality-constrained optimization has an empty feasible set."""


class ConfigurationError(InfoCouplingError, ValueError):
    """A simulation or block-code configuration is internally inconsistent."""


class DegenerateLayerError(InfoCouplingError, ValueError):
    """A layered-code step was asked to operate on fewer than two symbols."""


class RegimeError(InfoCouplingError, ValueError):
    """Channel parameters fall outside the regime a closed form requires."""
