"""Exception and warning types shared across the package."""


class HeisenbergError(Exception):
    """Base class for all package errors."""


class DimensionError(HeisenbergError, ValueError):
    """Points or vectors with mismatched group index."""


class DomainValueError(HeisenbergError, ValueError):
    """A scalar parameter outside its admissible range (e.g. rho <= 0)."""


class PoleError(HeisenbergError, ValueError):
    """Evaluation at a singular point (the identity for the inversion, the pole of T, p = q for Gamma)."""


class CharacteristicError(HeisenbergError, ValueError):
    """A boundary point too close to the characteristic set (|z| small)."""


class OutOfDomainError(HeisenbergError, ValueError):
    """A function or field was evaluated outside the region where it is defined."""


class SamplingError(HeisenbergError, RuntimeError):
    """A rejection sampler exhausted its budget."""


class PreconditionError(HeisenbergError, ValueError):
    """Documented hypotheses of an operation are violated."""


class ResolutionError(HeisenbergError, RuntimeError):
    """A quadrature or probe reaches a region the grid does not resolve."""


class AssemblyError(HeisenbergError, RuntimeError):
    """The grid cannot support the stencil at some nodes."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class SolverError(HeisenbergError, RuntimeError):
    """The linear solver failed to reach its tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class BudgetError(HeisenbergError, RuntimeError):
    """A Monte Carlo budget is too small for the requested relative error."""


class GeometryError(HeisenbergError, RuntimeError):
    """Empty or degenerate geometric sample (e.g. an empty cone)."""


class UnsupportedError(HeisenbergError, NotImplementedError):
    """Operation not available for this domain or group index."""


class PoleWarning(UserWarning):
    """A surface patch straddles a characteristic point."""


class ReliabilityWarning(UserWarning):
    """Monte Carlo output with an elevated censored fraction."""
