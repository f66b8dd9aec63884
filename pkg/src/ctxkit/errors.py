"""Exception hierarchy shared by every module.

The CLI maps the three families to exit codes: validation errors to 3,
unknown resources to 4 and solver failures to 5.
"""

from __future__ import annotations


class CtxError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(CtxError, ValueError):
    """Input violates a documented invariant."""


class UnknownResource(CtxError, KeyError):
    """A named preset, measurement or preparation does not exist."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class SolverError(CtxError, RuntimeError):
    """A numerical or combinatorial solver could not finish."""


# scenario
class EmptyEdge(ValidationError):
    pass


class UncoveredVertex(ValidationError):
    pass


class DuplicateVertexInEdge(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class UnknownVertex(ValidationError):
    pass


class DuplicateVertex(ValidationError):
    pass


class InvalidDimension(ValidationError):
    pass


# models
class OutOfRange(ValidationError):
    pass


class EdgeNotNormalized(ValidationError):
    def __init__(self, edge, total: float):
        self.edge = tuple(edge)
        self.total = total
        super().__init__(f"edge {list(self.edge)} sums to {total!r}, expected 1")


class StructureMismatch(ValidationError):
    pass


class SearchBudgetExceeded(SolverError):
    def __init__(self, budget: int, what: str = "search"):
        self.budget = budget
        super().__init__(f"{what} exceeded the node budget of {budget}")


# graph invariants
class InvalidGraph(ValidationError):
    pass


class SolverDidNotConverge(SolverError):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"solver stopped after {iterations} iterations with residual {residual:.3e}"
        )


# sheaf
class RowNotNormalized(ValidationError):
    pass


class MarginalMismatch(ValidationError):
    def __init__(self, contexts, observable: str, gap: float):
        self.contexts = tuple(contexts)
        self.observable = observable
        self.gap = gap
        super().__init__(
            f"contexts {self.contexts} disagree on the marginal of {observable!r} "
            f"(max gap {gap:.3e})"
        )


class StateSpaceTooLarge(SolverError):
    pass


# quantum kernel
class NotHermitian(ValidationError):
    pass


class NotAState(ValidationError):
    pass


class NotAnEffect(ValidationError):
    pass


class NotAPVM(ValidationError):
    def __init__(self, family, reason: str = ""):
        self.family = family
        super().__init__(f"family {family!r} is not a PVM" + (f": {reason}" if reason else ""))


class NotAPOVM(ValidationError):
    pass


class IncidenceMismatch(ValidationError):
    pass


class EpsilonOutOfRange(ValidationError):
    pass


# pps
class ZeroPostSelectionProbability(ValidationError):
    pass


class OrthogonalPrePost(ValidationError):
    pass


class FamilyNotClosed(ValidationError):
    pass


# ontological models
class NotUnitVector(ValidationError):
    pass


class UnknownName(UnknownResource):
    pass
