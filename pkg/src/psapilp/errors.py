"""Exception hierarchy shared by the solver layers."""


class PilpError(Exception):
    """Base class for all solver errors."""


class InstanceError(PilpError):
    """Malformed or inconsistent problem data."""


class ParseError(InstanceError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class RelaxationInfeasible(PilpError):
    """The LP relaxation has no feasible point."""


class UnboundedRelaxation(InstanceError):
    """The LP relaxation is unbounded, violating the bounded-region assumption."""


class LpError(PilpError):
    pass


class IterationLimit(LpError):
    def __init__(self, message, best_bound=None):
        super().__init__(message)
        self.best_bound = best_bound


class NumericalBreakdown(LpError):
    pass


class DomainTooLarge(PilpError):
    """Exact projections requested over too many integer abscissae."""


class Aborted(PilpError):
    """A resource limit stopped the search; carries the incumbent found so far."""

    def __init__(self, reason, incumbent=None, value=None, stats=None):
        super().__init__(reason)
        self.reason = reason
        self.incumbent = incumbent
        self.value = value
        self.stats = stats
