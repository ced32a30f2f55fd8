"""Shared error vocabulary for the workbench.

Every module raises subclasses of HwbError so the CLI can map failures to
exit codes uniformly (3 for usage/input errors, 2 for inconclusive outcomes).
"""

from __future__ import annotations


class HwbError(Exception):
    pass


class ValidationError(HwbError):
    """A signature description is ill formed. Carries every violation found."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))


class MorphismError(HwbError):
    """A morphism description is not total / not profile-compatible.

    problems is a list of (symbol, reason) pairs covering every incompatible
    symbol, not just the first.
    """

    def __init__(self, problems):
        self.problems = tuple(problems)
        first = self.problems[0] if self.problems else ("?", "unknown")
        self.symbol, self.reason = first
        super().__init__("; ".join(f"{s}: {r}" for s, r in self.problems))


class CompositionError(HwbError):
    pass


class ClashError(HwbError):
    pass


class FlexibleQuantificationError(ClashError):
    """A constant or variable was declared at a flexible sort."""


class IllFormedTerm(HwbError):
    pass


class IllFormedSentence(HwbError):
    pass


class ParseError(HwbError):
    def __init__(self, message, line, column, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        suffix = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"line {line}, column {column}: {message}{suffix}")


class ResolveError(HwbError):
    def __init__(self, name, message=None):
        self.name = name
        super().__init__(message or f"unresolved name: {name}")


class EmptyCarrier(HwbError):
    """Term evaluation hit an empty carrier / undenoting operation."""

    def __init__(self, sort, world=None):
        self.sort = sort
        self.world = world
        where = f" at world {world}" if world is not None else ""
        super().__init__(f"no value of sort {sort}{where}")


class ReductMismatch(HwbError):
    def __init__(self, symbol, world, detail=""):
        self.symbol = symbol
        self.world = world
        super().__init__(f"reducts differ at {symbol} (world {world}) {detail}".rstrip())


class EmptyFrame(HwbError):
    pass


class BoundTooSmall(HwbError):
    pass


class CriterionViolation(HwbError):
    pass


class NoRigidTerm(HwbError):
    """No rigid ground term of a needed sort; should be unreachable once the
    interpolation criterion passed."""

    def __init__(self, sort):
        self.sort = sort
        super().__init__(f"no rigid ground term of sort {sort}")


class BudgetExceeded(HwbError):
    def __init__(self, nodes_visited, budget):
        self.nodes_visited = nodes_visited
        self.budget = budget
        super().__init__(f"search budget exhausted ({nodes_visited} >= {budget} nodes)")


class ConsistencyLost(HwbError):
    pass


class OracleInconclusive(HwbError):
    pass


class JointConsistencyLost(HwbError):
    def __init__(self, step, candidate, message=""):
        self.step = step
        self.candidate = candidate
        super().__init__(message or f"joint consistency lost at step {step} on {candidate}")


class BudgetExhausted(HwbError):
    """A chain construction ran out of scheduled steps before stabilizing."""
