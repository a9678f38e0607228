"""Exception hierarchy shared by all modules.

Every error carries a stable machine-readable ``code`` (its class name) so
the CLI can map failures onto exit codes and emit structured JSON.
"""

from __future__ import annotations


class OrderSepError(Exception):
    """Base class; ``detail`` is free-form context for reports."""

    exit_code = 4

    def __init__(self, detail: object = None):
        self.detail = detail
        super().__init__(str(detail) if detail is not None else self.__class__.__name__)

    @property
    def code(self) -> str:
        return self.__class__.__name__


# --- input / hypothesis violations (exit 2) ---------------------------------

class HypothesisViolation(OrderSepError):
    exit_code = 2


class NotAGroup(HypothesisViolation):
    pass


class NotNormal(HypothesisViolation):
    pass


class BadSyllable(HypothesisViolation):
    pass


class InfiniteFactor(HypothesisViolation):
    pass


class NotInCartesian(HypothesisViolation):
    pass


class NotCyclicallyReduced(HypothesisViolation):
    pass


class FactorElement(HypothesisViolation):
    pass


class TrivialTarget(HypothesisViolation):
    pass


class ConflictingMarks(HypothesisViolation):
    pass


class ConjugatePair(HypothesisViolation):
    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"targets {i} and {j} are conjugate up to inversion")


class SharedFactorOrder(HypothesisViolation):
    def __init__(self, order: int):
        self.order = order
        super().__init__(f"both factors contain nontrivial elements of order {order}")


class EmptyTargets(HypothesisViolation):
    pass


class NoFactorHom(HypothesisViolation):
    """Factor-quotient search exhausted; instance is outside the supported
    constructive range (this does not prove the instance inseparable)."""


# --- budgets (exit 3) --------------------------------------------------------

class BudgetExceeded(OrderSepError):
    exit_code = 3


class SearchBudgetExceeded(BudgetExceeded):
    def __init__(self, seed: int, attempts: int):
        self.seed, self.attempts = seed, attempts
        super().__init__(f"search failed after {attempts} attempts (seed {seed})")


class IterationBudgetExceeded(BudgetExceeded):
    def __init__(self, k_max: int):
        self.k_max = k_max
        super().__init__(f"equalization did not split within {k_max} iterations")


class RepairBudgetExceeded(BudgetExceeded):
    pass


class ModulusBudgetExceeded(BudgetExceeded):
    pass


# --- internal defects / verification failures (exit 4) -----------------------

class PostconditionFailed(OrderSepError):
    pass


class InternalError(OrderSepError):
    pass


# --- serialization (exit 5) ---------------------------------------------------

class ParseError(OrderSepError):
    exit_code = 5
