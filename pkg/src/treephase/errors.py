"""Semantic exception hierarchy.

Validation errors (bad inputs) are kept separate from budget errors
(computations that would exceed a configured resource cap) and from
no-result outcomes (well-posed queries whose answer is "there is none").
The CLI maps the three groups to distinct exit codes.
"""


class TreePhaseError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TreePhaseError, ValueError):
    """Invalid input; maps to CLI exit code 2."""


class NonPositiveWeight(ValidationError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"weight[{index}] = {value!r} is not strictly positive")


class NotNormalized(ValidationError):
    def __init__(self, total):
        self.total = total
        super().__init__(f"weights sum to {total!r}, expected 1 within 1e-9")


class AlphabetMismatch(ValidationError):
    def __init__(self, size_a, size_b):
        super().__init__(f"alphabet sizes differ: {size_a} vs {size_b}")


class ParameterOutOfRange(ValidationError):
    pass


class SpecMismatch(ValidationError):
    pass


class DegenerateWindow(ValidationError):
    pass


class OutOfDepth(ValidationError):
    pass


class BudgetError(TreePhaseError):
    """Resource cap exceeded; maps to CLI exit code 4."""


class AtomBudgetExceeded(BudgetError):
    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"convolution would produce {count} atoms, cap is {cap}")


class DepthBudget(BudgetError):
    def __init__(self, vertices, cap):
        self.vertices = vertices
        self.cap = cap
        super().__init__(f"truncation holds {vertices} vertices, cap is {cap}")


class Overflow(BudgetError):
    def __init__(self, message):
        super().__init__(message)


class NoResult(TreePhaseError):
    """Well-posed query with no answer; maps to CLI exit code 3."""


class NoBlockLength(NoResult):
    BOUND_IMPOSSIBLE = "bound-impossible"
    MMAX_EXHAUSTED = "mmax-exhausted"

    def __init__(self, reason, detail=""):
        self.reason = reason
        msg = f"no admissible block length ({reason})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
