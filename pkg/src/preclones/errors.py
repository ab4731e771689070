"""Exception types shared across the package."""


class PrecloneError(Exception):
    """Base class for all library errors."""


class ParseError(PrecloneError):
    """Malformed tree, automaton, formula or dump text."""


class RankOverflow(PrecloneError):
    """A composition would produce an element above the truncation bound."""


class BudgetExceeded(PrecloneError):
    """A closure computation grew past its element budget."""


class NotACongruence(PrecloneError):
    """A partition is not stable under composition.

    Carries a witnessing composition in ``witness``.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DeterminismViolation(PrecloneError):
    """A quantifier family failed to assign exactly one letter to a node.

    ``node`` is the offending node id, ``satisfied`` the set of letters
    whose formulas held there.
    """

    def __init__(self, message, node=None, satisfied=None):
        super().__init__(message)
        self.node = node
        self.satisfied = satisfied
