"""Exception taxonomy shared across the toolkit.

Every domain failure maps to one of these classes so callers (CLI exit
codes, HTTP status mapping) can dispatch on type rather than message text.
"""


class PcmError(Exception):
    """Base class for all domain errors."""


# --- matrix construction / parsing ---

class ReciprocityViolation(PcmError):
    def __init__(self, i, j, a_ij, a_ji):
        self.i, self.j = i, j
        super().__init__(f"entries ({i},{j})={a_ij} and ({j},{i})={a_ji} are not reciprocal")


class AsymmetricMissing(PcmError):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"entry ({i},{j}) is missing but ({j},{i}) is not")


class NonPositiveEntry(PcmError):
    def __init__(self, i, j, value):
        self.i, self.j = i, j
        super().__init__(f"entry ({i},{j})={value} must be strictly positive and finite")


class BadDimension(PcmError):
    pass


class ScaleViolation(PcmError):
    def __init__(self, i, j, value):
        self.i, self.j = i, j
        super().__init__(f"entry ({i},{j})={value} is not on the 1..9 scale or its reciprocals")


class MatrixIncomplete(PcmError):
    pass


# --- numerics ---

class NoConvergence(PcmError):
    pass


class DisconnectedGraph(PcmError):
    pass


class TooManyTrees(PcmError):
    def __init__(self, count, cap):
        self.count, self.cap = count, cap
        super().__init__(f"graph has {count} spanning trees, above the cap {cap}")


# --- linear programming ---

class LpNumericalFailure(PcmError):
    pass


class Unbounded(PcmError):
    pass


class CycleDetected(PcmError):
    pass


class Infeasible(PcmError):
    pass


class NotIndependent(PcmError):
    pass


# --- random-index machinery ---

class OutOfRange(PcmError):
    pass


class NotInTable(PcmError):
    pass


class UnknownBaseRi(PcmError):
    pass


class PatternDisconnected(PcmError):
    pass


class InvalidSamples(PcmError):
    pass


# --- structured builders ---

class CycleFound(PcmError):
    pass


class NotWeaklyConnected(PcmError):
    pass


class ValueBelowOne(PcmError):
    def __init__(self, where, value):
        super().__init__(f"{where}={value} must be >= 1")


class WrongArity(PcmError):
    pass


class DimensionMismatch(PcmError):
    pass


class NotBwmShape(PcmError):
    pass


class ScaleUnsupported(PcmError):
    pass


class NegativeCount(PcmError):
    pass


class NonzeroDiagonal(PcmError):
    pass


# --- elicitation ---

class BadLabels(PcmError):
    pass


class PolicyArityMismatch(PcmError):
    pass


class WrongPair(PcmError):
    pass


class SessionClosed(PcmError):
    pass


class BadValue(PcmError):
    pass


class TooLarge(PcmError):
    pass


class BadMetric(PcmError):
    pass
