"""Semantic exception hierarchy.

Every failure mode that a caller may want to branch on gets its own class;
generic misuse (wrong shapes, bad arguments) raises ValueError as usual.
"""


class BmtkError(Exception):
    """Base class for all library-specific errors."""


class DivergentTail(BmtkError):
    """A tail model makes the requested integral divergent."""


class SingularWeight(BmtkError):
    """The integrand does not vanish near a non-integrable weight singularity."""


class TailMismatch(BmtkError):
    """Tail model disagrees with the outermost grid sample beyond tolerance."""


class TailUnbounded(BmtkError):
    """Tail model fails to force the required limit at infinity."""


class OutOfSpan(BmtkError):
    """Requested evaluation window exits the sampled grid span."""


class NotDivergent(BmtkError):
    """Operation requires a divergent interval series but got a convergent one."""


class NotAlmostDecreasing(BmtkError):
    """Operation requires an almost-decreasing phase but the test failed."""


class ZeroPoint(BmtkError):
    """A point sequence contains the origin where it is not allowed."""


class NonRealPoint(BmtkError):
    """A real point sequence was required but complex points are present."""


class MissingTailDensity(BmtkError):
    """An operation needs a declared asymptotic density and none was given."""


class NoBracket(BmtkError):
    """Bisection could not bracket a finite transition value."""


class ZeroOnBoundary(BmtkError):
    """Evaluation requested at a boundary zero of a Blaschke product."""


class NotIntertwining(BmtkError):
    """Level-set sequences are not strictly intertwining."""


class NotIncreasing(BmtkError):
    """A strictly increasing phase was required."""


class LevelSetMismatch(BmtkError):
    """Queried level points are not level points of the model."""


class AtLevelPoint(BmtkError):
    """Derivative evaluation requested exactly at a level point."""


class NonConvergence(BmtkError):
    """Iterative solver exhausted its budget; carries the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
