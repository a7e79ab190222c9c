"""Exception types shared across modules.

Every mathematical failure carries the name of the check that failed so the
command line front end can report it.
"""


class HodgeError(Exception):
    """Base class for failed mathematical checks."""

    check = "unnamed"

    def __init__(self, message, check=None):
        super().__init__(message)
        if check is not None:
            self.check = check


class DatumError(HodgeError):
    check = "degeneration-datum"


class DecompositionFails(HodgeError):
    check = "hodge-decomposition"


class NotPolarized(HodgeError):
    check = "polarization"


class NotMHS(HodgeError):
    check = "mixed-hodge-structure"

    def __init__(self, weight, message=None):
        self.weight = weight
        super().__init__(message or "graded piece of weight %d is not a Hodge structure" % weight)


class PreconditionFails(HodgeError):
    check = "precondition"


class RecognitionFails(HodgeError):
    check = "sl2-recognition"


class InvalidLimitDatum(HodgeError):
    check = "limit-datum"


class ConsistencyError(HodgeError):
    """An internal postcondition failed; this signals a bug rather than bad input."""

    check = "internal-consistency"
