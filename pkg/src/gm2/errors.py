"""Exception hierarchy shared by every gm2 module.

Each class carries the process exit code the CLI uses for it, so the mapping
from library failure to exit status lives in one place.
"""


class GM2Error(Exception):
    exit_code = 1


class ParseError(GM2Error):
    exit_code = 19  # 2 is argparse's usage-error status


class DomainError(GM2Error, ValueError):
    exit_code = 3


class DegenerateConstant(DomainError):
    """c sits on the merge point e^{-1/2} where m1 = m2 = 1."""

    exit_code = 4


class InvalidPair(GM2Error, ValueError):
    exit_code = 5


class QuadratureFailure(GM2Error):
    exit_code = 6

    def __init__(self, msg, value=None, est_error=None):
        super().__init__(msg)
        self.value = value
        self.est_error = est_error


class StepUnderflow(GM2Error):
    exit_code = 7

    def __init__(self, msg, last_state=None):
        super().__init__(msg)
        self.last_state = last_state


class EventMiss(GM2Error):
    exit_code = 8


class DegenerateBody(GM2Error):
    exit_code = 9


class ConvexityViolation(GM2Error):
    exit_code = 10


class OriginNotInterior(GM2Error):
    exit_code = 11


class NotPositive(GM2Error, ValueError):
    exit_code = 12


class NotEven(GM2Error, ValueError):
    exit_code = 13


class L1TooLarge(GM2Error, ValueError):
    exit_code = 14


class ContinuationFailed(GM2Error):
    exit_code = 15

    def __init__(self, msg, t_reached=0.0):
        super().__init__(msg)
        self.t_reached = t_reached


class ConvexityLost(GM2Error):
    exit_code = 16


class BoundViolation(GM2Error):
    exit_code = 17

    def __init__(self, msg, quantity=None):
        super().__init__(msg)
        self.quantity = quantity


class IoError(GM2Error):
    exit_code = 18
