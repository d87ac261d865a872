#!/usr/bin/env python3

"""Exception hierarchy shared by the builders, the verifier and the CLI."""

from typing import Optional, Tuple


class SpanEmuError(Exception):
    """Base class for every error raised by spanemu"""

    exit_code = 1


class InvalidConfigError(SpanEmuError, ValueError):
    """Parameters or flags that violate a configuration invariant"""

    exit_code = 2


class GraphFormatError(SpanEmuError, ValueError):
    """Malformed graph input"""

    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InfeasibleScheduleError(SpanEmuError):
    """A schedule that cannot be run at this scale"""

    exit_code = 3


class InvariantError(SpanEmuError, AssertionError):
    """An internal consistency check failed; this is a bug, not bad input"""

    exit_code = 1


class BandwidthViolation(InvariantError):
    """A node program broke the CONGEST bandwidth rule"""

    def __init__(self, message: str, round_no: int, edge: Tuple[int, int]):
        self.round_no = round_no
        self.edge = edge
        super().__init__(f"round {round_no}, edge {edge[0]}->{edge[1]}: {message}")


class RoundCapExceeded(SpanEmuError):
    """The simulation ran past its round cap"""

    def __init__(self, round_cap: int, transcript=None):
        self.round_cap = round_cap
        self.transcript = transcript
        super().__init__(f"simulation exceeded the round cap of {round_cap}")
