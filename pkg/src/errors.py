"""
Exception hierarchy shared by every module of the toolkit
"""
from typing import Iterable, Optional


class Q2MpcError(Exception):
    """Base class for all toolkit errors"""


# Arithmetic

class MismatchedFields(Q2MpcError):
    pass


class DivisionByZero(Q2MpcError, ZeroDivisionError):
    pass


class NotPrime(Q2MpcError):
    pass


class FieldTooSmall(Q2MpcError):
    pass


class FieldTooSmallForPoints(Q2MpcError):
    pass


class ModulusTooLarge(Q2MpcError):
    pass


# Structures and span programs

class PlayerOutOfRange(Q2MpcError):
    pass


class PlayerCountMismatch(Q2MpcError):
    pass


class DimensionMismatch(Q2MpcError):
    pass


class InvalidMsp(Q2MpcError):
    pass


class Unqualified(Q2MpcError):
    pass


class MissingShare(Q2MpcError):
    pass


# Protocols

class ProtocolAbort(Q2MpcError):
    """A protocol ended without its normal output; `reason` says why"""

    def __init__(self, reason: str, transcript=None):
        super().__init__(reason)
        self.reason = reason
        self.transcript = transcript


class DealerDisqualified(ProtocolAbort):
    def __init__(self, dealer: int, reason: str = "dealer disqualified"):
        super().__init__(f"P{dealer}: {reason}")
        self.dealer = dealer


class DealerCorrupt(ProtocolAbort):
    def __init__(self, dealer: int, reason: str = "dealer deemed corrupt"):
        super().__init__(f"P{dealer}: {reason}")
        self.dealer = dealer


class DealerRefused(ProtocolAbort):
    def __init__(self, dealer: int, reason: str = "dealer refused conversion"):
        super().__init__(f"P{dealer}: {reason}")
        self.dealer = dealer


class ReconstructionImpossible(ProtocolAbort):
    pass


class RestartRequired(Q2MpcError):
    """Raised by MULT when a dealer refuses to convert its WSS shares"""

    def __init__(self, cheaters: Iterable[int]):
        self.cheaters = frozenset(cheaters)
        super().__init__(f"restart required, cheaters {sorted(self.cheaters)}")


class ZeroScalar(Q2MpcError):
    pass


class DealerMismatch(Q2MpcError):
    pass


class MspMismatch(Q2MpcError):
    pass


# Engine and command line

class StructureViolation(Q2MpcError):
    pass


class UnassignedInput(Q2MpcError):
    pass


class InvalidCircuit(Q2MpcError):
    pass


class UnknownStrategy(Q2MpcError):
    pass


class ConfigError(Q2MpcError):
    pass


class ParseError(Q2MpcError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None,
                 source: Optional[str] = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = source or "<input>"
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")
