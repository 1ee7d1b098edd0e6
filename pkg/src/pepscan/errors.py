"""Exception hierarchy shared by every pepscan module."""

from __future__ import annotations


class PepscanError(Exception):
    """Base class for all data errors raised by pepscan."""


class InvalidSymbol(PepscanError, ValueError):
    """A byte outside the alphabet was seen.

    ``where`` is a pattern index when raised while building, and a text
    offset when raised while matching (see ``kind``).
    """

    def __init__(self, where: int, byte: int, kind: str = "offset"):
        self.where = where
        self.byte = byte
        self.kind = kind
        shown = chr(byte) if 32 <= byte < 127 else f"0x{byte:02x}"
        super().__init__(f"invalid symbol {shown!r} at {kind} {where}")


class EmptyPattern(PepscanError, ValueError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"pattern {index} is empty")


class InvalidAddress(PepscanError, ValueError):
    def __init__(self, addr: int):
        self.addr = addr
        super().__init__(f"no register at address {addr}")


class WriteToReadOnly(PepscanError, ValueError):
    def __init__(self, addr: int):
        self.addr = addr
        super().__init__(f"register at address {addr} is read-only")


class MissingWorkProfile(PepscanError, ValueError):
    pass


class TooManyStates(PepscanError, ValueError):
    pass


class InvalidIdentifier(PepscanError, ValueError):
    pass


class SchemaError(PepscanError, ValueError):
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path or '<root>'}: {reason}")


class InconsistentTable(PepscanError, ValueError):
    pass


class NoRecords(PepscanError, ValueError):
    pass


class InvalidResidue(PepscanError, ValueError):
    def __init__(self, record_id: str, byte: int):
        self.record_id = record_id
        self.byte = byte
        super().__init__(f"record {record_id!r}: invalid residue {chr(byte)!r}")


class UnsupportedEnzyme(PepscanError, ValueError):
    pass


class SentinelInAlphabet(PepscanError, ValueError):
    pass


class SingularFit(PepscanError, ArithmeticError):
    pass
