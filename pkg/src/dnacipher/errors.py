"""Exception hierarchy.

Every error raised on purpose by the package derives from ``DnaCipherError``
so the CLI can map it to exit code 1 (pipeline) or 2 (usage/config).
"""


class DnaCipherError(Exception):
    exit_code = 1


class ConfigError(DnaCipherError):
    exit_code = 2


# sequence_io
class EmptyInput(DnaCipherError):
    pass


class InvalidCharacter(DnaCipherError):
    def __init__(self, char: str, line: int, column: int):
        self.char = char
        self.line = line
        self.column = column
        super().__init__(f"invalid character {char!r} at line {line}, column {column}")


class OutOfRange(DnaCipherError):
    pass


class ZeroCoordinate(DnaCipherError):
    pass


class NetworkDisabled(DnaCipherError):
    pass


class HttpFailure(DnaCipherError):
    def __init__(self, status: int, url: str):
        self.status = status
        self.url = url
        super().__init__(f"HTTP {status} from {url}")


class ParseFailure(DnaCipherError):
    pass


# segmentation / keystreams
class ZeroWidth(DnaCipherError):
    pass


class UnknownKey(DnaCipherError):
    pass


class CountOverflow(DnaCipherError):
    pass


# substitution / lexicon
class InvalidReferenceTable(DnaCipherError):
    exit_code = 2


class UncoveredSymbol(DnaCipherError):
    pass


class EmptyDictionary(DnaCipherError):
    exit_code = 2


class MissingKeySection(DnaCipherError):
    pass
