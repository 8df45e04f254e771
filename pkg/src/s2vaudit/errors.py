"""Exception hierarchy shared by every module of the toolkit."""


class S2VError(Exception):
    """Base class for all toolkit errors."""


class FormatError(S2VError, ValueError):
    def __init__(self, line, message="malformed line"):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DuplicateWord(S2VError, ValueError):
    def __init__(self, word):
        self.word = word
        super().__init__(f"duplicate word: {word!r}")


class WordNotFound(S2VError, KeyError):
    def __init__(self, word):
        self.word = word
        super().__init__(word)

    def __str__(self):
        return f"word not in table: {self.word!r}"


class DegenerateVector(S2VError, ValueError):
    def __init__(self, word):
        self.word = word
        super().__init__(f"zero vector for word {word!r}")


class InvalidK(S2VError, ValueError):
    pass


class InvalidN(S2VError, ValueError):
    pass


class InvalidPairs(S2VError, ValueError):
    pass


class NoEvaluablePairs(S2VError, ValueError):
    pass


class DegenerateRanks(S2VError, ValueError):
    pass


class InsufficientPairs(S2VError, ValueError):
    pass


class UnknownBenchmark(S2VError, ValueError):
    pass


class TooFewPoints(S2VError, ValueError):
    pass


class InvalidDistances(S2VError, ValueError):
    pass


class InvalidConfig(S2VError, ValueError):
    pass


class ShapeError(S2VError, ValueError):
    pass


class EmptyInput(S2VError, ValueError):
    pass


class NumericalError(S2VError, ArithmeticError):
    pass


class CheckpointError(S2VError, ValueError):
    pass
