"""Exception hierarchy. Every error the package raises derives from HeckeSieveError."""


class HeckeSieveError(Exception):
    pass


class MissingPrime(HeckeSieveError, KeyError):
    def __init__(self, p: int, p_max: int):
        self.p = p
        self.p_max = p_max
        super().__init__(f"no Satake data for p={p} (p_max={p_max})")

    def __str__(self) -> str:
        return self.args[0]


class NonRealCoefficient(HeckeSieveError, ValueError):
    pass


class NegativeCoefficient(HeckeSieveError, ValueError):
    pass


class InsufficientLocalDegree(HeckeSieveError, ValueError):
    pass


class LengthMismatch(HeckeSieveError, ValueError):
    pass


class LowerBoundViolated(HeckeSieveError, ValueError):
    pass


class DivergentLocal(HeckeSieveError, ValueError):
    pass


class CoverageExceeded(HeckeSieveError, ValueError):
    pass


class InvalidTaper(HeckeSieveError, ValueError):
    pass


class InvalidSatakeData(HeckeSieveError, ValueError):
    pass


class ParseError(HeckeSieveError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class GapError(HeckeSieveError, ValueError):
    def __init__(self, missing: list[int]):
        self.missing = list(missing)
        shown = ", ".join(map(str, self.missing[:20]))
        more = "" if len(self.missing) <= 20 else f" (+{len(self.missing) - 20} more)"
        super().__init__(f"missing primes: {shown}{more}")


class BoundError(HeckeSieveError, ValueError):
    def __init__(self, p: int, value: float, message: str = ""):
        self.p = p
        self.value = value
        super().__init__(message or f"a_p={value!r} at p={p} violates the Kim-Sarnak bound")


class ChecksumMismatch(HeckeSieveError, ValueError):
    pass


class KeyMismatch(HeckeSieveError, ValueError):
    pass
