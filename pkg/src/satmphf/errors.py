"""Exception hierarchy.  Every error raised on purpose derives from MphfError."""


class MphfError(Exception):
    pass


class InvalidArgument(MphfError, ValueError):
    pass


class DimacsParseError(MphfError, ValueError):
    pass


class TooManyVariables(MphfError):
    pass


class SolverCrash(MphfError):
    """External solver exited without a status line."""


class ModelVerificationError(MphfError):
    """A solver claimed SAT with an assignment that falsifies a clause."""


class SolveTimeout(MphfError):
    pass


class UnsatExhausted(MphfError):
    """Every reseed attempt produced an unsatisfiable formula."""


class NoPerfectMatching(MphfError):
    pass


class SingularSystem(MphfError):
    """GF(2) system is inconsistent."""


class BuildFailed(MphfError):
    pass


class CorruptStructure(MphfError):
    pass


class DuplicateKey(MphfError, ValueError):
    def __init__(self, key: bytes, line: int):
        super().__init__(f"duplicate key {key!r} at line {line}")
        self.key = key
        self.line = line


class MalformedFile(MphfError, ValueError):
    pass
