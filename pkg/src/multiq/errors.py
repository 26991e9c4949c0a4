"""Exception hierarchy shared by every stage of the toolchain."""


class MultiQError(Exception):
    pass


class ParseError(MultiQError):
    def __init__(self, line, message):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class UnsupportedGate(MultiQError):
    def __init__(self, name, line=None):
        self.name = name
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unsupported gate or statement '{name}'{where}")


class ValidationError(MultiQError):
    def __init__(self, field, message=""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)


class ReplayError(MultiQError):
    def __init__(self, index, site, message="no atom at site"):
        self.index = index
        self.site = site
        super().__init__(f"instruction {index}: {message} {site}")


class ArityError(MultiQError):
    pass


class ArityMismatch(MultiQError):
    pass


class LayoutError(MultiQError):
    pass


class CapacityError(MultiQError):
    pass


class EmptyBin(MultiQError):
    pass


class InfeasibleTile(MultiQError):
    def __init__(self, label, message=""):
        self.label = label
        super().__init__(f"tile '{label}' does not fit the device {message}".strip())


class ScheduleError(MultiQError):
    pass


class UnknownQubit(MultiQError):
    def __init__(self, qubit):
        self.qubit = qubit
        super().__init__(f"qubit {qubit} is not attributed to any tile")


class IsolationViolation(MultiQError):
    def __init__(self, pair, message="cross-tile CZ"):
        self.pair = tuple(pair)
        super().__init__(f"{message} between atoms {self.pair}")


class TooLarge(MultiQError):
    def __init__(self, n, limit):
        self.n = n
        super().__init__(f"{n} qubits exceeds dense-oracle limit {limit}")


class EmptyRun(MultiQError):
    pass
