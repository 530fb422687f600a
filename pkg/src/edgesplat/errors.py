"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A scalar parameter is outside its valid range."""


class DimensionError(ValueError):
    """Array shapes do not match what an operation requires."""


class ProjectionError(ValueError):
    """A point lies on or behind the camera plane."""

    def __init__(self, index, depth):
        self.index = int(index)
        self.depth = float(depth)
        super().__init__(f"point {self.index} has non-positive camera depth {self.depth!r}")


class DegenerateCloudError(ValueError):
    """Cloud has zero extent on every axis."""


class ContractError(ValueError):
    """Input violates a documented precondition (e.g. negative map values)."""


class CloudParseError(ValueError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = int(line)
        super().__init__(f"{self.path}:{self.line}: {message}")


class EmptyCloudError(ValueError):
    """A cloud file contained no points."""


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


class NonFiniteLossError(FloatingPointError):
    def __init__(self, step, term, value):
        self.step = int(step)
        self.term = term
        self.value = value
        super().__init__(f"non-finite {term} loss ({value!r}) at step {self.step}")
