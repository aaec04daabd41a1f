"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter violates its documented constraint (e.g. nonpositive reactance)."""


class NodeKindError(TypeError):
    """An operation was called with a node of the wrong kind (DVPP vs SG)."""


class ValidationError(ValueError):
    """A scenario or config failed validation; carries the full list of problems."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid scenario:\n" + "\n".join(f"  - {p}" for p in self.problems))


class NumericFault(RuntimeError):
    """A state variable became non-finite during integration."""

    def __init__(self, step: int, t: float, signal: str):
        self.step = step
        self.t = t
        self.signal = signal
        super().__init__(f"non-finite value in '{signal}' at step {step} (t={t:.6g} s)")


class ConfigError(ValueError):
    """A config file could not be parsed; message carries location info."""
