class ConfigError(ValueError):
    """Invalid configuration. ``problems`` maps each offending field to a message."""

    def __init__(self, problems: dict[str, str]):
        self.problems = dict(problems)
        detail = "; ".join(f"{k}: {v}" for k, v in self.problems.items())
        super().__init__(f"invalid configuration ({detail})")


class SelfEdgeError(ValueError):
    pass


class EngineFault(RuntimeError):
    """A malformed action reached the executor. Indicates a bug, not bad input."""
