"""Exception hierarchy.

Every exception carries an exit ``category`` so the CLI can map failures to
process exit codes without inspecting messages.
"""


class LaaCoexError(Exception):
    category = "error"


class DimensionError(LaaCoexError, ValueError):
    category = "invariant"


class DomainError(LaaCoexError, ValueError):
    category = "invariant"


class DegenerateTrafficError(DomainError):
    pass


class InvariantError(LaaCoexError, ValueError):
    category = "invariant"


class SizeError(LaaCoexError, ValueError):
    category = "invariant"


class UnrecoverableScenarioError(LaaCoexError):
    """No feasible LAA transmission time exists for the current population."""

    category = "unrecoverable"


class ScenarioParseError(LaaCoexError):
    category = "parse"

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ScenarioValueError(ScenarioParseError):
    category = "invariant"
