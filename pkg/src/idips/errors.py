"""Error types raised across the package."""

from __future__ import annotations


class IdipsError(Exception):
    """Base for all package errors."""


class PolicyTypeError(IdipsError):
    """Base for type-system violations in expressions and policies."""


class UnknownVariable(PolicyTypeError):
    def __init__(self, name: str):
        super().__init__(f"unknown input variable {name!r}")
        self.name = name


class UnknownOperator(PolicyTypeError):
    def __init__(self, op: str, arity: int):
        super().__init__(f"unknown {arity}-ary operator {op!r}")
        self.op = op
        self.arity = arity


class DimensionMismatch(PolicyTypeError):
    def __init__(self, msg: str):
        super().__init__(msg)


class ArityMismatch(PolicyTypeError):
    def __init__(self, op: str, expected: int, got: int):
        super().__init__(f"operator {op!r} expects {expected} argument(s), got {got}")
        self.op = op


class UnknownAction(PolicyTypeError):
    def __init__(self, action: str):
        super().__init__(f"action {action!r} is not in the domain's action set")
        self.action = action


class DuplicateParam(PolicyTypeError):
    def __init__(self, name: str):
        super().__init__(f"parameter name {name!r} is used more than once")
        self.name = name


class BlankNode(PolicyTypeError):
    """A blank (hole) was found where a concrete node is required."""

    def __init__(self, what: str):
        super().__init__(f"unexpected blank {what}")


class ParseError(IdipsError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line = line
        self.col = col


class MissingInput(IdipsError):
    def __init__(self, name: str):
        super().__init__(f"world state has no value for input {name!r}")
        self.name = name


class SchemaError(IdipsError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


class TooManyParams(IdipsError):
    def __init__(self, count: int, limit: int):
        super().__init__(f"{count} free parameters exceeds the solver limit of {limit}")
        self.count = count
        self.limit = limit


class SolverBudgetExceeded(IdipsError):
    def __init__(self, cells: int, limit: int):
        super().__init__(f"candidate grid of {cells} cells exceeds the budget of {limit}")


class BudgetExceeded(IdipsError):
    def __init__(self, msg: str):
        super().__init__(msg)


class NoCandidate(IdipsError):
    def __init__(self, msg: str):
        super().__init__(msg)


class ProtocolError(IdipsError):
    def __init__(self, code: str, msg: str):
        super().__init__(msg)
        self.code = code
