"""Exception types shared across the package."""

from __future__ import annotations


class DataflowError(Exception):
    """Base class for all errors raised by this package."""


class RegistryError(DataflowError):
    """Bad type or function declaration."""


class ExpressionSyntaxError(DataflowError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownFunctionError(DataflowError):
    def __init__(self, name: str):
        super().__init__(f"unknown function: {name}")
        self.name = name


class ArityMismatchError(DataflowError):
    def __init__(self, function: str, reason: str):
        super().__init__(f"{function}: {reason}")
        self.function = function
        self.reason = reason


class TypeMismatchError(DataflowError):
    def __init__(self, slot: str, expected: str, got: str):
        super().__init__(f"slot {slot!r} expects {expected}, got {got}")
        self.slot = slot
        self.expected = expected
        self.got = got


class CycleError(DataflowError):
    """An edit would make the input-edge relation cyclic."""


class EvaluationError(DataflowError):
    def __init__(self, node: int | None, reason: str):
        super().__init__(f"node {node}: {reason}" if node is not None else reason)
        self.node = node
        self.reason = reason


class NoMatchError(EvaluationError):
    """A knowledge-base lookup matched nothing."""


class AmbiguousError(EvaluationError):
    """A lookup expected one result and found several."""


class ReferTargetAbsentError(EvaluationError):
    """refer() could not resolve anything of the requested type."""

    def __init__(self, wanted: str):
        super().__init__(None, f"nothing of type {wanted} to refer to")
        self.wanted = wanted


class RootMismatchError(DataflowError):
    def __init__(self, current: str, target: str):
        super().__init__(f"root labels differ: {current} vs {target}")
        self.current = current
        self.target = target


class NoConversationRootError(DataflowError):
    """The executed history holds no conversation node."""


class NoSolutionError(DataflowError):
    """No argument choice makes the replacement return the required value."""


class MissingTemplateError(DataflowError):
    def __init__(self, function: str):
        super().__init__(f"no template for function: {function}")
        self.function = function


class UnknownFieldError(DataflowError):
    def __init__(self, field: str):
        super().__init__(f"unknown field: {field}")
        self.field = field


class UnknownSlotError(DataflowError):
    def __init__(self, slot: str):
        super().__init__(f"unknown slot: {slot}")
        self.slot = slot


class MalformedLineError(DataflowError):
    def __init__(self, line_no: int, text: str = ""):
        super().__init__(f"malformed line {line_no}: {text[:80]!r}")
        self.line_no = line_no
