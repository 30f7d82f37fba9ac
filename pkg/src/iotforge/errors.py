"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class IoTForgeError(Exception):
    """Base class for all toolchain errors (CLI exit code 1)."""


class UnknownActuator(IoTForgeError):
    pass


class UnknownAction(IoTForgeError):
    pass


class InvalidProject(IoTForgeError):
    pass


class UnknownPlugin(IoTForgeError):
    pass


class DuplicatePlugin(IoTForgeError):
    pass


class MissingBinding(IoTForgeError):
    def __init__(self, name: str):
        super().__init__(f"no binding for placeholder {{{name}}}")
        self.name = name


class TemplateSyntaxError(IoTForgeError):
    pass


class NoEligibleDevice(IoTForgeError):
    pass


class ConflictingPin(IoTForgeError):
    pass


class UnpinnedInteractor(IoTForgeError):
    pass


class DuplicateStrategy(IoTForgeError):
    pass


class UnknownStrategy(IoTForgeError):
    pass


class StrategyError(IoTForgeError):
    """A mapping strategy returned an incomplete or out-of-range assignment."""


class MissingDescriptor(IoTForgeError):
    pass


class PlanSpecMismatch(IoTForgeError):
    pass


class UnknownEvent(IoTForgeError):
    pass


class UnknownTarget(IoTForgeError):
    pass


class ArgTypeMismatch(IoTForgeError):
    pass


class PayloadMismatch(IoTForgeError):
    pass


class MissingTrace(IoTForgeError):
    pass


class TraceFormatError(IoTForgeError):
    pass


class RuleRuntimeError(IoTForgeError):
    pass


class MissingField(RuleRuntimeError):
    pass


class ExprTypeError(RuleRuntimeError):
    pass


class LayoutError(IoTForgeError):
    """Project directory is missing a mandatory file (CLI exit code 2)."""
