"""Exception hierarchy shared by all ldcforge modules."""


class LdcError(Exception):
    """Base class for every error raised by ldcforge."""


class IrreducibleViolation(LdcError, ValueError):
    pass


class InternalError(LdcError, RuntimeError):
    pass


class DivisionByZero(LdcError, ZeroDivisionError):
    pass


class FieldMismatch(LdcError, ValueError):
    pass


class OrderUnsupported(LdcError, ValueError):
    pass


class BudgetExceeded(LdcError, RuntimeError):
    pass


class OrderBudgetExceeded(BudgetExceeded):
    pass


class FactorBudgetExceeded(BudgetExceeded):
    def __init__(self, partial, unfactored):
        self.partial = partial
        self.unfactored = [int(c) for c in unfactored]
        super().__init__(
            f"factoring budget exhausted; found {partial}, unfactored {self.unfactored}"
        )


class InvalidModulus(LdcError, ValueError):
    pass


class CrtConflict(LdcError, ValueError):
    pass


class ForbiddenCoset(LdcError, ValueError):
    pass


class CertificateInconsistent(LdcError, RuntimeError):
    pass


class MessageLengthMismatch(LdcError, ValueError):
    pass


class IndexOutOfRange(LdcError, IndexError):
    pass


class CompositionInvalid(LdcError, RuntimeError):
    pass


class RepresentationUnsupported(LdcError, ValueError):
    pass


class InventoryExhausted(LdcError, ValueError):
    pass


class AuxInvalid(LdcError, ValueError):
    pass


class ReconstructionError(LdcError, RuntimeError):
    pass
