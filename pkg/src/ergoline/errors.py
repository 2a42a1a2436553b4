"""Exception hierarchy for Ergoline.

Every error carries the name of the component that raised it, so messages
read ``[expr] unknown identifier 'sin' at offset 0`` and the CLI can map
error families onto exit codes.
"""

from typing import Optional


class ErgolineError(Exception):
    """Base exception for all Ergoline errors.

    Attributes:
        component: Name of the component that raised the error
        message: Error description
    """

    def __init__(self, component: str, message: str):
        self.component = component
        self.message = message
        super().__init__(f"[{component}] {message}")


# =========================================================================
# Expression language
# =========================================================================


class ExprSyntaxError(ErgolineError):
    """Raised when an expression cannot be parsed."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__("expr", f"{message} at offset {offset}")


class UnknownIdentifierError(ExprSyntaxError):
    """Raised for identifiers that are neither the variable nor a function."""

    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(f"unknown identifier '{name}'", offset)


class ExprDomainError(ErgolineError):
    """Raised when evaluation leaves the real domain (log of 0, 1/0, ...)."""

    def __init__(self, message: str):
        super().__init__("expr", message)


class StepTooLargeError(ErgolineError):
    """Raised when a central difference stencil would leave x > 0."""

    def __init__(self, x: float, step: float):
        self.x = x
        self.step = step
        super().__init__("expr", f"step {step:g} too large for x={x:g} (need x - 2*step > 0)")


# =========================================================================
# Rate calculus
# =========================================================================


class RateDomainError(ErgolineError):
    """Raised when phi, Phi, Psi or G is evaluated outside its domain."""

    def __init__(self, message: str):
        super().__init__("rate", message)


class QuadratureError(ErgolineError):
    """Raised when adaptive quadrature does not converge."""

    def __init__(self, component: str, message: str):
        super().__init__(component, f"quadrature failed: {message}")


class DecompositionError(ErgolineError):
    """Raised when a product decomposition is unsupported or fails its audit."""

    def __init__(self, message: str, worst_slack: Optional[float] = None):
        self.worst_slack = worst_slack
        if worst_slack is not None:
            message += f" (worst slack {worst_slack:.3e})"
        super().__init__("decompose", message)


# =========================================================================
# Certification
# =========================================================================


class NonIntegrableError(ErgolineError):
    """Raised when a jump integral diverges for the given Lyapunov function."""

    def __init__(self, message: str):
        super().__init__("certify", message)


class PreconditionError(ErgolineError):
    """Raised when a documented precondition of an operation is violated."""

    def __init__(self, component: str, message: str):
        super().__init__(component, f"precondition violated: {message}")


class FitError(ErgolineError):
    """Raised when no admissible positive rate coefficient exists."""

    def __init__(self, message: str):
        super().__init__("fit", message)


# =========================================================================
# Simulation, estimation and experiments
# =========================================================================


class SimulationConfigError(ErgolineError):
    """Raised for invalid simulation setups (dt too large, x1 > x2, ...)."""

    def __init__(self, message: str):
        super().__init__("simulate", message)


class CheckpointError(ErgolineError):
    """Raised when an estimator asks for a time that was not stored."""

    def __init__(self, t: float, available: list[float]):
        self.t = t
        self.available = available
        super().__init__("estimate", f"t={t:g} is not a stored checkpoint {available}")


class ConfigError(ErgolineError):
    """Raised when an experiment config is missing or invalid."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        super().__init__("config", message)
