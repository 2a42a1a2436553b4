"""Arithmetic expression language for coefficient functions.

Drift g(x), diffusion sigma(x), jump rates lambda(x), Levy densities in z and
custom rate functions in s are all written in this language inside
experiment configs.

Example:
    g = parse("-3*(x+1)^-0.5")
    g(0.0)                  # -3.0
    g.deriv(3.0, order=1)   # 0.1875
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import StepTooLargeError
from .calculus import central_difference, default_step
from .nodes import BinaryOp, Call, Negate, Node, Number, Value, Variable
from .parser import parse_tree, tokenize


@dataclass(frozen=True)
class Expr:
    """A parsed expression in a single variable.

    Immutable and pure, so one instance can be evaluated from many threads.
    """

    root: Node
    variable: str = "x"

    def __call__(self, x: Value) -> Value:
        return self.root.evaluate(x)

    def eval(self, x: Value) -> Value:
        """Evaluate at a float or elementwise on an array."""
        return self.root.evaluate(x)

    def serialize(self) -> str:
        return self.root.serialize()

    def __str__(self) -> str:
        return self.serialize()

    def deriv(self, x: float, order: int = 1, step: float | None = None) -> float:
        """Central finite difference with one Richardson level.

        Args:
            x: Positive evaluation point
            order: 1 or 2
            step: Stencil width; defaults to max(1e-4, 1e-4*x) for order 1
                and max(1e-3, 1e-3*x) for order 2

        Raises:
            StepTooLargeError: If x - 2*step <= 0
        """
        if step is None:
            step = default_step(x, order)
        if step <= 0 or x - 2.0 * step <= 0:
            raise StepTooLargeError(x, step)
        return central_difference(lambda v: float(self.root.evaluate(v)), x, step, order)

    @property
    def is_constant(self) -> bool:
        """True when the variable does not occur in the expression."""
        return not _mentions_variable(self.root)


def _mentions_variable(node: Node) -> bool:
    if isinstance(node, Variable):
        return True
    if isinstance(node, Number):
        return False
    if isinstance(node, Negate):
        return _mentions_variable(node.operand)
    if isinstance(node, Call):
        return _mentions_variable(node.arg)
    if isinstance(node, BinaryOp):
        return _mentions_variable(node.left) or _mentions_variable(node.right)
    return True


def parse(source: str, variable: str = "x") -> Expr:
    """Parse source text into an Expr.

    Raises:
        ExprSyntaxError: With the byte offset of the offending token
        UnknownIdentifierError: For names other than the variable and
            exp, log, sqrt, abs
    """
    return Expr(parse_tree(source, variable), variable)


def evaluate(e: Expr, x: Value) -> Value:
    return e.eval(x)


def serialize(e: Expr) -> str:
    return e.serialize()


__all__ = [
    "BinaryOp",
    "Call",
    "Expr",
    "Negate",
    "Node",
    "Number",
    "Variable",
    "evaluate",
    "parse",
    "serialize",
    "tokenize",
]
