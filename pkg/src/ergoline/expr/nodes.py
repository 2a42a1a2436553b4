"""Immutable syntax tree for coefficient expressions.

Nodes evaluate on a float or on a numpy array of states. Every evaluation
either returns finite values or raises ExprDomainError; NaN and inf never
leak out of the tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import ExprDomainError

Value = Union[float, np.ndarray]

FUNCTIONS = ("exp", "log", "sqrt", "abs")


def _finite(value: Value, what: str) -> Value:
    if not np.all(np.isfinite(value)):
        raise ExprDomainError(f"{what} produced a non-finite value")
    return value


@dataclass(frozen=True)
class Node:
    """Base class for expression nodes."""

    def evaluate(self, x: Value) -> Value:
        raise NotImplementedError

    def serialize(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Number(Node):
    value: float

    def evaluate(self, x: Value) -> Value:
        return self.value

    def serialize(self) -> str:
        text = repr(float(self.value))
        return f"({text})" if self.value < 0 else text


@dataclass(frozen=True)
class Variable(Node):
    name: str

    def evaluate(self, x: Value) -> Value:
        return x

    def serialize(self) -> str:
        return self.name


@dataclass(frozen=True)
class Negate(Node):
    operand: Node

    def evaluate(self, x: Value) -> Value:
        return -self.operand.evaluate(x)

    def serialize(self) -> str:
        return f"(-{self.operand.serialize()})"


@dataclass(frozen=True)
class BinaryOp(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, x: Value) -> Value:
        a = self.left.evaluate(x)
        b = self.right.evaluate(x)
        with np.errstate(all="ignore"):
            if self.op == "+":
                return _finite(a + b, "addition")
            if self.op == "-":
                return _finite(a - b, "subtraction")
            if self.op == "*":
                return _finite(a * b, "multiplication")
            if self.op == "/":
                if np.any(np.asarray(b) == 0):
                    raise ExprDomainError("division by zero")
                return _finite(a / b, "division")
            return _finite(_power(a, b), "power")

    def serialize(self) -> str:
        return f"({self.left.serialize()} {self.op} {self.right.serialize()})"


def _power(base: Value, exponent: Value) -> Value:
    base_arr = np.asarray(base, dtype=float)
    exp_arr = np.asarray(exponent, dtype=float)
    non_integer = exp_arr != np.round(exp_arr)
    if np.any((base_arr < 0) & non_integer):
        raise ExprDomainError("non-integer power of a negative base")
    if np.any((base_arr == 0) & (exp_arr < 0)):
        raise ExprDomainError("division by zero (zero to a negative power)")
    result = np.power(base_arr, exp_arr)
    if np.ndim(result) == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def evaluate(self, x: Value) -> Value:
        a = self.arg.evaluate(x)
        with np.errstate(all="ignore"):
            if self.func == "exp":
                out = np.exp(a)
            elif self.func == "log":
                if np.any(np.asarray(a) <= 0):
                    raise ExprDomainError("log of a non-positive value")
                out = np.log(a)
            elif self.func == "sqrt":
                if np.any(np.asarray(a) < 0):
                    raise ExprDomainError("sqrt of a negative value")
                out = np.sqrt(a)
            else:
                out = np.abs(a)
        out = _finite(out, self.func)
        if np.ndim(out) == 0:
            return float(out)
        return out

    def serialize(self) -> str:
        return f"{self.func}({self.arg.serialize()})"
