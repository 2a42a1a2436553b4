"""Finite differences with one level of Richardson extrapolation.

Shared by expression derivatives and by the rate-calculus audits. Central
stencils are used in the interior; forward stencils near a domain boundary
(for instance at t = 0 or u = 1 when auditing G).
"""

from typing import Callable

Func = Callable[[float], float]


def central_difference(f: Func, x: float, step: float, order: int) -> float:
    """Central difference of order 1 or 2 with one Richardson level.

    The stencil touches x +/- step and x +/- step/2; for polynomials of degree
    at most 3 the result is exact up to rounding.
    """
    if order == 1:
        def estimate(h: float) -> float:
            return (f(x + h) - f(x - h)) / (2.0 * h)
    elif order == 2:
        fx = f(x)

        def estimate(h: float) -> float:
            return (f(x + h) - 2.0 * fx + f(x - h)) / (h * h)
    else:
        raise ValueError(f"order must be 1 or 2, got {order}")
    coarse = estimate(step)
    fine = estimate(step / 2.0)
    return (4.0 * fine - coarse) / 3.0


def forward_difference(f: Func, x: float, step: float, order: int) -> float:
    """One-sided difference of order 1 or 2 using points at and right of x."""
    fx = f(x)
    if order == 1:
        def estimate(h: float) -> float:
            return (-3.0 * fx + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
    elif order == 2:
        def estimate(h: float) -> float:
            return (2.0 * fx - 5.0 * f(x + h) + 4.0 * f(x + 2.0 * h) - f(x + 3.0 * h)) / (
                h * h
            )
    else:
        raise ValueError(f"order must be 1 or 2, got {order}")
    coarse = estimate(step)
    fine = estimate(step / 2.0)
    return (4.0 * fine - coarse) / 3.0


def derivative(
    f: Func,
    x: float,
    step: float,
    order: int = 1,
    lower: float | None = None,
) -> float:
    """Derivative of f at x, falling back to a forward stencil near ``lower``."""
    if lower is not None and x - step < lower:
        return forward_difference(f, x, step, order)
    return central_difference(f, x, step, order)


def default_step(x: float, order: int = 1) -> float:
    """Default stencil width: 1e-4 scaled by |x| for slopes, 1e-3 for curvature."""
    base = 1e-4 if order == 1 else 1e-3
    return max(base, base * abs(x))
