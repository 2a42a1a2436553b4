"""Tests for the coefficient expression language."""

import numpy as np
import pytest

from ergoline.errors import (
    ExprDomainError,
    ExprSyntaxError,
    StepTooLargeError,
    UnknownIdentifierError,
)
from ergoline.expr import parse


def random_source(rng: np.random.Generator, depth: int = 4) -> str:
    """Random expression text over the whole grammar."""
    if depth == 0 or rng.random() < 0.25:
        kind = rng.integers(4)
        if kind == 0:
            return "x"
        if kind == 1:
            return str(int(rng.integers(0, 100)))
        if kind == 2:
            return f"{rng.uniform(0, 10):.4f}"
        return f"{rng.uniform(1, 10):.2f}e{int(rng.integers(-8, 9))}"
    kind = rng.integers(4)
    if kind == 0:
        return f"-{random_source(rng, depth - 1)}"
    if kind == 1:
        func = str(rng.choice(["exp", "log", "sqrt", "abs"]))
        return f"{func}({random_source(rng, depth - 1)})"
    if kind == 2:
        return f"({random_source(rng, depth - 1)})"
    op = str(rng.choice(["+", "-", "*", "/", "^"]))
    return f"{random_source(rng, depth - 1)} {op} {random_source(rng, depth - 1)}"


class TestParse:
    """Tests for parsing and evaluation."""

    def test_sqrt_drift(self):
        """-3*(x+1)^-0.5 evaluates to -3 at 0 and -1.5 at 3."""
        g = parse("-3*(x+1)^-0.5")
        assert g(0.0) == pytest.approx(-3.0)
        assert g(3.0) == pytest.approx(-1.5)

    def test_precedence(self):
        """Leading minus binds looser than ^, and ^ is right-associative."""
        assert parse("-x^2")(3.0) == pytest.approx(-9.0)
        assert parse("2^3^2")(0.0) == pytest.approx(512.0)
        assert parse("1 + 2*x - 4/2")(1.0) == pytest.approx(1.0)

    def test_functions(self):
        """exp, log, sqrt and abs compose."""
        e = parse("exp(log(x)) + sqrt(abs(-4))")
        assert e(2.5) == pytest.approx(4.5)

    def test_vectorized(self):
        """Arrays evaluate elementwise."""
        g = parse("1 + 2*x")
        out = g(np.array([0.0, 1.0, 2.0]))
        np.testing.assert_allclose(out, [1.0, 3.0, 5.0])

    def test_other_variable(self):
        """Rates are written in s instead of x."""
        phi = parse("2*s^0.5", variable="s")
        assert phi(4.0) == pytest.approx(4.0)

    def test_constant_detection(self):
        """Constant trees are detected structurally."""
        assert parse("1 + 2*3").is_constant
        assert not parse("1 + 0*x").is_constant

    def test_serialize_reparses(self):
        """Serialized text parses back to the same function."""
        e = parse("-3*(x+1)^-0.5 + exp(-x)/2")
        again = parse(e.serialize())
        for x in (0.0, 0.7, 12.0):
            assert again(x) == pytest.approx(e(x), rel=1e-15)

    def test_random_round_trip(self):
        """Serializing any parsed tree and parsing it again gives the same tree."""
        rng = np.random.default_rng(2024)
        for _ in range(500):
            e = parse(random_source(rng))
            again = parse(e.serialize())
            assert again == e
            assert again.serialize() == e.serialize()


class TestSyntaxErrors:
    """Tests for error offsets."""

    def test_unknown_identifier(self):
        """Unknown names are reported with their offset."""
        with pytest.raises(UnknownIdentifierError) as exc:
            parse("1 + sin(x)")
        assert exc.value.offset == 4
        assert exc.value.name == "sin"

    def test_unclosed_paren(self):
        """A missing ')' is reported at the end of input."""
        with pytest.raises(ExprSyntaxError) as exc:
            parse("2 * (x")
        assert exc.value.offset == 6

    def test_bad_character(self):
        """Stray characters are reported where they occur."""
        with pytest.raises(ExprSyntaxError) as exc:
            parse("x $ 1")
        assert exc.value.offset == 2

    def test_empty(self):
        """Blank input is reported at its end."""
        with pytest.raises(ExprSyntaxError) as exc:
            parse("   ")
        assert exc.value.offset == 3

    def test_non_ascii_character(self):
        """Characters outside the grammar are reported where they start."""
        with pytest.raises(ExprSyntaxError) as exc:
            parse("é")
        assert exc.value.offset == 0
        with pytest.raises(ExprSyntaxError) as exc:
            parse("x + é")
        assert exc.value.offset == 4

    def test_literal_out_of_range(self):
        """Literals that overflow a float are syntax errors at their offset."""
        with pytest.raises(ExprSyntaxError) as exc:
            parse("1e999")
        assert exc.value.offset == 0
        with pytest.raises(ExprSyntaxError) as exc:
            parse("x + 1e999")
        assert exc.value.offset == 4


class TestDomain:
    """Tests for evaluation outside the real domain."""

    @pytest.mark.parametrize(
        "source,x",
        [
            ("log(x)", 0.0),
            ("1/x", 0.0),
            ("sqrt(x)", -1.0),
            ("x^0.5", -1.0),
            ("x^-1", 0.0),
            ("exp(x)", 1000.0),
        ],
    )
    def test_raises(self, source, x):
        """Points outside the real domain raise instead of returning NaN or inf."""
        with pytest.raises(ExprDomainError):
            parse(source)(x)

    def test_array_with_one_bad_point(self):
        """One bad point fails the whole array."""
        with pytest.raises(ExprDomainError):
            parse("log(x)")(np.array([1.0, 0.0]))


class TestDerivatives:
    """Tests for finite-difference derivatives."""

    def test_first_derivative(self):
        """d/dx -3(x+1)^(-1/2) = 1.5 (x+1)^(-3/2)."""
        g = parse("-3*(x+1)^-0.5")
        assert g.deriv(3.0, order=1) == pytest.approx(0.1875, rel=1e-8)

    def test_second_derivative(self):
        """The second difference is exact for cubics up to rounding."""
        e = parse("x^3")
        assert e.deriv(2.0, order=2) == pytest.approx(12.0, rel=1e-8)

    def test_step_too_large(self):
        """The stencil must stay inside x > 0."""
        with pytest.raises(StepTooLargeError):
            parse("x^2").deriv(0.1, order=1, step=0.1)
