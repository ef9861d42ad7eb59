"""Vector fields, brackets, operator words, and the expression grammar."""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from lieweights.exactalg import Poly, RatFunc
from lieweights.vfield import (
    Chart,
    DiffOpWord,
    ParseError,
    VectorField,
    coordinate_field,
    format_poly,
    format_scalar,
    format_vector_field,
    lie_bracket,
    parse_polynomial,
    parse_scalar,
    parse_vector_field,
    restrict_zero,
)

CHART = Chart(("x", "y", "z"))
X_, Y_, Z_ = (CHART.var(n) for n in "xyz")


def sympy_bracket(x_coeffs, y_coeffs, syms):
    out = []
    for a in range(len(syms)):
        expr = sympy.Integer(0)
        for b in range(len(syms)):
            expr += x_coeffs[b] * sympy.diff(y_coeffs[a], syms[b])
            expr -= y_coeffs[b] * sympy.diff(x_coeffs[a], syms[b])
        out.append(sympy.expand(expr))
    return out


def to_sympy(p: Poly, syms):
    expr = sympy.Integer(0)
    for mono, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for s, e in zip(syms, mono):
            term *= s**e
        expr += term
    return sympy.expand(expr)


# -- chart -----------------------------------------------------------------


def test_chart_rejects_bad_names():
    with pytest.raises(ValueError):
        Chart(("x", "x"))
    with pytest.raises(ValueError):
        Chart(("2x",))
    with pytest.raises(ValueError):
        Chart(("a-b",))


# -- brackets and application -------------------------------------------------


def test_bracket_of_martinet_pair():
    x = parse_vector_field("dx + (2*x + y)*dz", CHART)
    y = parse_vector_field("dy + (x + x^2)*dz", CHART)
    assert lie_bracket(x, y) == parse_vector_field("2*x*dz", CHART)


def test_bracket_euler_example():
    dx = coordinate_field(CHART, 0)
    euler = parse_vector_field("x*dx", CHART)
    assert lie_bracket(dx, euler) == dx


def test_apply_examples():
    v = parse_vector_field("dx + x*dz", CHART)
    assert v.apply(Z_) == X_
    word = DiffOpWord(CHART, (v, v))
    assert word.apply(Z_) == Poly.one(3)
    martinet = parse_vector_field("dx + (2*x + y)*dz", CHART)
    assert martinet.apply(Z_ - X_**2 - X_ * Y_) == Poly.zero(3)


def test_word_applies_rightmost_first():
    a = coordinate_field(CHART, 0)
    b = parse_vector_field("x*dy", CHART)
    assert DiffOpWord(CHART, (a, b)).apply(Y_) == Poly.one(3)
    assert DiffOpWord(CHART, (b, a)).apply(Y_) == Poly.zero(3)


@st.composite
def fields(draw):
    coeffs = []
    for _ in range(3):
        terms = {}
        for _ in range(draw(st.integers(0, 2))):
            mono = tuple(draw(st.integers(0, 2)) for _ in range(3))
            terms[mono] = Fraction(draw(st.integers(-3, 3)))
        coeffs.append(Poly(3, terms))
    return VectorField(CHART, coeffs)


@st.composite
def funcs(draw):
    terms = {}
    for _ in range(draw(st.integers(0, 3))):
        mono = tuple(draw(st.integers(0, 2)) for _ in range(3))
        terms[mono] = Fraction(draw(st.integers(-3, 3)), draw(st.integers(1, 2)))
    return Poly(3, terms)


@settings(max_examples=40)
@given(fields(), fields())
def test_bracket_matches_sympy_oracle(x, y):
    syms = sympy.symbols("x y z")
    xs = [to_sympy(c.as_poly(), syms) for c in x.coeffs]
    ys = [to_sympy(c.as_poly(), syms) for c in y.coeffs]
    expected = sympy_bracket(xs, ys, syms)
    got = lie_bracket(x, y)
    for a in range(3):
        assert to_sympy(got.coeffs[a].as_poly(), syms) == expected[a]


@settings(max_examples=40)
@given(fields(), fields(), funcs())
def test_word_commutator_identity(x, y, f):
    lhs = DiffOpWord(CHART, (x, y)).apply(f) - DiffOpWord(CHART, (y, x)).apply(f)
    assert lhs == lie_bracket(x, y).apply(f)


@settings(max_examples=40)
@given(fields(), funcs(), funcs())
def test_apply_is_derivation(x, f, g):
    assert x.apply(f * g) == x.apply(f) * g + f * x.apply(g)


@settings(max_examples=25, deadline=None)
@given(fields(), fields(), fields())
def test_jacobi_identity(x, y, z):
    total = (
        lie_bracket(x, lie_bracket(y, z))
        + lie_bracket(y, lie_bracket(z, x))
        + lie_bracket(z, lie_bracket(x, y))
    )
    assert total.is_zero()


# -- restriction ---------------------------------------------------------------


def test_restrict_drops_fiber_monomials():
    f = X_ + Z_**2 + X_ * Z_
    assert restrict_zero(f, [2]) == X_
    g = RatFunc(Poly.one(3), Poly.one(3) + Z_)
    assert restrict_zero(g, [2]) == RatFunc(Poly.one(3))


def test_restrict_detects_vanishing_denominator():
    g = RatFunc(Poly.one(3), Z_)
    with pytest.raises(ZeroDivisionError):
        restrict_zero(g, [2])


# -- parsing and printing ------------------------------------------------------


def test_parse_polynomial_basic():
    assert parse_polynomial("z - 1/2*x^2", CHART) == Z_ - Fraction(1, 2) * X_**2
    assert parse_polynomial("(x + y)*(x - y)", CHART) == X_**2 - Y_**2
    assert parse_polynomial("-x", CHART) == -X_
    assert parse_polynomial("3", CHART) == Poly.const(3, 3)


def test_parse_vector_field_basic():
    v = parse_vector_field("dx + (2*x + y)*dz", CHART)
    assert v.coeffs[0] == RatFunc(Poly.one(3))
    assert v.coeffs[1].is_zero()
    assert v.coeffs[2] == RatFunc(2 * X_ + Y_)


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as err:
        parse_polynomial("x + * y", CHART)
    assert err.value.line == 1 and err.value.column == 5
    with pytest.raises(ParseError) as err:
        parse_polynomial("x +\n  qq", CHART)
    assert err.value.line == 2 and err.value.column == 3


def test_parse_rejects_mixed_and_scalar_only():
    with pytest.raises(ParseError):
        parse_vector_field("x + dx", CHART)
    with pytest.raises(ParseError):
        parse_vector_field("x*y", CHART)
    with pytest.raises(ParseError):
        parse_polynomial("dx", CHART)
    with pytest.raises(ParseError):
        parse_vector_field("dx*dy", CHART)
    with pytest.raises(ParseError):
        parse_vector_field("dx^2", CHART)


def test_variable_shadows_d_prefix():
    chart = Chart(("dx", "x"))
    p = parse_polynomial("dx + x", chart)
    assert p == Poly.variable(2, 0) + Poly.variable(2, 1)
    v = parse_vector_field("ddx", chart)
    assert v.coeffs[0] == RatFunc(Poly.one(2))


def test_unary_minus_binds_to_atom():
    # per the grammar "-x^2" is (-x)^2
    assert parse_polynomial("-x^2", CHART) == X_**2
    assert parse_polynomial("0 - x^2", CHART) == -(X_**2)


def test_print_canonical_examples():
    assert format_poly(Z_ - Fraction(1, 2) * X_**2, CHART) == "z - 1/2*x^2"
    assert format_poly(Z_ - X_**2 - X_ * Y_, CHART) == "z - x^2 - x*y"
    assert format_poly(Poly.zero(3), CHART) == "0"
    assert format_vector_field(parse_vector_field("dx + (2*x + y)*dz", CHART)) == (
        "dx + (2*x + y)*dz"
    )
    assert format_vector_field(VectorField(CHART, [0, 0, 0])) == "0*dx"


def test_leading_negative_power_round_trips():
    p = -(X_**2)
    assert parse_polynomial(format_poly(p, CHART), CHART) == p
    q = -(X_**2) - Y_
    assert parse_polynomial(format_poly(q, CHART), CHART) == q


def test_ratfunc_print_round_trip():
    val = RatFunc(X_ + Y_, Poly.one(3) + Y_)
    assert parse_scalar(format_scalar(val, CHART), CHART) == val
    val2 = RatFunc(-(X_**2), 2 * (Poly.one(3) + Y_))
    assert parse_scalar(format_scalar(val2, CHART), CHART) == val2
    val3 = RatFunc(X_, Y_**2)
    assert parse_scalar(format_scalar(val3, CHART), CHART) == val3


@settings(max_examples=60)
@given(funcs())
def test_poly_print_parse_round_trip(f):
    assert parse_polynomial(format_poly(f, CHART), CHART) == f


@settings(max_examples=60)
@given(fields())
def test_vf_print_parse_round_trip(v):
    assert parse_vector_field(format_vector_field(v), CHART) == v
