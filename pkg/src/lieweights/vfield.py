"""Polynomial charts, vector fields, differential operator words, and the
ASCII expression grammar.

Grammar accepted by the parser (whitespace insignificant, errors carry
line/column):

    expr     := term { ("+" | "-") term }
    term     := factor { ("*" | "/") factor }
    factor   := atom [ "^" nat ]
    atom     := rational | ident | "d" ident | "(" expr ")" | "-" atom
    rational := nat [ "/" nat ]
    ident    := letter { letter | digit | "_" }

"/" between arbitrary factors is a superset of the written grammar so that
printed rational functions re-parse; plain polynomial and vector-field text
never needs it.  An identifier that exactly matches a chart variable wins
over the "d"-prefixed reading.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .exactalg import Poly, RatFunc, as_ratfunc

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")

Scalar = Union[Poly, RatFunc]


@dataclass(frozen=True)
class Chart:
    """An ordered tuple of distinct coordinate names."""

    names: tuple[str, ...]

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        seen = set()
        for name in names:
            if not _IDENT_RE.fullmatch(name):
                raise ValueError(f"invalid coordinate name {name!r}")
            if name in seen:
                raise ValueError(f"duplicate coordinate name {name!r}")
            seen.add(name)
        object.__setattr__(self, "names", names)

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no coordinate named {name!r}") from None

    def var(self, name: str) -> Poly:
        return Poly.variable(self.dim, self.index(name))

    def zero(self) -> Poly:
        return Poly.zero(self.dim)

    def one(self) -> Poly:
        return Poly.one(self.dim)


class VectorField:
    """A vector field on a chart, one coefficient per coordinate direction."""

    __slots__ = ("chart", "coeffs")

    def __init__(self, chart: Chart, coeffs: Sequence[Scalar | Fraction | int]):
        if len(coeffs) != chart.dim:
            raise ValueError("coefficient count does not match chart dimension")
        object.__setattr__(
            self, "coeffs", tuple(as_ratfunc(c, chart.dim) for c in coeffs)
        )
        object.__setattr__(self, "chart", chart)

    def __setattr__(self, name, value):
        raise AttributeError("VectorField is immutable")

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def has_poly_coeffs(self) -> bool:
        return all(c.is_polynomial() for c in self.coeffs)

    def poly_coeffs(self) -> tuple[Poly, ...]:
        return tuple(c.as_poly() for c in self.coeffs)

    def apply(self, f: Scalar) -> Scalar:
        """Directional derivative: sum of coeff_a * df/dx_a.

        Returns a Poly when the field and the argument are polynomial.
        """
        if isinstance(f, Poly):
            if f.nvars != self.chart.dim:
                raise ValueError("function does not live on the field's chart")
            if self.has_poly_coeffs():
                acc_p = Poly.zero(f.nvars)
                for a, c in enumerate(self.coeffs):
                    if c:
                        acc_p = acc_p + c.as_poly() * f.diff(a)
                return acc_p
            f = RatFunc(f)
        if f.nvars != self.chart.dim:
            raise ValueError("function does not live on the field's chart")
        acc = RatFunc.const(f.nvars, 0)
        for a, c in enumerate(self.coeffs):
            if c:
                acc = acc + c * f.diff(a)
        return acc

    def __add__(self, other: "VectorField") -> "VectorField":
        if not isinstance(other, VectorField):
            return NotImplemented
        if other.chart != self.chart:
            raise ValueError("vector fields live on different charts")
        return VectorField(
            self.chart, [a + b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        if not isinstance(other, VectorField):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, [-c for c in self.coeffs])

    def scale(self, factor: Scalar | Fraction | int) -> "VectorField":
        f = as_ratfunc(factor, self.chart.dim)
        return VectorField(self.chart, [f * c for c in self.coeffs])

    def value_at(self, point: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(c.eval(point) for c in self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and all(
            a == b for a, b in zip(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.chart, self.coeffs))

    def __repr__(self):
        return f"VectorField({format_vector_field(self)!r})"


def coordinate_field(chart: Chart, index: int) -> VectorField:
    """The coordinate frame field d/dx_index."""
    coeffs = [Fraction(1) if i == index else Fraction(0) for i in range(chart.dim)]
    return VectorField(chart, coeffs)


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    """Commutator [X, Y] with coefficients X^b d_b Y^a - Y^b d_b X^a."""
    if x.chart != y.chart:
        raise ValueError("vector fields live on different charts")
    n = x.chart.dim
    out = []
    for a in range(n):
        acc = RatFunc.const(n, 0)
        for b in range(n):
            if x.coeffs[b]:
                acc = acc + x.coeffs[b] * y.coeffs[a].diff(b)
            if y.coeffs[b]:
                acc = acc - y.coeffs[b] * x.coeffs[a].diff(b)
        out.append(acc)
    return VectorField(x.chart, out)


@dataclass(frozen=True)
class DiffOpWord:
    """A composition of vector fields acting as a differential operator.

    Factors are applied rightmost first: DiffOpWord([X, Y]) sends f to
    X(Y(f)).
    """

    chart: Chart
    factors: tuple[VectorField, ...]

    def __init__(self, chart: Chart, factors: Sequence[VectorField]):
        factors = tuple(factors)
        for f in factors:
            if f.chart != chart:
                raise ValueError("word factor lives on a different chart")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "factors", factors)

    @property
    def order(self) -> int:
        return len(self.factors)

    def apply(self, f: Scalar) -> Scalar:
        for field in reversed(self.factors):
            f = field.apply(f)
        return f


def restrict_zero(value: Scalar, fiber_indices: Iterable[int]) -> Scalar:
    """Substitute 0 for the listed variables.

    The result keeps the ambient variable count.  Raises when a rational
    function's denominator vanishes identically under the substitution.
    """
    fiber = set(fiber_indices)

    def chop(p: Poly) -> Poly:
        return Poly(
            p.nvars,
            {m: c for m, c in p.terms.items() if all(m[i] == 0 for i in fiber)},
        )

    if isinstance(value, Poly):
        return chop(value)
    den = chop(value.den)
    if den.is_zero():
        raise ZeroDivisionError("denominator vanishes identically on the submanifold")
    return RatFunc(chop(value.num), den)


# -- parsing -----------------------------------------------------------------


class ParseError(ValueError):
    """Syntax or semantic error in expression text, with position info."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class _Token:
    kind: str  # "nat" | "ident" | "op" | "end"
    text: str
    line: int
    column: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(src):
        ch = src[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(src) and src[j].isdigit():
                j += 1
            tokens.append(_Token("nat", src[i:j], line, col))
            col += j - i
            i = j
            continue
        m = _IDENT_RE.match(src, i)
        if m:
            tokens.append(_Token("ident", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        if ch in "+-*/^()":
            tokens.append(_Token("op", ch, line, col))
            col += 1
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Value:
    """Intermediate parse value: a scalar part plus an optional vector part."""

    __slots__ = ("scalar", "vector")

    def __init__(self, scalar: RatFunc, vector: tuple[RatFunc, ...] | None):
        self.scalar = scalar
        self.vector = vector


class _Parser:
    def __init__(self, src: str, chart: Chart):
        self.chart = chart
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: _Token):
        raise ParseError(message, tok.line, tok.column)

    def _scalar(self, value) -> _Value:
        return _Value(as_ratfunc(value, self.chart.dim), None)

    def parse(self) -> _Value:
        val = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            self.error(f"unexpected {tok.text!r}", tok)
        return val

    def expr(self) -> _Value:
        val = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next()
            rhs = self.term()
            scalar = (
                val.scalar + rhs.scalar if op.text == "+" else val.scalar - rhs.scalar
            )
            if val.vector is None and rhs.vector is None:
                vector = None
            else:
                zero = as_ratfunc(0, self.chart.dim)
                left = val.vector or (zero,) * self.chart.dim
                right = rhs.vector or (zero,) * self.chart.dim
                if op.text == "+":
                    vector = tuple(a + b for a, b in zip(left, right))
                else:
                    vector = tuple(a - b for a, b in zip(left, right))
            val = _Value(scalar, vector)
        return val

    def term(self) -> _Value:
        val = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next()
            rhs = self.factor()
            if op.text == "*":
                if val.vector is not None and rhs.vector is not None:
                    self.error("cannot multiply two vector fields", op)
                if rhs.vector is not None:
                    val, rhs = rhs, val
                scalar = val.scalar * rhs.scalar
                vector = (
                    None
                    if val.vector is None
                    else tuple(c * rhs.scalar for c in val.vector)
                )
                val = _Value(scalar, vector)
            else:
                if rhs.vector is not None:
                    self.error("cannot divide by a vector field", op)
                if rhs.scalar.is_zero():
                    self.error("division by zero", op)
                scalar = val.scalar / rhs.scalar
                vector = (
                    None
                    if val.vector is None
                    else tuple(c / rhs.scalar for c in val.vector)
                )
                val = _Value(scalar, vector)
        return val

    def factor(self) -> _Value:
        val = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            op = self.next()
            exp_tok = self.peek()
            if exp_tok.kind != "nat":
                self.error("exponent must be a natural number", exp_tok)
            self.next()
            if val.vector is not None:
                self.error("cannot raise a vector field to a power", op)
            val = self._scalar(val.scalar ** int(exp_tok.text))
        return val

    def atom(self) -> _Value:
        tok = self.peek()
        if tok.kind == "nat":
            self.next()
            return self._scalar(Fraction(int(tok.text)))
        if tok.kind == "ident":
            self.next()
            name = tok.text
            if name in self.chart.names:
                return self._scalar(self.chart.var(name))
            if name.startswith("d") and name[1:] in self.chart.names:
                idx = self.chart.index(name[1:])
                zero = as_ratfunc(0, self.chart.dim)
                one = as_ratfunc(1, self.chart.dim)
                vec = tuple(one if i == idx else zero for i in range(self.chart.dim))
                return _Value(as_ratfunc(0, self.chart.dim), vec)
            self.error(f"unknown identifier {name!r}", tok)
        if tok.kind == "op" and tok.text == "(":
            self.next()
            val = self.expr()
            close = self.peek()
            if not (close.kind == "op" and close.text == ")"):
                self.error("expected ')'", close)
            self.next()
            return val
        if tok.kind == "op" and tok.text == "-":
            self.next()
            val = self.atom()
            vector = (
                None if val.vector is None else tuple(-c for c in val.vector)
            )
            return _Value(-val.scalar, vector)
        self.error(f"unexpected {tok.text!r}" if tok.text else "unexpected end of input", tok)


def parse_scalar(src: str, chart: Chart) -> RatFunc:
    """Parse a scalar (function) expression to a rational function."""
    val = _Parser(src, chart).parse()
    if val.vector is not None:
        raise ParseError("expression contains vector field factors", 1, 1)
    return val.scalar


def parse_polynomial(src: str, chart: Chart) -> Poly:
    """Parse a polynomial expression; rejects genuine denominators."""
    scalar = parse_scalar(src, chart)
    if not scalar.is_polynomial():
        raise ParseError("expression is not polynomial", 1, 1)
    return scalar.as_poly()


def parse_vector_field(src: str, chart: Chart) -> VectorField:
    """Parse a vector field: a sum of terms, each with exactly one d-factor."""
    val = _Parser(src, chart).parse()
    if val.vector is None:
        raise ParseError("expression has no directional part", 1, 1)
    if not val.scalar.is_zero():
        raise ParseError("vector field expression has a scalar part", 1, 1)
    return VectorField(chart, val.vector)


# -- printing -----------------------------------------------------------------


def _print_order_key(mono):
    return (sum(mono), tuple(-e for e in mono))


def _format_monomial(mono, chart: Chart) -> str:
    parts = []
    for name, e in zip(chart.names, mono):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _poly_term_strings(p: Poly, chart: Chart) -> list[tuple[bool, str]]:
    """Per-term (negative?, body) pairs in canonical print order."""
    out = []
    for mono, c in sorted(p.terms.items(), key=lambda kv: _print_order_key(kv[0])):
        neg = c < 0
        mag = -c if neg else c
        mono_str = _format_monomial(mono, chart)
        if not mono_str:
            body = str(mag)
        elif mag == 1:
            body = mono_str
        else:
            body = f"{mag}*{mono_str}"
        out.append((neg, body))
    return out


def _join_signed(parts: list[tuple[bool, str]]) -> str:
    if not parts:
        return "0"
    neg, body = parts[0]
    # a leading "-x^2" would re-parse as (-x)^2 under the grammar's unary
    # minus, so spell out the unit coefficient in exactly that position
    if neg and body[0].isalpha() and "^" in body.split("*", 1)[0]:
        body = f"1*{body}"
    text = ("-" if neg else "") + body
    for neg, body in parts[1:]:
        text += (" - " if neg else " + ") + body
    return text


def format_poly(p: Poly, chart: Chart) -> str:
    if p.nvars != chart.dim:
        raise ValueError("polynomial does not live on this chart")
    return _join_signed(_poly_term_strings(p, chart))


def _den_needs_parens(den: Poly) -> bool:
    if len(den.terms) != 1:
        return True
    ((mono, c),) = den.terms.items()
    if c != 1 and sum(mono) > 0:
        return True
    return sum(1 for e in mono if e) > 1


def format_scalar(value: Scalar, chart: Chart) -> str:
    if isinstance(value, Poly):
        return format_poly(value, chart)
    if value.is_polynomial():
        return format_poly(value.num, chart)
    num = format_poly(value.num, chart)
    if len(value.num.terms) > 1:
        num = f"({num})"
    den = format_poly(value.den, chart)
    if _den_needs_parens(value.den):
        den = f"({den})"
    return f"{num}/{den}"


def format_vector_field(v: VectorField) -> str:
    chart = v.chart
    parts: list[tuple[bool, str]] = []
    for name, coeff in zip(chart.names, v.coeffs):
        if coeff.is_zero():
            continue
        if coeff.is_polynomial():
            p = coeff.num
            if len(p.terms) == 1:
                for neg, body in _poly_term_strings(p, chart):
                    if body == "1":
                        parts.append((neg, f"d{name}"))
                    else:
                        parts.append((neg, f"{body}*d{name}"))
                continue
            parts.append((False, f"({format_poly(p, chart)})*d{name}"))
        else:
            parts.append((False, f"({format_scalar(coeff, chart)})*d{name}"))
    if not parts:
        return f"0*d{chart.names[0]}"
    return _join_signed(parts)
