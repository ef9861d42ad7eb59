"""Exact arithmetic foundation: sparse rational-coefficient polynomials,
rational functions, and deterministic exact linear algebra.

Representation notes:
  * Scalars are stdlib ``fractions.Fraction`` (lowest terms, positive
    denominator by construction).
  * A polynomial is a mapping {exponent tuple -> Fraction} with no zero
    coefficients stored; two polynomials are equal iff the mappings are
    equal.
  * The fixed monomial order is graded lexicographic: total degree first,
    then the exponent tuple compared left to right.
  * A rational function is normalized so its denominator has integer
    content 1 and positive leading coefficient.  The numerator/denominator
    gcd is cancelled only while both total degrees are at most
    ``GCD_DEGREE_CAP``; larger pairs stay unreduced (values unaffected,
    only size).
  * Gauss-Jordan elimination uses a fixed pivot rule (first column holding
    a nonzero entry, smallest row index) so solutions and nullspace bases
    are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence, Union

Monomial = tuple[int, ...]
ScalarLike = Union[Fraction, int]

GCD_DEGREE_CAP = 8


def grlex_key(mono: Monomial) -> tuple[int, Monomial]:
    """Sort key realizing graded lexicographic order (ascending)."""
    return (sum(mono), mono)


def _as_fraction(value: ScalarLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected rational scalar, got {type(value).__name__}")


class Poly:
    """Sparse multivariate polynomial over the rationals.

    Immutable by convention: the term mapping is canonicalized at
    construction time and never mutated afterwards.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Monomial, ScalarLike] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        canon: dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            mono = tuple(mono)
            if len(mono) != nvars:
                raise ValueError(f"exponent tuple {mono} does not match nvars={nvars}")
            if any(e < 0 for e in mono):
                raise ValueError(f"negative exponent in {mono}")
            c = _as_fraction(coeff)
            if c:
                canon[mono] = c
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", canon)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> "Poly":
        return Poly(nvars)

    @staticmethod
    def const(nvars: int, value: ScalarLike) -> "Poly":
        return Poly(nvars, {(0,) * nvars: value})

    @staticmethod
    def one(nvars: int) -> "Poly":
        return Poly.const(nvars, 1)

    @staticmethod
    def variable(nvars: int, index: int) -> "Poly":
        if not 0 <= index < nvars:
            raise ValueError(f"variable index {index} out of range for nvars={nvars}")
        mono = tuple(1 if i == index else 0 for i in range(nvars))
        return Poly(nvars, {mono: 1})

    @staticmethod
    def term(nvars: int, mono: Monomial, coeff: ScalarLike) -> "Poly":
        return Poly(nvars, {tuple(mono): coeff})

    # -- predicates and views ----------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {(0,) * self.nvars: Fraction(1)}

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.terms)

    def constant_value(self) -> Fraction:
        """The value of a constant polynomial (raises if non-constant)."""
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def total_degree(self) -> int:
        """Maximum total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def degree_in(self, index: int) -> int:
        """Maximum exponent of one variable; 0 when the variable is absent."""
        if not self.terms:
            return 0
        return max(m[index] for m in self.terms)

    def leading_monomial(self) -> Monomial:
        if not self.terms:
            raise ValueError("zero polynomial has no leading monomial")
        return max(self.terms, key=grlex_key)

    def leading_coefficient(self) -> Fraction:
        return self.terms[self.leading_monomial()]

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in ascending graded lexicographic order."""
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def variables_used(self) -> tuple[int, ...]:
        used = set()
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    used.add(i)
        return tuple(sorted(used))

    # -- ring operations -----------------------------------------------------

    def _coerce(self, other) -> "Poly | None":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomial dimension mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.nvars, other)
        return None

    def __add__(self, other) -> "Poly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for mono, c in o.terms.items():
            s = out.get(mono, Fraction(0)) + c
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "Poly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if not c:
                return Poly.zero(self.nvars)
            return Poly(self.nvars, {m: k * c for m, k in self.terms.items()})
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                mono = tuple(a + b for a, b in zip(m1, m2))
                s = out.get(mono, Fraction(0)) + c1 * c2
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial exponent must be a non-negative integer")
        result = Poly.one(self.nvars)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Poly.const(self.nvars, other).terms
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # -- calculus and evaluation ---------------------------------------------

    def diff(self, index: int) -> "Poly":
        """Partial derivative with respect to one variable."""
        if not 0 <= index < self.nvars:
            raise ValueError(f"variable index {index} out of range")
        out: dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            e = mono[index]
            if e:
                lowered = tuple(x - 1 if i == index else x for i, x in enumerate(mono))
                out[lowered] = out.get(lowered, Fraction(0)) + c * e
        return Poly(self.nvars, out)

    def subst(self, images: Sequence["Poly | RatFunc"]):
        """Substitute one expression per variable.

        Returns a Poly when every image is a Poly, otherwise a RatFunc.
        All images must share a common variable count, which becomes the
        variable count of the result.
        """
        if len(images) != self.nvars:
            raise ValueError("substitution needs one image per variable")
        if not images:
            if self.nvars == 0:
                raise ValueError("cannot infer target dimension for 0-variable substitution")
        target = images[0].nvars if images else 0
        for img in images:
            if img.nvars != target:
                raise ValueError("substitution images live in different variable counts")
        all_poly = all(isinstance(img, Poly) for img in images)
        if all_poly:
            acc_p = Poly.zero(target)
            for mono, c in self.sorted_terms():
                term = Poly.const(target, c)
                for i, e in enumerate(mono):
                    if e:
                        term = term * images[i] ** e
                acc_p = acc_p + term
            return acc_p
        acc = RatFunc.from_poly(Poly.zero(target))
        for mono, c in self.sorted_terms():
            term = RatFunc.from_poly(Poly.const(target, c))
            for i, e in enumerate(mono):
                if e:
                    img = images[i]
                    rf = img if isinstance(img, RatFunc) else RatFunc.from_poly(img)
                    term = term * rf ** e
            acc = acc + term
        return acc

    def eval(self, point: Sequence[ScalarLike]) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError("evaluation point has wrong dimension")
        pt = [_as_fraction(v) for v in point]
        total = Fraction(0)
        for mono, c in self.terms.items():
            val = c
            for i, e in enumerate(mono):
                if e:
                    val *= pt[i] ** e
            total += val
        return total

    # -- content helpers ------------------------------------------------------

    def content(self) -> Fraction:
        """Positive rational c such that self/c has coprime integer coefficients.

        Returns 0 for the zero polynomial.
        """
        if not self.terms:
            return Fraction(0)
        nums = [c.numerator for c in self.terms.values()]
        dens = [c.denominator for c in self.terms.values()]
        g = 0
        for n in nums:
            g = gcd(g, abs(n))
        l = 1
        for d in dens:
            l = lcm(l, d)
        return Fraction(g, l)

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        bits = []
        for mono, c in self.sorted_terms():
            factors = [str(c)]
            for i, e in enumerate(mono):
                if e:
                    factors.append(f"v{i}" + (f"^{e}" if e > 1 else ""))
            bits.append("*".join(factors))
        return "Poly(" + " + ".join(bits) + ")"


def divide_exact(f: Poly, g: Poly) -> Poly | None:
    """Exact polynomial quotient f/g, or None when g does not divide f."""
    if g.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if f.is_zero():
        return Poly.zero(f.nvars)
    if f.nvars != g.nvars:
        raise ValueError("polynomial dimension mismatch")
    lm_g = g.leading_monomial()
    lc_g = g.terms[lm_g]
    quotient: dict[Monomial, Fraction] = {}
    rem = f
    while not rem.is_zero():
        lm = rem.leading_monomial()
        diff = tuple(a - b for a, b in zip(lm, lm_g))
        if any(d < 0 for d in diff):
            return None
        c = rem.terms[lm] / lc_g
        quotient[diff] = c
        rem = rem - Poly.term(f.nvars, diff, c) * g
    return Poly(f.nvars, quotient)


def _coeffs_in(p: Poly, var: int) -> dict[int, Poly]:
    """View p as univariate in one variable with polynomial coefficients."""
    out: dict[int, dict[Monomial, Fraction]] = {}
    for mono, c in p.terms.items():
        k = mono[var]
        stripped = tuple(0 if i == var else e for i, e in enumerate(mono))
        out.setdefault(k, {})[stripped] = c
    return {k: Poly(p.nvars, terms) for k, terms in out.items()}


def _content_in(p: Poly, var: int) -> Poly:
    """Gcd of the coefficients of p viewed as univariate in var."""
    coeffs = _coeffs_in(p, var)
    acc = Poly.zero(p.nvars)
    for k in sorted(coeffs):
        acc = poly_gcd(acc, coeffs[k])
        if acc.is_one():
            break
    return acc


def _primitive_in(p: Poly, var: int) -> Poly:
    cont = _content_in(p, var)
    if cont.is_zero():
        return p
    q = divide_exact(p, cont)
    assert q is not None
    return q


def _pseudo_rem(a: Poly, b: Poly, var: int) -> Poly:
    """Pseudo-remainder of a by b with respect to one variable."""
    db = b.degree_in(var)
    lb = _coeffs_in(b, var)[db]
    while not a.is_zero() and a.degree_in(var) >= db:
        da = a.degree_in(var)
        la = _coeffs_in(a, var)[da]
        shift = Poly.term(a.nvars, tuple(da - db if i == var else 0 for i in range(a.nvars)), 1)
        a = lb * a - la * shift * b
    return a


def _normalize_primitive(p: Poly) -> Poly:
    """Scale to coprime integer coefficients with positive leading coefficient."""
    if p.is_zero():
        return p
    c = p.content()
    if p.leading_coefficient() < 0:
        c = -c
    q = p * (1 / c)
    return q


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Gcd over Q[x_1..x_n], returned integer-primitive with positive lead.

    Constants count as units: the gcd of two nonzero constants is 1.
    """
    if f.nvars != g.nvars:
        raise ValueError("polynomial dimension mismatch")
    if f.is_zero():
        return _normalize_primitive(g)
    if g.is_zero():
        return _normalize_primitive(f)
    used = sorted(set(f.variables_used()) | set(g.variables_used()))
    if not used:
        return Poly.one(f.nvars)
    var = used[-1]
    cont_f = _content_in(f, var)
    cont_g = _content_in(g, var)
    a = _primitive_in(f, var)
    b = _primitive_in(g, var)
    if a.degree_in(var) < b.degree_in(var):
        a, b = b, a
    while not b.is_zero():
        r = _pseudo_rem(a, b, var)
        a, b = b, _primitive_in(r, var)
    result = poly_gcd(cont_f, cont_g) * _primitive_in(a, var)
    return _normalize_primitive(result)


class RatFunc:
    """Quotient of two polynomials in normalized form.

    The denominator always has integer content 1 and positive leading
    coefficient; the zero function is stored as 0/1.  Equality is semantic
    (cross multiplication), so deferred gcd reduction never changes it.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None:
            den = Poly.one(num.nvars)
        if num.nvars != den.nvars:
            raise ValueError("numerator/denominator dimension mismatch")
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            num, den = Poly.zero(num.nvars), Poly.one(num.nvars)
        elif not den.is_one():
            if (
                num.total_degree() <= GCD_DEGREE_CAP
                and den.total_degree() <= GCD_DEGREE_CAP
            ):
                g = poly_gcd(num, den)
                if not g.is_one():
                    num_q = divide_exact(num, g)
                    den_q = divide_exact(den, g)
                    assert num_q is not None and den_q is not None
                    num, den = num_q, den_q
            c = den.content()
            if den.leading_coefficient() < 0:
                c = -c
            if c != 1:
                inv = 1 / c
                num = num * inv
                den = den * inv
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatFunc is immutable")

    @staticmethod
    def from_poly(p: Poly) -> "RatFunc":
        return RatFunc(p)

    @staticmethod
    def const(nvars: int, value: ScalarLike) -> "RatFunc":
        return RatFunc(Poly.const(nvars, value))

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def as_poly(self) -> Poly:
        if not self.den.is_one():
            raise ValueError("rational function has a nontrivial denominator")
        return self.num

    def _coerce(self, other) -> "RatFunc | None":
        if isinstance(other, RatFunc):
            if other.nvars != self.nvars:
                raise ValueError("rational function dimension mismatch")
            return other
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("rational function dimension mismatch")
            return RatFunc(other)
        if isinstance(other, (int, Fraction)):
            return RatFunc.const(self.nvars, other)
        return None

    def __add__(self, other) -> "RatFunc":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den.is_one() and o.den.is_one():
            return RatFunc(self.num + o.num)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other) -> "RatFunc":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "RatFunc":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "RatFunc":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den.is_one() and o.den.is_one():
            return RatFunc(self.num * o.num)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFunc":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other) -> "RatFunc":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, exponent: int) -> "RatFunc":
        if not isinstance(exponent, int):
            raise ValueError("exponent must be an integer")
        if exponent < 0:
            if self.is_zero():
                raise ZeroDivisionError("negative power of the zero function")
            return RatFunc(self.den ** (-exponent), self.num ** (-exponent))
        return RatFunc(self.num**exponent, self.den**exponent)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num * o.den == o.num * self.den

    def __hash__(self):
        if self.den.is_one():
            return hash(self.num)
        return hash((self.num, self.den))

    def __bool__(self):
        return not self.num.is_zero()

    def diff(self, index: int) -> "RatFunc":
        """Partial derivative (quotient rule when the denominator is nontrivial)."""
        if self.den.is_one():
            return RatFunc(self.num.diff(index))
        return RatFunc(
            self.num.diff(index) * self.den - self.num * self.den.diff(index),
            self.den * self.den,
        )

    def subst(self, images: Sequence["Poly | RatFunc"]) -> "RatFunc":
        num = self.num.subst(images)
        den = self.den.subst(images)
        num_rf = num if isinstance(num, RatFunc) else RatFunc(num)
        den_rf = den if isinstance(den, RatFunc) else RatFunc(den)
        return num_rf / den_rf

    def eval(self, point: Sequence[ScalarLike]) -> Fraction:
        d = self.den.eval(point)
        if not d:
            raise ZeroDivisionError("denominator vanishes at evaluation point")
        return self.num.eval(point) / d

    def __repr__(self):
        if self.den.is_one():
            return f"RatFunc({self.num!r})"
        return f"RatFunc({self.num!r} / {self.den!r})"


def as_ratfunc(value: "Poly | RatFunc | ScalarLike", nvars: int) -> RatFunc:
    """Coerce a polynomial or scalar into a RatFunc of given dimension."""
    if isinstance(value, RatFunc):
        if value.nvars != nvars:
            raise ValueError("rational function dimension mismatch")
        return value
    if isinstance(value, Poly):
        if value.nvars != nvars:
            raise ValueError("polynomial dimension mismatch")
        return RatFunc(value)
    return RatFunc.const(nvars, value)


@dataclass(frozen=True)
class LinearSolution:
    """A particular solution together with a basis of the homogeneous space."""

    particular: tuple[Fraction, ...]
    nullspace: tuple[tuple[Fraction, ...], ...]


def _row_reduce(rows: list[list], ncols: int) -> list[int]:
    """In-place reduced row echelon form over any exact field.

    Entries need +, -, *, / and truthiness for the zero test.  The pivot
    rule is fixed: scan columns left to right, take the topmost unused row
    with a nonzero entry.  Returns the pivot column indices in order.
    """
    pivots: list[int] = []
    pivot_row = 0
    for col in range(ncols):
        sel = None
        for r in range(pivot_row, len(rows)):
            if rows[r][col]:
                sel = r
                break
        if sel is None:
            continue
        rows[pivot_row], rows[sel] = rows[sel], rows[pivot_row]
        inv = rows[pivot_row][col]
        rows[pivot_row] = [x / inv for x in rows[pivot_row]]
        for r in range(len(rows)):
            if r != pivot_row and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[pivot_row])]
        pivots.append(col)
        pivot_row += 1
        if pivot_row == len(rows):
            break
    return pivots


def matrix_rank(rows: Sequence[Sequence]) -> int:
    """Rank of a matrix over an exact field (Fraction or RatFunc entries)."""
    work = [list(r) for r in rows]
    if not work or not work[0]:
        return 0
    return len(_row_reduce(work, len(work[0])))


def linear_solve_exact(
    rows: Sequence[Sequence[ScalarLike]], rhs: Sequence[ScalarLike]
) -> LinearSolution | None:
    """Solve A x = b exactly over the rationals.

    Returns a particular solution (free variables set to 0) plus a basis
    of the nullspace, or None when the system is infeasible.  Output is
    deterministic for a given input.
    """
    m = len(rows)
    if len(rhs) != m:
        raise ValueError("right-hand side length does not match row count")
    n = len(rows[0]) if m else 0
    work: list[list[Fraction]] = []
    for row, b in zip(rows, rhs):
        if len(row) != n:
            raise ValueError("ragged matrix")
        work.append([_as_fraction(x) for x in row] + [_as_fraction(b)])
    if m == 0:
        return LinearSolution(particular=(), nullspace=())
    pivots = _row_reduce(work, n)
    pivot_rows = len(pivots)
    for r in range(pivot_rows, m):
        if work[r][n]:
            return None
    particular = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        particular[col] = work[i][n]
    free_cols = [c for c in range(n) if c not in set(pivots)]
    basis: list[tuple[Fraction, ...]] = []
    for fc in free_cols:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for i, col in enumerate(pivots):
            vec[col] = -work[i][fc]
        basis.append(tuple(vec))
    return LinearSolution(particular=tuple(particular), nullspace=tuple(basis))
