"""Singular Lie filtrations on a chart and their compatibility checks.

A filtration is given by per-level generator lists of polynomial vector
fields, level -1 through level -r, understood as nested C^inf-modules
H_{-1} <= H_{-2} <= ... <= H_{-r} (level -r is expected to span the whole
tangent space at the base point).  Whether the lists honestly generate
locally finitely generated sheaves is not symbolically decidable and is
taken on trust; every verdict produced here is certified on its own terms:
"pass" carries re-substitutable coefficients, "fail" carries a witness
point, and anything else is reported as inconclusive rather than guessed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .exactalg import (
    Poly,
    RatFunc,
    grlex_key,
    linear_solve_exact,
    matrix_rank,
)
from .vfield import Chart, VectorField, coordinate_field, lie_bracket, restrict_zero

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TriState:
    """Checker verdict: pass/fail carry certificates, inconclusive a reason."""

    verdict: str
    certificate: object = None
    reason: str = ""

    @staticmethod
    def passed(certificate) -> "TriState":
        return TriState(PASS, certificate=certificate)

    @staticmethod
    def failed(certificate) -> "TriState":
        return TriState(FAIL, certificate=certificate)

    @staticmethod
    def undecided(reason: str) -> "TriState":
        return TriState(INCONCLUSIVE, reason=reason)


@dataclass(frozen=True)
class Submanifold:
    """A coordinate submanifold {fiber variables = 0} with a base point on it."""

    chart: Chart
    tangent_indices: tuple[int, ...]
    base_point: tuple[Fraction, ...]

    def __init__(
        self,
        chart: Chart,
        tangent_indices: Iterable[int],
        base_point: Sequence[Fraction | int],
    ):
        tangent = tuple(sorted(set(tangent_indices)))
        for idx in tangent:
            if not 0 <= idx < chart.dim:
                raise ValueError(f"tangent index {idx} out of range")
        point = tuple(Fraction(v) for v in base_point)
        if len(point) != chart.dim:
            raise ValueError("base point has wrong dimension")
        tangent_set = set(tangent)
        for i, v in enumerate(point):
            if i not in tangent_set and v != 0:
                raise ValueError(
                    f"base point coordinate {chart.names[i]!r} must vanish off the submanifold"
                )
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "tangent_indices", tangent)
        object.__setattr__(self, "base_point", point)

    @property
    def dim(self) -> int:
        return len(self.tangent_indices)

    @property
    def fiber_indices(self) -> tuple[int, ...]:
        tangent = set(self.tangent_indices)
        return tuple(i for i in range(self.chart.dim) if i not in tangent)

    def restrict(self, value):
        """Set the fiber variables to zero (ambient variable count kept)."""
        return restrict_zero(value, self.fiber_indices)


@dataclass(frozen=True)
class Filtration:
    """Generator lists for levels -1..-order on a common chart."""

    chart: Chart
    order: int
    levels: tuple[tuple[VectorField, ...], ...]
    nested: bool = field(init=False)

    def __init__(self, chart: Chart, order: int, levels: Sequence[Sequence[VectorField]]):
        if order < 1:
            raise ValueError("filtration order must be at least 1")
        if len(levels) != order:
            raise ValueError("expected one generator list per level -1..-order")
        frozen = []
        for gens in levels:
            gens = tuple(gens)
            for g in gens:
                if g.chart != chart:
                    raise ValueError("generator lives on a different chart")
                if not g.has_poly_coeffs():
                    raise ValueError("filtration generators must have polynomial coefficients")
            frozen.append(gens)
        nested = all(
            all(g in frozen[i + 1] for g in frozen[i]) for i in range(order - 1)
        )
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "levels", tuple(frozen))
        object.__setattr__(self, "nested", nested)

    def generators(self, depth: int) -> tuple[VectorField, ...]:
        """Generators of H_{-depth}: every listed generator of levels 1..depth."""
        if not 1 <= depth <= self.order:
            raise ValueError(f"level depth {depth} out of range")
        out: list[VectorField] = []
        for lvl in range(depth):
            for g in self.levels[lvl]:
                if g not in out:
                    out.append(g)
        return tuple(out)

    def max_generator_degree(self) -> int:
        deg = 0
        for gens in self.levels:
            for g in gens:
                for c in g.poly_coeffs():
                    deg = max(deg, c.total_degree())
        return deg

    def default_degree_bound(self) -> int:
        return 2 * self.max_generator_degree() + self.order


def monomials_up_to(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree <= degree, ascending grlex."""
    monos = [
        m
        for m in itertools.product(range(degree + 1), repeat=nvars)
        if sum(m) <= degree
    ]
    monos.sort(key=grlex_key)
    return monos


_RATIONAL_CYCLE = (
    Fraction(1, 2),
    Fraction(-1, 2),
    Fraction(1, 3),
    Fraction(-1, 3),
    Fraction(2, 3),
    Fraction(-2, 3),
    Fraction(3, 2),
    Fraction(-3, 2),
)


def sample_points(nvars: int, budget: int = 60):
    """Deterministic witness-point sequence: origin, integer shells, rationals."""
    count = 0

    def emit(pt):
        nonlocal count
        count += 1
        return tuple(Fraction(v) for v in pt)

    yield emit((0,) * nvars)
    for radius in (1, 2):
        for pt in itertools.product(range(-radius, radius + 1), repeat=nvars):
            if max(abs(c) for c in pt) == radius:
                yield emit(pt)
                if count >= budget:
                    return
    m = len(_RATIONAL_CYCLE)
    for k in range(m):
        pt = tuple(_RATIONAL_CYCLE[(k + i) % m] for i in range(nvars))
        yield emit(pt)
        if count >= budget:
            return


def _membership_columns(
    gens: Sequence[VectorField], monos: Sequence[tuple[int, ...]]
) -> tuple[list[tuple[int, tuple[int, ...]]], dict]:
    """Column index (generator, monomial) plus coefficient data per column.

    Each column maps a row key (component, result monomial) to a Fraction:
    the coefficient of x^beta in x^alpha * g_j^a.
    """
    keys = []
    data = {}
    for j, g in enumerate(gens):
        coeffs = g.poly_coeffs()
        for alpha in monos:
            col = {}
            for a, c in enumerate(coeffs):
                for beta, value in c.terms.items():
                    shifted = tuple(x + y for x, y in zip(alpha, beta))
                    col[(a, shifted)] = col.get((a, shifted), Fraction(0)) + value
            keys.append((j, alpha))
            data[(j, alpha)] = col
    return keys, data


def module_membership(
    v: VectorField, gens: Sequence[VectorField], degree_bound: int
) -> TriState:
    """Decide v = sum u_j g_j with polynomial u_j of degree <= degree_bound.

    A pass certificate is the tuple of coefficient polynomials; a fail
    certificate is a point where v leaves the pointwise span of the
    generators.  When neither a bounded solution nor a witness exists the
    verdict is inconclusive.
    """
    if not gens:
        if v.is_zero():
            return TriState.passed(())
        gens = ()
    chart = v.chart
    for g in gens:
        if g.chart != chart:
            raise ValueError("generators live on a different chart")
    if not v.has_poly_coeffs() or not all(g.has_poly_coeffs() for g in gens):
        raise ValueError("module membership needs polynomial coefficients")
    n = chart.dim
    monos = monomials_up_to(n, degree_bound)
    keys, data = _membership_columns(gens, monos)
    target = {}
    for a, c in enumerate(v.poly_coeffs()):
        for beta, value in c.terms.items():
            target[(a, beta)] = value
    row_keys = set(target)
    for col in data.values():
        row_keys.update(col)
    row_list = sorted(row_keys, key=lambda rk: (rk[0], grlex_key(rk[1])))
    rows = [
        [data[k].get(rk, Fraction(0)) for k in keys] for rk in row_list
    ]
    rhs = [target.get(rk, Fraction(0)) for rk in row_list]
    solution = linear_solve_exact(rows, rhs) if row_list else linear_solve_exact([[Fraction(0)] * len(keys)], [Fraction(0)])
    if solution is not None:
        coeff_polys = []
        for j in range(len(gens)):
            terms = {}
            for idx, (jj, alpha) in enumerate(keys):
                if jj == j and solution.particular[idx]:
                    terms[alpha] = solution.particular[idx]
            coeff_polys.append(Poly(n, terms))
        return TriState.passed(tuple(coeff_polys))
    for point in sample_points(n):
        gen_cols = [g.value_at(point) for g in gens]
        base_rows = [[col[a] for col in gen_cols] for a in range(n)]
        v_val = v.value_at(point)
        extended = [row + [v_val[a]] for a, row in enumerate(base_rows)]
        if matrix_rank(extended) > matrix_rank(base_rows):
            return TriState.failed(point)
    return TriState.undecided("degree_bound")


@dataclass(frozen=True)
class BracketCheck:
    """Result for one generator pair: [G_{-i}[gi], G_{-j}[gj]] in H_{-(i+j)}."""

    i: int
    j: int
    gi: int
    gj: int
    result: TriState


@dataclass(frozen=True)
class BracketCompatReport:
    checks: tuple[BracketCheck, ...]

    @property
    def verdict(self) -> str:
        verdicts = [c.result.verdict for c in self.checks]
        if FAIL in verdicts:
            return FAIL
        if INCONCLUSIVE in verdicts:
            return INCONCLUSIVE
        return PASS

    def first_failure(self) -> BracketCheck | None:
        for c in self.checks:
            if c.result.verdict == FAIL:
                return c
        return None


def check_bracket_compat(
    filtration: Filtration, degree_bound: int | None = None
) -> BracketCompatReport:
    """Verify [H_{-i}, H_{-j}] <= H_{-(i+j)} on all generator pairs.

    Pairs with i + j beyond the filtration order land in the full module
    of vector fields and pass with the tautological coordinate-field
    certificate.
    """
    if degree_bound is None:
        degree_bound = filtration.default_degree_bound()
    chart = filtration.chart
    checks: list[BracketCheck] = []
    r = filtration.order
    for i in range(1, r + 1):
        for j in range(i, r + 1):
            gens_i = filtration.levels[i - 1]
            gens_j = filtration.levels[j - 1]
            for gi, g in enumerate(gens_i):
                for gj, h in enumerate(gens_j):
                    if i == j and gj < gi:
                        continue
                    bracket = lie_bracket(g, h)
                    if i + j <= r:
                        targets = filtration.generators(i + j)
                        result = module_membership(bracket, targets, degree_bound)
                    else:
                        frame = [coordinate_field(chart, a) for a in range(chart.dim)]
                        cert = tuple(bracket.poly_coeffs()) + tuple(
                            Poly.zero(chart.dim) for _ in filtration.generators(r)
                        )
                        result = TriState.passed(cert)
                    checks.append(BracketCheck(i, j, gi, gj, result))
    return BracketCompatReport(tuple(checks))


@dataclass(frozen=True)
class CleanResult:
    """Rank data of TN + H_{-i} along the submanifold.

    ranks[i] is the rank at the base point of the matrix whose columns are
    a tangent basis of N followed by the level -i generators restricted to
    N; generic_ranks[i] is the same rank over the rational-function field
    of N.  The submanifold is clean exactly when the two agree at every
    level.
    """

    verdict: str
    ranks: tuple[int, ...]
    generic_ranks: tuple[int, ...]
    first_bad_level: int | None
    submanifold: Submanifold


def check_clean(filtration: Filtration, submanifold: Submanifold) -> CleanResult:
    chart = filtration.chart
    if submanifold.chart != chart:
        raise ValueError("submanifold lives on a different chart")
    n = chart.dim
    fiber = submanifold.fiber_indices
    ranks = []
    generic_ranks = []
    first_bad = None
    for depth in range(filtration.order + 1):
        columns: list[list[RatFunc]] = []
        for b in submanifold.tangent_indices:
            columns.append(
                [RatFunc.const(n, 1 if a == b else 0) for a in range(n)]
            )
        if depth >= 1:
            for g in filtration.generators(depth):
                columns.append(
                    [RatFunc(restrict_zero(c, fiber)) for c in g.poly_coeffs()]
                )
        rows = [[col[a] for col in columns] for a in range(n)]
        generic = matrix_rank(rows) if columns else 0
        point_rows = [
            [entry.eval(submanifold.base_point) for entry in row] for row in rows
        ]
        at_point = matrix_rank(point_rows) if columns else 0
        ranks.append(at_point)
        generic_ranks.append(generic)
        if at_point != generic and first_bad is None:
            first_bad = depth
    verdict = PASS if first_bad is None else FAIL
    return CleanResult(
        verdict=verdict,
        ranks=tuple(ranks),
        generic_ranks=tuple(generic_ranks),
        first_bad_level=first_bad,
        submanifold=submanifold,
    )


@dataclass(frozen=True)
class WeightAssignment:
    """Adapted variable order and the weight of each adapted position.

    positions[p] is the original chart index sitting at adapted position p
    (tangent variables first, in chart order, then fiber variables in chart
    order); weights[p] is 0 for tangent positions and the filtration level
    at which the rank flag first covers position p otherwise.
    """

    weights: tuple[int, ...]
    positions: tuple[int, ...]
    ranks: tuple[int, ...]


def weight_sequence(clean: CleanResult) -> WeightAssignment:
    ranks = clean.ranks
    sub = clean.submanifold
    n = sub.chart.dim
    if any(ranks[i] > ranks[i + 1] for i in range(len(ranks) - 1)):
        raise ValueError("rank sequence is not non-decreasing")
    if ranks[-1] != n:
        raise ValueError("top filtration level does not span the tangent space")
    if ranks[0] != sub.dim:
        raise ValueError("rank at level 0 does not match the submanifold dimension")
    weights = []
    for p in range(n):
        if p < ranks[0]:
            weights.append(0)
            continue
        for i, k in enumerate(ranks):
            if k >= p + 1:
                weights.append(i)
                break
    positions = tuple(sub.tangent_indices) + sub.fiber_indices
    return WeightAssignment(weights=tuple(weights), positions=positions, ranks=ranks)


def tangency_solve(
    gens: Sequence[VectorField], submanifold: Submanifold, degree_bound: int
) -> list[tuple[Poly, ...]]:
    """Coefficient tuples u with sum u_j g_j tangent to the submanifold.

    Solves the bounded-degree homogeneous system "fiber components vanish
    on N" and returns a deterministic basis of coefficient tuples.  May
    miss higher-degree combinations (degree-bound caveat).
    """
    chart = submanifold.chart
    n = chart.dim
    fiber = submanifold.fiber_indices
    monos = monomials_up_to(n, degree_bound)
    keys = []
    cols = []
    for j, g in enumerate(gens):
        if g.chart != chart:
            raise ValueError("generator lives on a different chart")
        coeffs = g.poly_coeffs()
        for alpha in monos:
            col = {}
            for a in fiber:
                restricted = restrict_zero(
                    Poly.term(n, alpha, 1) * coeffs[a], fiber
                )
                for beta, value in restricted.terms.items():
                    col[(a, beta)] = value
            keys.append((j, alpha))
            cols.append(col)
    row_keys = sorted(
        {rk for col in cols for rk in col}, key=lambda rk: (rk[0], grlex_key(rk[1]))
    )
    if not row_keys:
        # every combination is tangent; the generators themselves form a basis
        out = []
        for j in range(len(gens)):
            out.append(
                tuple(
                    Poly.one(n) if jj == j else Poly.zero(n)
                    for jj in range(len(gens))
                )
            )
        return out
    rows = [[col.get(rk, Fraction(0)) for col in cols] for rk in row_keys]
    solution = linear_solve_exact(rows, [Fraction(0)] * len(rows))
    assert solution is not None
    combos = []
    for vec in solution.nullspace:
        coeff_polys = []
        for j in range(len(gens)):
            terms = {}
            for idx, (jj, alpha) in enumerate(keys):
                if jj == j and vec[idx]:
                    terms[alpha] = vec[idx]
            coeff_polys.append(Poly(n, terms))
        combos.append(tuple(coeff_polys))
    return combos


def restrict_distribution(
    gens: Sequence[VectorField], submanifold: Submanifold, degree_bound: int
) -> tuple[Chart, list[VectorField]]:
    """Generators of the distribution induced on the submanifold.

    Finds bounded-degree combinations tangent to N and restricts them to
    N's chart.  The output list may undershoot the ideal module when the
    degree bound is too small; it never contains wrong fields.
    """
    chart = submanifold.chart
    fiber = submanifold.fiber_indices
    tangent = submanifold.tangent_indices
    chart_n = Chart(tuple(chart.names[b] for b in tangent))
    combos = tangency_solve(gens, submanifold, degree_bound)
    fields: list[VectorField] = []
    for combo in combos:
        total = [Poly.zero(chart.dim) for _ in range(chart.dim)]
        for u, g in zip(combo, gens):
            for a, c in enumerate(g.poly_coeffs()):
                total[a] = total[a] + u * c
        projected = []
        for b in tangent:
            restricted = restrict_zero(total[b], fiber)
            terms = {}
            for mono, value in restricted.terms.items():
                terms[tuple(mono[t] for t in tangent)] = value
            projected.append(Poly(len(tangent), terms))
        fld = VectorField(chart_n, projected)
        if not fld.is_zero() and fld not in fields:
            fields.append(fld)
    return chart_n, fields


def product_distribution(
    chart_a: Chart,
    gens_a: Sequence[VectorField],
    chart_b: Chart,
    gens_b: Sequence[VectorField],
) -> tuple[Chart, list[VectorField]]:
    """Embed two generator families on the product chart, side by side."""
    names = chart_a.names + chart_b.names
    chart = Chart(names)
    na, nb = chart_a.dim, chart_b.dim

    def embed(p: Poly, left: bool) -> Poly:
        terms = {}
        for mono, c in p.terms.items():
            full = mono + (0,) * nb if left else (0,) * na + mono
            terms[full] = c
        return Poly(na + nb, terms)

    out: list[VectorField] = []
    for g in gens_a:
        coeffs = [embed(c, True) for c in g.poly_coeffs()]
        out.append(VectorField(chart, coeffs + [Poly.zero(na + nb)] * nb))
    for g in gens_b:
        coeffs = [embed(c, False) for c in g.poly_coeffs()]
        out.append(VectorField(chart, [Poly.zero(na + nb)] * na + coeffs))
    return chart, out
