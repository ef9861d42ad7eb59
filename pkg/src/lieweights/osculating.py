"""Graded nilpotent Lie algebras osculating a filtration at a point.

The graded piece at depth i is the span of the level's generators divided
by the next-shallower level together with combinations whose coefficients
vanish at the point.  Quotients are computed through bounded-degree exact
linear solves, so a relation whose certificate needs coefficient degree
above the bound is missed: reported dimensions are upper bounds that
settle once the bound is raised far enough.  Structure constants that
cannot be certified at the bound are flagged as unverified, never guessed.

Basis elements are picked greedily in generator-list order, which makes
every output deterministic for a given input ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exactalg import Poly, RatFunc, grlex_key, linear_solve_exact, _row_reduce
from .lieflt import Filtration, Submanifold, monomials_up_to, tangency_solve
from .vfield import VectorField, lie_bracket
from .weightcoord import (
    INFINITE,
    WeightedChart,
    WeightingResult,
    push_to_weighted,
    weighted_coordinates,
    weighted_degree_in_chart,
)

Vector = tuple[Fraction, ...]


def _zero_vector(n: int) -> Vector:
    return tuple(Fraction(0) for _ in range(n))


def _unit_vector(n: int, j: int) -> Vector:
    return tuple(Fraction(1) if i == j else Fraction(0) for i in range(n))


def _add_scaled(acc: list[Fraction], vec: Sequence[Fraction], c: Fraction) -> None:
    for i, v in enumerate(vec):
        if v:
            acc[i] += c * v


def _reduce_vectors(vectors: Sequence[Sequence[Fraction]]) -> tuple[Vector, ...]:
    """Canonical reduced basis of the span (row echelon, fixed pivot rule)."""
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return ()
    _row_reduce(rows, len(rows[0]))
    return tuple(tuple(r) for r in rows if any(r))

def _in_span(vec: Sequence[Fraction], reduced: Sequence[Sequence[Fraction]]) -> bool:
    v = list(vec)
    for row in reduced:
        p = next(i for i, x in enumerate(row) if x)
        if v[p]:
            c = v[p] / row[p]
            v = [a - c * b for a, b in zip(v, row)]
    return not any(v)


def _field_entries(field: VectorField) -> dict[tuple[int, tuple[int, ...]], Fraction]:
    out: dict[tuple[int, tuple[int, ...]], Fraction] = {}
    for a, coeff in enumerate(field.poly_coeffs()):
        for mono, value in coeff.terms.items():
            out[(a, mono)] = value
    return out


def _point_power(point: Sequence[Fraction], mono: Sequence[int]) -> Fraction:
    return math.prod(
        (p ** e for p, e in zip(point, mono) if e), start=Fraction(1)
    )


def _membership_solve(
    leading: Sequence[VectorField],
    lower: Sequence[VectorField],
    ideal_gens: Sequence[VectorField],
    point: Sequence[Fraction],
    degree_bound: int,
    target: VectorField | None,
):
    """Bounded-degree membership in span(leading) + <lower> + I_point<ideal_gens>.

    Columns are constant multiples of the leading fields, polynomial
    multiples of the lower-level fields (coefficient degree <= bound) and
    multiples of the ideal generators by monomials recentered to vanish at
    the point.  With target None, returns the reduced projections of the
    homogeneous nullspace onto the leading block (the certified relations
    among the leading fields).  With a target field, returns its leading
    coefficients or None when no bounded certificate exists.
    """
    n = len(point)
    monos = monomials_up_to(n, degree_bound)
    cols: list[dict[tuple[int, tuple[int, ...]], Fraction]] = []
    for g in leading:
        cols.append(_field_entries(g))
    for h in lower:
        for beta in monos:
            cols.append(_field_entries(h.scale(Poly.term(n, beta, 1))))
    for g in ideal_gens:
        for beta in monos:
            if sum(beta) == 0:
                continue
            factor = Poly.term(n, beta, 1) - Poly.const(n, _point_power(point, beta))
            cols.append(_field_entries(g.scale(factor)))
    keys = set()
    for col in cols:
        keys.update(col)
    rhs_entries = _field_entries(target) if target is not None else {}
    keys.update(rhs_entries)
    row_keys = sorted(keys, key=lambda rk: (rk[0], grlex_key(rk[1])))
    k = len(leading)
    if not row_keys:
        if target is None:
            return _reduce_vectors([_unit_vector(k, j) for j in range(k)])
        return _zero_vector(k)
    rows = [[col.get(rk, Fraction(0)) for col in cols] for rk in row_keys]
    rhs = [rhs_entries.get(rk, Fraction(0)) for rk in row_keys]
    solution = linear_solve_exact(rows, rhs)
    if solution is None:
        return None
    if target is None:
        return _reduce_vectors([vec[:k] for vec in solution.nullspace])
    for vec in solution.nullspace:
        assert not any(vec[:k]), "chosen basis is dependent at this degree bound"
    return tuple(solution.particular[:k])


def _greedy_basis(count: int, relations: Sequence[Vector]) -> tuple[int, ...]:
    chosen: list[int] = []
    span = [list(r) for r in relations]
    reduced = _reduce_vectors(span)
    for j in range(count):
        unit = _unit_vector(count, j)
        if not _in_span(unit, reduced):
            chosen.append(j)
            span.append(list(unit))
            reduced = _reduce_vectors(span)
    return tuple(chosen)


def _class_coords(
    lam: Sequence[Fraction],
    basis_local: Sequence[int],
    relations: Sequence[Vector],
    count: int,
) -> Vector:
    """Coordinates of a candidate-space vector in the chosen quotient basis."""
    cols: list[Vector] = [_unit_vector(count, b) for b in basis_local]
    cols.extend(relations)
    rows = [[col[i] for col in cols] for i in range(count)]
    solution = linear_solve_exact(rows, list(lam))
    assert solution is not None, "basis and relations do not span the candidates"
    return tuple(solution.particular[: len(basis_local)])


@dataclass(frozen=True)
class GradedLieAlg:
    """A graded nilpotent Lie algebra concentrated in degrees -1..-order.

    Each basis element carries its (negative) degree and a vector-field
    representative.  structure stores [e_u, e_v] for u < v as coordinate
    vectors; pairs whose degree sum drops below -order are zero and not
    stored.  unverified lists the pairs whose constants had no certificate
    at the degree bound used to build the algebra (entries left zero).
    level_candidates / candidate_classes record, per depth, the generator
    fields considered and their classes in the global basis; they define
    the quotient map used when pairing the algebra with other data.
    """

    order: int
    degrees: tuple[int, ...]
    representatives: tuple[VectorField, ...]
    structure: tuple[tuple[int, int, Vector], ...]
    unverified: tuple[tuple[int, int], ...]
    level_candidates: tuple[tuple[VectorField, ...], ...]
    candidate_classes: tuple[tuple[Vector, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def graded_dims(self) -> tuple[int, ...]:
        return tuple(
            sum(1 for d in self.degrees if d == -i) for i in range(1, self.order + 1)
        )

    def level_indices(self, depth: int) -> tuple[int, ...]:
        return tuple(u for u, d in enumerate(self.degrees) if d == -depth)

    def basis_vector(self, u: int) -> Vector:
        return _unit_vector(self.dim, u)

    def bracket_basis(self, u: int, v: int) -> Vector:
        if u == v:
            return _zero_vector(self.dim)
        if u > v:
            return tuple(-c for c in self.bracket_basis(v, u))
        for a, b, vec in self.structure:
            if (a, b) == (u, v):
                return vec
        return _zero_vector(self.dim)

    def bracket_elements(
        self, x: Sequence[Fraction], y: Sequence[Fraction]
    ) -> Vector:
        if len(x) != self.dim or len(y) != self.dim:
            raise ValueError("element length does not match the algebra dimension")
        acc = [Fraction(0)] * self.dim
        for u, cu in enumerate(x):
            if not cu:
                continue
            for v, cv in enumerate(y):
                if not cv or u == v:
                    continue
                _add_scaled(acc, self.bracket_basis(u, v), cu * cv)
        return tuple(acc)

    def check_antisymmetry(self) -> bool:
        for u in range(self.dim):
            for v in range(self.dim):
                left = self.bracket_basis(u, v)
                right = self.bracket_basis(v, u)
                if any(a + b for a, b in zip(left, right)):
                    return False
        return True

    def check_grading(self) -> bool:
        """Stored brackets land in the correct graded piece and vanish
        whenever the degree sum drops below -order."""
        for u, v, vec in self.structure:
            q = -(self.degrees[u] + self.degrees[v])
            if q > self.order:
                if any(vec):
                    return False
                continue
            block = set(self.level_indices(q))
            if any(c for w, c in enumerate(vec) if w not in block):
                return False
        return True

    def check_jacobi(self) -> bool:
        for u in range(self.dim):
            eu = self.basis_vector(u)
            for v in range(u + 1, self.dim):
                ev = self.basis_vector(v)
                for w in range(v + 1, self.dim):
                    ew = self.basis_vector(w)
                    total = [Fraction(0)] * self.dim
                    _add_scaled(total, self.bracket_elements(eu, self.bracket_basis(v, w)), Fraction(1))
                    _add_scaled(total, self.bracket_elements(ev, self.bracket_basis(w, u)), Fraction(1))
                    _add_scaled(total, self.bracket_elements(ew, self.bracket_basis(u, v)), Fraction(1))
                    if any(total):
                        return False
        return True

    def axioms_ok(self) -> bool:
        """All axioms, refusing to vouch when some constants are unverified."""
        if self.unverified:
            return False
        return (
            self.check_antisymmetry() and self.check_grading() and self.check_jacobi()
        )


def osculating_at(
    filtration: Filtration,
    point: Sequence[Fraction | int],
    degree_bound: int = 2,
) -> GradedLieAlg:
    """The graded nilpotent algebra of the filtration at the point.

    degree_bound caps the coefficient degree of relation and bracket
    certificates; raise it when a bracket comes back unverified or when a
    dimension looks too large.
    """
    chart = filtration.chart
    n = chart.dim
    point = tuple(Fraction(v) for v in point)
    if len(point) != n:
        raise ValueError("point has wrong dimension")
    order = filtration.order

    level_candidates: list[tuple[VectorField, ...]] = []
    level_relations: list[tuple[Vector, ...]] = []
    level_basis: list[tuple[int, ...]] = []
    for depth in range(1, order + 1):
        cands = filtration.generators(depth)
        lower = filtration.generators(depth - 1) if depth > 1 else ()
        relations = _membership_solve(cands, lower, cands, point, degree_bound, None)
        level_candidates.append(cands)
        level_relations.append(relations)
        level_basis.append(_greedy_basis(len(cands), relations))

    offsets: list[int] = []
    total = 0
    degrees: list[int] = []
    representatives: list[VectorField] = []
    for depth in range(1, order + 1):
        offsets.append(total)
        for j in level_basis[depth - 1]:
            degrees.append(-depth)
            representatives.append(level_candidates[depth - 1][j])
        total += len(level_basis[depth - 1])

    candidate_classes: list[tuple[Vector, ...]] = []
    for depth in range(1, order + 1):
        cands = level_candidates[depth - 1]
        rows: list[Vector] = []
        for j in range(len(cands)):
            local = _class_coords(
                _unit_vector(len(cands), j),
                level_basis[depth - 1],
                level_relations[depth - 1],
                len(cands),
            )
            vec = [Fraction(0)] * total
            for pos, value in enumerate(local):
                vec[offsets[depth - 1] + pos] = value
            rows.append(tuple(vec))
        candidate_classes.append(tuple(rows))

    structure: list[tuple[int, int, Vector]] = []
    unverified: list[tuple[int, int]] = []
    for u in range(total):
        for v in range(u + 1, total):
            q = -(degrees[u] + degrees[v])
            if q > order:
                continue
            target = lie_bracket(representatives[u], representatives[v])
            leading = [
                representatives[w]
                for w, d in enumerate(degrees)
                if d == -q
            ]
            coords = _membership_solve(
                leading,
                filtration.generators(q - 1) if q > 1 else (),
                level_candidates[q - 1],
                point,
                degree_bound,
                target,
            )
            if coords is None:
                unverified.append((u, v))
                continue
            if any(coords):
                vec = [Fraction(0)] * total
                block = [w for w, d in enumerate(degrees) if d == -q]
                for pos, value in zip(block, coords):
                    vec[pos] = value
                structure.append((u, v, tuple(vec)))

    return GradedLieAlg(
        order=order,
        degrees=tuple(degrees),
        representatives=tuple(representatives),
        structure=tuple(structure),
        unverified=tuple(unverified),
        level_candidates=tuple(level_candidates),
        candidate_classes=tuple(candidate_classes),
    )


@dataclass(frozen=True)
class GradedSubalg:
    """A graded subspace of a GradedLieAlg, one reduced span per depth."""

    parent: GradedLieAlg
    spans: tuple[tuple[Vector, ...], ...]

    @property
    def dim(self) -> int:
        return sum(len(s) for s in self.spans)

    def graded_dims(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.spans)

    def contains(self, vec: Sequence[Fraction]) -> bool:
        rows = [row for span in self.spans for row in span]
        return _in_span(vec, rows)

    def closed_under_bracket(self) -> bool:
        order = self.parent.order
        for i in range(1, order + 1):
            for j in range(i, order + 1):
                for va in self.spans[i - 1]:
                    for vb in self.spans[j - 1]:
                        got = self.parent.bracket_elements(va, vb)
                        if not any(got):
                            continue
                        if i + j > order:
                            return False
                        if not _in_span(got, self.spans[i + j - 1]):
                            return False
        return True


def tangent_subalg(
    filtration: Filtration,
    submanifold: Submanifold,
    degree_bound: int = 2,
    parent: GradedLieAlg | None = None,
) -> GradedSubalg:
    """Classes at the base point of the combinations tangent to the
    submanifold, one graded span per depth.

    The tangency certificates come from a bounded-degree solve, so the
    spans are lower bounds for the true tangent subalgebra.  A combination
    sum u_j g_j contributes the class sum u_j(m) [g_j].
    """
    if parent is None:
        parent = osculating_at(filtration, submanifold.base_point, degree_bound)
    m = submanifold.base_point
    spans: list[tuple[Vector, ...]] = []
    for depth in range(1, filtration.order + 1):
        gens = filtration.generators(depth)
        combos = tangency_solve(gens, submanifold, degree_bound)
        vecs: list[Vector] = []
        for combo in combos:
            acc = [Fraction(0)] * parent.dim
            for j, u in enumerate(combo):
                lam = u.eval(m)
                if lam:
                    _add_scaled(acc, parent.candidate_classes[depth - 1][j], lam)
            vecs.append(tuple(acc))
        spans.append(_reduce_vectors(vecs))
    return GradedSubalg(parent=parent, spans=tuple(spans))


@lru_cache(maxsize=None)
def _dynkin_blocks(order: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Block sequences ((r1,s1),...,(rn,sn)), each block nonzero, total
    letter count between 1 and order."""
    out: list[tuple[tuple[int, int], ...]] = []

    def rec(blocks: list[tuple[int, int]], letters_left: int) -> None:
        if blocks:
            out.append(tuple(blocks))
        if letters_left == 0:
            return
        for ri in range(letters_left + 1):
            for si in range(letters_left - ri + 1):
                if ri + si == 0:
                    continue
                blocks.append((ri, si))
                rec(blocks, letters_left - ri - si)
                blocks.pop()

    rec([], order)
    return tuple(out)


def bch(
    algebra: GradedLieAlg, x: Sequence[Fraction], y: Sequence[Fraction]
) -> Vector:
    """Group product on the algebra through the bracket series.

    Nilpotency truncates the series at bracket words of length `order`, so
    the sum below is the exact group law: right-nested bracket words over
    the two arguments weighted by the alternating block coefficients.
    """
    dim = algebra.dim
    if len(x) != dim or len(y) != dim:
        raise ValueError("element length does not match the algebra dimension")
    args = (tuple(x), tuple(y))
    acc = [Fraction(0)] * dim
    for blocks in _dynkin_blocks(algebra.order):
        letters: list[int] = []
        fact = 1
        for ri, si in blocks:
            letters.extend([0] * ri)
            letters.extend([1] * si)
            fact *= math.factorial(ri) * math.factorial(si)
        t = len(letters)
        coeff = Fraction((-1) ** (len(blocks) - 1), len(blocks) * t * fact)
        val = args[letters[-1]]
        for letter in reversed(letters[:-1]):
            val = algebra.bracket_elements(args[letter], val)
            if not any(val):
                break
        if any(val):
            _add_scaled(acc, val, coeff)
    return tuple(acc)


def kmodule_generators(
    weighting: WeightedChart, depth: int, length_cap: int
) -> list[VectorField]:
    """Monomial generators of the ambient module at the given depth.

    Fields x^s d/dx_a on the weighted chart whose weighted degree is at
    least -depth, i.e. the weighted degree of x^s is at least the weight
    of the direction minus depth.  Exponents at weight-0 positions add
    nothing to the weighted degree, so they enter only through the length
    cap.  The enumeration is plain (direction major, then graded lex) and
    intentionally redundant as a module generating set.
    """
    chart = weighting.chart
    n = chart.dim
    out: list[VectorField] = []
    for a in range(n):
        for s in monomials_up_to(n, length_cap):
            if weighting.fiber_weight(s) >= weighting.weights[a] - depth:
                coeffs = [
                    Poly.term(n, s, 1) if b == a else Poly.zero(n) for b in range(n)
                ]
                out.append(VectorField(chart, coeffs))
    return out


def _fiber_monos_of_weight(
    weights: Sequence[int], target: int
) -> list[tuple[int, ...]]:
    """Multi-indices supported on the positive-weight positions with
    weighted degree exactly target, graded-lex ascending."""
    n = len(weights)
    out: list[tuple[int, ...]] = []

    def rec(pos: int, remaining: int, cur: list[int]) -> None:
        if pos == n:
            if remaining == 0:
                out.append(tuple(cur))
            return
        w = weights[pos]
        if w == 0:
            cur.append(0)
            rec(pos + 1, remaining, cur)
            cur.pop()
            return
        for e in range(remaining // w + 1):
            cur.append(e)
            rec(pos + 1, remaining - e * w, cur)
            cur.pop()

    rec(0, target, [])
    out.sort(key=grlex_key)
    return out


def fiber_class_pairs(
    weighting: WeightedChart, depth: int
) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """Basis labels for the ambient graded piece at the given depth.

    A label (position, multi-index) stands for the class of x^s d/dx_p
    where s runs over fiber-supported multi-indices of weighted degree
    exactly (weight of p) - depth.  Labels with s = 0 span the complement
    of the tangent part; there is one for each position of weight depth.
    """
    out: list[tuple[int, tuple[int, ...]]] = []
    for p in range(weighting.dim):
        target = weighting.weights[p] - depth
        if target < 0:
            continue
        for phi in _fiber_monos_of_weight(weighting.weights, target):
            out.append((p, phi))
    return tuple(out)


def _frozen_fiber_part(coeff, weighting: WeightedChart, degree: int) -> Poly:
    """Freeze the weight-0 variables at the base point and return the
    weighted-homogeneous part of the given degree.

    Rational coefficients are expanded as a finite geometric series; the
    denominator must not vanish at the base point.
    """
    n = weighting.dim
    base = weighting.base_point_weighted()
    images = [
        Poly.const(n, base[p]) if weighting.weights[p] == 0 else Poly.variable(n, p)
        for p in range(n)
    ]
    frozen = coeff.subst(images)
    if isinstance(frozen, RatFunc) and frozen.is_polynomial():
        frozen = frozen.as_poly()
    if isinstance(frozen, Poly):
        return _weight_part(frozen, weighting.weights, degree)
    num, den = frozen.num, frozen.den
    c0 = den.terms.get((0,) * n, Fraction(0))
    if c0 == 0:
        raise ZeroDivisionError("denominator vanishes at the base point")
    h = den - Poly.const(n, c0)
    inv = Poly.const(n, Fraction(1, 1) / c0)
    power = Poly.one(n)
    for k in range(1, degree + 1):
        power = _weight_chop(power * h, weighting.weights, degree)
        if power.is_zero():
            break
        sign = Fraction((-1) ** k) / c0 ** (k + 1)
        inv = inv + power * Poly.const(n, sign)
    return _weight_part(
        _weight_chop(num * inv, weighting.weights, degree), weighting.weights, degree
    )


def _weight_part(p: Poly, weights: Sequence[int], degree: int) -> Poly:
    return Poly(
        p.nvars,
        {
            mono: c
            for mono, c in p.terms.items()
            if sum(e * w for e, w in zip(mono, weights)) == degree
        },
    )


def _weight_chop(p: Poly, weights: Sequence[int], cap: int) -> Poly:
    return Poly(
        p.nvars,
        {
            mono: c
            for mono, c in p.terms.items()
            if sum(e * w for e, w in zip(mono, weights)) <= cap
        },
    )


def weighted_fiber_class(
    field: VectorField, weighting: WeightedChart, depth: int
) -> Vector | None:
    """Coordinates of the field's class in the ambient graded piece, along
    the fiber_class_pairs basis.

    The field must live on the weighting's source chart.  Returns None
    when its weighted degree is below -depth (it has no class at that
    depth).  The component at (p, s) is the coefficient of x^s in the
    direction-p coefficient after freezing the weight-0 variables at the
    base point.
    """
    pushed = push_to_weighted(field, weighting)
    degree: int | float = INFINITE
    for p, coeff in enumerate(pushed.coeffs):
        if coeff.is_zero():
            continue
        d = weighted_degree_in_chart(coeff, weighting).degree - weighting.weights[p]
        degree = min(degree, d)
    if degree < -depth:
        return None
    parts: dict[int, Poly] = {}
    comps: list[Fraction] = []
    for p, phi in fiber_class_pairs(weighting, depth):
        if p not in parts:
            parts[p] = _frozen_fiber_part(
                pushed.coeffs[p], weighting, weighting.weights[p] - depth
            )
        comps.append(parts[p].terms.get(phi, Fraction(0)))
    return tuple(comps)


def class_in_tangent_part(
    pairs: Sequence[tuple[int, tuple[int, ...]]], components: Sequence[Fraction]
) -> bool:
    """Whether a class lies in the span of the tangent-direction labels.

    Labels with a nonzero multi-index come from fields vanishing on the
    submanifold, so membership means every bare-direction component is
    zero."""
    return all(
        c == 0 for (p, phi), c in zip(pairs, components) if not any(phi)
    )


@dataclass(frozen=True)
class HHReport:
    """Checks tying the osculating quotients to the weighting's ranks.

    fiber_total_ok: dim p - dim r equals the fiber dimension.
    per_degree_ok: per depth, dim p - dim r equals the rank increment.
    maps_into_ok: pushing tangent-class representatives to the weighted
    chart lands them in the tangent part of the ambient graded piece.
    """

    algebra: GradedLieAlg
    tangent: GradedSubalg
    p_dims: tuple[int, ...]
    r_dims: tuple[int, ...]
    quotient_dims: tuple[int, ...]
    expected_dims: tuple[int, ...]
    fiber_total_ok: bool
    per_degree_ok: bool
    maps_into_ok: bool

    @property
    def verdict(self) -> str:
        if not (self.fiber_total_ok and self.per_degree_ok and self.maps_into_ok):
            return "fail"
        if self.algebra.unverified:
            return "inconclusive"
        return "pass"


def verify_hh(
    filtration: Filtration,
    submanifold: Submanifold,
    degree_bound: int = 2,
    weighting: WeightingResult | None = None,
    algebra: GradedLieAlg | None = None,
    tangent: GradedSubalg | None = None,
) -> HHReport:
    """Cross-check the osculating quotients against the induced weighting.

    Verifies that (a) the total quotient dimension matches the fiber
    dimension, (b) each graded quotient dimension matches the rank
    increment of the filtration along the submanifold, and (c) the classes
    of tangent representatives land in the tangent part of the ambient
    graded pieces of the weighted chart.
    """
    if weighting is None:
        weighting = weighted_coordinates(filtration, submanifold)
    if algebra is None:
        algebra = osculating_at(
            filtration, submanifold.base_point, degree_bound
        )
    if tangent is None:
        tangent = tangent_subalg(
            filtration, submanifold, degree_bound, parent=algebra
        )
    W = weighting.weighted
    order = filtration.order
    p_dims = algebra.graded_dims()
    r_dims = tangent.graded_dims()
    quotient = tuple(p - r for p, r in zip(p_dims, r_dims))
    expected = tuple(
        sum(1 for w in W.weights if w == depth) for depth in range(1, order + 1)
    )
    fiber_total_ok = algebra.dim - tangent.dim == W.dim - submanifold.dim
    per_degree_ok = quotient == expected

    maps_into_ok = True
    for depth in range(1, order + 1):
        pairs = fiber_class_pairs(W, depth)
        for span_vec in tangent.spans[depth - 1]:
            rep = None
            for u, value in enumerate(span_vec):
                if not value:
                    continue
                term = algebra.representatives[u].scale(value)
                rep = term if rep is None else rep + term
            if rep is None:
                continue
            cls = weighted_fiber_class(rep, W, depth)
            if cls is None or not class_in_tangent_part(pairs, cls):
                maps_into_ok = False

    return HHReport(
        algebra=algebra,
        tangent=tangent,
        p_dims=p_dims,
        r_dims=r_dims,
        quotient_dims=quotient,
        expected_dims=expected,
        fiber_total_ok=fiber_total_ok,
        per_degree_ok=per_degree_ok,
        maps_into_ok=maps_into_ok,
    )
