"""Construction of weighted coordinates from a clean filtration.

Pipeline: rank flags fix the weights; a frame of generators is chosen
greedily, one block per level; a linear change makes the frame pair with
the fiber coordinates as the identity along N; then higher-weight fiber
coordinates receive polynomial corrections, computed degree by degree, so
that every operator word of weighted order below the target weight kills
them along N.  Each correction divides by a normalization constant that
must equal the product of factorials of the multi-index; this is asserted,
not assumed.

Coordinate functions of the weighted chart are kept as exact expressions
in the original chart (``forward``) together with the inverse substitution
(``inverse``), so rewriting in weighted coordinates is a substitution, not
a numerical change of basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactalg import Poly, RatFunc, _row_reduce, grlex_key, matrix_rank
from .lieflt import (
    CleanResult,
    Filtration,
    Submanifold,
    WeightAssignment,
    check_clean,
    weight_sequence,
)
from .vfield import Chart, DiffOpWord, VectorField

Scalar = Poly | RatFunc

INFINITE = math.inf


@dataclass(frozen=True)
class Frame:
    """One generator per fiber position, tagged with its weight level.

    fields[p] belongs to filtration level -levels[p], and the values of
    the fields at the base point extend a tangent basis of N to a basis of
    the ambient tangent space.
    """

    submanifold: Submanifold
    fields: tuple[VectorField, ...]
    levels: tuple[int, ...]

    @property
    def chart(self) -> Chart:
        return self.submanifold.chart


def select_frame(
    filtration: Filtration, weight_assignment: WeightAssignment, submanifold: Submanifold
) -> Frame:
    """Greedy frame choice: scan each level's generators in list order and
    adopt those whose value at the base point extends the running span."""
    chart = filtration.chart
    n = chart.dim
    m = submanifold.base_point
    ranks = weight_assignment.ranks
    span_cols: list[tuple[Fraction, ...]] = [
        tuple(Fraction(1) if a == b else Fraction(0) for a in range(n))
        for b in submanifold.tangent_indices
    ]

    def extends(col: tuple[Fraction, ...]) -> bool:
        rows = [[c[a] for c in span_cols] for a in range(n)]
        ext = [row + [col[a]] for a, row in enumerate(rows)]
        return matrix_rank(ext) > len(span_cols)

    fields: list[VectorField] = []
    levels: list[int] = []
    for depth in range(1, filtration.order + 1):
        needed = ranks[depth] - ranks[depth - 1]
        adopted = 0
        for g in filtration.generators(depth):
            if adopted == needed:
                break
            value = g.value_at(m)
            if extends(value):
                span_cols.append(value)
                fields.append(g)
                levels.append(depth)
                adopted += 1
        if adopted != needed:
            raise ValueError(
                f"frame incomplete at level {depth}: needed {needed}, found {adopted}"
            )
    return Frame(submanifold=submanifold, fields=tuple(fields), levels=tuple(levels))


def _invert_ratfunc_matrix(rows: list[list[RatFunc]]) -> list[list[RatFunc]] | None:
    k = len(rows)
    if k == 0:
        return []
    n = rows[0][0].nvars
    aug = [
        list(row) + [RatFunc.const(n, 1 if i == j else 0) for j in range(k)]
        for i, row in enumerate(rows)
    ]
    pivots = _row_reduce(aug, k)
    if len(pivots) < k:
        return None
    return [row[k:] for row in aug]


def normalize_chart(
    frame: Frame, submanifold: Submanifold
) -> tuple[Frame, tuple[RatFunc, ...]]:
    """Linear fiber coordinate change making (V_a x_c)|_N the identity.

    Returns the frame unchanged plus the new fiber coordinate functions,
    expressed in the original chart.  Raises when the pairing matrix is
    singular at the base point.
    """
    chart = frame.chart
    n = chart.dim
    fiber = submanifold.fiber_indices
    k = len(fiber)
    if len(frame.fields) != k:
        raise ValueError("frame size does not match the fiber dimension")
    pairing: list[list[RatFunc]] = []
    for field in frame.fields:
        row = []
        for c in fiber:
            val = field.apply(Poly.variable(n, c))
            row.append(_as_rf(submanifold.restrict(val)))
        pairing.append(row)
    point_matrix = [
        [entry.eval(submanifold.base_point) for entry in row] for row in pairing
    ]
    if k and matrix_rank(point_matrix) < k:
        raise ValueError("frame-coordinate pairing is singular at the base point")
    inverse = _invert_ratfunc_matrix(pairing)
    assert inverse is not None
    coords = []
    for b in range(k):
        acc = RatFunc.const(n, 0)
        for c in range(k):
            acc = acc + inverse[c][b] * Poly.variable(n, fiber[c])
        coords.append(acc)
    for a, field in enumerate(frame.fields):
        for b in range(k):
            val = _as_rf(submanifold.restrict(field.apply(coords[b])))
            expected = Fraction(1 if a == b else 0)
            assert val == expected, "normalized pairing failed to be the identity"
    return frame, tuple(coords)


def _as_rf(value: Scalar) -> RatFunc:
    return value if isinstance(value, RatFunc) else RatFunc(value)


def weighted_multiindices(weights: Sequence[int], bound: int) -> list[tuple[int, ...]]:
    """Multi-indices s over the fiber positions with s.w <= bound,
    ordered by weighted degree, then length, then lexicographic order."""
    out: list[tuple[int, ...]] = []

    def rec(pos: int, remaining: int, cur: list[int]):
        if pos == len(weights):
            out.append(tuple(cur))
            return
        w = weights[pos]
        for e in range(remaining // w + 1):
            cur.append(e)
            rec(pos + 1, remaining - e * w, cur)
            cur.pop()

    rec(0, bound, [])
    out.sort(key=lambda s: (sum(e * w for e, w in zip(s, weights)), sum(s), s))
    return out


def _word_for(frame: Frame, s: Sequence[int]) -> DiffOpWord:
    factors: list[VectorField] = []
    for field, mult in zip(frame.fields, s):
        factors.extend([field] * mult)
    return DiffOpWord(frame.chart, tuple(factors))


def filtration_degree(
    f: Scalar, frame: Frame, submanifold: Submanifold, cap: int
) -> int:
    """Largest i <= cap with (V^s f)|_N = 0 for every word of weighted
    order below i; equals the smallest weighted order of a word that sees
    f along N, capped."""
    weights = frame.levels
    for s in weighted_multiindices(weights, cap - 1):
        value = submanifold.restrict(_word_for(frame, s).apply(f))
        if not _is_zero(value):
            return sum(e * w for e, w in zip(s, weights))
    return cap


def _is_zero(value: Scalar) -> bool:
    return value.is_zero()


@dataclass(frozen=True)
class WeightedChart:
    """A weighted chart adapted to the submanifold.

    chart holds the weighted variable names (original names permuted to
    adapted order: tangent variables first, then fiber variables by
    weight).  forward[p] expresses weighted coordinate p in the original
    chart; inverse[c] expresses original variable c in the weighted chart;
    the two substitutions compose to the identity.
    """

    source_chart: Chart
    chart: Chart
    submanifold: Submanifold
    weights: tuple[int, ...]
    positions: tuple[int, ...]
    forward: tuple[RatFunc, ...]
    inverse: tuple[RatFunc, ...]

    @property
    def dim(self) -> int:
        return self.source_chart.dim

    def base_point_weighted(self) -> tuple[Fraction, ...]:
        m = self.submanifold.base_point
        return tuple(
            m[self.positions[p]] if self.weights[p] == 0 else Fraction(0)
            for p in range(self.dim)
        )

    def to_weighted(self, value: Scalar) -> Scalar:
        """Rewrite a function on the original chart in weighted coordinates."""
        return value.subst(list(self.inverse))

    def fiber_weight(self, mono: tuple[int, ...]) -> int:
        return sum(e * w for e, w in zip(mono, self.weights))


@dataclass(frozen=True)
class CorrectionRecord:
    """One correction step: target position, multi-index, normalization
    constant, and the correction coefficient."""

    position: int
    multi_index: tuple[int, ...]
    constant: Fraction
    coefficient: RatFunc


@dataclass(frozen=True)
class WeightingResult:
    weighted: WeightedChart
    frame: Frame
    clean: CleanResult
    corrections: tuple[CorrectionRecord, ...]


def weighted_coordinates(
    filtration: Filtration, submanifold: Submanifold
) -> WeightingResult:
    """Build the weighted chart induced by a clean filtration.

    Raises ValueError when the cleanness test fails or when the internal
    consistency checks (identity pairing, factorial normalization
    constants, recomputed filtration degrees) do not hold.
    """
    clean = check_clean(filtration, submanifold)
    if clean.verdict != "pass":
        raise ValueError(
            f"submanifold is not clean for this filtration (level {clean.first_bad_level})"
        )
    assignment = weight_sequence(clean)
    frame = select_frame(filtration, assignment, submanifold)
    frame, fiber_coords = normalize_chart(frame, submanifold)

    chart = filtration.chart
    n = chart.dim
    k0 = submanifold.dim
    weights = assignment.weights
    positions = assignment.positions
    fiber_weights = weights[k0:]
    r = filtration.order

    current: list[RatFunc] = [
        RatFunc(Poly.variable(n, positions[p])) for p in range(k0)
    ] + list(fiber_coords)

    records: list[CorrectionRecord] = []
    # corrections only for weights >= 3 (levels 2..r-1 in the outer loop)
    for level in range(2, r):
        targets = [p for p in range(k0, n) if weights[p] == level + 1]
        for a in targets:
            w_a = weights[a]
            admissible = [
                s
                for s in weighted_multiindices(fiber_weights, w_a - 1)
                if sum(s) >= 2
            ]
            admissible.sort(key=lambda s: (sum(s), s))
            chi: dict[tuple[int, ...], RatFunc] = {}
            for s in admissible:
                word = _word_for(frame, s)
                power = _monomial_of(current, k0, s, n)
                c_s = _as_rf(submanifold.restrict(word.apply(power)))
                expected = Fraction(math.prod(math.factorial(e) for e in s))
                if c_s.eval(submanifold.base_point) == 0:
                    raise ValueError(
                        f"normalization constant vanishes at the base point for {s}"
                    )
                if c_s != expected:
                    raise ValueError(
                        f"normalization constant for {s} is not the factorial product"
                    )
                total = _as_rf(submanifold.restrict(word.apply(current[a])))
                for u in admissible:
                    if sum(u) >= sum(s):
                        continue
                    term = chi[u] * _monomial_of(current, k0, u, n)
                    total = total + _as_rf(submanifold.restrict(word.apply(term)))
                coeff = -(total / expected)
                chi[s] = coeff
                records.append(
                    CorrectionRecord(
                        position=a, multi_index=s, constant=expected, coefficient=coeff
                    )
                )
            corrected = current[a]
            for s in admissible:
                if chi[s]:
                    corrected = corrected + chi[s] * _monomial_of(current, k0, s, n)
            current[a] = corrected

    for p in range(k0, n):
        got = filtration_degree(current[p], frame, submanifold, cap=weights[p])
        if got != weights[p]:
            raise ValueError(
                f"weighted coordinate at position {p} has filtration degree {got}, "
                f"expected {weights[p]}"
            )

    weighted_chart = Chart(tuple(chart.names[positions[p]] for p in range(n)))
    inverse = _invert_weighting(
        chart, weighted_chart, submanifold, weights, positions, current, records
    )
    weighted = WeightedChart(
        source_chart=chart,
        chart=weighted_chart,
        submanifold=submanifold,
        weights=weights,
        positions=positions,
        forward=tuple(current),
        inverse=inverse,
    )
    for p in range(n):
        composed = weighted.forward[p].subst(list(inverse))
        assert composed == RatFunc(
            Poly.variable(n, p)
        ), "forward and inverse substitutions do not compose to the identity"
    return WeightingResult(
        weighted=weighted, frame=frame, clean=clean, corrections=tuple(records)
    )


def _monomial_of(
    current: Sequence[RatFunc], k0: int, s: Sequence[int], n: int
) -> RatFunc:
    acc = RatFunc.const(n, 1)
    for offset, e in enumerate(s):
        if e:
            acc = acc * current[k0 + offset] ** e
    return acc


def _invert_weighting(
    chart: Chart,
    weighted_chart: Chart,
    submanifold: Submanifold,
    weights: tuple[int, ...],
    positions: tuple[int, ...],
    forward: Sequence[RatFunc],
    records: Sequence[CorrectionRecord],
) -> tuple[RatFunc, ...]:
    """Triangular inversion of the weighting substitution.

    Base variables are weighted variables verbatim.  The fiber block is
    inverted in two stages: corrections are unwound in increasing weight
    (they only involve strictly lower weights), then the linear pairing
    change is undone by the pairing matrix itself.
    """
    n = chart.dim
    k0 = submanifold.dim
    base_images: list[Poly | None] = [None] * n
    for p in range(k0):
        base_images[positions[p]] = Poly.variable(n, p)

    def base_to_weighted(value: RatFunc) -> RatFunc:
        images: list[Poly] = []
        for c in range(n):
            img = base_images[c]
            if img is None:
                for mono in value.num.terms:
                    if mono[c]:
                        raise AssertionError("correction coefficient uses fiber variables")
                for mono in value.den.terms:
                    if mono[c]:
                        raise AssertionError("correction coefficient uses fiber variables")
                img = Poly.zero(n)
            images.append(img)
        return value.subst(images)

    # linear parts: forward fiber coordinate before corrections is
    # xhat_p = sum_c inv[c][p] x_{fiber_c}; recover the matrix by applying
    # the corrections in reverse instead of re-deriving it: unwind
    # corrections symbolically over the weighted chart.
    by_position: dict[int, list[CorrectionRecord]] = {}
    for rec in records:
        by_position.setdefault(rec.position, []).append(rec)

    xhat_exprs: list[RatFunc | None] = [None] * n
    order = sorted(range(k0, n), key=lambda p: (weights[p], p))
    for p in order:
        expr = RatFunc(Poly.variable(n, p))
        for rec in by_position.get(p, ()):
            if rec.coefficient.is_zero():
                continue
            coeff_w = base_to_weighted(rec.coefficient)
            term = coeff_w
            for offset, e in enumerate(rec.multi_index):
                if e:
                    lower = xhat_exprs[k0 + offset]
                    assert lower is not None, "correction references an uninverted position"
                    term = term * lower**e
            expr = expr - term
        xhat_exprs[p] = expr

    # Unwinding the corrections yields, at each fiber position, the
    # normalized linear coordinate as a function of the weighted chart.
    # The linear stage then gives the original fiber variables via the
    # pairing matrix: x_{fiber_c} = sum_p pairing[p][c] * xhat_p, where
    # pairing[p][c] = (V_p x_{fiber_c})|_N is a function of base variables.
    inverse: list[RatFunc | None] = [None] * n
    for p in range(k0):
        inverse[positions[p]] = RatFunc(Poly.variable(n, p))

    fiber = submanifold.fiber_indices
    k = len(fiber)
    if k:
        # recover the pairing matrix from the forward linear parts:
        # forward (before corrections) is linear in the fiber variables,
        # so extract the coefficient of each fiber variable and invert.
        linear_rows: list[list[RatFunc]] = []
        for p in range(k0, n):
            lin = forward[p]
            for rec in by_position.get(p, ()):
                if not rec.coefficient.is_zero():
                    term = rec.coefficient
                    for offset, e in enumerate(rec.multi_index):
                        if e:
                            term = term * forward[k0 + offset] ** e
                    lin = lin - term
            row = []
            for c in fiber:
                row.append(_coefficient_of_variable(lin, c))
            linear_rows.append(row)
        mat = _invert_ratfunc_matrix(linear_rows)
        assert mat is not None, "weighting linear stage is singular"
        for ci, c in enumerate(fiber):
            acc = RatFunc.const(n, 0)
            for p_off in range(k):
                entry = base_to_weighted(mat[ci][p_off])
                xe = xhat_exprs[k0 + p_off]
                assert xe is not None
                acc = acc + entry * xe
            inverse[c] = acc
    out = []
    for c in range(n):
        val = inverse[c]
        assert val is not None
        out.append(val)
    return tuple(out)


def _coefficient_of_variable(value: RatFunc, var: int) -> RatFunc:
    """Coefficient of one variable in an expression linear in that block."""
    num = value.num
    terms = {}
    for mono, c in num.terms.items():
        if mono[var] == 1:
            lowered = tuple(0 if i == var else e for i, e in enumerate(mono))
            terms[lowered] = c
    return RatFunc(Poly(num.nvars, terms), value.den)


@dataclass(frozen=True)
class WeightedDegreeResult:
    degree: int | float
    witness: tuple[int, ...] | None


def _poly_weighted_degree(p: Poly, weights: Sequence[int]) -> WeightedDegreeResult:
    if p.is_zero():
        return WeightedDegreeResult(INFINITE, None)
    best_key = None
    best_mono = None
    for mono in p.terms:
        d = sum(e * w for e, w in zip(mono, weights))
        key = (d, grlex_key(mono))
        if best_key is None or key < best_key:
            best_key = key
            best_mono = mono
    return WeightedDegreeResult(best_key[0], best_mono)


def weighted_degree(f: Scalar, weighting: WeightedChart) -> WeightedDegreeResult:
    """Minimal weighted order of f, computed in the weighted chart.

    Base (weight-0) variables contribute nothing.  The zero function has
    degree +inf and no witness monomial.
    """
    return weighted_degree_in_chart(weighting.to_weighted(f), weighting)


def push_to_weighted(field: VectorField, weighting: WeightedChart) -> VectorField:
    """Rewrite a vector field in the weighted chart."""
    if field.chart != weighting.source_chart:
        raise ValueError("field does not live on the weighting's source chart")
    coeffs = []
    for p in range(weighting.dim):
        applied = field.apply(weighting.forward[p])
        coeffs.append(weighting.to_weighted(applied))
    return VectorField(weighting.chart, coeffs)


def vf_filtration_degree(field: VectorField, weighting: WeightedChart) -> int | float:
    """Largest j with: each weighted coefficient has weighted degree at
    least (weight of its direction) + j.  The zero field gives +inf."""
    pushed = push_to_weighted(field, weighting)
    degree: int | float = INFINITE
    for p, coeff in enumerate(pushed.coeffs):
        if coeff.is_zero():
            continue
        d = weighted_degree_in_chart(coeff, weighting).degree - weighting.weights[p]
        degree = min(degree, d)
    return degree


def weighted_degree_in_chart(g: Scalar, weighting: WeightedChart) -> WeightedDegreeResult:
    """Weighted degree of a function already written in the weighted chart."""
    if isinstance(g, Poly):
        return _poly_weighted_degree(g, weighting.weights)
    if g.is_zero():
        return WeightedDegreeResult(INFINITE, None)
    num = _poly_weighted_degree(g.num, weighting.weights)
    den = _poly_weighted_degree(g.den, weighting.weights)
    return WeightedDegreeResult(num.degree - den.degree, num.witness)


def _poly_weight_part(p: Poly, weights: Sequence[int], degree: int) -> Poly:
    return Poly(
        p.nvars,
        {
            mono: c
            for mono, c in p.terms.items()
            if sum(e * w for e, w in zip(mono, weights)) == degree
        },
    )


def _scalar_weight_part(g: Scalar, weights: Sequence[int], degree: int) -> Scalar:
    if isinstance(g, Poly):
        return _poly_weight_part(g, weights, degree)
    if g.is_zero():
        return g
    den_res = _poly_weighted_degree(g.den, weights)
    num_part = _poly_weight_part(g.num, weights, degree + den_res.degree)
    den_part = _poly_weight_part(g.den, weights, den_res.degree)
    return RatFunc(num_part, den_part)


def homogeneous_approx(f: Scalar, weighting: WeightedChart) -> Scalar:
    """Lowest weighted-degree part of f, expressed in the weighted chart."""
    g = weighting.to_weighted(f)
    res = weighted_degree_in_chart(g, weighting)
    if res.degree == INFINITE:
        return g
    return _scalar_weight_part(g, weighting.weights, res.degree)


def homogeneous_approx_vf(field: VectorField, weighting: WeightedChart) -> VectorField:
    """Homogeneous part of a vector field at its filtration degree.

    Coefficient of direction p is cut at weighted degree (weight of p) +
    (field degree); the result is a field on the weighted chart, weighted
    homogeneous of the field's degree.
    """
    pushed = push_to_weighted(field, weighting)
    degree = vf_filtration_degree(field, weighting)
    if degree == INFINITE:
        return pushed
    coeffs = []
    for p, coeff in enumerate(pushed.coeffs):
        coeffs.append(
            _scalar_weight_part(coeff, weighting.weights, weighting.weights[p] + degree)
        )
    return VectorField(weighting.chart, coeffs)
