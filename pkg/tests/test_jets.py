"""Jet bundle layer: evaluation, lifts, epsilon-action, group action, flow-out."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import lift_identity_cases, random_field
from lieweights.exactalg import Poly, RatFunc
from lieweights.lieflt import Filtration, Submanifold
from lieweights.vfield import Chart, VectorField, coordinate_field, lie_bracket, parse_vector_field
from lieweights.weightcoord import weighted_coordinates
from lieweights.jets import (
    JetChart,
    JetPoint,
    LiftCombination,
    TruncSeries,
    URElem,
    eval_jet,
    flowout_sample,
    koszul_shift,
    lift_all,
    lift_function,
    lift_vf,
    q_dimension,
    q_membership,
    scalar_action,
    tm_action,
    u_exp_act,
    u_exp_apply,
)

CHART1 = Chart(("x",))
CHART2 = Chart(("x", "z"))
CHART3 = Chart(("x", "y", "z"))


def jet(chart, rows):
    order = len(rows[0]) - 1
    return JetPoint.from_rows(chart, order, rows)


class TestEvalJet:
    def test_square_first_order(self):
        u = jet(CHART1, [(3, 5)])
        series = eval_jet(u, Poly.variable(1, 0) ** 2)
        assert series.coefficients == (Fraction(9), Fraction(30))

    def test_constant(self):
        u = jet(CHART2, [(1, 2), (3, 4)])
        series = eval_jet(u, Poly.const(2, Fraction(7, 2)))
        assert series.coefficients == (Fraction(7, 2), Fraction(0))

    def test_coordinate_row(self):
        u = jet(CHART2, [(1, 2), (3, 4)])
        assert eval_jet(u, Poly.variable(2, 1)).coefficients == (Fraction(3), Fraction(4))

    def test_rational_function(self):
        # 1/(1+x) at the jet x = 1 + eps: series 1/(2 + eps) = 1/2 - eps/4
        u = jet(CHART1, [(1, 1)])
        f = RatFunc(Poly.one(1), Poly.one(1) + Poly.variable(1, 0))
        series = eval_jet(u, f)
        assert series.coefficients == (Fraction(1, 2), Fraction(-1, 4))

    def test_rational_needs_unit_denominator(self):
        u = jet(CHART1, [(-1, 1)])
        f = RatFunc(Poly.one(1), Poly.one(1) + Poly.variable(1, 0))
        with pytest.raises(ZeroDivisionError):
            eval_jet(u, f)


@st.composite
def jets_and_polys(draw):
    coeff = st.integers(-3, 3).map(Fraction)
    rows = draw(
        st.lists(
            st.tuples(coeff, coeff, coeff),
            min_size=2,
            max_size=2,
        )
    )
    monos = [(a, b) for a in range(3) for b in range(3) if a + b <= 2]
    def poly(d):
        return Poly(2, {m: Fraction(c) for m, c in d.items() if c})
    f = poly(draw(st.dictionaries(st.sampled_from(monos), st.integers(-2, 2), max_size=3)))
    g = poly(draw(st.dictionaries(st.sampled_from(monos), st.integers(-2, 2), max_size=3)))
    return JetPoint.from_rows(CHART2, 2, rows), f, g


@given(jets_and_polys())
@settings(max_examples=60, deadline=None)
def test_eval_jet_is_algebra_morphism(data):
    u, f, g = data
    assert eval_jet(u, f * g).coefficients == (eval_jet(u, f) * eval_jet(u, g)).coefficients
    assert eval_jet(u, f + g).coefficients == (eval_jet(u, f) + eval_jet(u, g)).coefficients


class TestLiftFunction:
    def test_product_rule(self):
        jc = JetChart(CHART2, 1)
        f = Poly.variable(2, 0) * Poly.variable(2, 1)
        got = lift_function(jc, f, 1)
        expected = jc.var(0, 0) * jc.var(1, 1) + jc.var(0, 1) * jc.var(1, 0)
        assert got == expected

    def test_zeroth_component_is_pullback(self):
        jc = JetChart(CHART2, 2)
        f = Poly(2, {(2, 1): Fraction(3), (0, 0): Fraction(-1)})
        got = lift_function(jc, f, 0)
        expected = f.subst([jc.var(0, 0), jc.var(1, 0)])
        assert got == expected

    def test_frozen_expansion(self):
        # f = z - x^2 at order 3, component 2
        jc = JetChart(CHART2, 3)
        f = Poly.variable(2, 1) - Poly.variable(2, 0) ** 2
        got = lift_function(jc, f, 2)
        expected = jc.var(1, 2) - (
             2 * jc.var(0, 0) * jc.var(0, 2) + jc.var(0, 1) ** 2
        )
        assert got == expected

    def test_eval_consistency(self):
        jc = JetChart(CHART2, 2)
        f = Poly(2, {(1, 1): Fraction(2), (0, 2): Fraction(1)})
        u = jet(CHART2, [(1, -2, 3), (2, 1, -1)])
        series = eval_jet(u, f)
        flat = u.flat()
        for i, piece in enumerate(lift_all(jc, f)):
            assert piece.eval(flat) == series.coefficients[i]


class TestLiftVF:
    def test_coordinate_field_lift(self):
        jc = JetChart(CHART2, 3)
        for j in range(4):
            lifted = lift_vf(jc, coordinate_field(CHART2, 0), j)
            expected = [Fraction(0)] * jc.dim
            expected[jc.index(0, j)] = Fraction(1)
            assert lifted.field == VectorField(jc.chart, expected)

    def test_bracket_identity_corpus(self):
        for chart, r, x, y, f, i, j in lift_identity_cases(seed=11, count=30):
            jc = JetChart(chart, r)
            lx = lift_vf(jc, x, i)
            ly = lift_vf(jc, y, j)
            got = lie_bracket(lx.field, ly.field)
            if i + j <= r:
                assert got == lift_vf(jc, lie_bracket(x, y), i + j).field
            else:
                assert got.is_zero()

    def test_module_identity_corpus(self):
        for chart, r, x, _y, f, i, _j in lift_identity_cases(seed=23, count=30):
            jc = JetChart(chart, r)
            scaled = x.scale(f)
            lhs = lift_vf(jc, scaled, i).field
            terms = tuple(
                (lift_function(jc, f, k), x, i + k) for k in range(r - i + 1)
            )
            rhs = LiftCombination(jc, terms).materialize()
            assert lhs == rhs

    def test_annihilates_lower_components(self):
        jc = JetChart(CHART2, 3)
        x = parse_vector_field("z*dx + x^2*dz", CHART2)
        f = Poly(2, {(1, 1): Fraction(1)})
        for j in range(1, 4):
            lifted = lift_vf(jc, x, j)
            for i in range(j):
                piece = lift_function(jc, f, i)
                assert lifted.field.apply(piece).is_zero()


class TestKoszul:
    def test_shift_matches_deeper_lift(self):
        jc = JetChart(CHART2, 3)
        x = parse_vector_field("dx + x*dz", CHART2)
        comb = LiftCombination(jc, ((Poly.one(jc.dim), x, 0),))
        shifted = koszul_shift(comb)
        assert shifted.materialize() == lift_vf(jc, x, 1).field

    def test_r_plus_one_shifts_vanish(self):
        jc = JetChart(CHART2, 2)
        x = parse_vector_field("x*dx", CHART2)
        comb = LiftCombination(jc, ((Poly.one(jc.dim), x, 0),))
        for _ in range(jc.order + 1):
            comb = koszul_shift(comb)
        assert comb.terms == ()
        assert comb.materialize().is_zero()

    def test_linearity_over_coefficients(self):
        jc = JetChart(CHART2, 3)
        x = parse_vector_field("dz", CHART2)
        g = lift_function(jc, Poly.variable(2, 0), 1)
        comb = LiftCombination(jc, ((g, x, jc.order - 1),))
        shifted = koszul_shift(comb)
        assert shifted.terms == ((g, x, jc.order),)
        assert shifted.materialize() == lift_vf(jc, x, jc.order).field.scale(g)

    def test_commutes_with_lift_bracket(self):
        jc = JetChart(CHART2, 2)
        x = parse_vector_field("dx + x*dz", CHART2)
        y = parse_vector_field("z*dx", CHART2)
        bracket = lie_bracket(x, y)
        level0 = lie_bracket(lift_vf(jc, x, 0).field, lift_vf(jc, y, 0).field)
        assert level0 == lift_vf(jc, bracket, 0).field
        comb = koszul_shift(LiftCombination(jc, ((Poly.one(jc.dim), bracket, 0),)))
        assert comb.materialize() == lift_vf(jc, bracket, 1).field


class TestJetActions:
    def test_scalar_action_identity_and_collapse(self):
        u = jet(CHART2, [(1, 2, 3), (4, 5, 6)])
        assert scalar_action(1, u) == u
        collapsed = scalar_action(0, u)
        assert collapsed.comps == ((Fraction(1), Fraction(0), Fraction(0)),
                                   (Fraction(4), Fraction(0), Fraction(0)))

    def test_scalar_action_homogeneity(self):
        jc = JetChart(CHART2, 2)
        f = Poly(2, {(2, 0): Fraction(1), (1, 1): Fraction(-2)})
        u = jet(CHART2, [(1, -1, 2), (3, 2, -2)])
        t = Fraction(5, 3)
        scaled = scalar_action(t, u)
        for i in range(3):
            piece = lift_function(jc, f, i)
            assert piece.eval(scaled.flat()) == t**i * piece.eval(u.flat())

    def test_tm_action(self):
        u = jet(CHART2, [(1, 2, 3), (4, 5, 6)])
        moved = tm_action((Fraction(1), Fraction(-2)), u)
        assert moved.comps == ((Fraction(1), Fraction(2), Fraction(2)),
                               (Fraction(4), Fraction(5), Fraction(8)))

    def test_exp_apply_single_top_term(self):
        # exp(t X eps^r) x_a = x_a + t (X x_a) eps^r exactly
        x = parse_vector_field("x^2*dx + dz", CHART2)
        elem = URElem(CHART2, 2, ((2, x),), Fraction(1, 2))
        series = u_exp_apply(elem, Poly.variable(2, 0))
        assert series.coefficients == (
            Poly.variable(2, 0),
            Poly.zero(2),
            Poly.variable(2, 0) ** 2 * Fraction(1, 2),
        )

    def test_exp_act_top_level_matches_translation(self):
        x = parse_vector_field("x^2*dx + dz", CHART2)
        t = Fraction(3, 2)
        elem = URElem(CHART2, 2, ((2, x),), t)
        u = jet(CHART2, [(2, 1, -1), (0, 4, 1)])
        moved = u_exp_act(elem, u)
        v = tuple(t * c for c in x.value_at(u.base_point()))
        assert moved == tm_action(v, u)

    def test_exp_act_identity_at_zero_time(self):
        x = parse_vector_field("dx + x*dz", CHART2)
        elem = URElem(CHART2, 2, ((1, x),), Fraction(0))
        u = jet(CHART2, [(2, 1, -1), (0, 4, 1)])
        assert u_exp_act(elem, u) == u

    def test_top_layer_abelian(self):
        x = parse_vector_field("x*dx + dz", CHART2)
        y = parse_vector_field("dx + x^2*dz", CHART2)
        ex = URElem(CHART2, 2, ((2, x),), Fraction(2))
        ey = URElem(CHART2, 2, ((2, y),), Fraction(-1))
        u = jet(CHART2, [(1, 2, 0), (3, -1, 2)])
        assert u_exp_act(ex, u_exp_act(ey, u)) == u_exp_act(ey, u_exp_act(ex, u))

    def test_exp_is_group_inverse(self):
        x = parse_vector_field("dx + x*dz", CHART2)
        y = parse_vector_field("x^2*dz", CHART2)
        elem = URElem(CHART2, 3, ((1, x), (2, y)), Fraction(2, 3))
        u = jet(CHART2, [(1, -2, 1, 0), (2, 0, -1, 3)])
        roundtrip = u_exp_act(elem.inverse(), u_exp_act(elem, u))
        assert roundtrip == u

    def test_unipotent_rejects_level_zero(self):
        x = parse_vector_field("dx", CHART2)
        with pytest.raises(ValueError):
            URElem(CHART2, 2, ((0, x),), Fraction(1))


def _example1():
    x_fld = parse_vector_field("dx + x*dz", CHART3)
    y_fld = parse_vector_field("dy", CHART3)
    z_fld = parse_vector_field("dz", CHART3)
    filt = Filtration(CHART3, 3, ((x_fld,), (x_fld, y_fld), (x_fld, y_fld, z_fld)))
    sub = Submanifold(CHART3, (), (Fraction(0),) * 3)
    return filt, sub, weighted_coordinates(filt, sub)


def _example2():
    x_fld = parse_vector_field("dx + (2*x + y)*dz", CHART3)
    y_fld = parse_vector_field("dy + (x + x^2)*dz", CHART3)
    b_fld = parse_vector_field("2*x*dz", CHART3)
    full = (
        x_fld,
        y_fld,
        b_fld,
        coordinate_field(CHART3, 0),
        coordinate_field(CHART3, 1),
        coordinate_field(CHART3, 2),
    )
    filt = Filtration(
        CHART3, 4, ((x_fld,), (x_fld, y_fld), (x_fld, y_fld, b_fld), full)
    )
    sub = Submanifold(CHART3, (), (Fraction(0),) * 3)
    return filt, sub, weighted_coordinates(filt, sub)


class TestFlowOut:
    def test_membership_zero_jet(self):
        _, _, result = _example1()
        u = JetPoint.zero(CHART3, 3)
        assert q_membership(u, result.weighted)

    def test_membership_integral_curve_jet(self):
        # jet of the horizontal integral curve t -> (t, 0, t^2/2)
        _, _, result = _example1()
        rows = [
            (0, 1, 0, 0),
            (0, 0, 0, 0),
            (0, 0, Fraction(1, 2), 0),
        ]
        assert q_membership(JetPoint.from_rows(CHART3, 3, rows), result.weighted)

    def test_membership_rejects_straight_line_jet(self):
        # the straight curve t -> (t, 0, 0) is not horizontal: the induced
        # weighted coordinate picks up a nonzero second component
        _, _, result = _example1()
        rows = [(0, 1, 0, 0), (0, 0, 0, 0), (0, 0, 0, 0)]
        assert not q_membership(JetPoint.from_rows(CHART3, 3, rows), result.weighted)

    def test_membership_rejects_shallow_vertical(self):
        _, _, result = _example1()
        u = JetPoint.zero(CHART3, 3)
        rows = [list(row) for row in u.comps]
        rows[2][1] = Fraction(1)
        assert not q_membership(JetPoint.from_rows(CHART3, 3, rows), result.weighted)

    def test_flowout_sample_example2(self):
        filt, sub, result = _example2()
        report = flowout_sample(filt, sub, result.weighted, count=25, seed=0)
        assert report.tested == 25
        assert report.failed == 0
        assert report.first_failure is None
        assert report.passed

    def test_flowout_sample_vacuous(self):
        filt, sub, result = _example1()
        report = flowout_sample(filt, sub, result.weighted, count=0, seed=1)
        assert report.tested == 0 and report.failed == 0

    def test_tangent_jets_are_members(self):
        chart = Chart(("x", "u"))
        sub = Submanifold(chart, (0,), (Fraction(0), Fraction(0)))
        filt = Filtration(chart, 1, ((coordinate_field(chart, 1),),))
        result = weighted_coordinates(filt, sub)
        rows = [(Fraction(2), Fraction(-1)), (Fraction(0), Fraction(0))]
        u = JetPoint.from_rows(chart, 1, rows)
        assert q_membership(u, result.weighted)

    def test_determinism(self):
        filt, sub, result = _example2()
        a = flowout_sample(filt, sub, result.weighted, count=10, seed=7)
        b = flowout_sample(filt, sub, result.weighted, count=10, seed=7)
        assert a == b

    def test_lift_tangency_at_sampled_points(self):
        # fields from level -j stay tangent to the flow-out locus
        import random as _random

        filt, sub, result = _example1()
        w = result.weighted
        jc = JetChart(CHART3, 3)
        defining = []
        for p in range(3):
            wt = w.weights[p]
            if wt == 0:
                continue
            poly = w.forward[p].as_poly()
            for i in range(wt):
                defining.append(lift_function(jc, poly, i))
        rng = _random.Random(5)
        points = []
        for _ in range(4):
            u = JetPoint.zero(CHART3, 3)
            from lieweights.jets import _random_ur_element

            for _ in range(2):
                elem = _random_ur_element(rng, filt)
                if elem is not None:
                    u = u_exp_act(elem, u)
            assert q_membership(u, w)
            points.append(u)
        for j in range(1, 4):
            for x in filt.levels[j - 1]:
                lifted = lift_vf(jc, x, j)
                for g in defining:
                    moved = lifted.field.apply(g)
                    for u in points:
                        assert moved.eval(u.flat()) == 0


class TestQDimension:
    def test_example_totals(self):
        assert q_dimension((0, 1, 2, 3)).total == 6
        assert q_dimension((0, 1, 2, 2, 3)).total == 8

    def test_graded_parts(self):
        d = q_dimension((0, 1, 2, 2, 3))
        assert d.base == 0
        assert d.graded == (1, 2, 2, 3)

    def test_trivial_weighting(self):
        d = q_dimension((2, 5))
        assert d.total == 7 and d.base == 2 and d.graded == (5,)


class TestTruncSeries:
    def test_truncation(self):
        a = TruncSeries(2, (Fraction(0), Fraction(1), Fraction(0)))
        sq = a * a
        assert sq.coefficients == (Fraction(0), Fraction(0), Fraction(1))
        assert (sq * a).is_zero()

    def test_inverse(self):
        a = TruncSeries(3, (Fraction(2), Fraction(1), Fraction(0), Fraction(-1)))
        prod = a * a.inverse()
        assert prod.coefficients == (Fraction(1), Fraction(0), Fraction(0), Fraction(0))

    def test_shift(self):
        a = TruncSeries(2, (Fraction(1), Fraction(2), Fraction(3)))
        assert a.shift(1).coefficients == (Fraction(0), Fraction(1), Fraction(2))
        assert a.shift(5).is_zero()
