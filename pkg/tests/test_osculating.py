"""Osculating algebra construction: frozen examples and algebra axioms."""

import random
from fractions import Fraction

import pytest

from lieweights.exactalg import RatFunc
from lieweights.lieflt import Filtration, Submanifold
from lieweights.vfield import (
    Chart,
    VectorField,
    coordinate_field,
    parse_polynomial,
    parse_vector_field,
)
from lieweights.weightcoord import weighted_coordinates
from lieweights.osculating import (
    GradedSubalg,
    bch,
    class_in_tangent_part,
    fiber_class_pairs,
    kmodule_generators,
    osculating_at,
    tangent_subalg,
    verify_hh,
    weighted_fiber_class,
)

CHART3 = Chart(("x", "y", "z"))
ORIGIN3 = Submanifold(CHART3, (), (0, 0, 0))


def heisenberg():
    x_fld = parse_vector_field("dx", CHART3)
    y_fld = parse_vector_field("dy + x*dz", CHART3)
    z_fld = parse_vector_field("dz", CHART3)
    return Filtration(CHART3, 2, ((x_fld, y_fld), (x_fld, y_fld, z_fld)))


def step3_flag():
    # rank growth 1, 2, 3; all brackets happen to vanish at the origin
    x_fld = parse_vector_field("dx + x*dz", CHART3)
    y_fld = parse_vector_field("dy", CHART3)
    z_fld = parse_vector_field("dz", CHART3)
    return Filtration(CHART3, 3, ((x_fld,), (x_fld, y_fld), (x_fld, y_fld, z_fld)))


def step4_flag():
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
    return Filtration(CHART3, 4, ((x_fld,), (x_fld, y_fld), (x_fld, y_fld, b_fld), full))


@pytest.fixture(scope="module")
def heis_alg():
    return osculating_at(heisenberg(), (0, 0, 0))


@pytest.fixture(scope="module")
def step4_alg():
    return osculating_at(step4_flag(), (0, 0, 0))


class TestHeisenberg:
    def test_dims_and_degrees(self, heis_alg):
        assert heis_alg.graded_dims() == (2, 1)
        assert heis_alg.degrees == (-1, -1, -2)

    def test_representatives(self, heis_alg):
        filt = heisenberg()
        assert heis_alg.representatives == (
            filt.levels[0][0],
            filt.levels[0][1],
            filt.levels[1][2],
        )

    def test_bracket(self, heis_alg):
        assert heis_alg.bracket_basis(0, 1) == (0, 0, 1)
        assert heis_alg.bracket_basis(1, 0) == (0, 0, -1)

    def test_candidate_classes(self, heis_alg):
        # level 2 candidates: the two level-1 fields die, dz survives
        assert heis_alg.candidate_classes[1] == (
            (0, 0, 0),
            (0, 0, 0),
            (0, 0, 1),
        )

    def test_axioms(self, heis_alg):
        assert heis_alg.unverified == ()
        assert heis_alg.axioms_ok()

    @pytest.mark.parametrize("point", [(1, 5, -2), (0, 0, 7), (-3, 2, 1)])
    def test_regular_dims_at_other_points(self, point):
        alg = osculating_at(heisenberg(), point)
        assert alg.graded_dims() == (2, 1)
        assert alg.bracket_basis(0, 1) == (0, 0, 1)


class TestStepFourFlag:
    def test_dims(self, step4_alg):
        assert step4_alg.graded_dims() == (1, 1, 1, 1)

    def test_structure_constants(self, step4_alg):
        assert step4_alg.bracket_basis(0, 1) == (0, 0, 1, 0)
        assert step4_alg.bracket_basis(0, 2) == (0, 0, 0, 2)
        # beyond the grading everything vanishes
        assert step4_alg.bracket_basis(1, 2) == (0, 0, 0, 0)
        assert step4_alg.bracket_basis(2, 3) == (0, 0, 0, 0)

    def test_axioms(self, step4_alg):
        assert step4_alg.unverified == ()
        assert step4_alg.axioms_ok()

    def test_bracket_elements_bilinear(self, step4_alg):
        x = (Fraction(2), Fraction(0), Fraction(-1), Fraction(3))
        y = (Fraction(1), Fraction(4), Fraction(0), Fraction(0))
        # [2e1 - e3 + 3e4, e1 + 4e2] = 8[e1,e2] - [e3,e1] = 8e3 + 2e4
        assert step4_alg.bracket_elements(x, y) == (0, 0, 8, 2)

    def test_low_degree_bound_inflates_top_level(self):
        # the relations dx ~ level-1 field need ideal coefficients of
        # degree 1, so bound 0 misses them and the top level triples
        alg = osculating_at(step4_flag(), (0, 0, 0), degree_bound=0)
        assert alg.graded_dims() == (1, 1, 1, 3)

    def test_tangent_subalgebra(self, step4_alg):
        sub = tangent_subalg(step4_flag(), ORIGIN3, parent=step4_alg)
        assert sub.graded_dims() == (0, 0, 1, 0)
        assert sub.spans[2] == ((Fraction(0), Fraction(0), Fraction(1), Fraction(0)),)
        assert sub.closed_under_bracket()

    def test_hh_report(self, step4_alg):
        report = verify_hh(step4_flag(), ORIGIN3, algebra=step4_alg)
        assert report.verdict == "pass"
        assert report.p_dims == (1, 1, 1, 1)
        assert report.r_dims == (0, 0, 1, 0)
        assert report.quotient_dims == (1, 1, 0, 1)
        assert report.expected_dims == (1, 1, 0, 1)


class TestStepThreeFlag:
    def test_abelian(self):
        alg = osculating_at(step3_flag(), (0, 0, 0))
        assert alg.graded_dims() == (1, 1, 1)
        assert alg.structure == ()
        assert alg.axioms_ok()

    def test_tangent_trivial_at_point(self):
        alg = osculating_at(step3_flag(), (0, 0, 0))
        sub = tangent_subalg(step3_flag(), ORIGIN3, parent=alg)
        assert sub.graded_dims() == (0, 0, 0)

    def test_hh_report(self):
        report = verify_hh(step3_flag(), ORIGIN3)
        assert report.verdict == "pass"
        assert report.quotient_dims == (1, 1, 1)
        assert report.expected_dims == (1, 1, 1)


class TestTangentSubalgebra:
    def test_whole_chart_gives_everything(self, heis_alg):
        whole = Submanifold(CHART3, (0, 1, 2), (0, 0, 0))
        sub = tangent_subalg(heisenberg(), whole, parent=heis_alg)
        assert sub.graded_dims() == heis_alg.graded_dims()
        assert sub.closed_under_bracket()

    def test_axis_spans(self, heis_alg):
        axis = Submanifold(CHART3, (0,), (0, 0, 0))
        sub = tangent_subalg(heisenberg(), axis, parent=heis_alg)
        assert sub.graded_dims() == (1, 0)
        assert sub.spans[0] == ((Fraction(1), Fraction(0), Fraction(0)),)
        assert sub.contains((1, 0, 0))
        assert not sub.contains((0, 1, 0))

    def test_not_closed_detected(self, heis_alg):
        # span both level-1 classes but drop their bracket
        spans = (
            ((Fraction(1), Fraction(0), Fraction(0)), (Fraction(0), Fraction(1), Fraction(0))),
            (),
        )
        sub = GradedSubalg(parent=heis_alg, spans=spans)
        assert not sub.closed_under_bracket()

    def test_hh_report_along_axis(self, heis_alg):
        axis = Submanifold(CHART3, (0,), (0, 0, 0))
        report = verify_hh(heisenberg(), axis, algebra=heis_alg)
        assert report.verdict == "pass"
        assert report.p_dims == (2, 1)
        assert report.r_dims == (1, 0)
        assert report.quotient_dims == (1, 1)
        assert report.expected_dims == (1, 1)

    def test_hh_detects_bad_tangent_span(self, step4_alg):
        # claim the top-level class is tangent: its bare-direction
        # component survives, so the class map check must fail
        spans = (
            (),
            (),
            ((Fraction(0), Fraction(0), Fraction(1), Fraction(0)),),
            ((Fraction(0), Fraction(0), Fraction(0), Fraction(1)),),
        )
        bad = GradedSubalg(parent=step4_alg, spans=spans)
        report = verify_hh(step4_flag(), ORIGIN3, algebra=step4_alg, tangent=bad)
        assert not report.maps_into_ok
        assert report.verdict == "fail"


class TestUnverifiedBrackets:
    def cubic_flag(self):
        # [dx, dy + x^3*dz] = 3x^2*dz needs an ideal coefficient of
        # degree 2 to certify membership
        x_fld = parse_vector_field("dx", CHART3)
        y_fld = parse_vector_field("dy + x^3*dz", CHART3)
        full = (
            x_fld,
            y_fld,
            coordinate_field(CHART3, 0),
            coordinate_field(CHART3, 1),
            coordinate_field(CHART3, 2),
        )
        return Filtration(CHART3, 3, ((x_fld,), (x_fld, y_fld), full))

    def test_low_bound_leaves_bracket_unverified(self):
        alg = osculating_at(self.cubic_flag(), (0, 0, 0), degree_bound=1)
        assert (0, 1) in alg.unverified
        assert not alg.axioms_ok()

    def test_higher_bound_certifies_zero(self):
        alg = osculating_at(self.cubic_flag(), (0, 0, 0), degree_bound=3)
        assert alg.unverified == ()
        assert alg.bracket_basis(0, 1) == (0,) * alg.dim


class TestGroupLaw:
    def test_heisenberg_half_bracket(self, heis_alg):
        e1 = heis_alg.basis_vector(0)
        e2 = heis_alg.basis_vector(1)
        assert bch(heis_alg, e1, e2) == (1, 1, Fraction(1, 2))

    def test_step4_series(self, step4_alg):
        e1 = step4_alg.basis_vector(0)
        e2 = step4_alg.basis_vector(1)
        assert bch(step4_alg, e1, e2) == (1, 1, Fraction(1, 2), Fraction(1, 6))

    def test_inverse_element(self, step4_alg):
        rng = random.Random(5)
        for _ in range(5):
            x = tuple(Fraction(rng.randint(-3, 3)) for _ in range(step4_alg.dim))
            neg = tuple(-c for c in x)
            assert bch(step4_alg, x, neg) == (0,) * step4_alg.dim
            assert bch(step4_alg, x, (Fraction(0),) * step4_alg.dim) == x

    def test_abelian_is_addition(self):
        alg = osculating_at(step3_flag(), (0, 0, 0))
        x = (Fraction(1), Fraction(-2), Fraction(3))
        y = (Fraction(4), Fraction(1, 2), Fraction(0))
        assert bch(alg, x, y) == (5, Fraction(-3, 2), 3)

    def test_associativity(self, step4_alg):
        rng = random.Random(17)
        for _ in range(10):
            x, y, z = (
                tuple(Fraction(rng.randint(-2, 2)) for _ in range(step4_alg.dim))
                for _ in range(3)
            )
            left = bch(step4_alg, bch(step4_alg, x, y), z)
            right = bch(step4_alg, x, bch(step4_alg, y, z))
            assert left == right


@pytest.fixture(scope="module")
def step3_weighting():
    return weighted_coordinates(step3_flag(), ORIGIN3).weighted


@pytest.fixture(scope="module")
def step4_weighting():
    return weighted_coordinates(step4_flag(), ORIGIN3).weighted


class TestAmbientModule:
    def test_generator_count(self, step3_weighting):
        gens = kmodule_generators(step3_weighting, 0, 2)
        assert len(gens) == 23

    def test_membership_examples(self, step3_weighting):
        gens = kmodule_generators(step3_weighting, 0, 2)
        chart = step3_weighting.chart
        x_dx = parse_vector_field("x*dx", chart)
        y_dy = parse_vector_field("y*dy", chart)
        xx_dy = parse_vector_field("x^2*dy", chart)
        bare_dy = parse_vector_field("dy", chart)
        assert x_dx in gens and y_dy in gens and xx_dy in gens
        assert bare_dy not in gens

    def test_full_depth_has_all_directions(self, step3_weighting):
        gens = kmodule_generators(step3_weighting, 3, 1)
        chart = step3_weighting.chart
        for name in chart.names:
            assert parse_vector_field(f"d{name}", chart) in gens

    def test_class_pairs_step3(self, step3_weighting):
        assert fiber_class_pairs(step3_weighting, 1) == (
            (0, (0, 0, 0)),
            (1, (1, 0, 0)),
            (2, (0, 1, 0)),
            (2, (2, 0, 0)),
        )
        assert fiber_class_pairs(step3_weighting, 3) == ((2, (0, 0, 0)),)

    def test_class_of_vertical_field(self, step3_weighting):
        z_fld = parse_vector_field("dz", CHART3)
        cls = weighted_fiber_class(z_fld, step3_weighting, 3)
        assert cls == (1,)
        pairs = fiber_class_pairs(step3_weighting, 3)
        assert not class_in_tangent_part(pairs, cls)

    def test_class_below_depth_is_none(self, step3_weighting):
        z_fld = parse_vector_field("dz", CHART3)
        assert weighted_fiber_class(z_fld, step3_weighting, 1) is None

    def test_class_of_bracket_field(self, step4_weighting):
        b_fld = parse_vector_field("2*x*dz", CHART3)
        pairs = fiber_class_pairs(step4_weighting, 3)
        assert pairs == ((2, (1, 0, 0)),)
        cls = weighted_fiber_class(b_fld, step4_weighting, 3)
        assert cls == (2,)
        assert class_in_tangent_part(pairs, cls)

    def test_rational_coefficient_class(self, step3_weighting):
        coeff = RatFunc(
            parse_polynomial("x^2", CHART3), parse_polynomial("1 + x", CHART3)
        )
        field = VectorField(CHART3, (RatFunc.const(3, 0), RatFunc.const(3, 0), coeff))
        # x^2/(1+x) expands to x^2 - x^3 + ..., weight-2 part is x^2
        cls = weighted_fiber_class(field, step3_weighting, 1)
        assert cls == (0, 0, 0, 1)

    def test_axis_class_lies_in_tangent_part(self):
        x_fld = parse_vector_field("dx", CHART3)
        y_fld = parse_vector_field("dy + x*dz", CHART3)
        z_fld = parse_vector_field("dz", CHART3)
        filt = Filtration(CHART3, 2, ((x_fld, y_fld), (x_fld, y_fld, z_fld)))
        axis = Submanifold(CHART3, (0,), (0, 0, 0))
        weighting = weighted_coordinates(filt, axis).weighted
        pairs = fiber_class_pairs(weighting, 1)
        assert pairs == ((1, (0, 0, 0)), (2, (0, 1, 0)))
        cls = weighted_fiber_class(x_fld, weighting, 1)
        assert cls == (0, -1)
        assert class_in_tangent_part(pairs, cls)
