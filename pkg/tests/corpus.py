"""Seeded random generators shared by test modules.

Kept outside the package on purpose: production code never needs random
polynomials, and the acceptance suite must drive the same corpus as the
unit tests.
"""

from fractions import Fraction
import random

from lieweights.exactalg import Poly
from lieweights.lieflt import monomials_up_to
from lieweights.vfield import Chart, VectorField

COEFFS = tuple(Fraction(n, d) for n in (-2, -1, 1, 2) for d in (1, 2))

CHARTS = {
    1: Chart(("x",)),
    2: Chart(("x", "y")),
    3: Chart(("x", "y", "z")),
}


def random_poly(rng: random.Random, nvars: int, degree: int, max_terms: int = 3) -> Poly:
    monos = monomials_up_to(nvars, degree)
    terms = {}
    for _ in range(rng.randrange(0, max_terms + 1)):
        terms[rng.choice(monos)] = rng.choice(COEFFS)
    return Poly(nvars, terms)


def random_field(rng: random.Random, chart: Chart, degree: int) -> VectorField:
    return VectorField(
        chart, [random_poly(rng, chart.dim, degree) for _ in range(chart.dim)]
    )


def lift_identity_cases(seed: int, count: int):
    """(chart, order, X, Y, f, i, j) tuples with n <= 3, deg <= 2, r <= 3."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randrange(1, 4)
        chart = CHARTS[n]
        r = rng.randrange(1, 4)
        x = random_field(rng, chart, 2)
        y = random_field(rng, chart, 2)
        f = random_poly(rng, n, 2)
        i = rng.randrange(0, r + 1)
        j = rng.randrange(0, r + 1)
        out.append((chart, r, x, y, f, i, j))
    return out
