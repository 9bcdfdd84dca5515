"""
Seeded random objects for sampled checks and property suites.

Functions:
- make_rng(seed): `random.Random` seeded from the settings by default.
- random_rational(rng, bound): Small random rational.
- random_polynomial(variables, rng, degree, terms): Random polynomial with rational coefficients.
- random_invariant(ctx, rng, degree): Random polynomial of (x, u) depending on u.
- random_evolution_rhs(ctx, rng, order): Random polynomial right-hand side of order 2 or 3.
"""
import itertools
import random

import sympy

from redmod.jet import U, MultiIndex, jet_symbol
from redmod.settings import get_settings


def make_rng(seed=None):
    return random.Random(get_settings().seed if seed is None else seed)


def random_rational(rng, bound=5):
    numerator = 0
    while numerator == 0:
        numerator = rng.randint(-bound, bound)
    return sympy.Rational(numerator, rng.randint(1, bound))


def random_polynomial(variables, rng, degree=2, terms=3):
    """Sum of `terms` random monomials of total degree at most `degree`."""
    variables = list(variables)
    monomials = [m for d in range(degree + 1)
                 for m in itertools.combinations_with_replacement(variables, d)]
    chosen = rng.sample(monomials, min(terms, len(monomials)))
    return sympy.Add(*[random_rational(rng) * sympy.Mul(*m) for m in chosen])


def random_invariant(ctx, rng, degree=2):
    """Random polynomial of (x, u) whose derivative in u does not vanish."""
    while True:
        base = random_polynomial(ctx.coordinates + (U,), rng, degree)
        phi = sympy.expand(base + random_rational(rng) * U
                           + random_rational(rng) * U * rng.choice(ctx.coordinates))
        if sympy.diff(phi, U) != 0:
            return phi


def random_evolution_rhs(ctx, rng, order=2):
    """
    Random polynomial `H` in t, x, u and spatial derivatives with order exactly `order`.

    The leading term is a nonzero multiple of the pure derivative of that order in
    the first spatial direction.
    """
    spatial = ctx.spatial_directions
    jets = [jet_symbol(MultiIndex(tuple(
        count if i == s else 0 for i in range(ctx.n)))) for s in spatial
        for count in range(1, order)]
    top = jet_symbol(MultiIndex.unit(ctx.n, spatial[0]).raised(spatial[0], order - 1))
    lower = random_polynomial(ctx.coordinates + (U,) + tuple(jets), rng, degree=2, terms=3)
    return sympy.expand(random_rational(rng) * top * (1 + rng.randint(0, 1) * U ** 2) + lower)
