"""
Symbolic expression core.

Expressions are sympy trees over coordinate symbols, `u`, jet symbols such as
`u[1,0,2]`, user symbols and opaque exponentials (`ExpAtom`). Exponentials are
algebraically independent indeterminates: `exp(a)*exp(b)` is never merged.

Every function here returns normalized expressions: a single reduced fraction
with expanded numerator and denominator, a monic denominator and normalized
exponential arguments.

Functions:
- normalize(e): Canonical rational form of `e`.
- normal_form(e): Hashable `NormalForm` of `e`.
- is_zero(e): Exact zero test, cross-checked by random rational evaluation.
- partial_derivative(e, v): Normalized partial derivative.
- substitute(e, bindings): Simultaneous substitution, then normalization.
- factor_nonvanishing(e, nonzero): Split off a structurally nonvanishing multiplier.
- divides(d, e): Exact divisibility of numerators.
- affine_split(e, v): Write `e` as `A*v + B`.
- polynomial_coefficients(e, variables): Coefficients of the numerator in `variables`.
- print_expr(e): Text in the input grammar.
"""
from dataclasses import dataclass
from fractions import Fraction
import logging
import random

import numpy as np
import sympy
from sympy import Poly, QQ, S, Symbol

from redmod.errors import InternalError, ResourceLimit, SingularSubstitution
from redmod.settings import get_settings

logger = logging.getLogger(__name__)

ATOM_PREFIX = "_exp["


class ExpAtom(sympy.Function):
    """Opaque exponential. Its derivative is itself; `exp(0)` is 1."""

    nargs = 1

    @classmethod
    def eval(cls, arg):
        if arg is S.Zero:
            return S.One
        return None

    def fdiff(self, argindex=1):
        return self

    def _eval_is_zero(self):
        return False

    def _sympystr(self, printer):
        return "exp(%s)" % printer._print(self.args[0])


@dataclass(frozen=True)
class NormalForm:
    """
    Canonical reduced fraction.

    Generators are sorted by name; exponentials appear as generators named
    `_exp[<argument>]`. The denominator is monic in the lexicographic order.
    """
    gens: tuple
    numerator: tuple
    denominator: tuple

    @property
    def is_zero(self):
        return not self.numerator


def _atomize(e):
    """Replace every exponential by a stable generator symbol."""
    if not e.has(ExpAtom):
        return e, {}
    mapping = {}

    def visit(node):
        if isinstance(node, ExpAtom):
            arg = normalize(node.args[0])
            if arg == 0:
                return S.One
            atom = Symbol(ATOM_PREFIX + sympy.sstr(arg) + "]")
            mapping[atom] = ExpAtom(arg)
            return atom
        if not node.args:
            return node
        return node.func(*[visit(a) for a in node.args])

    return visit(e), mapping


def size_of(e):
    """Number of nodes of the expression tree."""
    return sum(1 for _ in sympy.preorder_traversal(e))


def _fraction(atomized):
    """Reduced numerator and denominator polynomials of an atomized expression."""
    num, den = sympy.fraction(sympy.cancel(atomized))
    gens = tuple(sorted(num.free_symbols | den.free_symbols, key=str))
    if not gens:
        return gens, None, None, sympy.Rational(num) / sympy.Rational(den)
    p_num = Poly(num, *gens, domain=QQ)
    p_den = Poly(den, *gens, domain=QQ)
    lead = p_den.LC()
    if lead != 1:
        p_num = p_num.quo_ground(lead)
        p_den = p_den.quo_ground(lead)
    return gens, p_num, p_den, None


def _check_size(e):
    limit = get_settings().max_nodes
    size = size_of(e)
    if size > limit:
        raise ResourceLimit(f"Expression has {size} nodes, more than the cap of {limit}")


def normalize(e):
    """
    Return the canonical rational form of `e`.

    Args:
        e: A sympy expression, or anything `sympify` accepts.

    Returns:
        sympy.Expr: `numerator/denominator` with expanded polynomials.

    Raises:
        ResourceLimit: If the result exceeds `Settings.max_nodes`.
    """
    e = sympy.sympify(e)
    atomized, mapping = _atomize(e)
    gens, p_num, p_den, constant = _fraction(atomized)
    if constant is not None:
        return constant
    result = p_num.as_expr() / p_den.as_expr()
    _check_size(result)
    return result.xreplace(mapping) if mapping else result


def normal_form(e):
    """Return the hashable canonical form of `e`."""
    atomized, _ = _atomize(sympy.sympify(e))
    gens, p_num, p_den, constant = _fraction(atomized)
    if constant is not None:
        numerator = (((), constant),) if constant != 0 else ()
        return NormalForm((), numerator, (((), S.One),))
    return NormalForm(tuple(str(g) for g in gens),
                      tuple(p_num.terms()) if not p_num.is_zero else (),
                      tuple(p_den.terms()))


def _random_rational(rng, settings):
    numerator = rng.randint(-settings.sample_numerator_bound, settings.sample_numerator_bound)
    return sympy.Rational(numerator, rng.randint(1, settings.sample_denominator_bound))


def sample_points(symbols, count, rng=None):
    """
    Draw random rational assignments for `symbols`.

    Args:
        symbols (Iterable[Symbol]): Indeterminates to assign.
        count (int): Number of points.
        rng (random.Random, optional): Source of randomness; seeded from the settings
            when omitted.

    Returns:
        list[dict]: One mapping symbol -> Rational per point.
    """
    settings = get_settings()
    rng = rng or random.Random(settings.seed)
    symbols = sorted(symbols, key=str)
    return [{s: _random_rational(rng, settings) for s in symbols} for _ in range(count)]


def _sampled_zero(atomized):
    """Decide zero-ness by exact evaluation at random rational points."""
    settings = get_settings()
    rng = random.Random(settings.seed)
    symbols = sorted(atomized.free_symbols, key=str)
    if not symbols:
        value = atomized
        if value.has(S.ComplexInfinity, S.NaN):
            raise InternalError(f"Constant expression {value} is undefined")
        return value == 0
    accepted = 0
    attempts = 0
    while accepted < settings.samples:
        attempts += 1
        if attempts > 10 * settings.samples:
            raise InternalError("Could not find evaluation points away from the poles of "
                                f"{sympy.sstr(atomized)}")
        point = {s: _random_rational(rng, settings) for s in symbols}
        value = atomized.xreplace(point)
        if value.has(S.ComplexInfinity, S.NaN) or not value.is_Rational:
            logger.debug("Resampling: evaluation hit a pole")
            continue
        if value != 0:
            return False
        accepted += 1
    return True


def is_zero(e):
    """
    Test whether `e` vanishes identically.

    The verdict of the canonical form is confirmed by evaluation at
    `Settings.samples` random rational points unless cross checking is disabled.

    Raises:
        InternalError: If the canonical form and the sampled values disagree.
    """
    atomized, _ = _atomize(sympy.sympify(e))
    _, p_num, _, constant = _fraction(atomized)
    verdict = constant == 0 if constant is not None else p_num.is_zero
    if get_settings().cross_check:
        sampled = _sampled_zero(atomized)
        if sampled != verdict:
            raise InternalError(f"Zero test disagreement on {sympy.sstr(e)}: canonical form "
                                f"says {verdict}, sampling says {sampled}")
    return verdict


def essential_symbols(e):
    """Symbols of the normalized expression, including those inside exponentials."""
    return normalize(e).free_symbols


def partial_derivative(e, v):
    """Partial derivative of `e` with respect to the indeterminate `v`."""
    return normalize(sympy.diff(sympy.sympify(e), v))


def depends_on(e, v):
    """Whether the partial derivative of `e` with respect to `v` is not identically zero."""
    e = sympy.sympify(e)
    if v not in e.free_symbols:
        return False
    return not is_zero(sympy.diff(e, v))


def substitute(e, bindings):
    """
    Substitute all bindings simultaneously and normalize.

    Raises:
        SingularSubstitution: If a denominator of `e` vanishes after substitution.
    """
    if not bindings:
        return normalize(e)
    num, den = sympy.fraction(normalize(e))
    new_den = normalize(den.xreplace(bindings))
    if new_den.has(S.ComplexInfinity, S.NaN) or is_zero(new_den):
        raise SingularSubstitution(f"Substitution makes the denominator of {print_expr(e)} "
                                   "vanish")
    new_num = num.xreplace(bindings)
    if new_num.has(S.ComplexInfinity, S.NaN):
        raise SingularSubstitution(f"Substitution into {print_expr(e)} hits a pole")
    return normalize(new_num / new_den)


def factor_nonvanishing(e, nonzero=()):
    """
    Split `e` into a structurally nonvanishing multiplier and a core.

    The multiplier collects the rational content, exponentials, symbols declared
    nonzero and the inverse of the denominator. Every other irreducible factor of
    the numerator stays in the core.

    Args:
        e: Expression to split.
        nonzero (Iterable[Symbol]): Symbols known not to vanish.

    Returns:
        tuple: `(multiplier, core)` with `e == multiplier*core`; `(1, 0)` for zero input.
    """
    e = normalize(e)
    if e == 0:
        return S.One, S.Zero
    atomized, mapping = _atomize(e)
    num, den = sympy.fraction(atomized)
    nonzero = set(nonzero)
    coefficient, factors = sympy.factor_list(num)
    multiplier = coefficient / den
    core = S.One
    for factor, power in factors:
        if factor in mapping or factor in nonzero:
            multiplier *= factor**power
        else:
            core *= factor**power
    multiplier = multiplier.xreplace(mapping) if mapping else multiplier
    core = core.xreplace(mapping) if mapping else core
    return normalize(multiplier), normalize(core)


def squarefree_factors(e):
    """Distinct non-constant irreducible factors of the numerator, with multiplicities."""
    atomized, mapping = _atomize(normalize(e))
    num, _ = sympy.fraction(atomized)
    _, factors = sympy.factor_list(num)
    return [(f.xreplace(mapping) if mapping else f, k) for f, k in factors]


def divides(d, e):
    """
    Test whether the numerator of `d` divides the numerator of `e` exactly.

    Exponentials are treated as indeterminates. A zero `e` is divisible by anything.
    """
    if is_zero(e):
        return True
    d_atom, _ = _atomize(normalize(d))
    e_atom, _ = _atomize(normalize(e))
    d_num, _ = sympy.fraction(d_atom)
    e_num, _ = sympy.fraction(e_atom)
    gens = sorted(d_num.free_symbols | e_num.free_symbols, key=str)
    if not d_num.free_symbols:
        return d_num != 0
    _, remainder = sympy.div(Poly(e_num, *gens, domain=QQ), Poly(d_num, *gens, domain=QQ))
    return remainder.is_zero


def affine_split(e, v):
    """
    Write `e` as `A*v + B` with `A`, `B` free of `v`.

    Returns:
        tuple | None: `(A, B)`, or None when `e` is not affine in `v`.
    """
    e = normalize(e)
    atomized, mapping = _atomize(e)
    if any(v in atom.args[0].free_symbols for atom in mapping.values()):
        return None
    num, den = sympy.fraction(atomized)
    if v in den.free_symbols:
        return None
    poly = Poly(num, v)
    if poly.degree() > 1:
        return None
    slope = poly.coeff_monomial(v) / den
    intercept = poly.coeff_monomial(1) / den
    if mapping:
        slope, intercept = slope.xreplace(mapping), intercept.xreplace(mapping)
    return normalize(slope), normalize(intercept)


def polynomial_coefficients(e, variables):
    """
    Coefficients of the numerator of `e` as a polynomial in `variables`.

    Returns:
        dict | None: Monomial exponent tuple -> normalized coefficient (denominator
        included), or None if `variables` occur in the denominator or in an exponential.
    """
    e = normalize(e)
    variables = list(variables)
    atomized, mapping = _atomize(e)
    if any(set(variables) & atom.args[0].free_symbols for atom in mapping.values()):
        return None
    num, den = sympy.fraction(atomized)
    if set(variables) & den.free_symbols:
        return None
    if not variables:
        return {(): e}
    poly = Poly(num, *variables)
    result = {}
    for monomial, coefficient in poly.terms():
        value = coefficient / den
        result[monomial] = normalize(value.xreplace(mapping) if mapping else value)
    return result


def evaluate(e, point):
    """Exact value of `e` with the symbols of `point` replaced by rationals."""
    return normalize(sympy.sympify(e).xreplace(
        {k: sympy.Rational(Fraction(v)) if isinstance(v, (Fraction, int)) else v
         for k, v in point.items()}))


def lambdify_numeric(e, variables):
    """
    Compile `e` into a numpy function of `variables`.

    Exponentials become `numpy.exp`; symbols that are not Python identifiers are
    replaced by dummies.
    """
    plain = sympy.sympify(e).replace(ExpAtom, sympy.exp)
    return sympy.lambdify(list(variables), plain, modules="numpy", dummify=True)


def evaluate_float(e, point):
    """Floating point value of `e` at `point` (symbol -> float)."""
    variables = sorted(point, key=str)
    fn = lambdify_numeric(e, variables)
    return float(np.real(fn(*[float(point[v]) for v in variables])))


def print_expr(e):
    """Text of `e` in the input grammar."""
    return sympy.sstr(sympy.sympify(e)).replace("**", "^")
