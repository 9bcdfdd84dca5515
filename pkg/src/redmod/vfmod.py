"""
Vector fields on the space of (x, u) and modules spanned by them.

A module is stored through a basis; every statement about it (rank, span,
involutivity) is decided by zero tests on the coefficient matrix, which is
correct on a dense open set of points, matching the local setting.

Functions:
- characteristic(V, ctx): `eta - xi^i u_i`.
- apply_field(V, f, ctx): Action of `V` on a function of (x, u).
- commutator(V, W, ctx): Lie bracket.
- rank_condition(M): Projection to x-space has full dimension.
- is_involutive(M): Closed under brackets.
- canonical_basis(M): Basis `d_s + xi^{s,iota} d_iota + eta^s d_u`.
- annihilator_module(invariants, checked, ctx): Module annihilating given functions.
- phi_family_member(phi, ctx, checked, variant): Module `<d_s - (phi_s/phi_u) d_u>`.
- pushforward(V, X, U, ctx, inverse): Image of `V` under a point transformation.
- flat_jet_values(etas, ctx, alphas, directions): `(d_1 + eta^1 d_u)^a1 ... u`.
"""
from dataclasses import dataclass
from functools import cached_property
import itertools
import logging

import sympy
from sympy import S

from redmod.errors import (DegenerateInvariant, InternalError, InvalidRequest,
                           InvalidVectorField, LinearlyDependentBasis, MissingInverse,
                           RankDeficient)
from redmod.expr import depends_on, is_zero, normalize, print_expr, substitute
from redmod.jet import U, MultiIndex, jet_symbol, jet_variables

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VectorField:
    """`xi^i(x, u) d_i + eta(x, u) d_u`; coefficients never involve derivatives of u."""
    xi: tuple
    eta: object = S.Zero

    def __post_init__(self):
        xi = tuple(normalize(c) for c in self.xi)
        eta = normalize(self.eta)
        for c in xi + (eta,):
            if jet_variables(c):
                raise InvalidVectorField(f"Coefficient {print_expr(c)} depends on derivatives "
                                         "of u")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)

    @property
    def n(self):
        return len(self.xi)

    @property
    def row(self):
        return list(self.xi) + [self.eta]

    @classmethod
    def from_row(cls, row):
        return cls(tuple(row[:-1]), row[-1])

    @classmethod
    def shift(cls, n, i):
        """The translation field `d_i`."""
        return cls(tuple(S.One if j == i else S.Zero for j in range(n)), S.Zero)

    def scaled(self, factor):
        return VectorField(tuple(factor * c for c in self.xi), factor * self.eta)

    def plus(self, other):
        return VectorField(tuple(a + b for a, b in zip(self.xi, other.xi)), self.eta + other.eta)

    def is_zero(self):
        return all(is_zero(c) for c in self.row)

    def to_dict(self):
        return {"xi": [print_expr(c) for c in self.xi], "eta": print_expr(self.eta)}


def characteristic(vector_field, ctx):
    """The characteristic `eta - xi^i u_i` of `vector_field`."""
    value = vector_field.eta
    for i, xi in enumerate(vector_field.xi):
        value -= xi * jet_symbol(MultiIndex.unit(ctx.n, i))
    return normalize(value)


def apply_field(vector_field, f, ctx):
    """`xi^i f_{x_i} + eta f_u` for a function `f` of (x, u)."""
    f = sympy.sympify(f)
    value = vector_field.eta * sympy.diff(f, U)
    for i, xi in enumerate(vector_field.xi):
        value += xi * sympy.diff(f, ctx.coordinate(i))
    return normalize(value)


def commutator(v, w, ctx):
    """Lie bracket `[v, w]`."""
    if v.n != w.n:
        raise InvalidVectorField(f"Cannot bracket fields on spaces of dimension {v.n} and {w.n}")
    xi = tuple(apply_field(v, b, ctx) - apply_field(w, a, ctx) for a, b in zip(v.xi, w.xi))
    eta = apply_field(v, w.eta, ctx) - apply_field(w, v.eta, ctx)
    return VectorField(xi, eta)


def _rank(rows):
    """Rank of a matrix of expressions by Gaussian elimination with zero tests."""
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    rank = 0
    for col in range(len(rows[0])):
        pivot = next((k for k in range(rank, len(rows)) if not is_zero(rows[k][col])), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        head = rows[rank]
        for k in range(rank + 1, len(rows)):
            if is_zero(rows[k][col]):
                continue
            factor = rows[k][col] / head[col]
            rows[k] = [normalize(a - factor * b) for a, b in zip(rows[k], head)]
        rank += 1
        if rank == len(rows):
            break
    return rank


@dataclass(frozen=True)
class VFModule:
    """
    Module spanned by linearly independent vector fields.

    Attributes:
        basis (tuple[VectorField]): The spanning fields.
        ctx (JetContext): Coordinates of the underlying space.
    """
    basis: tuple
    ctx: object

    def __post_init__(self):
        basis = tuple(self.basis)
        object.__setattr__(self, "basis", basis)
        if not 0 < len(basis) <= self.ctx.n + 1:
            raise LinearlyDependentBasis(f"A module needs 1..{self.ctx.n + 1} fields, "
                                         f"got {len(basis)}")
        for v in basis:
            if v.n != self.ctx.n:
                raise InvalidVectorField(f"Field has {v.n} components, expected {self.ctx.n}")
        if _rank([v.row for v in basis]) != len(basis):
            raise LinearlyDependentBasis("Basis fields are linearly dependent over functions "
                                         "of (x, u)")

    @property
    def dim(self):
        return len(self.basis)

    @cached_property
    def rank_condition(self):
        return rank_condition(self)

    @cached_property
    def involutive(self):
        return is_involutive(self)

    def to_dict(self):
        return {"n": self.ctx.n, "fields": [v.to_dict() for v in self.basis]}


def rank_condition(module):
    """Whether the p x n matrix `(xi^{si})` has rank p."""
    return _rank([v.xi for v in module.basis]) == module.dim


def is_involutive(module):
    """Whether every bracket of basis fields lies in the span of the basis."""
    rows = [v.row for v in module.basis]
    for v, w in itertools.combinations(module.basis, 2):
        bracket = commutator(v, w, module.ctx)
        if bracket.is_zero():
            continue
        if _rank(rows + [bracket.row]) != module.dim:
            logger.debug("Bracket leaves the module: %s", bracket.to_dict())
            return False
    return True


@dataclass(frozen=True)
class CanonicalModule:
    """
    Basis `Q_s = d_s + xi_hat^{s,iota} d_iota + eta_hat^s d_u`.

    `checked[s]` is the coordinate of the s-th unit coefficient; `xi_hat[s][j]` is the
    coefficient of `d_{hat[j]}`.
    """
    checked: tuple
    hat: tuple
    xi_hat: tuple
    eta_hat: tuple
    ctx: object

    @property
    def p(self):
        return len(self.checked)

    @property
    def fields(self):
        result = []
        for s, c in enumerate(self.checked):
            xi = [S.Zero] * self.ctx.n
            xi[c] = S.One
            for j, i in enumerate(self.hat):
                xi[i] = self.xi_hat[s][j]
            result.append(VectorField(tuple(xi), self.eta_hat[s]))
        return result

    def module(self):
        return VFModule(tuple(self.fields), self.ctx)


def _gauss_jordan(rows, pivots):
    """Reduce `rows` so that `rows[s][pivots[s]] == 1` and the other pivot entries vanish."""
    rows = [list(r) for r in rows]
    for s, col in enumerate(pivots):
        pivot = next((k for k in range(s, len(rows)) if not is_zero(rows[k][col])), None)
        if pivot is None:
            return None
        rows[s], rows[pivot] = rows[pivot], rows[s]
        head = rows[s][col]
        rows[s] = [normalize(a / head) for a in rows[s]]
        for k in range(len(rows)):
            if k != s and not is_zero(rows[k][col]):
                factor = rows[k][col]
                rows[k] = [normalize(a - factor * b) for a, b in zip(rows[k], rows[s])]
    return rows


def canonical_basis(module):
    """
    Canonical basis of a module satisfying the rank condition.

    Column sets are tried in the order of `itertools.combinations`, which starts
    with the leading coordinates.

    Raises:
        RankDeficient: If the rank condition fails.
    """
    if not module.rank_condition:
        raise RankDeficient("The projection of the module to x-space is not "
                            f"{module.dim}-dimensional")
    n = module.ctx.n
    for checked in itertools.combinations(range(n), module.dim):
        rows = _gauss_jordan([v.row for v in module.basis], checked)
        if rows is None:
            continue
        hat = tuple(i for i in range(n) if i not in checked)
        canonical = CanonicalModule(checked, hat,
                                    tuple(tuple(row[i] for i in hat) for row in rows),
                                    tuple(row[n] for row in rows), module.ctx)
        _check_span(module, canonical)
        return canonical
    raise InternalError("No invertible block found although the rank condition holds")


def _check_span(module, canonical):
    for v in module.basis:
        combination = [S.Zero] * (module.ctx.n + 1)
        for s, field_ in enumerate(canonical.fields):
            weight = v.xi[canonical.checked[s]]
            combination = [a + weight * b for a, b in zip(combination, field_.row)]
        if not all(is_zero(a - b) for a, b in zip(combination, v.row)):
            raise InternalError("Canonical basis does not reproduce the module")


def annihilator_module(invariants, checked, ctx, degenerate=DegenerateInvariant):
    """
    Involutive module with fields `d_s + a^{s,c} d_c` annihilating `invariants`.

    The free columns are the coordinates outside `checked` followed by u; there must
    be as many invariants as free columns. Coefficients follow from Cramer's rule.

    Raises:
        degenerate: If the Jacobian of the invariants in the free columns vanishes.
    """
    free = [ctx.coordinate(i) for i in range(ctx.n) if i not in checked] + [U]
    if len(invariants) != len(free):
        raise InvalidRequest(f"Expected {len(free)} invariants, got {len(invariants)}")
    jacobian = sympy.Matrix([[sympy.diff(f, v) for v in free] for f in invariants])
    det = normalize(jacobian.det(method="berkowitz"))
    if is_zero(det):
        raise degenerate("The invariants are functionally dependent in "
                         f"{', '.join(str(v) for v in free)}")
    fields = []
    for s in checked:
        rhs = sympy.Matrix([-sympy.diff(f, ctx.coordinate(s)) for f in invariants])
        solution = []
        for c in range(len(free)):
            replaced = jacobian.copy()
            replaced[:, c] = rhs
            solution.append(normalize(replaced.det(method="berkowitz") / det))
        xi = [S.Zero] * ctx.n
        xi[s] = S.One
        for value, v in zip(solution[:-1], free[:-1]):
            xi[ctx.coordinate_names.index(v.name)] = value
        fields.append(VectorField(tuple(xi), solution[-1]))
    return VFModule(tuple(fields), ctx)


def _checked_directions(checked, ctx):
    if isinstance(checked, int):
        return tuple(range(checked))
    return tuple(checked)


def phi_family_member(phi, ctx, checked=1, variant="involutive", xi=()):
    """
    Member of the family of modules parameterized by `phi`.

    Args:
        phi: Function of (x, u) with `phi_u != 0`.
        ctx (JetContext): Coordinates.
        checked (int | Sequence[int]): Split p (first p coordinates) or the directions.
        variant (str): "involutive" for `<d_s - (phi_s/phi_u) d_u>`, "special" for the
            single field `d_1 + u d_2 + xi^3 d_3 + ... + theta d_u` with `theta` chosen
            so that the field annihilates `phi`.
        xi (Sequence): Coefficients `xi^3..xi^n` of the special variant.

    Raises:
        DegenerateInvariant: If `phi_u` vanishes identically.
    """
    phi = normalize(phi)
    if is_zero(sympy.diff(phi, U)):
        raise DegenerateInvariant(f"The invariant {print_expr(phi)} does not depend on u")
    if variant == "special":
        if ctx.n < 2:
            raise InvalidRequest("The special family needs at least two independent variables")
        xi = tuple(xi) + (S.Zero,) * (ctx.n - 2 - len(tuple(xi)))
        direction = VectorField((S.One, U) + xi, S.Zero)
        theta = -apply_field(direction, phi, ctx) / sympy.diff(phi, U)
        return VFModule((VectorField(direction.xi, theta),), ctx)
    if variant != "involutive":
        raise InvalidRequest(f"Unknown family variant {variant!r}")
    checked = _checked_directions(checked, ctx)
    invariants = [ctx.coordinate(i) for i in range(ctx.n) if i not in checked] + [phi]
    return annihilator_module(invariants, checked, ctx)


def pushforward(vector_field, X, U_new, ctx, inverse=None):
    """
    Push `vector_field` forward by `(x, u) -> (X(x, u), U(x, u))`.

    The new coordinates reuse the names of the old ones. `inverse` maps each old
    coordinate symbol and `u` to its expression in the new coordinates.

    Raises:
        MissingInverse: If the image depends on (x, u) and no inverse is given.
    """
    xi = [apply_field(vector_field, x, ctx) for x in X]
    eta = apply_field(vector_field, U_new, ctx)
    coefficients = xi + [eta]
    if inverse is None:
        variables = ctx.coordinates + (U,)
        if any(depends_on(c, v) for c in coefficients for v in variables):
            raise MissingInverse("The image depends on (x, u); supply the inverse map")
        return VectorField(tuple(xi), eta)
    return VectorField(tuple(substitute(c, inverse) for c in xi), substitute(eta, inverse))


def flat_jet_values(etas, ctx, alphas, directions=None):
    """
    Values `h^alpha = X_i h^{alpha - delta_i}` with `X_i = d_i + eta^i d_u`, `h^0 = u`.

    `i` is the first direction in which `alpha` is nonzero. The values are the
    derivatives of u on the manifold of an involutive module with fields `X_i`.

    Args:
        etas (Sequence): `eta^i`, aligned with `directions`.
        ctx (JetContext): Coordinates.
        alphas (Iterable[MultiIndex]): Requested multi-indices, zero outside `directions`.
        directions (Sequence[int], optional): Directions of the fields; all by default.

    Returns:
        dict[MultiIndex, sympy.Expr]: `h^alpha` for every requested alpha.
    """
    directions = tuple(range(ctx.n)) if directions is None else tuple(directions)
    coefficient = dict(zip(directions, etas))
    memo = {MultiIndex.zero(ctx.n): U}

    def value(alpha):
        if alpha not in memo:
            i = alpha.first_nonzero()
            if i not in coefficient:
                raise InvalidRequest(f"Multi-index {alpha} differentiates outside "
                                     f"{directions}")
            lower = value(alpha.lowered(i))
            memo[alpha] = normalize(sympy.diff(lower, ctx.coordinate(i))
                                    + coefficient[i] * sympy.diff(lower, U))
        return memo[alpha]

    return {alpha: value(alpha) for alpha in alphas}
