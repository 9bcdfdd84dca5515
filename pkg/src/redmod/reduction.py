"""
Reduction modules: the conditional invariance criterion, reduced equations of
shift modules and the reduction of an equation to an algebraic one by a module
of full dimension.

Functions:
- conditional_invariance_check(L, module): Verdict of the criterion.
- reduce_shift_module(L, ctx, p, directions): Reduced equation of a shift module.
- is_solution(L, f, ctx): Whether `u = f(x)` solves `L = 0`.
- ndim_reduce(L, phi, ctx, inverse): `L` on the n-dimensional module of `phi`.
- ultra_module_from_family(L, phi, ctx): Module of a solution family with its verdict.
"""
from dataclasses import dataclass, field
import logging

import sympy
from sympy import S, Symbol

from redmod.errors import (InvalidRequest, LeadingSolveFailed, NotReductionModule,
                           SingularSubstitution)
from redmod.expr import (ExpAtom, affine_split, depends_on, divides, factor_nonvanishing,
                         is_zero, normalize, polynomial_coefficients, print_expr,
                         squarefree_factors, substitute)
from redmod.jet import (JetContext, MultiIndex, U, apply_prolongation, jet_symbol,
                        jet_variables, multi_index_of, order_of)
from redmod.manifold import module_rewrites
from redmod.vfmod import VFModule, VectorField, apply_field, flat_jet_values, phi_family_member

logger = logging.getLogger(__name__)

KAPPA = Symbol("kappa")

# Values tried for every coordinate when reading zeta off the solution family.
BASE_POINTS = (0, 1, 2, -1)


@dataclass
class ReductionVerdict:
    """
    Outcome of the conditional invariance criterion.

    `status` is "yes", "no", "unknown" (the restriction to the equation could not
    be carried out) or "empty" (the equation does not meet the manifold of the
    module at generic points, so the criterion holds vacuously).
    """
    status: str
    residuals: list
    associated_function: object = S.Zero
    leading_solve: str | None = None
    notes: list = field(default_factory=list)

    @property
    def is_reduction_module(self):
        if self.status == "unknown":
            return None
        return self.status in ("yes", "empty")

    def to_dict(self):
        return {
            "is_reduction_module": self.is_reduction_module,
            "status": self.status,
            "residuals": [print_expr(r) for r in self.residuals],
            "associated_function": print_expr(self.associated_function),
            "leading_solve": self.leading_solve,
            "notes": list(self.notes),
        }


def _restrict_by_solve(reduced, residuals):
    """Solve `reduced = 0` for a top-order derivative and substitute into `residuals`."""
    top = order_of(reduced)
    candidates = [v for v in jet_variables(reduced) if multi_index_of(v).order == top]
    if top == 0:
        candidates = [U]
    for v in reversed(candidates):
        split = affine_split(reduced, v)
        if split is None or is_zero(split[0]):
            continue
        solution = normalize(-split[1] / split[0])
        try:
            restricted = [substitute(r, {v: solution}) for r in residuals]
        except SingularSubstitution:
            logger.debug("Solving for %s hits a pole, trying the next derivative", v)
            continue
        return f"{v} = {print_expr(solution)}", restricted
    return None, None


def _restrict_by_division(reduced, residuals, nonzero):
    """Residuals vanish on `reduced = 0` when divisible by the radical of its core."""
    _, core = factor_nonvanishing(reduced, nonzero)
    radical = S.One
    for factor, _ in squarefree_factors(core):
        radical *= factor
    return all(divides(radical, r) for r in residuals)


def conditional_invariance_check(L, module, strict=False):
    """
    Check the conditional invariance criterion of `L` for `module`.

    Every basis field is prolonged and applied to `L`; the result is restricted
    to the manifold of the module through its rewrite system and then to the
    equation `L = 0`, by solving the associated function for a top-order derivative
    in which it is affine or, failing that, by exact division.

    Args:
        L: Differential function defining the equation.
        module (VFModule): Involutive module satisfying the rank condition.
        strict (bool): Raise instead of returning an "unknown" verdict.

    Returns:
        ReductionVerdict: The verdict with the restricted residuals.

    Raises:
        RankDeficient: If the rank condition fails.
        NotInvolutive: If the module is not involutive.
        LeadingSolveFailed: In strict mode, when the restriction to `L = 0` fails.
    """
    L = normalize(L)
    ctx = module.ctx
    rewrites = module_rewrites(L, module)
    reduced = rewrites.reduce(L)
    residuals = [rewrites.reduce(apply_prolongation(v, L, ctx)) for v in module.basis]
    if is_zero(reduced):
        status = "yes" if all(is_zero(r) for r in residuals) else "no"
        return ReductionVerdict(status, residuals, reduced,
                                notes=["the module is ultra-singular"])
    if not jet_variables(reduced) and not depends_on(reduced, U):
        if any(depends_on(reduced, x) for x in ctx.coordinates):
            notes = ["the associated function depends on x only"]
        else:
            notes = ["the associated function is a nonzero constant"]
        return ReductionVerdict("empty", residuals, reduced, notes=notes)
    leading, restricted = _restrict_by_solve(reduced, residuals)
    if leading is not None:
        status = "yes" if all(is_zero(r) for r in restricted) else "no"
        return ReductionVerdict(status, restricted, reduced, leading_solve=leading)
    if _restrict_by_division(reduced, residuals, ctx.nonzero_symbols):
        return ReductionVerdict("yes", [S.Zero] * len(residuals), reduced,
                                leading_solve="exact division by the associated function")
    message = "The associated function is not affine in a top-order derivative and does " \
              "not divide the residuals"
    if strict:
        raise LeadingSolveFailed(message)
    logger.warning("%s; verdict unknown", message)
    return ReductionVerdict("unknown", residuals, reduced, notes=[message])


@dataclass
class ShiftReduction:
    """
    Reduced equation of a shift module `<d_s, s in directions>`.

    `equation` lives in `reduced_ctx`, whose coordinates are the remaining ones
    (None when every direction is shifted and the equation is algebraic in u).
    `system` holds the equations obtained by splitting with respect to shifted
    coordinates that still occur explicitly; it is `[equation]` otherwise.
    """
    directions: tuple
    reduced_ctx: JetContext | None
    equation: object
    system: list
    verdict: ReductionVerdict
    split: bool = False

    @property
    def order(self):
        return order_of(self.equation)

    def to_dict(self):
        return {
            "directions": list(self.directions),
            "coordinates": list(self.reduced_ctx.coordinate_names) if self.reduced_ctx else [],
            "equation": print_expr(self.equation),
            "system": [print_expr(e) for e in self.system],
            "split": self.split,
            "order": self.order,
            "verdict": self.verdict.to_dict(),
        }


def shift_module(directions, ctx):
    """The module `<d_s, s in directions>`."""
    return VFModule(tuple(VectorField.shift(ctx.n, s) for s in directions), ctx)


def reduce_shift_module(L, ctx, p=None, directions=None):
    """
    Reduce `L` by the ansatz of a shift module.

    Args:
        L: Differential function.
        ctx (JetContext): Coordinates.
        p (int, optional): Shift the first p coordinates.
        directions (Sequence[int], optional): Shifted coordinates, instead of `p`.

    Returns:
        ShiftReduction: The reduced equation in the remaining coordinates.

    Raises:
        NotReductionModule: If the shift module is not a reduction module of `L`.
    """
    if directions is None:
        if p is None:
            raise InvalidRequest("Either p or the shifted directions are required")
        directions = tuple(range(p))
    directions = tuple(sorted(directions))
    verdict = conditional_invariance_check(L, shift_module(directions, ctx))
    if verdict.is_reduction_module is False:
        raise NotReductionModule(f"<{', '.join('d_' + ctx.coordinate_names[s] for s in directions)}> "
                                 "is not a reduction module: "
                                 f"{', '.join(print_expr(r) for r in verdict.residuals)}")
    if verdict.is_reduction_module is None:
        logger.warning("Reducing although the criterion could not be verified")
    reduced = verdict.associated_function
    hat = tuple(i for i in range(ctx.n) if i not in directions)
    reduced_ctx = None
    if hat:
        reduced_ctx = JetContext(n=len(hat), r=ctx.r, symbols=ctx.symbols, r_max=ctx.r_max,
                                 coord_names=tuple(ctx.coordinate_names[i] for i in hat))
        bindings = {}
        for v in jet_variables(reduced):
            alpha = multi_index_of(v)
            bindings[v] = jet_symbol(MultiIndex(alpha.part(hat)))
        reduced = substitute(reduced, bindings)
    explicit = [ctx.coordinate(s) for s in directions if depends_on(reduced, ctx.coordinate(s))]
    system = [reduced]
    split = False
    if explicit:
        coefficients = polynomial_coefficients(reduced, explicit)
        if coefficients is None:
            verdict.notes.append("the reduced equation depends on shifted coordinates "
                                 "non-polynomially")
        else:
            system = [c for _, c in sorted(coefficients.items())]
            split = True
    return ShiftReduction(directions, reduced_ctx, reduced, system, verdict, split)


def is_solution(L, f, ctx):
    """
    Whether `u = f(x)` solves `L = 0`.

    Raises:
        InvalidRequest: If `f` depends on u or its derivatives.
    """
    f = normalize(f)
    if depends_on(f, U) or jet_variables(f):
        raise InvalidRequest(f"{print_expr(f)} must be a function of x only")
    L = normalize(L)
    bindings = {U: f}
    for v in jet_variables(L):
        alpha = multi_index_of(v)
        derivative = f
        for i, count in enumerate(alpha.entries):
            if count:
                derivative = sympy.diff(derivative, ctx.coordinate(i), count)
        bindings[v] = normalize(derivative)
    return is_zero(substitute(L, bindings))


@dataclass
class AlgebraicReduction:
    """
    `L` on the n-dimensional module of an invariant `phi`.

    `l_phi` is `L` with every derivative replaced by its value on the module. When
    `zeta` is set, `l_phi == multiplier * zeta(phi)` holds identically, `zeta` being
    written in the invariant variable `kappa`.
    """
    phi: object
    l_phi: object
    residuals: list
    hadamard: bool
    multiplier: object = None
    zeta: object = None
    notes: list = field(default_factory=list)

    @property
    def ultra(self):
        return is_zero(self.l_phi)

    @property
    def separable(self):
        return self.zeta is not None

    def to_dict(self):
        return {
            "phi": print_expr(self.phi),
            "l_phi": print_expr(self.l_phi),
            "ultra": self.ultra,
            "residuals": [print_expr(r) for r in self.residuals],
            "hadamard": self.hadamard,
            "separable": self.separable,
            "multiplier": print_expr(self.multiplier) if self.multiplier is not None else None,
            "zeta": print_expr(self.zeta) if self.zeta is not None else None,
            "notes": list(self.notes),
        }


def _on_family(L, phi, ctx):
    module = phi_family_member(phi, ctx, ctx.n)
    etas = [v.eta for v in module.basis]
    L = normalize(L)
    alphas = [multi_index_of(v) for v in jet_variables(L)]
    values = flat_jet_values(etas, ctx, alphas)
    return module, substitute(L, {jet_symbol(a): values[a] for a in alphas})


def _invert_at(phi0, inverse0):
    """Solutions `u(kappa)` of `phi0(u) = kappa`, rational in kappa."""
    if inverse0 is not None:
        return [inverse0] if is_zero(substitute(phi0, {U: inverse0}) - KAPPA) else []
    try:
        solutions = sympy.solve(sympy.sympify(phi0).replace(ExpAtom, sympy.exp) - KAPPA, U)
    except (NotImplementedError, sympy.PolynomialError):
        return []
    return [normalize(s) for s in solutions
            if s.is_rational_function(KAPPA) and not s.has(sympy.exp, sympy.log, sympy.E)]


def _zeta_at_base_point(result, ctx, inverse):
    """`zeta` read off the reduced function at the first base point without poles."""
    for value in BASE_POINTS:
        point = {x: S(value) for x in ctx.coordinates}
        try:
            phi0 = substitute(result.phi, point)
            l0 = substitute(result.l_phi, point)
            inverse0 = substitute(inverse, point) if inverse is not None else None
            for u_of_kappa in _invert_at(phi0, inverse0):
                return substitute(l0, {U: u_of_kappa})
        except SingularSubstitution:
            continue
    return None


def _separate(result, ctx, inverse):
    """Recover `zeta` and a nonvanishing multiplier with `l_phi == multiplier * zeta(phi)`."""
    zeta = _zeta_at_base_point(result, ctx, inverse)
    if zeta is None or is_zero(zeta):
        if inverse is not None and zeta is None:
            result.notes.append("the supplied family does not invert phi")
        result.notes.append("separation candidate, multiplier not recovered")
        return result
    try:
        multiplier = normalize(result.l_phi / substitute(zeta, {KAPPA: result.phi}))
    except SingularSubstitution:
        result.notes.append("separation candidate, multiplier not recovered")
        return result
    _, core = factor_nonvanishing(multiplier, ctx.nonzero_symbols)
    if any(depends_on(core, v) for v in ctx.coordinates + (U,)):
        result.notes.append("separation candidate, multiplier not recovered")
        return result
    result.multiplier, result.zeta = multiplier, zeta
    return result


def ndim_reduce(L, phi, ctx, inverse=None):
    """
    Reduce `L = 0` to an algebraic equation in the invariant `phi`.

    The module `<d_s - (phi_s/phi_u) d_u>` of dimension n fixes every derivative of u
    as a function of (x, u). The reduced function separates as
    `multiplier * zeta(phi)`, the multiplier nonvanishing, when every basis field maps
    it to a multiple of itself. `zeta` is read off at a base point of x, where `phi`
    is inverted through `inverse`, the solution family `u = f(x, kappa)`, or by
    solving for u.

    Raises:
        DegenerateInvariant: If `phi_u` vanishes.
    """
    phi = normalize(phi)
    module, l_phi = _on_family(L, phi, ctx)
    residuals = [apply_field(v, l_phi, ctx) for v in module.basis]
    hadamard = all(divides(l_phi, r) for r in residuals)
    result = AlgebraicReduction(phi, l_phi, residuals, hadamard)
    if is_zero(l_phi):
        result.multiplier, result.zeta = S.One, S.Zero
        result.notes.append("ultra-singular: every member of the family solves the equation")
        return result
    if not hadamard:
        result.notes.append("not separable: the basis fields do not map the reduced "
                            "function to multiples of itself")
        return result
    if not any(depends_on(l_phi, v) for v in ctx.coordinates + (U,)):
        result.multiplier, result.zeta = S.One, l_phi
        result.notes.append("the reduced function is a nonzero constant: no invariant solutions")
        return result
    return _separate(result, ctx, normalize(inverse) if inverse is not None else None)


def ultra_module_from_family(L, phi, ctx):
    """
    The n-dimensional module of the family `phi = kappa` and whether `L` is
    ultra-singular on it, which holds exactly when the family solves `L = 0`.

    Raises:
        DegenerateInvariant: If `phi_u` vanishes.
    """
    module, l_phi = _on_family(L, normalize(phi), ctx)
    ultra = is_zero(l_phi)
    notes = [] if ultra else ["the family is not a family of solutions"]
    return module, ReductionVerdict("yes" if ultra else "no", [l_phi], l_phi,
                                    leading_solve=None, notes=notes)
