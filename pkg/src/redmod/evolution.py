"""
Determining systems of reduction modules for evolution equations `u_t = H` and
for equations of co-order one in a distinguished variable.

For an evolution equation the modules `<d_s + eta^s d_u>` over the spatial
directions fix every spatial derivative of u as a function of (t, x, u); `H`
becomes `H_tilde(t, x, u)` and the module is a reduction module exactly when
the invariance residuals vanish.

Functions:
- tilde_H(E, etas): `H` on the module.
- determining_system_evolution(E, etas): Involutivity and invariance residuals.
- phi_residual_evolution(E, phi): Single residual of the family of an invariant.
- phi_from_affine_family(g, h): Invariant of the family `u = kappa*g + h`.
- tilde_extension(E, etas): The module extended by `d_t + H_tilde d_u`, three verdicts.
- coorder1_G(L, phi, ctx, hat): `G` with `u_hat = G(x, u)` on the family module.
- coorder1_determining(L, phi, ctx, hat): Residual and determining system of co-order one.
"""
from dataclasses import dataclass, field
import itertools
import logging

import sympy
from sympy import S

from redmod.errors import (DegenerateInvariant, InternalError, InvalidRequest, NotEvolutionEquation,
                           NotInvolutive, NotSolvable, SingularPhi)
from redmod.expr import affine_split, is_zero, normalize, print_expr, substitute
from redmod.jet import U, MultiIndex, jet_symbol, jet_variables, multi_index_of, order_of
from redmod.manifold import build_rewrites, family_reduced_function
from redmod.reduction import conditional_invariance_check
from redmod.vfmod import (CanonicalModule, VFModule, VectorField, apply_field, flat_jet_values,
                          is_involutive)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolutionEquation:
    """
    `u_t = H(t, x, u, spatial derivatives of u)` of order at least two.

    Attributes:
        H: Right-hand side; must not involve derivatives in t.
        ctx (JetContext): Context with a time variable in direction 0.
    """
    H: object
    ctx: object

    def __post_init__(self):
        if not self.ctx.time_alias:
            raise NotEvolutionEquation("Evolution equations need a context with a time variable")
        H = normalize(self.H)
        for v in jet_variables(H):
            if multi_index_of(v).entries[0]:
                raise NotEvolutionEquation(f"Right-hand side depends on {v}, a derivative in t")
        if order_of(H) < 2:
            raise NotEvolutionEquation(f"Right-hand side {print_expr(H)} has order below two")
        object.__setattr__(self, "H", H)

    @property
    def u_t(self):
        return jet_symbol(MultiIndex.unit(self.ctx.n, 0))

    @property
    def L(self):
        return normalize(self.u_t - self.H)

    @property
    def spatial(self):
        return self.ctx.spatial_directions

    @classmethod
    def from_equation(cls, L, ctx):
        """Solve `L = 0` for `u_t`."""
        if not ctx.time_alias:
            raise NotEvolutionEquation("Evolution equations need a context with a time variable")
        u_t = jet_symbol(MultiIndex.unit(ctx.n, 0))
        split = affine_split(L, u_t)
        if split is None or is_zero(split[0]):
            raise NotEvolutionEquation(f"{print_expr(L)} cannot be solved for u_t")
        return cls(normalize(-split[1] / split[0]), ctx)


@dataclass
class DeterminingSystem:
    """
    Residuals of the determining equations of one module.

    `involutivity` holds one residual per pair of spatial directions (empty when the
    module is involutive by construction) and `invariance` one per direction.
    `tilde` is `H_tilde` for evolution equations and `G` in the co-order one case.
    """
    kind: str
    etas: list
    tilde: object
    involutivity: list = field(default_factory=list)
    invariance: list = field(default_factory=list)

    @property
    def involutive(self):
        return all(is_zero(r) for r in self.involutivity)

    @property
    def is_reduction_module(self):
        return self.involutive and all(is_zero(r) for r in self.invariance)

    def to_dict(self):
        return {
            "kind": self.kind,
            "etas": [print_expr(e) for e in self.etas],
            "tilde": print_expr(self.tilde),
            "residuals": ([{"tag": "involutivity", "expr": print_expr(r)} for r in self.involutivity]
                          + [{"tag": "invariance", "expr": print_expr(r)}
                             for r in self.invariance]),
            "is_reduction_module": self.is_reduction_module,
        }


def _check_etas(etas, ctx, directions):
    etas = [normalize(e) for e in etas]
    if len(etas) != len(directions):
        raise InvalidRequest(f"Expected {len(directions)} coefficients eta, got {len(etas)}")
    for e in etas:
        if jet_variables(e):
            raise InvalidRequest(f"Coefficient {print_expr(e)} depends on derivatives of u")
    return etas


def involutivity_residuals(etas, ctx, directions):
    """`eta^s_{s'} + eta^{s'} eta^s_u - eta^{s'}_s - eta^s eta^{s'}_u` for every pair s < s'."""
    coefficient = dict(zip(directions, etas))
    residuals = []
    for s, t in itertools.combinations(directions, 2):
        a, b = coefficient[s], coefficient[t]
        residuals.append(normalize(sympy.diff(a, ctx.coordinate(t)) + b * sympy.diff(a, U)
                                   - sympy.diff(b, ctx.coordinate(s)) - a * sympy.diff(b, U)))
    return residuals


def invariance_residuals(etas, tilde, ctx, directions, along):
    """`eta^s_a + tilde eta^s_u - tilde_s - eta^s tilde_u` with `a` the direction `along`."""
    x_a = ctx.coordinate(along)
    return [normalize(sympy.diff(eta, x_a) + tilde * sympy.diff(eta, U)
                      - sympy.diff(tilde, ctx.coordinate(s)) - eta * sympy.diff(tilde, U))
            for s, eta in zip(directions, etas)]


def _on_module(H, etas, ctx, directions):
    alphas = [multi_index_of(v) for v in jet_variables(H)]
    values = flat_jet_values(etas, ctx, alphas, directions=directions)
    return substitute(H, {jet_symbol(a): values[a] for a in alphas})


def tilde_H(E, etas, check=True):
    """
    `H` with every spatial derivative of u replaced by its value on the module.

    Raises:
        NotInvolutive: If `check` is set and the module of `etas` is not involutive.
    """
    etas = _check_etas(etas, E.ctx, E.spatial)
    if check:
        residuals = involutivity_residuals(etas, E.ctx, E.spatial)
        if not all(is_zero(r) for r in residuals):
            raise NotInvolutive("The coefficients eta do not define an involutive module",
                                [r for r in residuals if not is_zero(r)])
    return _on_module(E.H, etas, E.ctx, E.spatial)


def determining_system_evolution(E, etas):
    """
    Involutivity and invariance residuals of `<d_s + eta^s d_u>` for `u_t = H`.

    Residuals are reported even when they do not vanish; when the module is not
    involutive `H_tilde` is taken along the first nonzero direction of each derivative.
    """
    etas = _check_etas(etas, E.ctx, E.spatial)
    involutivity = involutivity_residuals(etas, E.ctx, E.spatial)
    if not all(is_zero(r) for r in involutivity):
        logger.warning("Module is not involutive; invariance residuals depend on the "
                       "elimination order")
    tilde = tilde_H(E, etas, check=False)
    invariance = invariance_residuals(etas, tilde, E.ctx, E.spatial, 0)
    return DeterminingSystem("evolution", etas, tilde, involutivity, invariance)


@dataclass
class PhiResidual:
    """
    Normalized residual of the family of an invariant `phi`.

    The family is a reduction module when the residual vanishes or when every
    basis field annihilates it; in the latter case it depends on the invariant pair
    only and a reparameterization `chi` of `phi` absorbs it.
    """
    phi: object
    residual: object
    cross_check: list
    system: DeterminingSystem
    chi_repairable: bool

    @property
    def is_reduction_module(self):
        return is_zero(self.residual) or self.chi_repairable

    def to_dict(self):
        return {
            "phi": print_expr(self.phi),
            "residual": print_expr(self.residual),
            "cross_check": [print_expr(c) for c in self.cross_check],
            "chi_repairable": self.chi_repairable,
            "is_reduction_module": self.is_reduction_module,
            "system": self.system.to_dict(),
        }


def _family_etas(phi, ctx, directions):
    phi_u = sympy.diff(phi, U)
    if is_zero(phi_u):
        raise DegenerateInvariant(f"The invariant {print_expr(phi)} does not depend on u")
    return phi_u, [normalize(-sympy.diff(phi, ctx.coordinate(s)) / phi_u) for s in directions]


def _phi_residual(phi, phi_u, residual, system, ctx, directions):
    fields = [VectorField(tuple(S.One if i == s else S.Zero for i in range(ctx.n)), eta)
              for s, eta in zip(directions, system.etas)]
    images = [apply_field(v, residual, ctx) for v in fields]
    cross_check = [normalize(image / phi_u) for image in images]
    for c, r in zip(cross_check, system.invariance):
        if not is_zero(c + r):
            raise InternalError(f"Residual of {print_expr(phi)} and its determining system "
                                "disagree")
    repairable = not is_zero(residual) and all(is_zero(image) for image in images)
    if repairable:
        logger.warning("Residual %s of %s depends on the invariant pair only; repaired by "
                       "reparameterizing the invariant", print_expr(residual), print_expr(phi))
    return PhiResidual(phi, residual, cross_check, system, repairable)


def phi_residual_evolution(E, phi):
    """
    Residual `phi_t + phi_u H_phi` of the invariant `phi` for `u_t = H`.

    `H_phi` is `H_tilde` for `eta^s = -phi_s/phi_u`. The cross-check list holds
    `(1/phi_u)(d_s + eta^s d_u)` of the residual, which equals minus the invariance
    residuals.

    Raises:
        DegenerateInvariant: If `phi_u` vanishes.
    """
    ctx = E.ctx
    phi = normalize(phi)
    phi_u, etas = _family_etas(phi, ctx, E.spatial)
    system = determining_system_evolution(E, etas)
    residual = normalize(sympy.diff(phi, ctx.coordinate(0)) + phi_u * system.tilde)
    return _phi_residual(phi, phi_u, residual, system, ctx, E.spatial)


def phi_from_affine_family(g, h):
    """Invariant `(u - h)/g` of the family `u = kappa*g + h`."""
    g = normalize(g)
    if is_zero(g):
        raise InvalidRequest("The family u = kappa*g + h needs a nonzero g")
    return normalize((U - h) / g)


@dataclass
class TildeExtension:
    """
    The module `<d_t + H_tilde d_u, d_s + eta^s d_u>` with three verdicts that must agree:
    the criterion for the spatial module, the involutivity of the extension and the
    ultra-singularity of `u_t - H` on it (consistent rewrite rules that annihilate it).
    """
    module: VFModule
    tilde: object
    criterion: bool | None
    involutive: bool
    ultra: bool
    rule_differences: list = field(default_factory=list)

    def to_dict(self):
        return {
            "module": self.module.to_dict(),
            "tilde": print_expr(self.tilde),
            "criterion": self.criterion,
            "involutive": self.involutive,
            "ultra": self.ultra,
            "rule_differences": [print_expr(d) for d in self.rule_differences],
        }


def tilde_extension(E, etas):
    """
    Extend the spatial module of `etas` by `d_t + H_tilde d_u` and compare the verdicts.

    Raises:
        NotInvolutive: If the spatial module is not involutive.
        InternalError: If the three verdicts disagree.
    """
    ctx = E.ctx
    etas = _check_etas(etas, ctx, E.spatial)
    tilde = tilde_H(E, etas)
    unit = [tuple(S.One if i == s else S.Zero for i in range(ctx.n)) for s in range(ctx.n)]
    spatial = VFModule(tuple(VectorField(unit[s], eta) for s, eta in zip(E.spatial, etas)), ctx)
    extended = VFModule((VectorField(unit[0], tilde),) + spatial.basis, ctx)

    criterion = conditional_invariance_check(E.L, spatial).is_reduction_module
    involutive = is_involutive(extended)
    canonical = CanonicalModule(tuple(range(ctx.n)), (), tuple(() for _ in range(ctx.n)),
                                (tilde,) + tuple(etas), ctx)
    r = max(order_of(E.L), 2)
    first = build_rewrites(canonical, r, "first")
    last = build_rewrites(canonical, r, "last")
    differences = [normalize(first.rules[a] - last.rules[a]) for a in first.rules]
    differences = [d for d in differences if not is_zero(d)]
    ultra = not differences and is_zero(first.reduce(E.L))

    if not criterion == involutive == ultra:
        raise InternalError(f"Verdicts disagree: criterion {criterion}, involutive {involutive}, "
                            f"ultra-singular {ultra}")
    return TildeExtension(extended, tilde, criterion, involutive, ultra, differences)


def _coorder1_directions(ctx, hat):
    hat = ctx.n - 1 if hat is None else hat
    if not 0 <= hat < ctx.n:
        raise InvalidRequest(f"Direction {hat} is outside 0..{ctx.n - 1}")
    return hat, tuple(i for i in range(ctx.n) if i != hat)


def coorder1_G(L, phi, ctx, hat=None):
    """
    Solve the family-reduced function of co-order one for the hat derivative.

    Args:
        L: Function of hat order one.
        phi: Invariant with `phi_u != 0`.
        ctx (JetContext): Coordinates.
        hat (int, optional): The distinguished direction, the last one by default.

    Returns:
        sympy.Expr: `G(x, u)` with the reduced function vanishing at `u_hat = G`.

    Raises:
        SingularPhi: If the reduced function does not depend on `u_hat`.
        NotSolvable: If `u_hat` cannot be isolated uniquely.
    """
    hat, checked = _coorder1_directions(ctx, hat)
    reduced = family_reduced_function(L, phi, checked, 1, ctx)
    v = jet_symbol(MultiIndex.unit(ctx.n, hat))
    if is_zero(sympy.diff(reduced, v)):
        raise SingularPhi(f"The reduced function {print_expr(reduced)} does not depend on {v}")
    split = affine_split(reduced, v)
    if split is not None:
        G = normalize(-split[1] / split[0])
    else:
        solutions = sympy.solve(reduced, v, dict=False)
        if len(solutions) != 1:
            raise NotSolvable(f"{print_expr(reduced)} = 0 has {len(solutions)} solutions for {v}")
        G = normalize(solutions[0])
    if jet_variables(G) or not is_zero(substitute(reduced, {v: G})):
        raise NotSolvable(f"Could not isolate {v} in {print_expr(reduced)}")
    return G


def coorder1_determining(L, phi, ctx, hat=None):
    """
    Residual `phi_hat + phi_u G` and the invariance residuals
    `eta^s_hat + eta^s_u G - G_s - eta^s G_u` of the family of `phi`.
    """
    hat, checked = _coorder1_directions(ctx, hat)
    phi = normalize(phi)
    phi_u, etas = _family_etas(phi, ctx, checked)
    G = coorder1_G(L, phi, ctx, hat)
    invariance = invariance_residuals(etas, G, ctx, checked, hat)
    system = DeterminingSystem("coorder1", etas, G, [], invariance)
    residual = normalize(sympy.diff(phi, ctx.coordinate(hat)) + phi_u * G)
    return _phi_residual(phi, phi_u, residual, system, ctx, checked)
