"""
The manifold cut out by a module in jet space and the singularity co-orders of
differential functions on it.

The manifold is realized as a rewrite system: every derivative with a nonzero
checked part is replaced by an expression in x, u and hat derivatives.

Functions:
- build_rewrites(canonical, r, strategy): Rewrite system of order r.
- associated_function(L, rewrites): Restriction of L to the manifold.
- strong_coorder(L, module): Strong singularity co-order.
- weak_coorder(L, module): Weak singularity co-order with its multiplier.
- classify(L, module): Both co-orders in one report.
- meta_singularity_coorder(L, checked, ctx, variant): Hat order of the reduced form.
- family_reduced_function(L, phi, checked, k, ctx, variant): L on the module of phi.
- submaximal_residuals(L, phi, checked, k, ctx): Conditions for a lower co-order.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import logging

import sympy
from sympy import S, Symbol

from redmod.errors import (ChangeOfJetCoordinatesFailed, InvalidRequest, NotInReducedForm,
                           NotInvolutive, NotMetaSingular)
from redmod.expr import (affine_split, depends_on, factor_nonvanishing, is_zero, normalize,
                         print_expr, squarefree_factors, substitute)
from redmod.jet import (MultiIndex, U, jet_symbol, jet_variables, multi_index_of, multi_indices,
                        order_of, total_derivative)
from redmod.settings import get_settings
from redmod.vfmod import (canonical_basis, commutator, flat_jet_values, is_involutive,
                          phi_family_member)

logger = logging.getLogger(__name__)

STRATEGIES = ("first", "last")


@dataclass(frozen=True, eq=False)
class RewriteSystem:
    """
    Rules `u_alpha -> E_alpha` for every alpha with a nonzero checked part.

    Attributes:
        canonical (CanonicalModule): The module the rules realize.
        order (int): Highest |alpha| covered.
        strategy (str): Checked direction used for rules of check-weight two or more.
        rules (dict[MultiIndex, sympy.Expr]): Right-hand sides in x, u and hat derivatives.
    """
    canonical: object
    order: int
    strategy: str
    rules: dict = field(default_factory=dict)

    @property
    def checked(self):
        return self.canonical.checked

    @property
    def hat(self):
        return self.canonical.hat

    def is_checked(self, alpha):
        return alpha.part_order(self.checked) > 0

    def reduce(self, e):
        """Replace every checked derivative of `e` by its rule, extending the order if needed."""
        e = normalize(e)
        bindings = {}
        rules = self.rules
        for v in jet_variables(e):
            alpha = multi_index_of(v)
            if not self.is_checked(alpha):
                continue
            if alpha.order > self.order:
                rules = build_rewrites(self.canonical, alpha.order, self.strategy).rules
            bindings[v] = rules[alpha]
        return substitute(e, bindings)


def _rule_key(checked):
    def key(alpha):
        return (alpha.order, alpha.part_order(checked), alpha.sort_key())
    return key


def build_rewrites(canonical, r, strategy="first"):
    """
    Build the rules of order up to `r` for a canonical module.

    Results are cached per active `Settings`, so caps changed by `override` apply.

    Rules of check-weight one are hat total derivatives of
    `u_s = eta_hat^s - xi_hat^{s,iota} u_iota`; rules of higher check-weight are
    `reduce(D_s E_{alpha - delta_s})` with `s` the first (or last) checked direction
    in which alpha is nonzero.

    Args:
        canonical (CanonicalModule): Module in canonical form.
        r (int): Highest derivative order.
        strategy (str): "first" or "last".

    Returns:
        RewriteSystem: The rules.

    Raises:
        ResourceLimit: If an expression or a derivative order exceeds its cap.
    """
    if strategy not in STRATEGIES:
        raise InvalidRequest(f"Unknown elimination strategy {strategy!r}")
    return _build_rewrites(canonical, r, strategy, get_settings())


@lru_cache(maxsize=256)
def _build_rewrites(canonical, r, strategy, settings):
    logger.debug("Building rewrite rules of order %s for checked directions %s "
                 "(%s, order cap %s)", r, canonical.checked, strategy, settings.max_jet_order)
    ctx = canonical.ctx
    checked, hat = canonical.checked, canonical.hat
    system = RewriteSystem(canonical, r, strategy)
    rules = system.rules
    targets = [alpha for alpha in multi_indices(ctx.n, r, min_order=1)
               if alpha.part_order(checked) > 0]
    for alpha in sorted(targets, key=_rule_key(checked)):
        weight = alpha.part_order(checked)
        if weight == 1 and alpha.order == 1:
            s = checked.index(alpha.first_nonzero(checked))
            value = canonical.eta_hat[s]
            for j, i in enumerate(hat):
                value -= canonical.xi_hat[s][j] * jet_symbol(MultiIndex.unit(ctx.n, i))
            rules[alpha] = normalize(value)
        elif weight == 1:
            i = alpha.first_nonzero(hat)
            rules[alpha] = total_derivative(rules[alpha.lowered(i)], i, ctx)
        else:
            directions = [s for s in checked if alpha.entries[s]]
            s = directions[0] if strategy == "first" else directions[-1]
            rules[alpha] = system.reduce(total_derivative(rules[alpha.lowered(s)], s, ctx))
    return system


def associated_function(L, rewrites):
    """`L` with every checked derivative replaced by its rule."""
    return rewrites.reduce(L)


@dataclass
class SingularityReport:
    """
    Co-orders of a differential function on a module.

    `strong_coorder` is -1 exactly when the module is ultra-singular and equals `order`
    when it is regular. `weak_exact` says whether `weak_coorder` is certified by the
    maximal rank test or only an upper bound.
    """
    order: int
    checked: tuple
    associated_function: object
    strong_coorder: int
    ultra: bool
    weak_coorder: int | None = None
    weak_multiplier: object = None
    weak_core: object = None
    maximal_rank_certificate: bool = False
    weak_exact: bool = False
    notes: list = field(default_factory=list)

    @property
    def regular(self):
        return self.strong_coorder == self.order

    def to_dict(self):
        data = {
            "order": self.order,
            "checked": list(self.checked),
            "associated_function": print_expr(self.associated_function),
            "strong_coorder": self.strong_coorder,
            "ultra": self.ultra,
            "regular": self.regular,
            "notes": list(self.notes),
        }
        if self.weak_coorder is not None:
            data.update({
                "weak_coorder": self.weak_coorder,
                "multiplier": print_expr(self.weak_multiplier),
                "weak_core": print_expr(self.weak_core),
                "maximal_rank_certificate": self.maximal_rank_certificate,
                "weak_exact": self.weak_exact,
            })
        return data


def _require_involutive(module):
    if module.dim == 1 or is_involutive(module):
        return
    residuals = [commutator(v, w, module.ctx) for i, v in enumerate(module.basis)
                 for w in module.basis[i + 1:]]
    raise NotInvolutive("The module is not closed under brackets",
                        [c for v in residuals for c in v.row if not is_zero(c)])


def module_rewrites(L, module, strategy="first"):
    """Canonical basis and rewrite system of `module` at the order of `L`."""
    canonical = canonical_basis(module)
    _require_involutive(module)
    r = max(order_of(L), 0)
    return build_rewrites(canonical, r, strategy)


def strong_coorder(L, module):
    """
    Strong singularity co-order of `module` for `L`.

    For modules of full dimension n the module is singular only when it is
    ultra-singular, so the co-order is -1 or the order of `L`.

    Raises:
        RankDeficient: If the rank condition fails.
        NotInvolutive: If the module is not involutive.
    """
    L = normalize(L)
    rewrites = module_rewrites(L, module)
    r = max(order_of(L), 0)
    reduced = associated_function(L, rewrites)
    ultra = is_zero(reduced)
    if ultra:
        coorder = -1
    elif module.dim == module.ctx.n:
        coorder = r
    else:
        coorder = order_of(reduced)
    return SingularityReport(order=r, checked=rewrites.checked, associated_function=reduced,
                             strong_coorder=coorder, ultra=ultra)


def _maximal_rank(core, hat, top):
    """Each irreducible factor of `core` is simple and depends on a top-order hat derivative."""
    factors = squarefree_factors(core)
    if not factors:
        return False
    for factor, multiplicity in factors:
        if multiplicity > 1:
            return False
        candidates = [v for v in jet_variables(factor)
                      if multi_index_of(v).order == top
                      and multi_index_of(v).part_order(hat) == top]
        if top == 0:
            candidates = [U] if U in factor.free_symbols else []
        if not any(depends_on(factor, v) for v in candidates):
            return False
    return True


def weak_coorder(L, module, report=None):
    """
    Weak singularity co-order of `module` for `L`.

    The associated function is split into a structurally nonvanishing multiplier and
    a core; the weak co-order is the order of the core. It is exact when the core is
    of maximal rank in a top-order derivative, otherwise an upper bound.
    """
    report = report or strong_coorder(L, module)
    if report.ultra:
        report.weak_coorder = -1
        report.weak_multiplier, report.weak_core = S.One, S.Zero
        report.maximal_rank_certificate = report.weak_exact = True
        return report
    ctx = module.ctx
    multiplier, core = factor_nonvanishing(report.associated_function, ctx.nonzero_symbols)
    report.weak_multiplier, report.weak_core = multiplier, core
    if module.dim == ctx.n:
        report.weak_coorder = report.strong_coorder
        report.weak_exact = True
        return report
    weak = order_of(core)
    hat = tuple(i for i in range(ctx.n) if i not in report.checked)
    report.weak_coorder = weak
    report.maximal_rank_certificate = _maximal_rank(core, hat, weak)
    report.weak_exact = report.maximal_rank_certificate
    if not report.weak_exact:
        logger.info("Weak co-order %s is an upper bound: no maximal rank certificate", weak)
        report.notes.append("weak co-order is an upper bound")
    return report


def classify(L, module):
    """Strong and weak co-orders of `module` for `L`."""
    return weak_coorder(L, module, strong_coorder(L, module))


def _checked_tuple(checked, n):
    if isinstance(checked, int):
        if not 0 < checked <= n:
            raise InvalidRequest(f"Split p={checked} is outside 1..{n}")
        return tuple(range(checked))
    return tuple(sorted(checked))


def _hat_tuple(checked, n):
    return tuple(i for i in range(n) if i not in checked)


def omega_values(alphas, ctx, xi=()):
    """
    Jet coordinates `w_alpha = D_hat^{alpha_hat} X^{alpha_1} u` of the special family.

    `X = D_1 + u D_2 + xi^3 D_3 + ... + xi^n D_n` and the hat directions are 2..n.
    """
    xi = tuple(xi) + (S.Zero,) * (ctx.n - 2 - len(tuple(xi)))
    weights = (S.One, U) + xi
    memo = {MultiIndex.zero(ctx.n): U}

    def value(alpha):
        if alpha not in memo:
            i = alpha.first_nonzero(range(1, ctx.n))
            if i is not None:
                memo[alpha] = total_derivative(value(alpha.lowered(i)), i, ctx)
            else:
                lower = value(alpha.lowered(0))
                memo[alpha] = normalize(sum(w * total_derivative(lower, j, ctx)
                                            for j, w in enumerate(weights) if w != 0))
        return memo[alpha]

    return {alpha: value(alpha) for alpha in alphas}


def _omega_symbol(alpha):
    return Symbol("w[" + ",".join(str(a) for a in alpha.entries) + "]")


def _to_omega_coordinates(L, ctx, xi):
    """Rewrite `L` in the coordinates `w_alpha` by the triangular change of jet variables."""
    r = max(order_of(L), 0)
    alphas = multi_indices(ctx.n, r, min_order=1)
    omegas = omega_values(alphas, ctx, xi)
    inverse = {}
    for alpha in alphas:
        v = jet_symbol(alpha)
        split = affine_split(omegas[alpha], v)
        if split is None or not is_zero(split[0] - 1):
            raise ChangeOfJetCoordinatesFailed(f"Pivot of w{alpha} is not one")
        rest = split[1]
        bindings = {jet_symbol(beta): inverse[beta] for beta in inverse
                    if jet_symbol(beta) in rest.free_symbols}
        if any(multi_index_of(s) is not None and not multi_index_of(s) < alpha
               for s in jet_variables(rest)):
            raise ChangeOfJetCoordinatesFailed(f"w{alpha} is not triangular")
        inverse[alpha] = normalize(_omega_symbol(alpha) - substitute(rest, bindings))
    return substitute(L, {jet_symbol(alpha): value for alpha, value in inverse.items()})


@dataclass
class MetaSingularity:
    """Hat order `k` of a function in reduced form with the derivatives that attain it."""
    coorder: int
    witnesses: list
    variant: str
    checked: tuple
    multiplier: object = S.One
    reduced: object = None
    order: int | None = None

    @property
    def singular(self):
        return self.coorder < self.order if self.order is not None else None

    def to_dict(self):
        return {
            "meta_coorder": self.coorder,
            "witnesses": [str(w) for w in self.witnesses],
            "variant": self.variant,
            "checked": list(self.checked),
            "multiplier": print_expr(self.multiplier),
        }


def _hat_order_of(e, hat, parse):
    best = 0
    witnesses = []
    for s in sorted(normalize(e).free_symbols, key=str):
        alpha = parse(s)
        if alpha is None or alpha.order == 0:
            continue
        weight = alpha.part_order(hat)
        if weight < best or not depends_on(e, s):
            continue
        if weight > best:
            best, witnesses = weight, []
        witnesses.append(s)
    return best, witnesses


def _parse_omega(symbol):
    name = symbol.name
    if not name.startswith("w["):
        return None
    return MultiIndex(tuple(int(a) for a in name[2:-1].split(",")))


def meta_singularity_coorder(L, checked, ctx, variant="involutive", xi=()):
    """
    Hat order of `L` in reduced form.

    Args:
        L: Differential function in the given coordinates.
        checked (int | Sequence[int]): Split p or the checked directions.
        ctx (JetContext): Coordinates.
        variant (str): "involutive" measures the hat order of `L` directly, "weak" first
            strips the nonvanishing multiplier and "special" (p = 1) measures it in the
            coordinates `w_alpha` of `omega_values`.
        xi (Sequence): Coefficients of the special family.

    Raises:
        NotMetaSingular: If `L` vanishes identically.
        ChangeOfJetCoordinatesFailed: If the triangular change of coordinates breaks down.
    """
    L = normalize(L)
    if is_zero(L):
        raise NotMetaSingular("The zero function admits no meta-singular module")
    multiplier = S.One
    if variant == "special":
        checked = (0,)
        hat = _hat_tuple(checked, ctx.n)
        reduced = _to_omega_coordinates(L, ctx, xi)
        k, witnesses = _hat_order_of(reduced, hat, _parse_omega)
    elif variant in ("involutive", "weak"):
        checked = _checked_tuple(checked, ctx.n)
        hat = _hat_tuple(checked, ctx.n)
        reduced = L
        if variant == "weak":
            multiplier, reduced = factor_nonvanishing(L, ctx.nonzero_symbols)
        k, witnesses = _hat_order_of(reduced, hat, multi_index_of)
    else:
        raise InvalidRequest(f"Unknown variant {variant!r}")
    return MetaSingularity(k, witnesses, variant, checked, multiplier, reduced,
                           order=max(order_of(L), 0))


def family_reduced_function(L, phi, checked, k, ctx, variant="involutive", xi=()):
    """
    `L` in reduced form evaluated on the module of the invariant `phi`.

    The derivatives of `L` are read as the reduced coordinates (plain derivatives for
    the involutive family, `w_alpha` of `omega_values` for the special one) and are
    restricted to the manifold of `phi_family_member(phi, ...)`.

    Raises:
        DegenerateInvariant: If `phi_u` vanishes.
        NotInReducedForm: If the result has order above `k`.
    """
    L = normalize(L)
    split = 1 if variant == "special" else _checked_tuple(checked, ctx.n)
    module = phi_family_member(phi, ctx, split, variant=variant, xi=xi)
    if variant == "special":
        alphas = [multi_index_of(v) for v in jet_variables(L)]
        omegas = omega_values(alphas, ctx, xi)
        L = substitute(L, {jet_symbol(a): omegas[a] for a in alphas})
    canonical = canonical_basis(module)
    rewrites = build_rewrites(canonical, max(order_of(L), 0))
    reduced = associated_function(L, rewrites)
    if order_of(reduced) > k:
        raise NotInReducedForm(f"Family-reduced function has order {order_of(reduced)}, "
                               f"above {k}")
    return reduced


def submaximal_residuals(L, phi, checked, k, ctx):
    """
    Residuals whose common vanishing lowers the co-order of the family below `k`.

    For each hat index beta of order `k` the residual is
    `sum over alpha with hat part beta of (dL/du_alpha restricted) * d_u h^{alpha_check}`,
    the coefficient of the top hat derivative `u_(0,beta)` in the family-reduced function.

    Returns:
        dict[MultiIndex, sympy.Expr]: Residual per top hat index.
    """
    L = normalize(L)
    checked = _checked_tuple(checked, ctx.n)
    hat = _hat_tuple(checked, ctx.n)
    module = phi_family_member(phi, ctx, checked)
    r = max(order_of(L), 0)
    rewrites = build_rewrites(canonical_basis(module), r)
    etas = [module.basis[j].eta for j in range(len(checked))]
    checked_parts = multi_indices(len(checked), max(r - k, 0))
    flat = {}
    for part in checked_parts:
        entries = [0] * ctx.n
        for j, s in enumerate(checked):
            entries[s] = part.entries[j]
        flat[part] = MultiIndex(tuple(entries))
    h = flat_jet_values(etas, ctx, flat.values(), directions=checked)
    residuals = {}
    for beta in multi_indices(len(hat), k, min_order=k):
        total = S.Zero
        for part, lifted in flat.items():
            entries = list(lifted.entries)
            for j, i in enumerate(hat):
                entries[i] = beta.entries[j]
            alpha = MultiIndex(tuple(entries))
            if alpha.order > r:
                continue
            partial = sympy.diff(L, jet_symbol(alpha))
            if partial == 0:
                continue
            total += rewrites.reduce(partial) * sympy.diff(h[lifted], U)
        residuals[beta] = normalize(total)
    return residuals
