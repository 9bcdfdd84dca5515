"""
Quasi-linear second-order equations: elliptic, evolution and wave kinds.

Functions:
- certify_positive_definite(a, ctx, samples): Sampled eigenvalue certificate.
- elliptic_coorder(E, module): Co-order of an elliptic equation, always regular.
- wave_singularity_condition(W, tau, eta): Singularity condition of a wave module.
- phi_pair_module(phi1, phi2, ctx): Module annihilating two invariants.
- eiconal_residual(W, psi): `psi_t^2 - a^{ij} psi_i psi_j`.
- meta_module_from_eiconal(W, psi): Module spanned by `psi_t d_s - psi_s d_t` and `d_u`.
- sample_eiconal_submodules(W, psi, count): Random involutive submodules and their co-orders.
"""
from dataclasses import dataclass, field
import logging

import numpy as np
import sympy
from sympy import S

from redmod.errors import (DegenerateInvariant, DegenerateJacobian, EiconalViolated,
                           InternalError, InvalidRequest, PositivityCertificateMissing)
from redmod.expr import (depends_on, is_zero, lambdify_numeric, normalize,
                         polynomial_coefficients, print_expr, substitute)
from redmod.jet import U, MultiIndex, jet_symbol, jet_variables
from redmod.manifold import module_rewrites, strong_coorder
from redmod.settings import get_settings
from redmod.utils.sample_util import make_rng, random_invariant
from redmod.vfmod import (VFModule, VectorField, annihilator_module, apply_field, canonical_basis,
                          is_involutive)

logger = logging.getLogger(__name__)

KINDS = ("elliptic", "evolution", "wave")


def _second(ctx, i, j):
    return jet_symbol(MultiIndex.unit(ctx.n, i).raised(j))


@dataclass(frozen=True)
class QuasiLinear2:
    """
    `a^{ij} u_ij + b = 0` (elliptic), `u_t = a^{ij} u_ij + b` (evolution) or
    `u_tt = a^{ij} u_ij + b` (wave).

    For the evolution and wave kinds the indices run over the spatial directions of
    a context with a time variable.
    """
    kind: str
    a: tuple
    b: object
    ctx: object

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidRequest(f"Unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.kind != "elliptic" and not self.ctx.time_alias:
            raise InvalidRequest(f"A {self.kind} equation needs a context with a time variable")
        size = len(self.directions)
        a = tuple(tuple(normalize(c) for c in row) for row in self.a)
        if len(a) != size or any(len(row) != size for row in a):
            raise InvalidRequest(f"Coefficient matrix must be {size}x{size}")
        for i in range(size):
            for j in range(i + 1, size):
                if not is_zero(a[i][j] - a[j][i]):
                    raise InvalidRequest(f"Coefficient matrix is not symmetric at ({i}, {j})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", normalize(self.b))

    @property
    def directions(self):
        if self.kind == "elliptic":
            return tuple(range(self.ctx.n))
        return self.ctx.spatial_directions

    @property
    def operator(self):
        """`a^{ij} u_ij + b`."""
        value = self.b
        for j, i in enumerate(self.directions):
            for k, l in enumerate(self.directions):
                value += self.a[j][k] * _second(self.ctx, i, l)
        return normalize(value)

    @property
    def L(self):
        if self.kind == "elliptic":
            return self.operator
        order = 1 if self.kind == "evolution" else 2
        lead = jet_symbol(MultiIndex.zero(self.ctx.n).raised(0, order))
        return normalize(lead - self.operator)


@dataclass
class PositivityCertificate:
    """Smallest eigenvalue of the coefficient matrix at each sampled point."""
    points: list
    min_eigenvalues: list

    def to_dict(self):
        return {"samples": len(self.points),
                "min_eigenvalue": float(min(self.min_eigenvalues)) if self.min_eigenvalues else None}


def _sampler(symbols, positive, rng):
    def draw():
        return {s: rng.uniform(0.5, 2.0) if s in positive else rng.uniform(-2.0, 2.0)
                for s in symbols}
    return draw


def certify_positive_definite(a, ctx, samples=None):
    """
    Check positive definiteness of the matrix `a` at random points.

    Symbols declared positive are drawn from (0.5, 2), every other variable from (-2, 2).

    Args:
        a: Square matrix of expressions.
        ctx (JetContext): Declared symbols.
        samples (int, optional): Number of points; at least 10.

    Raises:
        PositivityCertificateMissing: If some sample is not positive definite.
    """
    settings = get_settings()
    count = max(10, samples or settings.samples)
    symbols = sorted(set().union(*[sympy.sympify(c).free_symbols for row in a for c in row]),
                     key=str)
    functions = [[lambdify_numeric(c, symbols) for c in row] for row in a]
    draw = _sampler(symbols, set(ctx.positive_symbols), np.random.default_rng(settings.seed))
    points, minima = [], []
    attempts = 0
    while len(points) < count:
        attempts += 1
        if attempts > 10 * count:
            raise PositivityCertificateMissing("Could not find points where the coefficients "
                                               "are defined")
        point = draw()
        args = [point[s] for s in symbols]
        with np.errstate(all="ignore"):
            matrix = np.array([[float(f(*args)) for f in row] for row in functions])
        if not np.all(np.isfinite(matrix)):
            logger.debug("Resampling: coefficients undefined at %s", point)
            continue
        smallest = float(np.linalg.eigvalsh(matrix).min())
        if smallest <= 0:
            logger.warning("Coefficient matrix is not positive definite at %s", point)
            raise PositivityCertificateMissing(f"Coefficient matrix has eigenvalue {smallest:.3g} "
                                               "at a sampled point")
        points.append(point)
        minima.append(smallest)
    return PositivityCertificate(points, minima)


@dataclass
class EllipticReport:
    """Co-order report with the reduced coefficients of the hat second derivatives."""
    report: object
    a_hat: list
    certificate: PositivityCertificate

    def to_dict(self):
        data = self.report.to_dict()
        data["a_hat"] = [[print_expr(c) for c in row] for row in self.a_hat]
        data["positivity"] = self.certificate.to_dict()
        return data


def elliptic_coorder(E, module):
    """
    Co-order of `module` for an elliptic equation.

    The coefficients `a_hat` of the hat second derivatives on the manifold are read
    off the associated function; each diagonal entry is the quadratic form of `a` at
    `z = (-xi_hat^{1,iota}, ..., -xi_hat^{p,iota}, 0, ..., 1, ..., 0)` and is positive.

    Raises:
        PositivityCertificateMissing: If `a` is not positive definite at sampled points.
        InternalError: If the co-order is not two.
    """
    if E.kind != "elliptic":
        raise InvalidRequest(f"Expected an elliptic equation, got {E.kind}")
    ctx = E.ctx
    if module.dim >= ctx.n:
        raise InvalidRequest("Elliptic classification needs a module of dimension below n")
    certificate = certify_positive_definite(E.a, ctx)
    canonical = canonical_basis(module)
    rewrites = module_rewrites(E.L, module)
    report = strong_coorder(E.L, module)
    hat = canonical.hat
    reduced_a = [[rewrites.reduce(c) for c in row] for row in E.a]
    a_hat = []
    for j, iota in enumerate(hat):
        row = []
        for k, kappa in enumerate(hat):
            partial = sympy.diff(report.associated_function, _second(ctx, iota, kappa))
            row.append(normalize(partial if iota == kappa else partial / 2))
        a_hat.append(row)
        z = [S.Zero] * ctx.n
        for s, c in enumerate(canonical.checked):
            z[c] = -canonical.xi_hat[s][j]
        z[iota] = S.One
        form = sum(reduced_a[i][l] * z[i] * z[l] for i in range(ctx.n) for l in range(ctx.n))
        if not is_zero(row[j] - form):
            raise InternalError(f"Diagonal coefficient {print_expr(row[j])} differs from the "
                                "quadratic form")
    _check_diagonal_positive(a_hat, ctx)
    if report.strong_coorder != 2:
        raise InternalError(f"Elliptic equation has a module of co-order {report.strong_coorder}")
    return EllipticReport(report, a_hat, certificate)


def _check_diagonal_positive(a_hat, ctx):
    diagonal = [a_hat[j][j] for j in range(len(a_hat))]
    symbols = sorted(set().union(*[d.free_symbols for d in diagonal]), key=str)
    settings = get_settings()
    draw = _sampler(symbols, set(ctx.positive_symbols), np.random.default_rng(settings.seed + 1))
    functions = [lambdify_numeric(d, symbols) for d in diagonal]
    for _ in range(max(10, settings.samples)):
        point = draw()
        with np.errstate(all="ignore"):
            values = [float(f(*[point[s] for s in symbols])) for f in functions]
        if any(np.isfinite(v) and v <= 0 for v in values):
            raise PositivityCertificateMissing("A reduced diagonal coefficient is not positive "
                                               "at a sampled point")


def wave_singularity_condition(W, tau, eta):
    """
    Residuals of `a_hat^{ij} tau^i tau^j = 1` for `Q^s = d_s + tau^s d_t + eta^s d_u`.

    `a_hat` is `a` with `u_s = eta^s - tau^s u_t`. When it depends on `u_t` the residual
    is split into the coefficients of the powers of `u_t`.

    Returns:
        list: One residual, or one per power of `u_t`.
    """
    if W.kind != "wave":
        raise InvalidRequest(f"Expected a wave equation, got {W.kind}")
    ctx = W.ctx
    spatial = W.directions
    if len(tau) != len(spatial) or len(eta) != len(spatial):
        raise InvalidRequest(f"Expected {len(spatial)} coefficients tau and eta")
    tau = [normalize(c) for c in tau]
    u_t = jet_symbol(MultiIndex.unit(ctx.n, 0))
    bindings = {jet_symbol(MultiIndex.unit(ctx.n, s)): normalize(e - c * u_t)
                for s, c, e in zip(spatial, tau, eta)}
    residual = S.NegativeOne
    for j in range(len(spatial)):
        for k in range(len(spatial)):
            residual += substitute(W.a[j][k], bindings) * tau[j] * tau[k]
    residual = normalize(residual)
    if not depends_on(residual, u_t):
        return [residual]
    coefficients = polynomial_coefficients(residual, [u_t])
    if coefficients is None:
        logger.warning("Singularity condition is not polynomial in u_t; not split")
        return [residual]
    return [coefficients[m] for m in sorted(coefficients)]


def phi_pair_module(phi1, phi2, ctx):
    """
    Module `<d_s + tau^s d_t + eta^s d_u>` annihilating `phi1` and `phi2`.

    Raises:
        DegenerateJacobian: If `phi1_t phi2_u - phi1_u phi2_t` vanishes.
    """
    if not ctx.time_alias:
        raise InvalidRequest("The pair representation needs a context with a time variable")
    module = annihilator_module([normalize(phi1), normalize(phi2)], ctx.spatial_directions, ctx,
                                degenerate=DegenerateJacobian)
    if not is_involutive(module):
        raise InternalError("Module of two invariants is not involutive")
    return module


def eiconal_residual(W, psi):
    """
    `psi_t^2 - a^{ij} psi_i psi_j` for a wave equation with `a = a(t, x)`.

    Raises:
        InvalidRequest: If `a` depends on u or its derivatives.
    """
    ctx = W.ctx
    for row in W.a:
        for c in row:
            if depends_on(c, U) or jet_variables(c):
                raise InvalidRequest(f"Coefficient {print_expr(c)} must depend on (t, x) only")
    psi = normalize(psi)
    gradient = [sympy.diff(psi, ctx.coordinate(s)) for s in W.directions]
    value = sympy.diff(psi, ctx.coordinate(0)) ** 2
    for j in range(len(gradient)):
        for k in range(len(gradient)):
            value -= W.a[j][k] * gradient[j] * gradient[k]
    return normalize(value)


def _eiconal_fields(psi, ctx):
    psi_t = normalize(sympy.diff(psi, ctx.coordinate(0)))
    if is_zero(psi_t):
        raise DegenerateInvariant(f"{print_expr(psi)} does not depend on t")
    fields = []
    for s in ctx.spatial_directions:
        xi = [S.Zero] * ctx.n
        xi[0] = -sympy.diff(psi, ctx.coordinate(s))
        xi[s] = psi_t
        fields.append(VectorField(tuple(xi), S.Zero))
    return fields


def meta_module_from_eiconal(W, psi):
    """
    The module spanned by `psi_t d_s - psi_s d_t` and `d_u`.

    Raises:
        DegenerateInvariant: If `psi_t` vanishes.
        EiconalViolated: If `psi` does not solve the eiconal equation.
    """
    psi = normalize(psi)
    residual = eiconal_residual(W, psi)
    fields = _eiconal_fields(psi, W.ctx)
    if not is_zero(residual):
        raise EiconalViolated(f"{print_expr(psi)} leaves the eiconal residual "
                              f"{print_expr(residual)}")
    return VFModule(tuple(fields) + (VectorField((S.Zero,) * W.ctx.n, S.One),), W.ctx)


@dataclass
class EiconalSample:
    phi: object
    module: VFModule
    report: object

    def to_dict(self):
        return {"phi": print_expr(self.phi), "module": self.module.to_dict(),
                "strong_coorder": self.report.strong_coorder}


@dataclass
class EiconalSampling:
    samples: list = field(default_factory=list)
    skipped: int = 0

    @property
    def max_coorder(self):
        return max((s.report.strong_coorder for s in self.samples), default=None)

    def to_dict(self):
        return {"samples": [s.to_dict() for s in self.samples], "skipped": self.skipped,
                "max_strong_coorder": self.max_coorder}


def sample_eiconal_submodules(W, psi, count=10, rng=None):
    """
    Strong co-orders of random involutive submodules `<X_s + theta^s d_u>`.

    `X_s = psi_t d_s - psi_s d_t` and `theta^s = -X_s(phi)/phi_u` for random invariants
    `phi`; non-involutive draws are skipped and counted.
    """
    psi = normalize(psi)
    ctx = W.ctx
    meta_module_from_eiconal(W, psi)
    rng = rng or make_rng()
    fields = _eiconal_fields(psi, ctx)
    result = EiconalSampling()
    attempts = 0
    while len(result.samples) < count and attempts < 10 * count:
        attempts += 1
        phi = random_invariant(ctx, rng)
        phi_u = sympy.diff(phi, U)
        basis = tuple(VectorField(v.xi, normalize(-apply_field(v, phi, ctx) / phi_u))
                      for v in fields)
        submodule = VFModule(basis, ctx)
        if not is_involutive(submodule):
            result.skipped += 1
            continue
        result.samples.append(EiconalSample(phi, submodule, strong_coorder(W.L, submodule)))
    return result
