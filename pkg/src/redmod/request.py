"""
Analysis requests and their dispatch to the library.

A request names a command and carries the texts it needs. `run` builds the
context, parses the inputs, calls the analysis and returns a report document;
no mathematics happens here.

Functions:
- AnalysisRequest.from_dict(data): Validate a request object.
- build_context(request): Context of a request, given or inferred.
- run(request): Report document of a request.
- run_safely(request): Report document, or an error document for domain errors.
"""
from dataclasses import dataclass, field, fields, replace
import logging

from redmod.classify2 import (QuasiLinear2, eiconal_residual, elliptic_coorder,
                              meta_module_from_eiconal, phi_pair_module,
                              sample_eiconal_submodules, wave_singularity_condition)
from redmod.errors import InvalidRequest, RedmodError
from redmod.evolution import (EvolutionEquation, coorder1_determining,
                              determining_system_evolution, phi_residual_evolution,
                              tilde_extension)
from redmod.expr import is_zero, print_expr
from redmod.jet import SymbolDecl
from redmod.manifold import (classify, family_reduced_function, meta_singularity_coorder,
                             submaximal_residuals)
from redmod.reduction import (KAPPA, conditional_invariance_check, ndim_reduce,
                              reduce_shift_module, shift_module, ultra_module_from_family)
from redmod.settings import get_settings, override
from redmod.utils.io_util import (context_from_dict, context_to_dict, infer_context,
                                  matrix_from_json, module_from_dict, module_symbols)
from redmod.utils.parse_util import parse_equation, parse_expr
from redmod.utils.sample_util import make_rng
from redmod.vfmod import VFModule, VectorField, phi_family_member

logger = logging.getLogger(__name__)

SCHEMA = "redmod/1"

# Inputs each command accepts besides `command`, `context` and `options`.
ALLOWED = {
    "sco": {"equation", "module", "p", "directions"},
    "check-reduction": {"equation", "module", "phi", "eta", "p", "directions"},
    "reduce": {"equation", "p", "directions"},
    "ndim-reduce": {"equation", "phi", "inverse"},
    "deteqs": {"equation", "phi", "eta"},
    "coorder1": {"equation", "phi", "hat"},
    "classify": {"kind", "a", "b", "module", "tau", "eta", "phi1", "phi2"},
    "eiconal": {"a", "b", "psi", "count"},
    "meta": {"equation", "p", "directions", "variant", "xi", "phi"},
}

SETTINGS_OPTIONS = ("seed", "samples", "max_nodes", "max_jet_order", "cross_check")


@dataclass
class AnalysisRequest:
    """
    One analysis: the command, its inputs as texts and the run options.

    `context` is the JSON form of a JetContext; without it the context is inferred
    from the texts. `options` holds settings overrides and `strict`.
    """
    command: str
    context: dict | None = None
    equation: str | None = None
    module: dict | None = None
    phi: str | None = None
    phi1: str | None = None
    phi2: str | None = None
    psi: str | None = None
    eta: list | None = None
    tau: list | None = None
    p: int | None = None
    directions: list | None = None
    hat: int | None = None
    inverse: str | None = None
    kind: str | None = None
    a: object = None
    b: str | None = None
    count: int | None = None
    variant: str | None = None
    xi: list | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in ALLOWED:
            raise InvalidRequest(f"Unknown command {self.command!r}; expected one of "
                                 f"{', '.join(ALLOWED)}")
        extra = [f.name for f in fields(self)
                 if f.name not in ALLOWED[self.command] | {"command", "context", "options"}
                 and getattr(self, f.name) is not None]
        if extra:
            raise InvalidRequest(f"{self.command} does not take {', '.join(extra)}")

    @classmethod
    def from_dict(cls, data):
        """
        Build a request from its JSON form.

        Raises:
            InvalidRequest: On unknown keys, a missing command or inputs the command
                does not take.
        """
        if not isinstance(data, dict) or "command" not in data:
            raise InvalidRequest(f"A request needs a command: {data}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidRequest(f"Unknown request keys: {', '.join(unknown)}")
        return cls(**{k: v for k, v in data.items() if v is not None})

    def require(self, *names):
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise InvalidRequest(f"{self.command} needs {', '.join(missing)}")

    def require_one(self, *names):
        given = [name for name in names if getattr(self, name) is not None]
        if len(given) != 1:
            raise InvalidRequest(f"{self.command} needs exactly one of {', '.join(names)}")
        return given[0]

    def texts(self):
        """Every expression text of the request, for context inference."""
        texts = [self.equation, self.phi, self.phi1, self.phi2, self.psi, self.inverse, self.b]
        texts += [str(c) for c in (self.eta or []) + (self.tau or []) + (self.xi or [])]
        if isinstance(self.a, list):
            texts += [str(c) for row in self.a for c in row]
        elif isinstance(self.a, str):
            texts.append(self.a.replace("identity", ""))
        for item in (self.module or {}).get("fields", []):
            texts += [str(c) for c in item.get("xi", [])] + [str(item.get("eta", "0"))]
        return [t for t in texts if t]


def build_context(request):
    symbols = module_symbols(request.module)
    if request.context is not None:
        return context_from_dict(request.context, symbols)
    return infer_context(request.texts(), symbols)


def _equation(request, ctx):
    request.require("equation")
    return parse_equation(request.equation, ctx)


def _expr(text, ctx):
    return parse_expr(str(text), ctx)


def _default_checked(request, ctx):
    if request.directions is not None:
        return tuple(request.directions)
    if request.p is not None:
        return tuple(range(request.p))
    if ctx.time_alias:
        return ctx.spatial_directions
    return tuple(range(max(ctx.n - 1, 1)))


def _module(request, ctx):
    if request.module is not None:
        return module_from_dict(request.module, ctx)
    if request.p is None and request.directions is None:
        raise InvalidRequest(f"{request.command} needs a module or a shift split p")
    return shift_module(_default_checked(request, ctx), ctx)


def _eta_module(request, ctx):
    directions = _default_checked(request, ctx)
    if len(request.eta) != len(directions):
        raise InvalidRequest(f"Expected {len(directions)} coefficients eta, got {len(request.eta)}")
    basis = tuple(VectorField(VectorField.shift(ctx.n, s).xi, _expr(e, ctx))
                  for s, e in zip(directions, request.eta))
    return VFModule(basis, ctx)


def _run_sco(request, ctx):
    L = _equation(request, ctx)
    module = _module(request, ctx)
    return {"module": module.to_dict(), **classify(L, module).to_dict()}


def _run_check_reduction(request, ctx):
    L = _equation(request, ctx)
    given = request.require_one("module", "phi", "eta")
    if given == "module":
        module = module_from_dict(request.module, ctx)
    elif given == "phi":
        module = phi_family_member(_expr(request.phi, ctx), ctx, _default_checked(request, ctx))
    else:
        module = _eta_module(request, ctx)
    verdict = conditional_invariance_check(L, module, strict=bool(request.options.get("strict")))
    return {"module": module.to_dict(), **verdict.to_dict()}


def _run_reduce(request, ctx):
    L = _equation(request, ctx)
    return reduce_shift_module(L, ctx, request.p, request.directions).to_dict()


def _run_ndim_reduce(request, ctx):
    L = _equation(request, ctx)
    request.require("phi")
    phi = _expr(request.phi, ctx)
    inverse = None
    if request.inverse is not None:
        with_kappa = replace(ctx, symbols=ctx.symbols + (SymbolDecl(KAPPA.name),))
        inverse = _expr(request.inverse, with_kappa)
    module, verdict = ultra_module_from_family(L, phi, ctx)
    return {**ndim_reduce(L, phi, ctx, inverse).to_dict(),
            "family": {"module": module.to_dict(), "verdict": verdict.to_dict()}}


def _run_deteqs(request, ctx):
    E = EvolutionEquation.from_equation(_equation(request, ctx), ctx)
    given = request.require_one("phi", "eta")
    result = {"H": print_expr(E.H)}
    if given == "phi":
        residual = phi_residual_evolution(E, _expr(request.phi, ctx))
        result["phi_residual"] = residual.to_dict()
        system = residual.system
    else:
        system = determining_system_evolution(E, [_expr(e, ctx) for e in request.eta])
    result.update(system.to_dict())
    if system.involutive:
        result["tilde_extension"] = tilde_extension(E, system.etas).to_dict()
    return result


def _run_coorder1(request, ctx):
    L = _equation(request, ctx)
    request.require("phi")
    return coorder1_determining(L, _expr(request.phi, ctx), ctx, request.hat).to_dict()


def _quasilinear(request, ctx, kind):
    size = ctx.n if kind == "elliptic" else len(ctx.spatial_directions)
    a = matrix_from_json(request.a, size, ctx)
    return QuasiLinear2(kind, a, _expr(request.b or "0", ctx), ctx)


def _run_classify(request, ctx):
    request.require("kind")
    E = _quasilinear(request, ctx, request.kind)
    result = {"kind": E.kind, "equation": print_expr(E.L)}
    if E.kind == "elliptic":
        request.require("module")
        report = elliptic_coorder(E, module_from_dict(request.module, ctx))
        return {**result, **report.to_dict()}
    if E.kind == "wave" and request.tau is not None:
        request.require("eta")
        condition = wave_singularity_condition(E, [_expr(c, ctx) for c in request.tau],
                                               [_expr(c, ctx) for c in request.eta])
        return {**result, "singularity_condition": [print_expr(c) for c in condition],
                "singular": all(is_zero(c) for c in condition)}
    if request.phi1 is not None or request.phi2 is not None:
        request.require("phi1", "phi2")
        module = phi_pair_module(_expr(request.phi1, ctx), _expr(request.phi2, ctx), ctx)
    elif request.eta is not None:
        module = _eta_module(request, ctx)
    else:
        request.require("module")
        module = module_from_dict(request.module, ctx)
    return {**result, "module": module.to_dict(), **classify(E.L, module).to_dict()}


def _run_eiconal(request, ctx):
    request.require("psi")
    W = _quasilinear(request, ctx, "wave")
    psi = _expr(request.psi, ctx)
    residual = eiconal_residual(W, psi)
    result = {"equation": print_expr(W.L), "residual": print_expr(residual),
              "eiconal": is_zero(residual)}
    if result["eiconal"]:
        result["meta_module"] = meta_module_from_eiconal(W, psi).to_dict()
        sampling = sample_eiconal_submodules(W, psi, request.count or 10,
                                             rng=make_rng(get_settings().seed))
        result["submodules"] = sampling.to_dict()
    return result


def _run_meta(request, ctx):
    L = _equation(request, ctx)
    variant = request.variant or "involutive"
    checked = _default_checked(request, ctx) if request.p or request.directions else 1
    xi = tuple(_expr(c, ctx) for c in request.xi or ())
    meta = meta_singularity_coorder(L, checked, ctx, variant, xi)
    result = meta.to_dict()
    if request.phi is not None:
        phi = _expr(request.phi, ctx)
        reduced = family_reduced_function(L, phi, meta.checked, meta.coorder, ctx,
                                          "special" if variant == "special" else "involutive", xi)
        result["family_reduced_function"] = print_expr(reduced)
        if variant == "involutive":
            residuals = submaximal_residuals(L, phi, meta.checked, meta.coorder, ctx)
            result["submaximal_residuals"] = {str(beta): print_expr(r)
                                              for beta, r in sorted(residuals.items())}
    return result


HANDLERS = {
    "sco": _run_sco,
    "check-reduction": _run_check_reduction,
    "reduce": _run_reduce,
    "ndim-reduce": _run_ndim_reduce,
    "deteqs": _run_deteqs,
    "coorder1": _run_coorder1,
    "classify": _run_classify,
    "eiconal": _run_eiconal,
    "meta": _run_meta,
}


def run(request):
    """
    Run one request under its settings overrides.

    Returns:
        dict: The report document, `{"schema", "command", "context", ...}`.

    Raises:
        RedmodError: Every domain error, unchanged.
    """
    settings = {k: request.options.get(k) for k in SETTINGS_OPTIONS}
    with override(**settings):
        ctx = build_context(request)
        logger.debug("Running %s in %s", request.command, ctx.coordinate_names)
        result = HANDLERS[request.command](request, ctx)
    return {"schema": SCHEMA, "command": request.command, "context": context_to_dict(ctx),
            **result}


def error_document(command, error):
    return {"schema": SCHEMA, "command": command,
            "error": {"type": type(error).__name__, "message": str(error),
                      "exit_code": error.exit_code}}


def run_safely(data):
    """Report document of a request object, or an error document for domain errors."""
    command = data.get("command") if isinstance(data, dict) else None
    try:
        return run(AnalysisRequest.from_dict(data))
    except RedmodError as e:
        logger.error("%s request failed: %s", command, e)
        return error_document(command, e)
