"""
Loading of contexts, equations, modules and coefficient matrices.

Functions:
- symbols_from_json(data): Symbol declarations from JSON.
- context_from_dict(data): JetContext from `{n, r, p, time_alias, symbols}`.
- context_to_dict(ctx): JSON form of a context.
- infer_context(texts, symbols): Guess the context from the input texts.
- read_equation(path): Text of an equation file.
- module_from_dict(data, ctx): VFModule from `{n, fields, symbols}`.
- matrix_from_json(data, size, ctx): Coefficient matrix from JSON or "identity".
"""
import logging
import re

from sympy import S

from redmod.errors import InvalidRequest
from redmod.jet import JetContext, SymbolDecl
from redmod.utils.json_util import read_json
from redmod.utils.parse_util import parse_expr
from redmod.vfmod import VFModule, VectorField

logger = logging.getLogger(__name__)

_IDENTIFIER = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_JET = re.compile(r"u\s*\[([0-9,\s]*)\]")
_COORDINATE = re.compile(r"^x([0-9]+)$")


def symbols_from_json(data):
    """
    Symbol declarations from a list of names or of `{"name", "nonzero", "positive"}`.

    Raises:
        InvalidRequest: On entries without a name.
    """
    decls = []
    for item in data or []:
        if isinstance(item, str):
            decls.append(SymbolDecl(item))
            continue
        if "name" not in item:
            raise InvalidRequest(f"Symbol declaration without a name: {item}")
        decls.append(SymbolDecl(item["name"], bool(item.get("nonzero", False)),
                                bool(item.get("positive", False))))
    return tuple(decls)


def _merge_symbols(*groups):
    merged = {}
    for group in groups:
        for decl in group:
            merged[decl.name] = decl
    return tuple(merged[name] for name in sorted(merged))


def context_from_dict(data, symbols=()):
    """
    Build a context from its JSON form.

    Raises:
        InvalidRequest: If `n` is missing or a field has the wrong type.
    """
    if "n" not in data:
        raise InvalidRequest("A context needs the number of independent variables n")
    try:
        return JetContext(n=int(data["n"]), r=int(data.get("r", 2)),
                          p=int(data["p"]) if data.get("p") is not None else None,
                          symbols=_merge_symbols(symbols_from_json(data.get("symbols")), symbols),
                          time_alias=bool(data.get("time_alias", False)),
                          r_max=int(data.get("r_max", 12)))
    except (TypeError, ValueError) as e:
        if isinstance(e, InvalidRequest):
            raise
        raise InvalidRequest(f"Malformed context {data}: {e}") from e


def context_to_dict(ctx):
    return {
        "n": ctx.n,
        "r": ctx.r,
        "p": ctx.p,
        "time_alias": ctx.time_alias,
        "coordinates": list(ctx.coordinate_names),
        "symbols": [{"name": d.name, "nonzero": d.nonzero, "positive": d.positive}
                    for d in ctx.symbols],
    }


def _strip_comments(text):
    return "\n".join(line.split("#", 1)[0] for line in text.splitlines())


def infer_context(texts, symbols=(), r=2):
    """
    Guess the context from expression texts.

    `t` (or `x0`) makes coordinate 0 a time variable; `n` covers the largest `x<k>`
    index and the length of every jet bracket; a bare `x` with a time variable means
    one spatial variable.
    """
    time_alias = False
    from_names = 0
    jet_length = 0
    bare_x = False
    for text in texts:
        if not text:
            continue
        text = _strip_comments(text)
        for match in _JET.finditer(text):
            entries = [e for e in match.group(1).split(",") if e.strip()]
            jet_length = max(jet_length, len(entries))
        for name in _IDENTIFIER.findall(_JET.sub("u", text)):
            if name in ("t", "x0"):
                time_alias = True
            elif name == "x":
                bare_x = True
            elif (match := _COORDINATE.match(name)) is not None:
                from_names = max(from_names, int(match.group(1)))
    if time_alias:
        from_names = max(from_names, 1 if bare_x else 0) + 1
    n = max(from_names, jet_length, 1)
    ctx = JetContext(n=n, r=r, symbols=tuple(symbols), time_alias=time_alias)
    logger.debug("Inferred context %s", context_to_dict(ctx))
    return ctx


def read_equation(path):
    """Text of an equation file; comments are left to the parser."""
    with open(path, 'r', encoding='utf-8') as f:
        return f.read()


def _parse(text, ctx):
    return parse_expr(str(text), ctx)


def module_from_dict(data, ctx):
    """
    Build a module from `{"n": int, "fields": [{"xi": [...], "eta": "..."}], "symbols": [...]}`.

    Raises:
        InvalidRequest: If the module does not match the context.
    """
    if "n" in data and int(data["n"]) != ctx.n:
        raise InvalidRequest(f"Module has n={data['n']}, the context has n={ctx.n}")
    fields = []
    for item in data.get("fields", []):
        xi = item.get("xi", [])
        if len(xi) != ctx.n:
            raise InvalidRequest(f"Field {item} needs {ctx.n} coefficients xi")
        fields.append(VectorField(tuple(_parse(c, ctx) for c in xi),
                                  _parse(item.get("eta", "0"), ctx)))
    return VFModule(tuple(fields), ctx)


def module_symbols(data):
    return symbols_from_json((data or {}).get("symbols"))


def load_module(path, ctx):
    return module_from_dict(read_json(path), ctx)


def matrix_from_json(data, size, ctx):
    """
    Coefficient matrix from `"identity"` or a list of rows of expression texts.

    Raises:
        InvalidRequest: If the matrix is not `size` x `size`.
    """
    if data is None or data == "identity":
        return tuple(tuple(S.One if i == j else S.Zero for j in range(size)) for i in range(size))
    if isinstance(data, (str, int)):
        value = _parse(data, ctx)
        return tuple(tuple(value if i == j else S.Zero for j in range(size)) for i in range(size))
    rows = tuple(tuple(_parse(c, ctx) for c in row) for row in data)
    if len(rows) != size or any(len(row) != size for row in rows):
        raise InvalidRequest(f"Coefficient matrix must be {size}x{size}")
    return rows
