"""
Jet space bookkeeping: multi-indices, jet symbols, total derivatives, orders and
prolongations of vector fields.

Jet variables are plain sympy symbols named `u[a1,...,an]`; the zero index is `u`
itself. Multi-indices are ordered graded-lexicographically: by `|alpha|`, then
by the first entry, then by the second and so on.
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache
import itertools
import logging
import re

import sympy
from sympy import Symbol

from redmod.errors import InvalidRequest, ResourceLimit
from redmod.expr import depends_on, is_zero, normalize
from redmod.settings import get_settings

logger = logging.getLogger(__name__)

U = Symbol("u")
_JET_NAME = re.compile(r"^u\[(\d+(?:,\d+)*)\]$")


@dataclass(frozen=True, order=False)
class MultiIndex:
    """Derivative multi-index `alpha`; `entries[i]` counts derivatives in direction i."""
    entries: tuple

    @classmethod
    def zero(cls, n):
        return cls((0,) * n)

    @classmethod
    def unit(cls, n, i):
        return cls(tuple(1 if j == i else 0 for j in range(n)))

    @property
    def n(self):
        return len(self.entries)

    @property
    def order(self):
        return sum(self.entries)

    def raised(self, i, times=1):
        entries = list(self.entries)
        entries[i] += times
        return MultiIndex(tuple(entries))

    def lowered(self, i):
        if self.entries[i] == 0:
            raise ValueError(f"Cannot lower {self.entries} in direction {i}")
        entries = list(self.entries)
        entries[i] -= 1
        return MultiIndex(tuple(entries))

    def part(self, directions):
        """Entries at `directions`, e.g. the checked or the hat part."""
        return tuple(self.entries[i] for i in directions)

    def part_order(self, directions):
        return sum(self.part(directions))

    def first_nonzero(self, directions=None):
        for i in directions if directions is not None else range(self.n):
            if self.entries[i]:
                return i
        return None

    def sort_key(self):
        return (self.order, self.entries)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return "(" + ",".join(str(a) for a in self.entries) + ")"


@dataclass(frozen=True)
class SymbolDecl:
    """A user symbol with optional sign information."""
    name: str
    nonzero: bool = False
    positive: bool = False

    @property
    def symbol(self):
        return Symbol(self.name)


@dataclass(frozen=True)
class JetContext:
    """
    Coordinates and bounds of one analysis.

    Attributes:
        n (int): Number of independent variables, the time variable included.
        r (int): Working jet order.
        p (int | None): Optional split; the first p coordinates are checked.
        symbols (tuple[SymbolDecl]): Declared user symbols.
        time_alias (bool): Coordinate 0 is called `t` (alias `x0`), the others `x1`...
        r_max (int): Highest order total derivatives may reach.
        coord_names (tuple[str] | None): Explicit coordinate names (reduced contexts).
    """
    n: int
    r: int = 2
    p: int | None = None
    symbols: tuple = field(default_factory=tuple)
    time_alias: bool = False
    r_max: int = 12
    coord_names: tuple | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidRequest(f"A context needs at least one independent variable, got {self.n}")
        if self.r < 0:
            raise InvalidRequest(f"Jet order must be nonnegative, got {self.r}")
        if self.p is not None and not 0 < self.p <= self.n:
            raise InvalidRequest(f"Split p={self.p} is outside 1..{self.n}")
        if self.coord_names is not None and len(self.coord_names) != self.n:
            raise InvalidRequest(f"Expected {self.n} coordinate names, got {self.coord_names}")

    @property
    def coordinate_names(self):
        if self.coord_names is not None:
            return tuple(self.coord_names)
        if self.time_alias:
            return ("t",) + tuple(f"x{i}" for i in range(1, self.n))
        return tuple(f"x{i}" for i in range(1, self.n + 1))

    @property
    def coordinates(self):
        return tuple(Symbol(name) for name in self.coordinate_names)

    def coordinate(self, i):
        return Symbol(self.coordinate_names[i])

    def direction(self, name):
        """Index of the coordinate called `name` (aliases `x0` and `x` accepted)."""
        names = self.coordinate_names
        if name in names:
            return names.index(name)
        if self.time_alias and name == "x0":
            return 0
        if self.time_alias and name == "x" and self.n == 2:
            return 1
        raise InvalidRequest(f"Unknown coordinate {name!r}; known: {', '.join(names)}")

    @property
    def spatial_directions(self):
        return tuple(range(1, self.n)) if self.time_alias else tuple(range(self.n))

    @property
    def free_symbols(self):
        return tuple(decl.symbol for decl in self.symbols)

    @property
    def nonzero_symbols(self):
        return tuple(decl.symbol for decl in self.symbols if decl.nonzero or decl.positive)

    @property
    def positive_symbols(self):
        return tuple(decl.symbol for decl in self.symbols if decl.positive)

    @property
    def max_order(self):
        return min(self.r_max, get_settings().max_jet_order)

    def with_order(self, r):
        return replace(self, r=r)

    def split(self, p=None):
        """Checked and hat directions for the split `p` (the context's own by default)."""
        p = self.p if p is None else p
        if p is None:
            raise InvalidRequest("No split p given")
        return tuple(range(p)), tuple(range(p, self.n))


def jet_symbol(alpha):
    """Symbol of the derivative `u_alpha`; the zero index gives `u`."""
    entries = alpha.entries if isinstance(alpha, MultiIndex) else tuple(alpha)
    if not any(entries):
        return U
    return Symbol("u[" + ",".join(str(a) for a in entries) + "]")


@lru_cache(maxsize=4096)
def _parse_jet_name(name):
    match = _JET_NAME.match(name)
    if match is None:
        return None
    return MultiIndex(tuple(int(a) for a in match.group(1).split(",")))


def multi_index_of(symbol, n=None):
    """
    Multi-index of a jet symbol, or None for other symbols.

    `u` only has a multi-index when `n` is given.
    """
    if symbol == U:
        return MultiIndex.zero(n) if n is not None else None
    return _parse_jet_name(symbol.name) if isinstance(symbol, Symbol) else None


def is_jet_symbol(symbol):
    return symbol == U or multi_index_of(symbol) is not None


def jet_variables(e):
    """Jet symbols of positive order occurring in `e`, in graded-lexicographic order."""
    found = [(multi_index_of(s), s) for s in sympy.sympify(e).free_symbols]
    return [s for alpha, s in sorted((a, s) for a, s in found if a is not None)]


def multi_indices(n, max_order, min_order=0):
    """All multi-indices of length n with `min_order <= |alpha| <= max_order`, sorted."""
    result = []
    for total in range(min_order, max_order + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            entries = [0] * n
            for i in combo:
                entries[i] += 1
            result.append(MultiIndex(tuple(entries)))
    return sorted(result)


def total_derivative(e, i, ctx):
    """
    Total derivative `D_i e` in direction `i` (0-based).

    Raises:
        ResourceLimit: If the result would contain derivatives beyond the order cap.
    """
    e = sympy.sympify(e)
    result = sympy.diff(e, ctx.coordinate(i))
    for v in e.free_symbols:
        alpha = multi_index_of(v, ctx.n)
        if alpha is None:
            continue
        raised = alpha.raised(i)
        if raised.order > ctx.max_order:
            raise ResourceLimit(f"Total derivative needs order {raised.order}, above the cap "
                                f"of {ctx.max_order}")
        result += jet_symbol(raised) * sympy.diff(e, v)
    return normalize(result)


def total_derivative_multi(e, alpha, ctx):
    """`D^alpha e`, applying directions in increasing order."""
    for i, count in enumerate(alpha.entries):
        for _ in range(count):
            e = total_derivative(e, i, ctx)
    return normalize(e)

def order_of(e):
    """
    Maximal order of the derivatives `e` depends on.

    Returns -1 for the zero function and 0 for nonzero functions free of derivatives.
    """
    e = normalize(e)
    if is_zero(e):
        return -1
    candidates = sorted(((multi_index_of(s).order, str(s), s) for s in jet_variables(e)),
                        reverse=True)
    for order, _, s in candidates:
        if depends_on(e, s):
            return order
    return 0


def _hat_directions(split, n):
    if isinstance(split, int):
        return tuple(range(split, n))
    return tuple(split)


def hat_order(e, split):
    """
    Maximal hat order `|alpha_hat|` over the derivatives `e` depends on.

    Args:
        e: Differential function.
        split (int | Sequence[int]): The split p (hat directions p..n-1) or the hat
            directions themselves.

    Returns:
        int: -1 for the zero function, 0 when only hat order zero occurs.
    """
    e = normalize(e)
    if is_zero(e):
        return -1
    candidates = []
    for s in e.free_symbols:
        alpha = multi_index_of(s)
        if alpha is None:
            continue
        hat = _hat_directions(split, alpha.n)
        candidates.append((alpha.part_order(hat), str(s), s))
    for weight, _, s in sorted(candidates, reverse=True):
        if weight > 0 and depends_on(e, s):
            return weight
    return 0


def hat_order_witnesses(e, split, k):
    """Jet symbols with hat order exactly `k` that `e` depends on."""
    witnesses = []
    for s in jet_variables(e):
        alpha = multi_index_of(s)
        if alpha.part_order(_hat_directions(split, alpha.n)) == k and depends_on(e, s):
            witnesses.append(s)
    return witnesses


class Prolongation:
    """
    Memoized prolongation coefficients of a vector field.

    `coefficient(alpha)` is `D^alpha(eta - xi^i u_i) + xi^i u_{alpha + delta_i}`.
    """

    def __init__(self, vector_field, ctx):
        from redmod.vfmod import characteristic

        self.field = vector_field
        self.ctx = ctx
        self._derivatives = {MultiIndex.zero(ctx.n): characteristic(vector_field, ctx)}

    def characteristic_derivative(self, alpha):
        if alpha not in self._derivatives:
            i = alpha.first_nonzero()
            lower = self.characteristic_derivative(alpha.lowered(i))
            self._derivatives[alpha] = total_derivative(lower, i, self.ctx)
        return self._derivatives[alpha]

    def coefficient(self, alpha):
        value = self.characteristic_derivative(alpha)
        for i, xi in enumerate(self.field.xi):
            value += xi * jet_symbol(alpha.raised(i))
        return normalize(value)


def prolong(vector_field, r, ctx):
    """
    Prolongation coefficients `eta^alpha` for `0 < |alpha| <= r`.

    Returns:
        dict[MultiIndex, sympy.Expr]: Coefficients keyed by multi-index.
    """
    prolongation = Prolongation(vector_field, ctx)
    return {alpha: prolongation.coefficient(alpha)
            for alpha in multi_indices(ctx.n, r, min_order=1)}


def apply_prolongation(vector_field, e, ctx):
    """Apply the prolongation of `vector_field` to the differential function `e`."""
    e = normalize(e)
    prolongation = Prolongation(vector_field, ctx)
    result = vector_field.eta * sympy.diff(e, U)
    for i, xi in enumerate(vector_field.xi):
        result += xi * sympy.diff(e, ctx.coordinate(i))
    for v in jet_variables(e):
        alpha = multi_index_of(v)
        result += prolongation.coefficient(alpha) * sympy.diff(e, v)
    return normalize(result)

