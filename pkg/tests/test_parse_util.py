import pytest
from sympy import Symbol

from redmod.errors import ExprSyntaxError, JetIndexLengthError, UnknownIdentifier
from redmod.expr import ExpAtom, is_zero, print_expr
from redmod.jet import JetContext, SymbolDecl, U
from redmod.utils.parse_util import parse_equation, parse_expr, tokenize
from redmod.utils.sample_util import make_rng, random_polynomial


def test_tokenize_offsets():
    tokens = tokenize("x1 + u[1,0]")
    assert [t.kind for t in tokens][:3] == ["name", "op", "name"]
    assert tokens[2].offset == 5
    assert tokens[-1].kind == "end"


@pytest.mark.parametrize("text", ["x1^2 + 2*x1*u[1,0]", "x1**2 + 2*x1*u[1,0]",
                                  "x1 ^ 2 # square\n + 2 * x1 * u[1, 0]"])
def test_parse_polynomial(ctx2, x, jet, text):
    expected = x["x1"]**2 + 2 * x["x1"] * jet(1, 0)
    assert is_zero(parse_expr(text, ctx2) - expected)


def test_unary_minus_binds_looser_than_power(ctx2, x):
    assert is_zero(parse_expr("-x1^2", ctx2) + x["x1"]**2)


def test_exponential(ctx2, jet):
    assert is_zero(parse_expr("exp(u[0,2])*u", ctx2) - ExpAtom(jet(0, 2)) * U)


def test_time_aliases(heat_ctx, x):
    assert parse_expr("x", heat_ctx) == x["x1"]
    assert parse_expr("x0", heat_ctx) == x["t"]


def test_declared_symbols(x):
    ctx = JetContext(n=1, symbols=(SymbolDecl("c", positive=True),))
    assert is_zero(parse_expr("c*x1", ctx) - Symbol("c") * x["x1"])


def test_equation_form(ctx2, jet):
    assert is_zero(parse_equation("u[2,0] = u[0,2] + 1", ctx2) - (jet(2, 0) - jet(0, 2) - 1))
    assert is_zero(parse_equation("u[2,0]", ctx2) - jet(2, 0))


def test_unknown_identifier_offset(ctx2):
    with pytest.raises(UnknownIdentifier) as info:
        parse_expr("x1 + y", ctx2)
    assert info.value.offset == 5


def test_jet_index_length(ctx2):
    with pytest.raises(JetIndexLengthError):
        parse_expr("u[1]", ctx2)


@pytest.mark.parametrize("text", ["x1 +", "1.5", "x1^(1/2)", "1/0", "(x1", "_a"])
def test_syntax_errors(ctx2, text):
    with pytest.raises(ExprSyntaxError):
        parse_expr(text, ctx2)


@pytest.mark.parametrize("seed", range(50))
def test_printed_expressions_parse_back(ctx2, x, jet, seed):
    rng = make_rng(seed)
    variables = (x["x1"], x["x2"], U, jet(1, 0), jet(1, 1))
    p = random_polynomial(variables, rng, degree=3, terms=4)
    q = random_polynomial(variables[:3], rng, degree=1, terms=2)
    e = p * ExpAtom(q) + p / q
    assert is_zero(parse_expr(print_expr(e), ctx2) - e)
