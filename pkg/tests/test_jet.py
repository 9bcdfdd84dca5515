import pytest
from sympy import Symbol

from redmod.errors import InvalidRequest, ResourceLimit
from redmod.expr import is_zero
from redmod.jet import (JetContext, MultiIndex, U, apply_prolongation, hat_order, jet_symbol,
                        jet_variables, multi_index_of, multi_indices, order_of, prolong,
                        total_derivative)
from redmod.utils.sample_util import make_rng, random_polynomial
from redmod.vfmod import VectorField


def test_multi_indices_are_graded():
    entries = [a.entries for a in multi_indices(2, 2)]
    assert entries == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]


def test_jet_symbols():
    assert jet_symbol((0, 0)) == U
    assert jet_symbol((1, 2)).name == "u[1,2]"
    assert multi_index_of(Symbol("u[1,2]")).entries == (1, 2)
    assert multi_index_of(U) is None
    assert multi_index_of(U, 2) == MultiIndex.zero(2)
    assert multi_index_of(Symbol("x1")) is None


def test_jet_variables_sorted(jet):
    assert jet_variables(jet(2, 0) + jet(0, 1) + U) == [jet(0, 1), jet(2, 0)]


def test_total_derivative(ctx2, x, jet):
    assert is_zero(total_derivative(U * jet(1, 0), 0, ctx2) - jet(1, 0)**2 - U * jet(2, 0))
    assert is_zero(total_derivative(x["x1"] * U, 0, ctx2) - U - x["x1"] * jet(1, 0))
    assert total_derivative(x["x1"], 1, ctx2) == 0


def test_total_derivative_cap(jet):
    ctx = JetContext(n=2, r_max=2)
    with pytest.raises(ResourceLimit):
        total_derivative(jet(2, 0), 0, ctx)


def test_order_of(x, jet):
    assert order_of(0) == -1
    assert order_of(x["x1"]) == 0
    assert order_of(jet(2, 0) + jet(1, 0)) == 2
    assert order_of(jet(2, 0) - jet(2, 0) + U) == 0


def test_hat_order(jet):
    assert hat_order(Symbol("u[1,2]") + Symbol("u[3,0]"), 1) == 2
    assert hat_order(Symbol("u[3,0]"), 1) == 0
    assert hat_order(0, 1) == -1


def test_prolongation_of_translation(ctx2, x, jet):
    L = jet(2, 0) - x["x1"] * jet(0, 1)
    assert is_zero(apply_prolongation(VectorField.shift(2, 0), L, ctx2) + jet(0, 1))


def test_prolongation_of_scaling(ctx2, x, jet):
    scaling = VectorField((x["x1"], 0), 0)
    assert is_zero(apply_prolongation(scaling, jet(1, 0), ctx2) + jet(1, 0))
    assert is_zero(apply_prolongation(scaling, jet(2, 0), ctx2) + 2 * jet(2, 0))


def test_prolong_coefficients(ctx2, x, jet):
    coefficients = prolong(VectorField((x["x1"], 0), 0), 2, ctx2)
    assert len(coefficients) == 5
    assert is_zero(coefficients[MultiIndex((1, 0))] + jet(1, 0))
    assert is_zero(coefficients[MultiIndex((0, 1))])
    assert is_zero(coefficients[MultiIndex((2, 0))] + 2 * jet(2, 0))


def test_context_names(heat_ctx, ctx3):
    assert heat_ctx.coordinate_names == ("t", "x1")
    assert heat_ctx.spatial_directions == (1,)
    assert heat_ctx.direction("x") == 1
    assert ctx3.coordinate_names == ("x1", "x2", "x3")
    assert ctx3.split(2) == ((0, 1), (2,))
    with pytest.raises(InvalidRequest):
        JetContext(n=0)
    with pytest.raises(InvalidRequest):
        heat_ctx.direction("y")


@pytest.mark.parametrize("seed", range(30))
def test_total_derivatives_commute(ctx2, x, jet, seed):
    rng = make_rng(seed)
    f = random_polynomial((x["x1"], x["x2"], U, jet(1, 0), jet(0, 1), jet(1, 1)), rng,
                          degree=3, terms=4)
    assert is_zero(total_derivative(total_derivative(f, 0, ctx2), 1, ctx2)
                   - total_derivative(total_derivative(f, 1, ctx2), 0, ctx2))
    assert is_zero(f.diff(jet(1, 1), x["x1"]) - f.diff(x["x1"], jet(1, 1)))
