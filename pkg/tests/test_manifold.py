import pytest

from redmod.errors import NotInReducedForm, NotInvolutive, NotMetaSingular, ResourceLimit
from redmod.expr import ExpAtom, is_zero
from redmod.jet import MultiIndex, U, jet_symbol
from redmod.manifold import (associated_function, build_rewrites, classify,
                             family_reduced_function, meta_singularity_coorder, omega_values,
                             strong_coorder, submaximal_residuals)
from redmod.settings import override
from redmod.utils.sample_util import make_rng, random_invariant
from redmod.vfmod import VFModule, VectorField, canonical_basis, phi_family_member


@pytest.fixture
def shifts12(ctx3):
    return VFModule((VectorField.shift(3, 0), VectorField.shift(3, 1)), ctx3)


def _exp_term(jet):
    return ExpAtom(jet(0, 0, 2)) * (jet(0, 0, 1) + U)


def test_third_order_golden_pair(shifts12, x, jet):
    L = x["x2"] * jet(3, 0, 0) + x["x1"] * jet(0, 3, 0) - _exp_term(jet)
    report = classify(L, shifts12)
    assert report.order == 3
    assert report.strong_coorder == 2
    assert report.weak_coorder == 1
    assert report.maximal_rank_certificate
    assert report.weak_exact
    assert is_zero(report.weak_multiplier + ExpAtom(jet(0, 0, 2)))
    assert report.to_dict()["multiplier"] == "-exp(u[0,0,2])"


def test_second_order_golden_pair_is_regular(shifts12, x, jet):
    L = x["x2"] * jet(2, 0, 0) + x["x1"] * jet(0, 2, 0) - _exp_term(jet)
    report = classify(L, shifts12)
    assert report.strong_coorder == 2
    assert report.regular
    assert report.weak_coorder == 1


def test_ultra_singular_module(ctx2, jet):
    module = VFModule((VectorField((1, 0), 1),), ctx2)
    report = classify(jet(1, 0) - 1, module)
    assert report.ultra
    assert report.strong_coorder == -1
    assert report.weak_coorder == -1


def test_full_dimension_convention(ctx2, x, jet):
    module = phi_family_member(U - x["x1"] - x["x2"], ctx2, 2)
    assert strong_coorder(jet(1, 0) + jet(0, 1) - 2, module).strong_coorder == -1
    assert strong_coorder(jet(1, 0) + jet(0, 1) - 1, module).strong_coorder == 1


def test_non_involutive_module(ctx3, x, jet):
    module = VFModule((VectorField.shift(3, 0), VectorField((0, 1, x["x1"]), 0)), ctx3)
    with pytest.raises(NotInvolutive) as info:
        strong_coorder(jet(0, 0, 1), module)
    assert info.value.residuals


def test_rules_of_translations_vanish(shifts12, jet):
    rules = build_rewrites(canonical_basis(shifts12), 2).rules
    assert all(v == 0 for v in rules.values())
    assert MultiIndex((1, 1, 0)) in rules
    assert MultiIndex((0, 0, 2)) not in rules


def _assert_consistent(module):
    canonical = canonical_basis(module)
    first = build_rewrites(canonical, 3, "first").rules
    last = build_rewrites(canonical, 3, "last").rules
    assert set(first) == set(last)
    for alpha in first:
        assert is_zero(first[alpha] - last[alpha]), alpha


def test_elimination_order_does_not_matter(ctx3, x):
    _assert_consistent(phi_family_member(U + x["x1"] * x["x2"] * x["x3"], ctx3, 2))


@pytest.mark.parametrize("seed", range(1, 26))
def test_elimination_order_on_random_families(ctx3, seed):
    phi = random_invariant(ctx3, make_rng(seed), degree=1)
    _assert_consistent(phi_family_member(phi, ctx3, 2))


def test_meta_singularity_coorder(ctx2, jet):
    meta = meta_singularity_coorder(jet(2, 0) - jet(0, 2), 1, ctx2)
    assert meta.coorder == 2
    assert meta.witnesses == [jet(0, 2)]
    weak = meta_singularity_coorder(ExpAtom(jet(1, 0)) * (jet(0, 1) + U), 1, ctx2, "weak")
    assert weak.coorder == 1
    with pytest.raises(NotMetaSingular):
        meta_singularity_coorder(0, 1, ctx2)


def test_special_family_coordinates(ctx2, jet):
    omegas = omega_values([MultiIndex((1, 0))], ctx2)
    assert is_zero(omegas[MultiIndex((1, 0))] - jet(1, 0) - U * jet(0, 1))
    meta = meta_singularity_coorder(jet(1, 0) + U * jet(0, 1), 1, ctx2, "special")
    assert meta.coorder == 0


def test_family_reduced_function(ctx2, x, jet):
    L = jet(0, 1) - jet(2, 0)
    phi = U * ExpAtom(-x["x1"])
    assert is_zero(family_reduced_function(L, phi, 1, 1, ctx2) - jet(0, 1) + U)
    with pytest.raises(NotInReducedForm):
        family_reduced_function(L, phi, 1, 0, ctx2)


def test_submaximal_residuals(ctx2, x, jet):
    residuals = submaximal_residuals(jet(2, 0) - jet(0, 2), U - x["x1"], 1, 2, ctx2)
    assert residuals == {MultiIndex((2,)): -1}
    assert jet_symbol((0, 2)) == jet(0, 2)


def test_associated_function_drops_checked_derivatives(ctx2, jet):
    rewrites = build_rewrites(canonical_basis(VFModule((VectorField.shift(2, 1),), ctx2)), 2)
    L = jet(2, 0) - jet(0, 2) + jet(1, 1) + jet(0, 1)
    assert is_zero(associated_function(L, rewrites) - jet(2, 0))


def test_repeated_factor_core_gives_an_upper_bound(ctx2, jet):
    report = classify((jet(0, 2) - U)**2, VFModule((VectorField.shift(2, 0),), ctx2))
    assert report.weak_multiplier == 1
    assert report.weak_coorder == 2
    assert not report.maximal_rank_certificate
    assert not report.weak_exact
    assert "weak co-order is an upper bound" in report.notes
    assert report.to_dict()["weak_exact"] is False


def test_rewrite_cache_follows_settings(ctx2):
    canonical = canonical_basis(VFModule((VectorField((1, 1), 0),), ctx2))
    assert build_rewrites(canonical, 3).order == 3
    with override(max_jet_order=2):
        with pytest.raises(ResourceLimit):
            build_rewrites(canonical, 3)
    assert build_rewrites(canonical, 3).order == 3


@pytest.mark.parametrize("seed", range(20))
def test_coorder_does_not_depend_on_the_basis(ctx3, x, jet, seed):
    module = phi_family_member(random_invariant(ctx3, make_rng(seed), degree=1), ctx3, 2)
    v, w = module.basis
    rebased = VFModule((v.plus(w.scaled(x["x3"])), w.scaled(1 + x["x3"]**2)), ctx3)
    L = jet(2, 0, 0) + x["x1"] * jet(0, 1, 1) + jet(0, 0, 2) * U
    assert strong_coorder(L, module).strong_coorder == strong_coorder(L, rebased).strong_coorder
    assert is_zero(strong_coorder(L, module).associated_function
                   - strong_coorder(L, rebased).associated_function)


@pytest.mark.parametrize("seed", range(20))
def test_coorder_is_invariant_under_reduction(ctx3, x, jet, seed):
    module = phi_family_member(random_invariant(ctx3, make_rng(seed), degree=1), ctx3, 2)
    L = jet(2, 0, 0) - jet(0, 0, 2) + x["x2"] * jet(1, 0, 0) * U
    report = strong_coorder(L, module)
    again = strong_coorder(report.associated_function, module)
    assert again.strong_coorder == report.strong_coorder
    assert is_zero(again.associated_function - report.associated_function)
    scaled = strong_coorder(ExpAtom(x["x1"]) * L, module)
    assert scaled.strong_coorder == report.strong_coorder
