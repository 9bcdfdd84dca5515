import pytest

from redmod.errors import DegenerateInvariant, NotEvolutionEquation, NotInvolutive
from redmod.evolution import (EvolutionEquation, coorder1_G, coorder1_determining,
                              determining_system_evolution, phi_from_affine_family,
                              phi_residual_evolution, tilde_H, tilde_extension)
from redmod.expr import ExpAtom, is_zero
from redmod.jet import JetContext, U
from redmod.manifold import strong_coorder
from redmod.utils.sample_util import (make_rng, random_evolution_rhs, random_invariant,
                                     random_polynomial, random_rational)
from redmod.vfmod import VFModule, VectorField, phi_family_member


@pytest.fixture
def heat(heat_ctx, jet):
    return EvolutionEquation(jet(0, 2), heat_ctx)


def test_from_equation(heat_ctx, jet):
    E = EvolutionEquation.from_equation(2 * jet(1, 0) - 2 * jet(0, 2), heat_ctx)
    assert E.H == jet(0, 2)
    assert is_zero(E.L - jet(1, 0) + jet(0, 2))


def test_rejects_non_evolution_equations(heat_ctx, ctx2, jet):
    with pytest.raises(NotEvolutionEquation):
        EvolutionEquation(jet(0, 1), heat_ctx)
    with pytest.raises(NotEvolutionEquation):
        EvolutionEquation(jet(1, 1), heat_ctx)
    with pytest.raises(NotEvolutionEquation):
        EvolutionEquation(jet(0, 2), ctx2)


def test_determining_system_of_scaling(heat):
    system = determining_system_evolution(heat, [U])
    assert system.tilde == U
    assert system.is_reduction_module
    tags = [r["tag"] for r in system.to_dict()["residuals"]]
    assert tags == ["invariance"]


@pytest.mark.parametrize("eta, residual", [("t", 1), ("t*u", "u")])
def test_invariance_residuals(heat, x, eta, residual):
    t = x["t"]
    etas = {"t": t, "t*u": t * U}[eta]
    expected = {1: 1, "u": U}[residual]
    system = determining_system_evolution(heat, [etas])
    assert not system.is_reduction_module
    assert is_zero(system.invariance[0] - expected)


def test_tilde_H_needs_involutive_module(heat_ctx, x, jet):
    E = EvolutionEquation(jet(0, 2, 0) + jet(0, 0, 2), JetContext(n=3, time_alias=True))
    with pytest.raises(NotInvolutive):
        tilde_H(E, [x["x2"], 0])
    assert is_zero(tilde_H(E, [U, U]) - 2 * U)


def test_heat_family_correspondence(heat, x):
    result = phi_residual_evolution(heat, U * ExpAtom(-x["t"] - x["x1"]))
    assert is_zero(result.residual)
    assert result.is_reduction_module
    assert not result.chi_repairable
    assert all(is_zero(r) for r in result.system.invariance)


def test_chi_repairable_residual(heat, x):
    result = phi_residual_evolution(heat, U - x["t"])
    assert is_zero(result.residual + 1)
    assert result.chi_repairable
    assert result.is_reduction_module


def test_residual_and_determining_system_agree(heat, x):
    result = phi_residual_evolution(heat, U - x["x1"]**3)
    assert is_zero(result.residual - 6 * x["x1"])
    assert is_zero(result.system.invariance[0] + 6)
    assert is_zero(result.cross_check[0] - 6)
    assert not result.is_reduction_module


def test_degenerate_invariant(heat, x):
    with pytest.raises(DegenerateInvariant):
        phi_residual_evolution(heat, x["t"] + x["x1"])


def test_phi_from_affine_family(x):
    assert is_zero(phi_from_affine_family(1, x["t"]) - U + x["t"])


def test_tilde_extension_agrees(heat, x):
    extension = tilde_extension(heat, [U])
    assert extension.criterion is True
    assert extension.involutive
    assert extension.ultra
    assert extension.tilde == U
    assert extension.module.dim == 2


def test_tilde_extension_negative(heat, x):
    extension = tilde_extension(heat, [x["t"] * U])
    assert extension.criterion is False
    assert not extension.involutive
    assert not extension.ultra


def test_coorder1(ctx2, x, jet):
    L = jet(0, 1) - jet(2, 0)
    phi = U * ExpAtom(-x["x1"])
    assert coorder1_G(L, phi, ctx2) == U
    result = coorder1_determining(L, phi, ctx2)
    assert not is_zero(result.residual)
    assert result.chi_repairable
    assert result.is_reduction_module
    assert all(is_zero(r) for r in result.system.invariance)


@pytest.mark.parametrize("family_seed", range(100, 130))
@pytest.mark.parametrize("seed", range(30))
def test_evolution_families_have_coorder_one(heat_ctx, seed, family_seed):
    E = EvolutionEquation(random_evolution_rhs(heat_ctx, make_rng(seed), 2), heat_ctx)
    phi = random_invariant(heat_ctx, make_rng(family_seed), degree=1)
    module = phi_family_member(phi, heat_ctx, heat_ctx.spatial_directions)
    assert strong_coorder(E.L, module).strong_coorder == 1


@pytest.mark.parametrize("seed", range(25))
def test_tilde_extension_verdicts_agree(heat, x, seed):
    rng = make_rng(seed)
    affine = random_rational(rng) * U + random_rational(rng)
    if seed % 2:
        eta = affine + random_polynomial((x["t"], x["x1"], U), rng, degree=2, terms=2)
    else:
        eta = affine
    extension = tilde_extension(heat, [eta])
    assert extension.criterion == extension.involutive == extension.ultra
    if not seed % 2:
        assert extension.criterion is True


@pytest.mark.parametrize("seed", range(30))
def test_modules_containing_the_time_shift_are_regular(heat_ctx, x, seed):
    rng = make_rng(seed)
    E = EvolutionEquation(random_evolution_rhs(heat_ctx, rng, 2), heat_ctx)
    module = VFModule((VectorField.shift(2, 0).scaled(1 + x["x1"]**2),), heat_ctx)
    report = strong_coorder(E.L, module)
    assert report.strong_coorder == 2
    assert report.regular
