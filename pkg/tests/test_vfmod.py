import pytest

from redmod.errors import (DegenerateInvariant, InvalidVectorField, LinearlyDependentBasis,
                           MissingInverse, RankDeficient)
from redmod.expr import ExpAtom, is_zero
from redmod.jet import U, MultiIndex
from redmod.utils.sample_util import make_rng, random_invariant, random_polynomial
from redmod.vfmod import (VFModule, VectorField, canonical_basis, characteristic, commutator,
                          flat_jet_values, is_involutive, phi_family_member, pushforward)


def test_vector_field_rejects_jets(jet):
    with pytest.raises(InvalidVectorField):
        VectorField((jet(1, 0), 0), 0)


def test_characteristic(ctx2, x, jet):
    v = VectorField((1, x["x1"]), U)
    assert is_zero(characteristic(v, ctx2) - (U - jet(1, 0) - x["x1"] * jet(0, 1)))


def test_commutator(ctx2, x):
    bracket = commutator(VectorField.shift(2, 0), VectorField((0, x["x1"]), 0), ctx2)
    assert bracket.xi == (0, 1)
    assert bracket.eta == 0


def test_linearly_dependent_basis(ctx2, x):
    with pytest.raises(LinearlyDependentBasis):
        VFModule((VectorField.shift(2, 0), VectorField((x["x1"], 0), 0)), ctx2)


def test_involutivity(ctx2, ctx3, x):
    assert is_involutive(VFModule((VectorField.shift(2, 0), VectorField((0, x["x1"]), 0)), ctx2))
    module = VFModule((VectorField.shift(3, 0), VectorField((0, 1, x["x1"]), 0)), ctx3)
    assert not module.involutive


def test_rank_condition(ctx1):
    module = VFModule((VectorField((0,), U),), ctx1)
    assert not module.rank_condition
    with pytest.raises(RankDeficient):
        canonical_basis(module)


def test_canonical_basis(ctx2, x):
    canonical = canonical_basis(VFModule((VectorField((x["x1"], 0), U),), ctx2))
    assert canonical.checked == (0,)
    assert canonical.hat == (1,)
    assert canonical.xi_hat == ((0,),)
    assert is_zero(canonical.eta_hat[0] - U / x["x1"])


def test_canonical_basis_skips_singular_columns(heat_ctx):
    canonical = canonical_basis(VFModule((VectorField((0, 2), 2 * U),), heat_ctx))
    assert canonical.checked == (1,)
    assert canonical.eta_hat == (U,)


def test_phi_family_member(ctx2, x):
    module = phi_family_member(U * ExpAtom(-x["x1"]), ctx2, 1)
    assert module.basis[0].xi == (1, 0)
    assert is_zero(module.basis[0].eta - U)
    with pytest.raises(DegenerateInvariant):
        phi_family_member(x["x1"], ctx2, 1)


def test_phi_family_full_dimension(ctx2, x):
    module = phi_family_member(U - x["x1"] - x["x2"], ctx2, 2)
    assert module.dim == 2
    assert all(is_zero(v.eta - 1) for v in module.basis)


def test_pushforward(ctx1, x):
    image = pushforward(VectorField.shift(1, 0), (2 * x["x1"],), U, ctx1)
    assert image.xi == (2,)
    with pytest.raises(MissingInverse):
        pushforward(VectorField.shift(1, 0), (x["x1"]**2,), U, ctx1)


def test_flat_jet_values(ctx1):
    values = flat_jet_values([U], ctx1, [MultiIndex((2,))])
    assert values[MultiIndex((2,))] == U
    assert values[MultiIndex((1,))] == U


def _random_field(ctx, rng):
    variables = ctx.coordinates + (U,)
    return VectorField(tuple(random_polynomial(variables, rng, degree=2, terms=2)
                             for _ in range(ctx.n)),
                       random_polynomial(variables, rng, degree=2, terms=2))


def _same_field(v, w):
    return all(is_zero(a - b) for a, b in zip(v.row, w.row))


@pytest.mark.parametrize("seed", range(20))
def test_commutator_is_a_lie_bracket(ctx2, seed):
    rng = make_rng(seed)
    u, v, w = (_random_field(ctx2, rng) for _ in range(3))
    assert _same_field(commutator(v, w, ctx2), commutator(w, v, ctx2).scaled(-1))
    jacobi = (commutator(u, commutator(v, w, ctx2), ctx2)
              .plus(commutator(v, commutator(w, u, ctx2), ctx2))
              .plus(commutator(w, commutator(u, v, ctx2), ctx2)))
    assert jacobi.is_zero()


@pytest.mark.parametrize("seed", range(20))
def test_pushforward_preserves_brackets(ctx2, x, seed):
    rng = make_rng(seed)
    x1, x2 = x["x1"], x["x2"]
    X, U_new = (x1 + x2, x2), 2 * U + x1
    inverse = {x1: x1 - x2, x2: x2, U: (U - x1 + x2) / 2}
    v, w = _random_field(ctx2, rng), _random_field(ctx2, rng)

    def push(field):
        return pushforward(field, X, U_new, ctx2, inverse=inverse)

    assert _same_field(push(commutator(v, w, ctx2)), commutator(push(v), push(w), ctx2))


@pytest.mark.parametrize("seed", range(50))
def test_phi_family_members_are_involutive(ctx3, seed):
    phi = random_invariant(ctx3, make_rng(seed))
    assert is_involutive(phi_family_member(phi, ctx3, 2))
