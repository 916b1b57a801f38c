import json
import random
from fractions import Fraction

import pytest

from gfcohom.coefficient_modules import TensorElem, make_weight_module, trivial_module
from gfcohom.cochain_complex import (
    JetSystem,
    LieModuleSystem,
    build_weight_slice,
    cohomology_dim,
    field_differential,
    gf_condition_check,
    lift,
    lplus_cohomology,
    restrict,
    saturation_order,
    smash_differential,
    sound_truncation,
    stabilized_gf_cohomology,
)
from gfcohom.coordinate_algebras import Affine, FunctionElem, PuncturedSphere, Torus
from gfcohom.lie_vectorfields import JetAlgebroid, VectorFieldElem, build_lplus, smash
from helpers import diffop_cochain, rand_field, rand_function, rand_smash
from oracles import lplus_oracle_dims

A1 = Affine(1)


def lsys(lam, trunc=3, n=1):
    W = make_weight_module(n, lam)
    return LieModuleSystem(build_lplus(n, trunc), W)


def test_ce_differential_examples():
    W = trivial_module(1)
    w = TensorElem.pure(FunctionElem.one(A1), 0)
    d = field_differential(lambda: w, 0, W, A1)
    assert not d(rand_field(random.Random(0), A1))
    # F_λ over L+ (n=1): dφ(e0) = -λ w
    sysm = lsys(3)
    s = build_weight_slice(sysm, 0, Fraction(3))  # weight 3 hosts w itself
    assert s.basis == [((), 0)]
    assert s.d_out.to_dense() == [[-3]]


def test_d_squared_callable():
    rng = random.Random(3)
    for var, lam in [(A1, 1), (Torus(1), -2), (Affine(2), 0), (PuncturedSphere((0, 1)), 1)]:
        W = make_weight_module(var.n, lam)
        for k in range(3):
            phi, _ = diffop_cochain(rng, var, W, k, 2)
            dd = field_differential(field_differential(phi, k, W, var), k + 1, W, var)
            args = [rand_field(rng, var, 1) for _ in range(k + 2)]
            assert not dd(*args)


def test_weight_slice_examples():
    s = build_weight_slice(lsys(0), 2, 0)
    assert s.basis == []
    s = build_weight_slice(lsys(0), 1, 0)
    assert s.basis == [((0,), 0)]
    assert build_weight_slice(lsys(0), 1, -100).basis == []
    assert cohomology_dim(lsys(0), 0, 0) == 1
    assert cohomology_dim(lsys(0), 1, 0) == 1
    assert all(cohomology_dim(lsys(0), k, 0) == 0 for k in (2, 3))


def test_slice_json():
    s = build_weight_slice(lsys(1), 2, 0)
    d = s.to_json()
    assert set(d) == {"algebra", "module", "k", "weight", "order", "dim_cocycles", "rank_boundaries", "betti"}
    assert d["betti"] == 1
    json.dumps(d)


@pytest.mark.parametrize("lam", [0, 1, -1, 2, Fraction(1, 2)])
def test_lplus_matches_oracle_and_truncation(lam):
    W = make_weight_module(1, lam)
    want = lplus_oracle_dims(lam, 3, 3)
    for trunc in (3, 5):
        assert [s.betti for s in lplus_cohomology(W, 3, 0, trunc)] == want
    with pytest.raises(ValueError):
        lplus_cohomology(make_weight_module(1, 4), 2, 0, 1)


def test_sound_truncation():
    assert sound_truncation(trivial_module(1)) == 0
    assert sound_truncation(make_weight_module(1, 2), -1) == 3


def test_threads_give_identical_results():
    W = make_weight_module(1, 1)
    a = [s.to_json() for s in lplus_cohomology(W, 3, 0, 4, threads=1)]
    b = [s.to_json() for s in lplus_cohomology(W, 3, 0, 4, threads=4)]
    assert a == b


def test_lift_restrict():
    rng = random.Random(5)
    for var, lam in [(A1, 1), (Torus(1), 0), (Affine(2), -1)]:
        W = make_weight_module(var.n, lam)
        for k in range(3):
            phi, _ = diffop_cochain(rng, var, W, k, 1)
            psi = lift(phi, var)
            etas = [rand_field(rng, var, 1) for _ in range(k)]
            assert restrict(psi, var)(*etas) == phi(*etas)
            args = [rand_smash(rng, var, 1) for _ in range(k + 1)]
            lhs = lift(field_differential(phi, k, W, var), var)(*args)
            rhs = smash_differential(psi, k, W, var)(*args)
            assert lhs == rhs
            # lift(φ)(x#∂) = x φ(∂) instance
            if k == 1:
                x = FunctionElem.variable(var, 0)
                d = VectorFieldElem.partial(var, 0)
                assert psi(smash(x, d)) == phi(d).times(x)


def test_gf_condition_examples():
    rng = random.Random(6)
    var = A1
    W = make_weight_module(1, 1)
    m0 = TensorElem.pure(FunctionElem.variable(var), 0)
    a_linear = lambda eta: m0.times(eta.component(0))
    samples = [(rand_function(rng, var), [rand_field(rng, var)]) for _ in range(10)]
    assert gf_condition_check(a_linear, 1, samples)[0]
    phi, order = diffop_cochain(rng, var, W, 2, 2)
    samples2 = [(rand_function(rng, var), [rand_field(rng, var), rand_field(rng, var)]) for _ in range(10)]
    for q in range(order, order + 3):
        assert gf_condition_check(phi, q, samples2)[0]
    # d of a 0-cochain with λ ≠ 0 has order 2 and fails at order 1
    w = TensorElem.pure(FunctionElem.one(var), 0)
    dw = field_differential(lambda: w, 0, W, var)
    ok, witness = gf_condition_check(dw, 1, [(FunctionElem.variable(var), [VectorFieldElem.partial(var, 0)])])
    assert not ok and witness[1]
    assert gf_condition_check(dw, 2, samples)[0]


@pytest.mark.parametrize("var,spec,k,want", [
    (A1, 0, 0, 1),
    (A1, 0, 1, 1),
    (Torus(1), 0, 2, 1),
    (A1, 1, 2, 1),
    (A1, -1, 1, 0),
])
def test_stabilized_examples(var, spec, k, want):
    res = stabilized_gf_cohomology(var, make_weight_module(1, spec), k, 5)
    assert res.stabilized and res.value == want
    if (var, spec, k) == (A1, 0, 0):
        assert res.dims == [1] * 5
    json.dumps(res.to_json())


def test_saturation_guards_early_agreement():
    # the F_2 class first appears at order 4; orders 1..3 agree on zero
    res = stabilized_gf_cohomology(A1, make_weight_module(1, 2), 1, 3)
    assert res.dims == [0, 0, 0] and not res.stabilized
    res = stabilized_gf_cohomology(A1, make_weight_module(1, 2), 1, 6)
    assert res.stabilized and res.value == 1
    assert saturation_order(trivial_module(1), 1) == 3


def test_stabilized_rejects_bad_input():
    with pytest.raises(ValueError):
        stabilized_gf_cohomology(A1, trivial_module(1), 1, 1)
    with pytest.raises(ValueError):
        stabilized_gf_cohomology(PuncturedSphere((0,)), trivial_module(1), 1, 3)
    with pytest.raises(ValueError):
        JetSystem(JetAlgebroid(A1, 1), make_weight_module(1, 1))


def test_gf_affine_two_dimensional():
    W = trivial_module(2)
    lp = [sl.betti for sl in lplus_cohomology(W, 2, 0, 2)]
    assert [stabilized_gf_cohomology(Affine(2), W, k, 3).value for k in range(3)] == lp == [1, 1, 0]
