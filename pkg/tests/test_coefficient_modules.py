import json
import random
from fractions import Fraction

import pytest

from gfcohom.coefficient_modules import (
    TensorElem,
    check_differentiability,
    differentiability_order,
    field_action,
    make_weight_module,
    module_from_matrices,
    parse_module_spec,
    standard_module,
    tensor_action,
    trivial_module,
)
from gfcohom.coordinate_algebras import Affine, FunctionElem, Torus, key_degree, parse_function
from gfcohom.lie_vectorfields import LPlusGenerator, VectorFieldElem, bracket_fields, build_lplus
from helpers import rand_field, rand_function, rand_tensor

A1 = Affine(1)


def pure(text, var=A1, idx=0):
    return TensorElem.pure(parse_function(text, var), idx)


def test_make_weight_module_examples():
    W = trivial_module(1)
    assert W.dim == 1 and W.annihilation_degree == 0
    assert all(not W.act(g, 0) for g in build_lplus(1, 3).basis)
    W = make_weight_module(1, 1)
    e = build_lplus(1, 3).basis
    assert W.act(e[0], 0) == {0: 1}
    assert all(not W.act(g, 0) for g in e[1:])
    S = standard_module(2)
    assert S.dim == 2 and S.weights == [1, 1]
    E12 = LPlusGenerator((1, 0), 1)
    assert S.act(E12, 1) == {0: 1} and S.act(E12, 0) == {}


def test_bad_representation_rejected():
    # E_11 and E_12 acting by matrices that do not satisfy [E_11, E_12] = E_12
    bad = [[[1, 0], [0, 0]], [[0, 0], [1, 0]], [[0, 0], [0, 0]], [[0, 0], [0, 1]]]
    with pytest.raises(ValueError):
        module_from_matrices(2, bad)
    with pytest.raises(ValueError):
        module_from_matrices(1, [[[0, 1], [0, 0]]])  # Euler element not diagonal


def test_parse_module_spec(tmp_path):
    assert parse_module_spec("trivial").name == "trivial"
    assert parse_module_spec("weight:1/2").weights == [Fraction(1, 2)]
    assert parse_module_spec({"kind": "weight", "n": 1, "lambda": "-1"}).weights == [-1]
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"n": 2, "matrices": [[[1, 0], [0, 0]], [[0, 1], [0, 0]], [[0, 0], [1, 0]], [[0, 0], [0, 1]]]}))
    W = parse_module_spec(str(path), 2)
    assert W.dim == 2
    with pytest.raises(ValueError):
        parse_module_spec("nonsense")


def test_tensor_action_examples():
    W = make_weight_module(1, Fraction(5))
    assert tensor_action(parse_function("x^2", A1), 0, pure("1"), W) == pure("10*x")
    W = make_weight_module(1, 3)
    assert tensor_action(parse_function("7", A1), 0, pure("x^3"), W) == pure("21*x^2")
    assert tensor_action(parse_function("x", A1), 0, pure("x"), W) == pure("4*x")


MODULES = [
    (A1, trivial_module(1)),
    (A1, make_weight_module(1, 1)),
    (A1, make_weight_module(1, Fraction(-3, 2))),
    (Torus(1), make_weight_module(1, 2)),
    (Affine(2), standard_module(2)),
    (Torus(2), make_weight_module(2, -1)),
]


@pytest.mark.parametrize("var,W", MODULES)
def test_module_axiom_and_av_leibniz(var, W):
    rng = random.Random(21)
    for _ in range(15):
        eta, mu = rand_field(rng, var), rand_field(rng, var)
        m = rand_tensor(rng, var, W)
        lhs = field_action(bracket_fields(eta, mu), m, W)
        rhs = field_action(eta, field_action(mu, m, W), W) - field_action(mu, field_action(eta, m, W), W)
        assert lhs == rhs
        f = rand_function(rng, var)
        assert field_action(eta, m.times(f), W) == m.times(eta.apply(f)) + field_action(eta, m, W).times(f)


@pytest.mark.parametrize("var,W", [mw for mw in MODULES])
def test_weight_compatibility(var, W):
    rng = random.Random(4)
    for _ in range(20):
        key = rng.choice([(a,) * var.n for a in range(0, 3)])
        f = FunctionElem(var, {key: 1})
        i = rng.randrange(var.n)
        m = TensorElem.pure(FunctionElem(var, {tuple(rng.randint(0, 2) for _ in range(var.n)): 1}), rng.randrange(W.dim))
        (mu,) = m.weights(W)
        out = tensor_action(f, i, m, W)
        if out:
            assert out.weights(W) == {mu + key_degree(var, key) - 1}


def _samples(var, W, rng, count=6):
    out = []
    for _ in range(count):
        out.append((rand_function(rng, var, 2, 2), rand_field(rng, var, 2, 2), rand_tensor(rng, var, W)))
    x = FunctionElem.variable(var, 0)
    out.append((x, VectorFieldElem.partial(var, 0), TensorElem.pure(FunctionElem.one(var), 0)))
    return out


def test_differentiability_examples():
    x = FunctionElem.variable(A1)
    d = VectorFieldElem.partial(A1, 0)
    one = TensorElem.pure(FunctionElem.one(A1), 0)
    rep = check_differentiability(trivial_module(1), A1, 1, [(x, d, one)])
    assert rep.passed and rep.consistent
    W = make_weight_module(1, 3)
    assert check_differentiability(W, A1, 2, [(x, d, one)]).passed
    rep = check_differentiability(W, A1, 1, [(x, d, one)])
    assert not rep.passed and rep.witness_value == TensorElem.pure(FunctionElem.const(A1, -3), 0)


@pytest.mark.parametrize("var,W,order", [
    (A1, trivial_module(1), 1),
    (A1, make_weight_module(1, 1), 2),
    (A1, make_weight_module(1, -1), 2),
    (A1, make_weight_module(1, 2), 2),
    (Torus(1), make_weight_module(1, Fraction(1, 3)), 2),
    (Affine(2), standard_module(2), 2),
    (Affine(2), trivial_module(2), 1),
])
def test_differentiability_order(var, W, order):
    rng = random.Random(31)
    rep = differentiability_order(W, var, _samples(var, W, rng))
    assert rep.order == order == W.annihilation_degree + 1
    assert rep.consistent
    if order > 1:
        assert rep.witness is not None
