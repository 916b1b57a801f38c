import random
from math import comb

import pytest

from gfcohom.coordinate_algebras import Affine, FunctionElem, PuncturedSphere, Torus, parse_function
from gfcohom.derham import FormElem, d_deRham, derham_betti, derham_table, phi_map, phi_rank
from gfcohom.kunneth import a_differential
from gfcohom.lie_vectorfields import VectorFieldElem
from helpers import VARIETIES, rand_field, rand_form


def form(var, text, idx):
    return FormElem.make(parse_function(text, var), idx)


def test_d_examples():
    A = Affine(1)
    assert d_deRham(form(A, "x^2", ())) == form(A, "2*x", (0,))
    A2 = Affine(2)
    w = form(A2, "x1", (1,)) + form(A2, "x2", (0,))
    assert not d_deRham(w)
    T = Torus(1)
    assert not d_deRham(form(T, "x^-1", (0,)))


def test_wedge_ordering_sign():
    A2 = Affine(2)
    assert form(A2, "1", (1, 0)) == form(A2, "1", (0, 1)).scale(-1)
    assert not form(A2, "1", (1, 1))
    with pytest.raises(ValueError):
        FormElem(A2, 1, {((0, 0), (0, 1)): 1})


@pytest.mark.parametrize("var", VARIETIES)
def test_d_squared(var):
    rng = random.Random(2)
    for k in range(var.n + 1):
        for _ in range(20):
            assert not d_deRham(d_deRham(rand_form(rng, var, k)))


def test_betti_examples():
    assert derham_betti(Torus(2), 1, 2).betti == 2
    assert derham_betti(PuncturedSphere((0, 1)), 1, 2).betti == 2
    assert derham_betti(Affine(2), 1, 2).betti == 0
    with pytest.raises(ValueError):
        derham_betti(Affine(1), 0, 0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_torus_binomial_symmetry(n):
    dims = [r.betti for r in derham_table(Torus(n), 1)]
    assert dims == [comb(n, i) for i in range(n + 1)]
    assert dims == dims[::-1]


def test_higher_poles_are_exact():
    S = PuncturedSphere((0, 1))
    # (z-1)^-3 dz = d(-(z-1)^-2 / 2)
    assert d_deRham(form(S, "-1/2*(z-1)^-2", ())) == form(S, "(z-1)^-3", (0,))
    res = derham_betti(S, 1, 4)
    assert res.betti == 2 and res.stabilized


def test_phi_examples():
    A = Affine(1)
    w = FormElem.make(parse_function("x", A) * parse_function("2*x", A), (0,))  # x d(x^2)
    assert phi_map(w)(VectorFieldElem.partial(A, 0)) == parse_function("2*x^2", A)
    A2 = Affine(2)
    top = form(A2, "1", (0, 1))
    d1, d2 = VectorFieldElem.partial(A2, 0), VectorFieldElem.partial(A2, 1)
    assert phi_map(top)(d1, d2) == FunctionElem.one(A2)
    assert phi_map(top)(d2, d1) == FunctionElem.const(A2, -1)


@pytest.mark.parametrize("var", VARIETIES)
def test_phi_anticommutes(var):
    rng = random.Random(13)
    for k in range(var.n + 1):
        for _ in range(8):
            w = rand_form(rng, var, k)
            etas = [rand_field(rng, var, 2) for _ in range(k + 1)]
            lhs = a_differential(phi_map(w), k, var)(*etas)
            rhs = phi_map(d_deRham(w).scale(-1))(*etas)
            assert lhs == rhs


@pytest.mark.parametrize("var", VARIETIES)
def test_phi_injective(var):
    for k in range(var.n + 1):
        r, dim = phi_rank(var, k, 2)
        assert r == dim
