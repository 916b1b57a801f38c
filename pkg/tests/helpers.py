"""Seeded random generators for property tests."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from gfcohom.coefficient_modules import TensorElem
from gfcohom.coordinate_algebras import Affine, FunctionElem, PuncturedSphere, Torus, window_keys
from gfcohom.derham import FormElem
from gfcohom.lie_vectorfields import SmashElem, VectorFieldElem, smash

VARIETIES = [Affine(1), Affine(2), Torus(1), Torus(2), PuncturedSphere((0, 1)), PuncturedSphere((Fraction(-1, 2),))]


def rand_coeff(rng: random.Random) -> Fraction:
    c = 0
    while not c:
        c = Fraction(rng.randint(-4, 4), rng.choice([1, 1, 2, 3]))
    return c


def rand_function(rng: random.Random, var, K: int = 2, terms: int = 2) -> FunctionElem:
    keys = window_keys(var, K)
    out = FunctionElem.zero(var)
    for _ in range(terms):
        out = out + FunctionElem(var, {rng.choice(keys): rand_coeff(rng)})
    return out


def rand_nonzero_function(rng, var, K=2, terms=2):
    f = rand_function(rng, var, K, terms)
    while not f:
        f = rand_function(rng, var, K, terms)
    return f


def rand_monomial(rng, var, K: int = 2) -> FunctionElem:
    return FunctionElem(var, {rng.choice(window_keys(var, K)): rand_coeff(rng)})


def rand_field(rng, var, K: int = 2, terms: int = 2) -> VectorFieldElem:
    out = VectorFieldElem.zero(var)
    for _ in range(terms):
        out = out + VectorFieldElem.partial(var, rng.randrange(var.n), rand_monomial(rng, var, K))
    return out


def rand_tensor(rng, var, W, K: int = 2, terms: int = 2) -> TensorElem:
    out = TensorElem(var)
    for _ in range(terms):
        out = out + TensorElem.pure(rand_monomial(rng, var, K), rng.randrange(W.dim))
    return out


def rand_smash(rng, var, K: int = 2, terms: int = 2) -> SmashElem:
    out = SmashElem(var)
    for _ in range(terms):
        out = out + smash(rand_monomial(rng, var, K), rand_field(rng, var, K, 1))
    return out


def rand_form(rng, var, k: int, K: int = 2) -> FormElem:
    out = FormElem(var, k)
    for idx in combinations(range(var.n), k):
        if rng.random() < 0.8:
            out = out + FormElem.make(rand_function(rng, var, K), idx)
    return out


def diffop_cochain(rng, var, W, k: int, max_r: int, K: int = 1):
    """Random k-cochain on V with values in A ⊗ W of finite order.

    ``φ(η_1..η_k) = m_0 · det[L_j(η_s)]`` with ``L_j(η) = g_j ∂^{r_j} η_{i_j}``
    (a derivative in one coordinate direction).  Its order is
    ``max r_j + 1``.
    """
    m0 = rand_tensor(rng, var, W, K, 2)
    while not m0:
        m0 = rand_tensor(rng, var, W, K, 2)
    ops = []
    for _ in range(k):
        ops.append((rand_nonzero_function(rng, var, K, 1), rng.randint(0, max_r), rng.randrange(var.n), rng.randrange(var.n)))
    order = 1 + max((r for _, r, _, _ in ops), default=0)

    def L(op, eta):
        g, r, i, direction = op
        c = eta.component(i)
        for _ in range(r):
            c = c.derive(direction)
        return g * c

    def phi(*etas):
        if len(etas) != k:
            raise TypeError("wrong arity")
        from itertools import permutations

        det = FunctionElem.zero(var)
        for perm in permutations(range(k)):
            sign = 1
            for a in range(k):
                for b in range(a + 1, k):
                    if perm[a] > perm[b]:
                        sign = -sign
            term = FunctionElem.const(var, sign)
            for j, s in enumerate(perm):
                term = term * L(ops[j], etas[s])
            det = det + term
        return m0.times(det)

    return phi, order
