"""Finite-dimensional L₊-modules and the tensor modules ``A ⊗ W``.

An :class:`LPlusModule` stores one matrix per L₊ generator that acts
nontrivially.  Under the identification ``X_i ∂/∂X_j ↔ E_ij`` a gl_n
representation gives an L₊-module on which ``L_{≥1}`` acts by zero.
Weights are the eigenvalues of the Euler element ``Σ X_i ∂/∂X_i`` and must
be diagonal in the chosen basis.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .coordinate_algebras import FunctionElem, derive_multi, key_degree, multi_indices
from .exact_linalg import SparseVec
from .lie_vectorfields import (
    LPlusGenerator,
    SmashElem,
    VectorFieldElem,
    build_lplus,
    delta_element,
)
from .lincomb import LinComb, add_into, as_fraction

__all__ = [
    "LPlusModule",
    "make_weight_module",
    "trivial_module",
    "standard_module",
    "module_from_matrices",
    "parse_module_spec",
    "TensorElem",
    "tensor_action",
    "field_action",
    "smash_action",
    "DifferentiabilityReport",
    "check_differentiability",
    "differentiability_order",
]

Matrix = Tuple[Tuple[Fraction, ...], ...]


def _matrix(rows: Sequence[Sequence[Any]], dim: int) -> Matrix:
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise ValueError(f"expected a {dim}x{dim} matrix")
    return tuple(tuple(as_fraction(v) for v in r) for r in rows)


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    d = len(a)
    return tuple(tuple(sum((a[i][k] * b[k][j] for k in range(d)), Fraction(0)) for j in range(d)) for i in range(d))


def _mat_comb(terms: Sequence[Tuple[Fraction, Matrix]], dim: int) -> Matrix:
    out = [[Fraction(0)] * dim for _ in range(dim)]
    for c, m in terms:
        for i in range(dim):
            for j in range(dim):
                out[i][j] += c * m[i][j]
    return tuple(tuple(r) for r in out)


class LPlusModule:
    """Finite-dimensional module over L₊ with ``L_d · W = 0`` for large d.

    ``matrices`` maps generators to ``dim × dim`` matrices; column ``j`` is
    the image of basis vector ``j``.  Generators not listed act by zero.
    """

    def __init__(self, n: int, dim: int, matrices: Mapping[LPlusGenerator, Sequence[Sequence[Any]]], name: str = "module"):
        if n < 1 or dim < 1:
            raise ValueError("need n >= 1 and dim >= 1")
        self.n = n
        self.dim = dim
        self.name = name
        mats = {}
        for g, m in matrices.items():
            if len(g.exponent) != n:
                raise ValueError(f"generator {g} has the wrong number of variables")
            mat = _matrix(m, dim)
            if any(v for r in mat for v in r):
                mats[g] = mat
        self.matrices: Dict[LPlusGenerator, Matrix] = mats
        self.annihilation_degree = 1 + max((g.weight for g in mats), default=-1)
        self.weights = self._euler_weights()
        self.check_bracket_compatibility()

    def _euler_weights(self) -> List[Fraction]:
        euler = _mat_comb(
            [(Fraction(1), self.matrix(LPlusGenerator(tuple(int(k == i) for k in range(self.n)), i))) for i in range(self.n)],
            self.dim,
        )
        for i in range(self.dim):
            for j in range(self.dim):
                if i != j and euler[i][j]:
                    raise ValueError("the Euler element must act diagonally on the module basis")
        return [euler[i][i] for i in range(self.dim)]

    def matrix(self, g: LPlusGenerator) -> Matrix:
        zero = tuple(tuple(Fraction(0) for _ in range(self.dim)) for _ in range(self.dim))
        return self.matrices.get(g, zero)

    def act(self, g: LPlusGenerator, idx: int) -> Dict[int, Fraction]:
        """``g · w_idx`` as ``{basis index: coefficient}``."""
        m = self.matrices.get(g)
        if m is None:
            return {}
        return {i: m[i][idx] for i in range(self.dim) if m[i][idx]}

    def act_vec(self, g: LPlusGenerator, idx: int) -> SparseVec:
        return SparseVec.from_dict(self.act(g, idx))

    def weight(self, idx: int) -> Fraction:
        return self.weights[idx]

    def check_bracket_compatibility(self) -> None:
        """``ρ([x, y]) = [ρ(x), ρ(y)]`` on all generators up to the relevant degree."""
        top = max(self.annihilation_degree, 1)
        lplus = build_lplus(self.n, 2 * top)
        gens = [g for g in lplus.basis if g.weight < top]
        for a, x in enumerate(gens):
            for y in gens[a + 1:]:
                lhs = _mat_comb(
                    [(c, self.matrix(z)) for z, c in lplus.bracket_labels(x, y).items()], self.dim
                )
                mx, my = self.matrix(x), self.matrix(y)
                rhs = _mat_comb([(Fraction(1), _mat_mul(mx, my)), (Fraction(-1), _mat_mul(my, mx))], self.dim)
                if lhs != rhs:
                    raise ValueError(f"action is not a representation: [{x}, {y}] fails")

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "n": self.n,
            "dim": self.dim,
            "weights": [str(w) for w in self.weights],
            "annihilation_degree": self.annihilation_degree,
        }


def _gl(n: int, i: int, j: int) -> LPlusGenerator:
    """``X_i ∂/∂X_j`` (0-based), the matrix unit ``E_ij``."""
    return LPlusGenerator(tuple(int(k == i) for k in range(n)), j)


def make_weight_module(n: int, highest_weight_data: Any) -> LPlusModule:
    """One-dimensional module ``F_λ``: ``E_ij`` acts by ``λ δ_ij``.

    For n = 1 this is the density module on which ``X ∂/∂X`` acts by λ.
    ``highest_weight_data`` may also be a list of n² matrices (row-major
    ``E_11, E_12, …``), which is handed to :func:`module_from_matrices`.
    """
    if isinstance(highest_weight_data, (list, tuple)):
        return module_from_matrices(n, highest_weight_data)
    lam = as_fraction(highest_weight_data)
    mats = {_gl(n, i, i): [[lam]] for i in range(n)}
    name = "trivial" if not lam else f"weight:{lam}"
    return LPlusModule(n, 1, mats, name=name)


def trivial_module(n: int) -> LPlusModule:
    return make_weight_module(n, 0)


def standard_module(n: int) -> LPlusModule:
    """The defining representation ``E_ij e_k = δ_jk e_i``."""
    mats = {}
    for i in range(n):
        for j in range(n):
            m = [[0] * n for _ in range(n)]
            m[i][j] = 1
            mats[_gl(n, i, j)] = m
    return LPlusModule(n, n, mats, name=f"standard:{n}")


def module_from_matrices(n: int, matrices: Sequence[Sequence[Sequence[Any]]], name: str = "matrices") -> LPlusModule:
    if len(matrices) != n * n:
        raise ValueError(f"need {n * n} matrices (E_11, E_12, ... row-major)")
    dim = len(matrices[0])
    mats = {_gl(n, i, j): matrices[i * n + j] for i in range(n) for j in range(n)}
    return LPlusModule(n, dim, mats, name=name)


def parse_module_spec(spec: Any, n: int = 1) -> LPlusModule:
    """Accepts ``trivial``, ``weight:λ``, ``standard``, a JSON file path, or a
    dict ``{kind: trivial|weight|matrices, n, lambda, matrices}``."""
    if isinstance(spec, str):
        text = spec.strip()
        if text == "trivial":
            return trivial_module(n)
        if text == "standard":
            return standard_module(n)
        if text.startswith("weight:"):
            try:
                lam = Fraction(text.split(":", 1)[1])
            except ValueError as exc:
                raise ValueError(f"bad weight in module spec {spec!r}") from exc
            return make_weight_module(n, lam)
        if os.path.exists(text):
            with open(text, encoding="utf-8") as fh:
                return parse_module_spec(json.load(fh), n)
        raise ValueError(f"unknown module spec {spec!r}")
    if isinstance(spec, Mapping):
        n = int(spec.get("n", n))
        kind = spec.get("kind", "matrices" if "matrices" in spec else "weight")
        if kind == "trivial":
            return trivial_module(n)
        if kind == "weight":
            return make_weight_module(n, Fraction(str(spec.get("lambda", 0))))
        if kind == "standard":
            return standard_module(n)
        if kind == "matrices":
            mats = [[[Fraction(str(v)) for v in row] for row in m] for m in spec["matrices"]]
            return module_from_matrices(n, mats, name=spec.get("name", "matrices"))
        raise ValueError(f"unknown module kind {kind!r}")
    raise ValueError(f"cannot interpret module spec {spec!r}")


# ---------------------------------------------------------------- tensor modules


class TensorElem(LinComb):
    """Element of ``A ⊗ W``; keys ``(function key, module basis index)``."""

    __slots__ = ("variety",)

    def __init__(self, variety, terms=()):
        self.variety = variety
        super().__init__(terms)

    def _new(self, terms):
        obj = TensorElem.__new__(TensorElem)
        obj.variety = self.variety
        obj.terms = terms
        return obj

    def _check(self, other):
        if getattr(other, "variety", None) != self.variety:
            raise ValueError("variety mismatch")

    @classmethod
    def pure(cls, f: FunctionElem, idx: int) -> "TensorElem":
        return cls(f.variety, {(k, idx): c for k, c in f.terms.items()})

    def times(self, f: FunctionElem) -> "TensorElem":
        """A-module structure ``f · (s ⊗ w) = fs ⊗ w``."""
        out = TensorElem(self.variety)
        for (k, idx), c in self.terms.items():
            out = out + TensorElem.pure(f * FunctionElem(self.variety, {k: c}), idx)
        return out

    def weights(self, module: LPlusModule) -> set:
        return {key_degree(self.variety, k) + module.weight(idx) for k, idx in self.terms}


def tensor_action(f: FunctionElem, direction: int, m: TensorElem, W: LPlusModule) -> TensorElem:
    """``f ∂_i (s ⊗ w) = (f ∂_i s) ⊗ w + Σ_{0<|k|≤D} (1/k!) ∂^k f · s ⊗ (X^k ∂/∂X_i) w``.

    ``D`` is the annihilation degree of W: generators ``X^k ∂/∂X_i`` have
    weight ``|k| - 1`` and act by zero once ``|k| > D``.
    """
    var = f.variety
    if m.variety != var:
        raise ValueError("variety mismatch")
    if W.n != var.n:
        raise ValueError("module and variety dimensions differ")
    acc: Dict[Tuple, Fraction] = {}
    # (f ∂_i s) ⊗ w
    for (sk, idx), c in m.terms.items():
        s = FunctionElem(var, {sk: c})
        for k, v in (f * s.derive(direction)).terms.items():
            add_into(acc, (k, idx), v)
    for kk in multi_indices(var.n, W.annihilation_degree):
        if not sum(kk):
            continue
        g = LPlusGenerator(kk, direction)
        if g not in W.matrices:
            continue
        df = derive_multi(f, kk)
        if not df:
            continue
        scale = Fraction(1, _mfact(kk))
        for (sk, idx), c in m.terms.items():
            image = W.act(g, idx)
            if not image:
                continue
            prod = df * FunctionElem(var, {sk: c})
            for k, v in prod.terms.items():
                for j, w in image.items():
                    add_into(acc, (k, j), scale * v * w)
    return TensorElem(var, acc)


def _mfact(m: Sequence[int]) -> int:
    out = 1
    for e in m:
        out *= factorial(e)
    return out


def field_action(eta: VectorFieldElem, m: TensorElem, W: LPlusModule) -> TensorElem:
    out = TensorElem(m.variety)
    for i, comp in enumerate(eta.components()):
        if comp:
            out = out + tensor_action(comp, i, m, W)
    return out


def smash_action(u: SmashElem, m: TensorElem, W: LPlusModule) -> TensorElem:
    """``(f # η) · m = f · (η · m)``."""
    out = TensorElem(m.variety)
    for f, eta in u.pairs():
        out = out + field_action(eta, m, W).times(f)
    return out


# ---------------------------------------------------------------- differentiability


@dataclass
class DifferentiabilityReport:
    order: int
    passed: bool
    witness: Optional[Tuple[FunctionElem, VectorFieldElem, TensorElem]] = None
    witness_value: Optional[TensorElem] = None
    consistent: bool = True
    checked: int = 0


def _binomial_sum(W: LPlusModule, N: int, f: FunctionElem, eta: VectorFieldElem, m: TensorElem) -> TensorElem:
    out = TensorElem(m.variety)
    for j in range(N + 1):
        c = (-1) ** j * comb(N, j)
        term = field_action(eta.times(f ** j), m, W).times(f ** (N - j))
        out = out + term.scale(c)
    return out


def check_differentiability(
    W: LPlusModule, variety, candidate_order: int, samples: Sequence[Tuple[FunctionElem, VectorFieldElem, TensorElem]]
) -> DifferentiabilityReport:
    """Evaluate ``Σ_j (-1)^j C(N,j) f^{N-j} (f^j η) m`` for every sample.

    The same quantity is computed a second time as the action of
    ``delta_element(1, f, N, η)``; ``consistent`` records agreement.
    """
    if not samples:
        raise ValueError("samples must be nonempty")
    N = candidate_order
    if N < 1:
        raise ValueError("candidate_order must be >= 1")
    consistent = True
    for count, (f, eta, m) in enumerate(samples, 1):
        if f.variety != variety or eta.variety != variety or m.variety != variety:
            raise ValueError("sample lives on a different variety")
        value = _binomial_sum(W, N, f, eta, m)
        via_delta = smash_action(delta_element(FunctionElem.one(variety), f, N, eta), m, W)
        if via_delta != value:
            consistent = False
        if value:
            return DifferentiabilityReport(N, False, (f, eta, m), value, consistent, count)
    return DifferentiabilityReport(N, True, None, None, consistent, len(samples))


def differentiability_order(
    W: LPlusModule, variety, samples: Sequence[Tuple[FunctionElem, VectorFieldElem, TensorElem]], max_order: int = 6
) -> DifferentiabilityReport:
    """Smallest N passing on all samples; the witness (if any) is a failure at N - 1."""
    witness = None
    for N in range(1, max_order + 1):
        rep = check_differentiability(W, variety, N, samples)
        if rep.passed:
            rep.witness, rep.witness_value = witness if witness else (None, None)
            return rep
        witness = (rep.witness, rep.witness_value)
    raise ArithmeticError(f"no differentiability order <= {max_order} found on the samples")
