"""Lie algebras of vector fields and their finite presentations.

Conventions: directions are 0-based, so ``∂_0`` is ``∂/∂x_1``.  A
generator ``X^a ∂/∂X_j`` of L₊ has weight ``|a| - 1``; the weight of a
monomial vector field ``x^a ∂_j`` on affine space or the torus is likewise
``|a| - 1`` (the eigenvalue of ``ad(Σ x_i ∂_i)``).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from .coordinate_algebras import (
    Affine,
    FunctionElem,
    PuncturedSphere,
    derive,
    jet,
    key_degree,
    multi_indices,
    window_keys,
)
from .exact_linalg import SparseVec
from .lincomb import LinComb, add_into

__all__ = [
    "VectorFieldElem",
    "bracket_fields",
    "LPlusGenerator",
    "GradedLieAlgebra",
    "build_lplus",
    "build_vector_fields",
    "build_semidirect",
    "SmashElem",
    "smash",
    "smash_bracket",
    "delta_element",
    "JetAlgebroid",
]


# ---------------------------------------------------------------- vector fields


class VectorFieldElem(LinComb):
    """``Σ c · x^key ∂_i`` stored under keys ``(key, i)``."""

    __slots__ = ("variety",)

    def __init__(self, variety, terms=()):
        self.variety = variety
        super().__init__(terms)

    def _new(self, terms):
        obj = VectorFieldElem.__new__(VectorFieldElem)
        obj.variety = self.variety
        obj.terms = terms
        return obj

    def _check(self, other):
        if getattr(other, "variety", None) != self.variety:
            raise ValueError("variety mismatch")

    @classmethod
    def from_components(cls, components: Sequence[FunctionElem]) -> "VectorFieldElem":
        var = components[0].variety
        if len(components) != var.n:
            raise ValueError("need one component per coordinate")
        terms = {}
        for i, f in enumerate(components):
            if f.variety != var:
                raise ValueError("components live on different varieties")
            for key, c in f.terms.items():
                terms[(key, i)] = c
        return cls(var, terms)

    @classmethod
    def partial(cls, variety, i: int = 0, coeff: Optional[FunctionElem] = None) -> "VectorFieldElem":
        f = coeff if coeff is not None else FunctionElem.one(variety)
        return cls(variety, {(key, i): c for key, c in f.terms.items()})

    @classmethod
    def zero(cls, variety) -> "VectorFieldElem":
        return cls(variety, {})

    def component(self, i: int) -> FunctionElem:
        return FunctionElem(self.variety, {key: c for (key, j), c in self.terms.items() if j == i})

    def components(self) -> List[FunctionElem]:
        return [self.component(i) for i in range(self.variety.n)]

    def times(self, f: FunctionElem) -> "VectorFieldElem":
        """The A-module structure ``f · η``."""
        return VectorFieldElem.from_components([f * c for c in self.components()])

    def apply(self, f: FunctionElem) -> FunctionElem:
        """``η(f) = Σ η_i ∂_i f``."""
        out = FunctionElem.zero(self.variety)
        for i, c in enumerate(self.components()):
            if c:
                out = out + c * derive(f, i)
        return out

    def weight(self) -> Optional[int]:
        if isinstance(self.variety, PuncturedSphere) or not self.terms:
            return None
        ws = {sum(k) - 1 for k, _ in self.terms}
        return ws.pop() if len(ws) == 1 else None


def bracket_fields(a: VectorFieldElem, b: VectorFieldElem) -> VectorFieldElem:
    """``[Σ f_i ∂_i, Σ g_j ∂_j] = Σ_j (a(g_j) - b(f_j)) ∂_j``."""
    if a.variety != b.variety:
        raise ValueError("variety mismatch")
    fa, fb = a.components(), b.components()
    return VectorFieldElem.from_components([a.apply(g) - b.apply(f) for f, g in zip(fa, fb)])


# ---------------------------------------------------------------- graded algebras


@dataclass(frozen=True, order=True)
class LPlusGenerator:
    """``X^exponent ∂/∂X_direction`` (direction 0-based)."""

    exponent: Tuple[int, ...]
    direction: int

    def __post_init__(self):
        if sum(self.exponent) < 1 or min(self.exponent) < 0:
            raise ValueError("L+ generators need |exponent| >= 1")
        if not 0 <= self.direction < len(self.exponent):
            raise ValueError("direction out of range")

    @property
    def weight(self) -> int:
        return sum(self.exponent) - 1

    def __str__(self) -> str:
        n = len(self.exponent)
        names = ["X"] if n == 1 else [f"X{i + 1}" for i in range(n)]
        mono = "*".join(names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(self.exponent) if e)
        return f"{mono}*d/d{names[self.direction]}"


class GradedLieAlgebra:
    """A finite listing of basis labels for a (possibly infinite) Lie algebra.

    ``bracket_fn(a, b)`` returns ``{label: coefficient}`` exactly; labels in
    the result need not belong to the listed basis (windows of vector-field
    algebras), in which case :meth:`bracket` refuses to index them.  Weights
    are ``None`` for algebras without an integer grading.
    """

    def __init__(
        self,
        name: str,
        basis: Sequence[Hashable],
        weights: Sequence[Optional[Fraction]],
        bracket_fn: Callable[[Hashable, Hashable], Dict[Hashable, Fraction]],
        truncation_degree: Optional[int] = None,
        weight_fn: Optional[Callable[[Hashable], Optional[int]]] = None,
    ):
        self.name = name
        self.basis = list(basis)
        self.weights = list(weights)
        self.index = {b: i for i, b in enumerate(self.basis)}
        self.truncation_degree = truncation_degree
        self._bracket_fn = bracket_fn
        self._weight_fn = weight_fn
        self._cache: Dict[Tuple[Hashable, Hashable], Dict[Hashable, Fraction]] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def weight(self, i: int):
        return self.weights[i]

    def label_weight(self, label: Hashable):
        if label in self.index:
            return self.weights[self.index[label]]
        return self._weight_fn(label) if self._weight_fn else None

    def bracket_labels(self, a: Hashable, b: Hashable) -> Dict[Hashable, Fraction]:
        key = (a, b)
        with self._lock:
            hit = self._cache.get(key)
        if hit is None:
            hit = {k: v for k, v in self._bracket_fn(a, b).items() if v}
            with self._lock:
                self._cache[key] = hit
        return hit

    def bracket(self, i: int, j: int) -> SparseVec:
        out = {}
        for label, c in self.bracket_labels(self.basis[i], self.basis[j]).items():
            if label not in self.index:
                raise KeyError(f"[{self.basis[i]}, {self.basis[j]}] leaves the listed basis via {label}")
            out[self.index[label]] = c
        return SparseVec.from_dict(out)

    def bracket_vec(self, u: Dict[Hashable, Fraction], v: Dict[Hashable, Fraction]) -> Dict[Hashable, Fraction]:
        """Bilinear extension to finite label combinations."""
        acc: Dict[Hashable, Fraction] = {}
        for a, ca in u.items():
            for b, cb in v.items():
                for label, c in self.bracket_labels(a, b).items():
                    add_into(acc, label, ca * cb * c)
        return acc


def _lplus_bracket(x: LPlusGenerator, y: LPlusGenerator, max_degree: Optional[int]) -> Dict[LPlusGenerator, Fraction]:
    # [X^a ∂_i, X^b ∂_j] = b_i X^{a+b-e_i} ∂_j - a_j X^{a+b-e_j} ∂_i
    a, i, b, j = x.exponent, x.direction, y.exponent, y.direction
    out: Dict[LPlusGenerator, Fraction] = {}
    if max_degree is not None and x.weight + y.weight > max_degree:
        return out
    s = [p + q for p, q in zip(a, b)]
    if b[i]:
        e = list(s)
        e[i] -= 1
        add_into(out, LPlusGenerator(tuple(e), j), Fraction(b[i]))
    if a[j]:
        e = list(s)
        e[j] -= 1
        add_into(out, LPlusGenerator(tuple(e), i), Fraction(-a[j]))
    return out


def lplus_generators(n: int, max_degree: int) -> List[LPlusGenerator]:
    gens = []
    for m in multi_indices(n, max_degree + 1):
        if sum(m) >= 1:
            gens.extend(LPlusGenerator(m, j) for j in range(n))
    gens.sort(key=lambda g: (g.weight, g.exponent, g.direction))
    return gens


def build_lplus(n: int, max_degree: int) -> GradedLieAlgebra:
    """The truncated quotient ``L₊ / L_{>max_degree}`` of vector fields on
    affine n-space vanishing at the origin.  Its degree-0 part is gl_n, with
    ``X_i ∂/∂X_j`` playing the role of the matrix unit ``E_ij``."""
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    gens = lplus_generators(n, max_degree)
    return GradedLieAlgebra(
        f"lplus(n={n},max_degree={max_degree})",
        gens,
        [Fraction(g.weight) for g in gens],
        lambda x, y: _lplus_bracket(x, y, max_degree),
        truncation_degree=max_degree,
        weight_fn=lambda g: Fraction(g.weight),
    )


def _field_weight(variety, key) -> Optional[int]:
    d = key_degree(variety, key)
    return None if d is None else d - 1


def _monomial_field_bracket(variety, k1, i, k2, j) -> Dict[Tuple, Fraction]:
    a = VectorFieldElem(variety, {(k1, i): 1})
    b = VectorFieldElem(variety, {(k2, j): 1})
    return dict(bracket_fields(a, b).terms)


def build_vector_fields(variety, window: Tuple[int, int]) -> GradedLieAlgebra:
    """Monomial vector fields ``x^a ∂_j`` listed inside a weight window.

    On the punctured sphere there is no grading; the window ``(lo, hi)`` then
    bounds exponents and pole orders by ``hi``.  Brackets are exact even when
    they leave the listed window.
    """
    lo, hi = window
    if lo > hi:
        raise ValueError("empty window")
    n = variety.n
    if isinstance(variety, PuncturedSphere):
        keys = window_keys(variety, max(hi, 0))
    elif isinstance(variety, Affine):
        keys = [m for m in multi_indices(n, hi + 1) if lo <= sum(m) - 1 <= hi]
    else:
        bound = max(abs(lo), abs(hi)) + 1
        keys = [m for m in product(range(-bound, bound + 1), repeat=n) if lo <= sum(m) - 1 <= hi]
    labels = [(k, j) for k in keys for j in range(n)]
    labels.sort(key=lambda l: ((_field_weight(variety, l[0]) or 0), l))
    return GradedLieAlgebra(
        f"vector_fields({variety.label()},{lo}..{hi})",
        labels,
        [None if _field_weight(variety, k) is None else Fraction(_field_weight(variety, k)) for k, _ in labels],
        lambda x, y: _monomial_field_bracket(variety, x[0], x[1], y[0], y[1]),
        weight_fn=lambda l: _field_weight(variety, l[0]),
    )


def build_semidirect(
    v_presentation: GradedLieAlgebra,
    lplus: GradedLieAlgebra,
    algebra,
    weight_window: Tuple[int, int],
) -> GradedLieAlgebra:
    """``V ⋉ (A ⊗ g)`` where V acts on the A factor by derivations.

    Labels are ``("V", key, j)`` for ``x^key ∂_j`` and ``("A", key, x)`` for
    ``x^key ⊗ x``.  The weight of ``x^key ⊗ x`` is ``deg(key) + wt(x)``,
    the eigenvalue of ``ad(Σ x_i ∂_i + 1 ⊗ Σ X_i ∂/∂X_i)``.
    """
    lo, hi = weight_window
    if lo > hi:
        raise ValueError("empty window")
    var = algebra
    graded = not isinstance(var, PuncturedSphere)

    def wt(label):
        if label[0] == "V":
            return _field_weight(var, label[1])
        d = key_degree(var, label[1])
        return None if d is None else d + lplus.label_weight(label[2])

    def br(x, y):
        out: Dict[Hashable, Fraction] = {}
        if x[0] == "V" and y[0] == "V":
            for (k, j), c in _monomial_field_bracket(var, x[1], x[2], y[1], y[2]).items():
                out[("V", k, j)] = c
        elif x[0] == "V":
            f = derive(FunctionElem(var, {y[1]: 1}), x[2])
            f = FunctionElem(var, {x[1]: 1}) * f
            for k, c in f.terms.items():
                add_into(out, ("A", k, y[2]), c)
        elif y[0] == "V":
            return {k: -c for k, c in br(y, x).items()}
        else:
            prod = FunctionElem(var, {x[1]: 1}) * FunctionElem(var, {y[1]: 1})
            for g, cg in lplus.bracket_labels(x[2], y[2]).items():
                for k, c in prod.terms.items():
                    add_into(out, ("A", k, g), c * cg)
        return out

    labels = [("V", k, j) for (k, j) in v_presentation.basis]
    if graded:
        labels = [l for l in labels if lo <= wt(l) <= hi]
        if isinstance(var, Affine):
            akeys = [m for m in multi_indices(var.n, max(hi, 0))]
        else:
            bound = max(abs(lo), abs(hi)) + 1
            akeys = list(product(range(-bound, bound + 1), repeat=var.n))
        for k in akeys:
            for g in lplus.basis:
                l = ("A", k, g)
                if lo <= wt(l) <= hi:
                    labels.append(l)
    else:
        for k in window_keys(var, max(hi, 0)):
            labels.extend(("A", k, g) for g in lplus.basis)
    if not labels:
        raise ValueError("empty window")
    weights = [None if wt(l) is None else Fraction(wt(l)) for l in labels]
    return GradedLieAlgebra(
        f"semidirect({v_presentation.name},{lplus.name})",
        labels,
        weights,
        br,
        weight_fn=wt,
    )


# ---------------------------------------------------------------- smash product A # V


class SmashElem(LinComb):
    """Element of ``A # V``: keys ``(fkey, gkey, j)`` mean ``x^fkey # x^gkey ∂_j``."""

    __slots__ = ("variety",)

    def __init__(self, variety, terms=()):
        self.variety = variety
        super().__init__(terms)

    def _new(self, terms):
        obj = SmashElem.__new__(SmashElem)
        obj.variety = self.variety
        obj.terms = terms
        return obj

    def _check(self, other):
        if getattr(other, "variety", None) != self.variety:
            raise ValueError("variety mismatch")

    def pairs(self) -> Iterable[Tuple[FunctionElem, VectorFieldElem]]:
        """Yield ``(c·x^f, x^g ∂_j)`` for each stored term."""
        var = self.variety
        for (fk, gk, j), c in self:
            yield FunctionElem(var, {fk: c}), VectorFieldElem(var, {(gk, j): 1})

    def left_mul(self, h: FunctionElem) -> "SmashElem":
        """A-module structure ``h · (f # η) = hf # η``."""
        out = SmashElem(self.variety)
        for f, eta in self.pairs():
            out = out + smash(h * f, eta)
        return out

    def tensor_act(self, h_left: FunctionElem, h_right: FunctionElem) -> "SmashElem":
        """``(h_left ⊗ h_right) · (f # η) = h_left f # h_right η``."""
        out = SmashElem(self.variety)
        for f, eta in self.pairs():
            out = out + smash(h_left * f, eta.times(h_right))
        return out

    def anchor(self, h: FunctionElem) -> FunctionElem:
        """Action on A: ``(f # η)(h) = f η(h)``."""
        out = FunctionElem.zero(self.variety)
        for f, eta in self.pairs():
            out = out + f * eta.apply(h)
        return out


def smash(f: FunctionElem, eta: VectorFieldElem) -> SmashElem:
    """Normal form of ``f # η`` (bilinear in both factors)."""
    if f.variety != eta.variety:
        raise ValueError("variety mismatch")
    terms: Dict[Tuple, Fraction] = {}
    for fk, cf in f.terms.items():
        for (gk, j), ce in eta.terms.items():
            add_into(terms, (fk, gk, j), cf * ce)
    return SmashElem(f.variety, terms)


@lru_cache(maxsize=None)
def _smash_basis_bracket(variety, t1, t2) -> Tuple[Tuple[Tuple, Fraction], ...]:
    (fk, gk, i), (hk, kk, j) = t1, t2
    f = FunctionElem(variety, {fk: 1})
    g = FunctionElem(variety, {hk: 1})
    eta = VectorFieldElem(variety, {(gk, i): 1})
    mu = VectorFieldElem(variety, {(kk, j): 1})
    out = smash(f * eta.apply(g), mu) - smash(g * mu.apply(f), eta) + smash(f * g, bracket_fields(eta, mu))
    return tuple(out.terms.items())


def smash_bracket(u: SmashElem, v: SmashElem) -> SmashElem:
    """``[f#η, g#μ] = f η(g) # μ - g μ(f) # η + fg # [η, μ]``, bilinearly."""
    if u.variety != v.variety:
        raise ValueError("variety mismatch")
    acc: Dict[Tuple, Fraction] = {}
    for t1, c1 in u.terms.items():
        for t2, c2 in v.terms.items():
            for key, c in _smash_basis_bracket(u.variety, t1, t2):
                add_into(acc, key, c1 * c2 * c)
    return SmashElem(u.variety, acc)


def delta_element(g: FunctionElem, f: FunctionElem, s: int, eta: VectorFieldElem) -> SmashElem:
    """``Σ_{i=0}^s (-1)^i C(s,i) g f^{s-i} # f^i η``, a spanning element of
    ``Δ^s ⊗_A V``."""
    if s < 1:
        raise ValueError("s must be >= 1")
    out = SmashElem(f.variety)
    for i in range(s + 1):
        c = (-1) ** i * comb(s, i)
        out = out + smash((g * f ** (s - i)).scale(c), eta.times(f ** i))
    return out


# ---------------------------------------------------------------- jets of vector fields


class JetAlgebroid:
    """``A # V`` modulo the ideal ``Δ^order ⊗_A V``, presented over A.

    For uniformizing parameters ``x_1..x_n`` the quotient is a free A-module
    with basis ``τ^m ∂_j`` (``|m| < order``), where
    ``τ^m = Π_l (1 ⊗ x_l - x_l ⊗ 1)^{m_l}`` acts on ``1 # ∂_j`` from the left.
    Under the jet map ``τ^m ↦ t^m``, so reduction of an arbitrary element
    ``f # g ∂_j`` is ``jet(f, g)`` truncated below ``order``.  Brackets and
    the anchor are computed from :func:`smash_bracket` and reduced back, so
    nothing here depends on a closed-form description of the jet algebra.

    Generators are ordered by ``(|m|, m, j)``; the generators of a smaller
    order form a prefix.
    """

    def __init__(self, variety, order: int):
        if order < 1:
            raise ValueError("order must be >= 1")
        self.variety = variety
        self.order = order
        n = variety.n
        self.gens: List[Tuple[Tuple[int, ...], int]] = [
            (m, j) for m in multi_indices(n, order - 1) for j in range(n)
        ]
        self.index = {g: i for i, g in enumerate(self.gens)}
        self.weights = [Fraction(sum(m) - 1) for m, _ in self.gens]
        self._smash: Dict[int, SmashElem] = {}
        self._bracket: Dict[Tuple[int, int], Dict[int, FunctionElem]] = {}
        self._lock = threading.Lock()

    def ngens(self, order: int) -> int:
        """Number of generators ``τ^m ∂_j`` with ``|m| < order``."""
        n = self.variety.n
        return sum(1 for m, _ in self.gens if sum(m) < order) if order <= self.order else len(self.gens) + 0 * n

    def smash_gen(self, g: int) -> SmashElem:
        hit = self._smash.get(g)
        if hit is not None:
            return hit
        var = self.variety
        m, j = self.gens[g]
        out = SmashElem(var)
        for r in product(*(range(e + 1) for e in m)):
            coef = 1
            left = FunctionElem.one(var)
            right = FunctionElem.one(var)
            for l, (ml, rl) in enumerate(zip(m, r)):
                coef *= comb(ml, rl) * (-1) ** (ml - rl)
                x = FunctionElem.variable(var, l)
                left = left * x ** (ml - rl)
                right = right * x ** rl
            out = out + smash(left.scale(coef), VectorFieldElem.partial(var, j, right))
        with self._lock:
            self._smash[g] = out
        return out

    def reduce(self, u: SmashElem) -> Dict[int, FunctionElem]:
        """Coordinates of ``u`` in the basis ``τ^m ∂_j`` modulo ``Δ^order``."""
        var = self.variety
        acc: Dict[int, FunctionElem] = {}
        for f, eta in u.pairs():
            for j in range(var.n):
                g = eta.component(j)
                if not g:
                    continue
                js = jet(f, g, self.order - 1)
                for m, coeff in js.coeffs.items():
                    idx = self.index[(m, j)]
                    acc[idx] = acc[idx] + coeff if idx in acc else coeff
        return {i: c for i, c in acc.items() if c}

    def bracket(self, a: int, b: int) -> Dict[int, FunctionElem]:
        key = (a, b)
        with self._lock:
            hit = self._bracket.get(key)
        if hit is None:
            hit = self.reduce(smash_bracket(self.smash_gen(a), self.smash_gen(b)))
            with self._lock:
                self._bracket[key] = hit
        return hit

    def anchor(self, g: int, h: FunctionElem) -> FunctionElem:
        return self.smash_gen(g).anchor(h)

    def bracket_elems(self, u: Dict[int, FunctionElem], v: Dict[int, FunctionElem]) -> Dict[int, FunctionElem]:
        """Bracket of A-combinations of generators (Lie algebroid rule)."""
        acc: Dict[int, FunctionElem] = {}

        def add(i, f):
            if f:
                acc[i] = acc[i] + f if i in acc else f

        for a, fa in u.items():
            for b, fb in v.items():
                for c, fc in self.bracket(a, b).items():
                    add(c, fa * fb * fc)
                # f_a X_a (f_b) X_b - f_b X_b (f_a) X_a
                add(b, fa * self.anchor(a, fb))
                add(a, -(fb * self.anchor(b, fa)))
        return {i: f for i, f in acc.items() if f}
