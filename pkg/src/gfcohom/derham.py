"""Algebraic de Rham complex of A and the map Φ into A-linear cochains on V.

Forms are sums ``f dx_I`` with ``I`` a strictly increasing tuple of 0-based
coordinate indices.  Betti numbers are computed on exponent windows:

* affine space: exponents ``0..K``; torus: exponents ``-K..K``;
* punctured sphere: ``z^0..z^K`` and poles ``(z-a_i)^{-1..-K}``.

``H^k`` at window K is ``dim Z^k_K - dim(B^k ∩ C^k_K)`` where boundaries
are taken from the window K+1, which contains a primitive of every exact
form supported in window K.  The result is reported together with the value
at K+1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Any, Callable, Dict, List, Sequence, Tuple

from .coordinate_algebras import FunctionElem, derive, window_keys
from .exact_linalg import SparseMatrix, rank, restricted_image_dim
from .lie_vectorfields import VectorFieldElem
from .lincomb import LinComb, add_into

__all__ = [
    "FormElem",
    "d_deRham",
    "BettiResult",
    "derham_betti",
    "derham_table",
    "phi_map",
    "phi_rank",
]


class FormElem(LinComb):
    """Differential form; keys ``(function key, index tuple)``."""

    __slots__ = ("variety", "degree")

    def __init__(self, variety, degree: int, terms=()):
        self.variety = variety
        self.degree = degree
        super().__init__(terms)
        for _, idx in self.terms:
            if len(idx) != degree or list(idx) != sorted(set(idx)) or (idx and idx[-1] >= variety.n):
                raise ValueError(f"bad wedge index {idx} for a {degree}-form")

    def _new(self, terms):
        obj = FormElem.__new__(FormElem)
        obj.variety = self.variety
        obj.degree = self.degree
        obj.terms = terms
        return obj

    def _check(self, other):
        if getattr(other, "variety", None) != self.variety or getattr(other, "degree", None) != self.degree:
            raise ValueError("forms of different variety or degree")

    @classmethod
    def make(cls, f: FunctionElem, idx: Sequence[int]) -> "FormElem":
        """``f dx_{i_1} ∧ … ∧ dx_{i_k}`` for any index order (sorted with sign)."""
        idx = list(idx)
        if len(set(idx)) != len(idx):
            return cls(f.variety, len(idx))
        sign = _perm_sign(idx)
        key = tuple(sorted(idx))
        return cls(f.variety, len(idx), {(k, key): sign * c for k, c in f.terms.items()})

    def coefficient(self, idx: Tuple[int, ...]) -> FunctionElem:
        return FunctionElem(self.variety, {k: c for (k, i), c in self.terms.items() if i == idx})

    def index_sets(self) -> List[Tuple[int, ...]]:
        return sorted({i for _, i in self.terms})


def _perm_sign(seq: Sequence[int]) -> int:
    sign = 1
    s = list(seq)
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                sign = -sign
    return sign


def d_deRham(w: FormElem) -> FormElem:
    """``d(f dx_I) = Σ_i ∂_i f dx_i ∧ dx_I``."""
    var = w.variety
    acc: Dict[Tuple, Fraction] = {}
    for idx in w.index_sets():
        f = w.coefficient(idx)
        for i in range(var.n):
            if i in idx:
                continue
            df = derive(f, i)
            if not df:
                continue
            # moving dx_i past the smaller entries of I
            sign = -1 if sum(1 for j in idx if j < i) % 2 else 1
            key = tuple(sorted(idx + (i,)))
            for k, c in df.terms.items():
                add_into(acc, (k, key), sign * c)
    return FormElem(var, w.degree + 1, acc)


def _window_basis(variety, k: int, K: int) -> List[Tuple]:
    return [(key, idx) for idx in combinations(range(variety.n), k) for key in window_keys(variety, K)]


def _d_matrix(variety, k: int, K: int) -> Tuple[SparseMatrix, List[Tuple], List[Tuple]]:
    """d on the window-K basis of k-forms; rows are every key hit."""
    src = _window_basis(variety, k, K)
    cols = []
    row_index: Dict[Tuple, int] = {}
    rows_keys: List[Tuple] = []
    for key, idx in src:
        image = d_deRham(FormElem(variety, k, {(key, idx): 1}))
        col = {}
        for t, c in image.terms.items():
            if t not in row_index:
                row_index[t] = len(rows_keys)
                rows_keys.append(t)
            col[row_index[t]] = c
        cols.append(col)
    # assemble as rows x cols
    rows: List[Dict[int, Fraction]] = [dict() for _ in rows_keys]
    for j, col in enumerate(cols):
        for i, c in col.items():
            rows[i][j] = c
    return SparseMatrix.from_rows(rows, len(src)), src, rows_keys


@dataclass
class BettiResult:
    variety: str
    k: int
    truncation: int
    betti: int
    betti_next: int

    @property
    def stabilized(self) -> bool:
        return self.betti == self.betti_next

    def to_json(self) -> Dict[str, Any]:
        return {
            "variety": self.variety,
            "k": self.k,
            "truncation": self.truncation,
            "betti": self.betti,
            "betti_at_next_truncation": self.betti_next,
            "stabilized": self.stabilized,
        }


def _betti_at(variety, k: int, K: int) -> int:
    n = variety.n
    if k < 0 or k > n:
        return 0
    basis = _window_basis(variety, k, K)
    if not basis:
        return 0
    if k < n:
        d_out, _, _ = _d_matrix(variety, k, K)
        z = len(basis) - rank(d_out)
    else:
        z = len(basis)
    if k == 0:
        return z
    d_in, _, rows = _d_matrix(variety, k - 1, K + 1)
    inside = set(basis)
    b = restricted_image_dim(d_in, [i for i, key in enumerate(rows) if key in inside])
    return z - b


def derham_betti(variety, k: int, truncation: int) -> BettiResult:
    """``dim H^k_dR`` on the window ``truncation`` with the K+1 comparison value."""
    if truncation < 1:
        raise ValueError("truncation must be >= 1 so that the candidate generators are inside the window")
    return BettiResult(
        variety.label(), k, truncation, _betti_at(variety, k, truncation), _betti_at(variety, k, truncation + 1)
    )


def derham_table(variety, truncation: int) -> List[BettiResult]:
    return [derham_betti(variety, k, truncation) for k in range(variety.n + 1)]


def phi_map(w: FormElem) -> Callable[..., FunctionElem]:
    """``Φ(f dx_I)(η_1, …, η_k) = f · det(η_j(x_{I_r}))`` as a callable cochain."""
    var = w.variety
    k = w.degree
    parts = [(idx, w.coefficient(idx)) for idx in w.index_sets()]

    def cochain(*etas: VectorFieldElem) -> FunctionElem:
        if len(etas) != k:
            raise TypeError(f"expected {k} arguments")
        comps = [eta.components() for eta in etas]
        total = FunctionElem.zero(var)
        for idx, f in parts:
            total = total + f * _det([[comps[j][i] for j in range(k)] for i in idx], var)
        return total

    return cochain


def _det(mat: List[List[FunctionElem]], var) -> FunctionElem:
    """Leibniz expansion; the matrices here are at most n × n."""
    size = len(mat)
    if size == 0:
        return FunctionElem.one(var)
    total = FunctionElem.zero(var)
    for perm in permutations(range(size)):
        term = FunctionElem.const(var, _perm_sign(perm))
        for r, c in enumerate(perm):
            term = term * mat[r][c]
            if not term:
                break
        total = total + term
    return total


def phi_rank(variety, k: int, K: int) -> Tuple[int, int]:
    """Rank of Φ on the window-K k-forms, read off on coordinate-field tuples.

    Returns ``(rank, number of forms)``; injectivity means they agree.
    """
    basis = _window_basis(variety, k, K)
    fields = [VectorFieldElem.partial(variety, i) for i in range(variety.n)]
    tuples = list(combinations(range(variety.n), k))
    row_index: Dict[Tuple, int] = {}
    entries: List[Tuple[int, int, Fraction]] = []
    for j, (key, idx) in enumerate(basis):
        cochain = phi_map(FormElem(variety, k, {(key, idx): 1}))
        for t in tuples:
            for fk, c in cochain(*(fields[i] for i in t)).terms.items():
                r = row_index.setdefault((t, fk), len(row_index))
                entries.append((r, j, c))
    rows: List[Dict[int, Fraction]] = [dict() for _ in row_index]
    for r, j, c in entries:
        rows[r][j] = c
    return rank(SparseMatrix.from_rows(rows, len(basis))), len(basis)
