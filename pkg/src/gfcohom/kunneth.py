"""Star map, its Leibniz identity, and assembly of both sides of the
decomposition ``H_GF(V, A⊗W) ≅ H_dR(X) ⊗ H(L₊, W)``.

Cochains on ``V ⋉ (A ⊗ g)`` take :class:`SemidirectElem` arguments.  Labels
are ``("V", key, j)`` for ``x^key ∂_j`` and ``("A", key, x)`` for
``x^key ⊗ x`` with ``x`` a basis label of g (here a truncated L₊).  The
semidirect product acts on ``A ⊗ W`` by ``v·(h⊗w) = v(h)⊗w`` and
``(f⊗x)·(h⊗w) = fh ⊗ x·w``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .coefficient_modules import LPlusModule, TensorElem
from .coordinate_algebras import Affine, FunctionElem, Torus, window_keys
from .cochain_complex import ce_differential, lplus_cohomology, stabilized_gf_cohomology
from .derham import FormElem, derham_betti, phi_map
from .lie_vectorfields import GradedLieAlgebra, VectorFieldElem, bracket_fields
from .lincomb import LinComb, add_into

__all__ = [
    "SemidirectElem",
    "SemidirectContext",
    "GCochain",
    "star",
    "verify_star_leibniz",
    "random_star_sample",
    "BettiTable",
    "convolve",
    "assemble_rhs",
    "compare_main_theorem",
]


class SemidirectElem(LinComb):
    __slots__ = ("variety",)

    def __init__(self, variety, terms=()):
        self.variety = variety
        super().__init__(terms)

    def _new(self, terms):
        obj = SemidirectElem.__new__(SemidirectElem)
        obj.variety = self.variety
        obj.terms = terms
        return obj

    def _check(self, other):
        if getattr(other, "variety", None) != self.variety:
            raise ValueError("variety mismatch")

    @classmethod
    def from_field(cls, eta: VectorFieldElem) -> "SemidirectElem":
        return cls(eta.variety, {("V", k, j): c for (k, j), c in eta.terms.items()})

    @classmethod
    def from_tensor(cls, f: FunctionElem, label: Hashable) -> "SemidirectElem":
        return cls(f.variety, {("A", k, label): c for k, c in f.terms.items()})

    def field_part(self) -> VectorFieldElem:
        return VectorFieldElem(self.variety, {(l[1], l[2]): c for l, c in self.terms.items() if l[0] == "V"})


class SemidirectContext:
    """Bracket and action data for ``V ⋉ (A ⊗ g)`` acting on ``A ⊗ W``."""

    def __init__(self, variety, lplus: GradedLieAlgebra, module: LPlusModule):
        if module.n != variety.n or len(lplus.basis[0].exponent) != variety.n:
            raise ValueError("dimension mismatch")
        if lplus.truncation_degree is not None and lplus.truncation_degree < module.annihilation_degree - 1:
            raise ValueError("truncation too small for the module")
        self.variety = variety
        self.lplus = lplus
        self.module = module

    def _label_bracket(self, x, y) -> Dict[Hashable, Fraction]:
        var = self.variety
        out: Dict[Hashable, Fraction] = {}
        if x[0] == "V" and y[0] == "V":
            b = bracket_fields(VectorFieldElem(var, {(x[1], x[2]): 1}), VectorFieldElem(var, {(y[1], y[2]): 1}))
            for (k, j), c in b.terms.items():
                out[("V", k, j)] = c
        elif x[0] == "V":
            f = VectorFieldElem(var, {(x[1], x[2]): 1}).apply(FunctionElem(var, {y[1]: 1}))
            for k, c in f.terms.items():
                out[("A", k, y[2])] = c
        elif y[0] == "V":
            return {k: -c for k, c in self._label_bracket(y, x).items()}
        else:
            prod = FunctionElem(var, {x[1]: 1}) * FunctionElem(var, {y[1]: 1})
            for g, cg in self.lplus.bracket_labels(x[2], y[2]).items():
                for k, c in prod.terms.items():
                    add_into(out, ("A", k, g), c * cg)
        return out

    def bracket(self, u: SemidirectElem, v: SemidirectElem) -> SemidirectElem:
        acc: Dict[Hashable, Fraction] = {}
        for a, ca in u.terms.items():
            for b, cb in v.terms.items():
                for l, c in self._label_bracket(a, b).items():
                    add_into(acc, l, ca * cb * c)
        return SemidirectElem(self.variety, acc)

    def act(self, u: SemidirectElem, m: TensorElem) -> TensorElem:
        var = self.variety
        acc: Dict[Hashable, Fraction] = {}
        for l, c in u.terms.items():
            for (hk, widx), cm in m.terms.items():
                h = FunctionElem(var, {hk: c * cm})
                if l[0] == "V":
                    for k, v in VectorFieldElem(var, {(l[1], l[2]): 1}).apply(h).terms.items():
                        add_into(acc, (k, widx), v)
                else:
                    image = self.module.act(l[2], widx)
                    if not image:
                        continue
                    for k, v in (FunctionElem(var, {l[1]: 1}) * h).terms.items():
                        for j, w in image.items():
                            add_into(acc, (k, j), v * w)
        return TensorElem(var, acc)


class GCochain:
    """Alternating cochain on g with values in W, stored on sorted basis tuples.

    Called with label combinations (``{label: coeff}``) it returns a
    ``{module index: coeff}`` dict, extended multilinearly.
    """

    def __init__(self, lplus: GradedLieAlgebra, degree: int, values: Dict[Tuple[int, ...], Dict[int, Fraction]]):
        self.lplus = lplus
        self.degree = degree
        self.values = {}
        for t, v in values.items():
            if len(t) != degree or list(t) != sorted(set(t)):
                raise ValueError("GCochain keys must be strictly increasing tuples of the right length")
            v = {i: Fraction(c) for i, c in v.items() if c}
            if v:
                self.values[t] = v

    def on_labels(self, labels: Sequence[Hashable]) -> Dict[int, Fraction]:
        idx = [self.lplus.index.get(l) for l in labels]
        if any(i is None for i in idx) or len(set(idx)) != len(idx):
            return {}
        order = sorted(range(len(idx)), key=lambda r: idx[r])
        sign = _perm_sign(order)
        val = self.values.get(tuple(idx[r] for r in order), {})
        return {i: sign * c for i, c in val.items()}

    def __call__(self, *elems: Dict[Hashable, Fraction]) -> "WVec":
        if len(elems) != self.degree:
            raise TypeError(f"expected {self.degree} arguments")
        acc: Dict[int, Fraction] = {}
        for combo in _expand([list(e.items()) for e in elems]):
            labels, coeff = combo
            for i, c in self.on_labels(labels).items():
                add_into(acc, i, coeff * c)
        return WVec(acc)


class WVec(LinComb):
    """Vector in W keyed by module basis index."""

    __slots__ = ()


def _expand(choices: List[List[Tuple[Hashable, Fraction]]]):
    out = [((), Fraction(1))]
    for opts in choices:
        out = [(labels + (l,), c * cl) for labels, c in out for l, cl in opts]
    return out


def _perm_sign(order: Sequence[int]) -> int:
    sign = 1
    s = list(order)
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                sign = -sign
    return sign


def g_differential(beta, k: int, lplus: GradedLieAlgebra, module: LPlusModule):
    """CE differential on g with values in W, on label combinations."""

    def act(x: Dict[Hashable, Fraction], w: WVec) -> WVec:
        acc: Dict[int, Fraction] = {}
        for label, c in x.items():
            for idx, cw in w.terms.items():
                for j, v in module.act(label, idx).items():
                    add_into(acc, j, c * cw * v)
        return WVec(acc)

    return ce_differential(beta, k, lplus.bracket_vec, act, WVec())


def a_differential(alpha, k: int, variety):
    """CE differential of an A-valued cochain on V (``η·f = η(f)``)."""
    return ce_differential(alpha, k, bracket_fields, lambda eta, f: eta.apply(f), FunctionElem.zero(variety))


def star(alpha: Callable[..., FunctionElem], k: int, beta: Callable[..., Any], m: int, variety) -> Callable[..., TensorElem]:
    """``(α∗β)(v_1..v_k, f_1⊗x_1..f_m⊗x_m) = f_1⋯f_m α(v_1..v_k) ⊗ β(x_1..x_m)``.

    Arguments in other positions are moved into this shape with the sign of
    the permutation; the value is zero unless exactly k arguments lie in V.
    """

    def cochain(*args: SemidirectElem) -> TensorElem:
        if len(args) != k + m:
            raise TypeError(f"expected {k + m} arguments")
        acc = TensorElem(variety)
        for labels, coeff in _expand([list(a.terms.items()) for a in args]):
            v_pos = [i for i, l in enumerate(labels) if l[0] == "V"]
            if len(v_pos) != k:
                continue
            a_pos = [i for i in range(len(labels)) if labels[i][0] == "A"]
            sign = _perm_sign(v_pos + a_pos)
            fields = [VectorFieldElem(variety, {(labels[i][1], labels[i][2]): 1}) for i in v_pos]
            f = FunctionElem.const(variety, sign * coeff)
            for i in a_pos:
                f = f * FunctionElem(variety, {labels[i][1]: 1})
            val_a = alpha(*fields) * f
            if not val_a:
                continue
            val_b = beta(*({labels[i][2]: Fraction(1)} for i in a_pos))
            for widx, cw in val_b.terms.items():
                acc = acc + TensorElem.pure(val_a.scale(cw), widx)
        return acc

    return cochain


def verify_star_leibniz(
    alpha: Callable[..., FunctionElem],
    k: int,
    beta: GCochain,
    ctx: SemidirectContext,
    samples: Sequence[Sequence[SemidirectElem]],
) -> Tuple[int, int]:
    """Check ``d(α∗β) = dα∗β + (-1)^k α∗dβ`` on argument tuples.

    Returns ``(passed, total)``.
    """
    var = ctx.variety
    m = beta.degree
    lhs = ce_differential(star(alpha, k, beta, m, var), k + m, ctx.bracket, ctx.act, TensorElem(var))
    da = star(a_differential(alpha, k, var), k + 1, beta, m, var)
    db = star(alpha, k, g_differential(beta, m, ctx.lplus, ctx.module), m + 1, var)
    passed = 0
    for args in samples:
        if len(args) != k + m + 1:
            raise ValueError("sample has the wrong number of arguments")
        left = lhs(*args)
        right = da(*args) + (db(*args) if k % 2 == 0 else -db(*args))
        if left == right:
            passed += 1
    return passed, len(samples)


def _random_function(rng: random.Random, variety, K: int, terms: int = 2) -> FunctionElem:
    keys = window_keys(variety, K)
    out = FunctionElem.zero(variety)
    for _ in range(terms):
        out = out + FunctionElem(variety, {rng.choice(keys): rng.randint(-3, 3)})
    return out


def random_star_sample(rng: random.Random, variety, ctx: SemidirectContext, k: int, m: int, n_args: int = 4, K: int = 2):
    """Random A-linear α (via Φ of a random form), random β and argument tuples."""
    n = variety.n
    if k > n:
        raise ValueError("A-linear alternating cochains on V vanish above degree n")
    form = FormElem(variety, k)
    for idx in combinations(range(n), k):
        form = form + FormElem.make(_random_function(rng, variety, K), idx)
    alpha = phi_map(form)
    dim = len(ctx.lplus.basis)
    values = {}
    for t in combinations(range(dim), m):
        if rng.random() < 0.6:
            values[t] = {i: rng.randint(-3, 3) for i in range(ctx.module.dim)}
    beta = GCochain(ctx.lplus, m, values)
    samples = []
    for _ in range(n_args):
        args = []
        for _ in range(k + m + 1):
            e = SemidirectElem(variety)
            for _ in range(rng.randint(1, 2)):
                if rng.random() < 0.5:
                    f = _random_function(rng, variety, K, 1)
                    e = e + SemidirectElem.from_field(VectorFieldElem.partial(variety, rng.randrange(n), f))
                else:
                    f = _random_function(rng, variety, K, 1)
                    e = e + SemidirectElem.from_tensor(f, rng.choice(ctx.lplus.basis))
            args.append(e)
        samples.append(args)
    return alpha, beta, samples


# ---------------------------------------------------------------- tables


@dataclass
class BettiTable:
    label: str
    dims: List[int]
    stabilized: List[bool] = field(default_factory=list)

    def __post_init__(self):
        if any(d < 0 for d in self.dims):
            raise ValueError("negative Betti number")
        if not self.stabilized:
            self.stabilized = [True] * len(self.dims)

    def to_json(self) -> Dict[str, Any]:
        return {"label": self.label, "dims": list(self.dims), "stabilized": list(self.stabilized)}


def convolve(a: Sequence[int], b: Sequence[int], k_max: int) -> List[int]:
    """Graded Künneth convolution ``c_k = Σ_{i+j=k} a_i b_j``."""
    return [
        sum(a[i] * b[k - i] for i in range(k + 1) if i < len(a) and k - i < len(b))
        for k in range(k_max + 1)
    ]


def _convolve_flags(a: Sequence[bool], b: Sequence[bool], k_max: int) -> List[bool]:
    return [
        all(a[i] and b[k - i] for i in range(k + 1) if i < len(a) and k - i < len(b))
        for k in range(k_max + 1)
    ]


def assemble_rhs(
    variety,
    W: LPlusModule,
    k_max: int,
    derham_truncation: int = 2,
    lplus_truncation: Optional[int] = None,
    lplus_dims: Optional[Sequence[int]] = None,
) -> Tuple[BettiTable, BettiTable, BettiTable]:
    """``dims[k] = Σ_{i+j=k} b_i(X) · dim H^j(L₊, W)``.

    Returns ``(rhs, de Rham table, L₊ table)``.  ``lplus_dims`` may be
    supplied to use externally computed L₊ data.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    dr = [derham_betti(variety, i, derham_truncation) for i in range(min(variety.n, k_max) + 1)]
    dr_table = BettiTable(f"H_dR({variety.label()})", [r.betti for r in dr], [r.stabilized for r in dr])
    if lplus_dims is None:
        slices = lplus_cohomology(W, k_max, 0, lplus_truncation)
        lp_table = BettiTable(f"H(L+,{W.name})", [s.betti for s in slices])
    else:
        lp_table = BettiTable(f"H(L+,{W.name})", list(lplus_dims)[: k_max + 1])
    rhs = BettiTable(
        f"H_dR({variety.label()}) (x) H(L+,{W.name})",
        convolve(dr_table.dims, lp_table.dims, k_max),
        _convolve_flags(dr_table.stabilized, lp_table.stabilized, k_max),
    )
    return rhs, dr_table, lp_table


def compare_main_theorem(variety, W: LPlusModule, k_max: int, p_max: int, threads: int = 1) -> Dict[str, Any]:
    """Direct finite-order cohomology against the assembled right-hand side."""
    rhs, dr, lp = assemble_rhs(variety, W, k_max)
    direct_ok = isinstance(variety, Affine) or (isinstance(variety, Torus) and variety.n == 1)
    report: Dict[str, Any] = {
        "variety": variety.label(),
        "module": W.name,
        "k_max": k_max,
        "p_max": p_max,
        "rhs": rhs.to_json(),
        "derham": dr.to_json(),
        "lplus": lp.to_json(),
        "rows": [],
    }
    if not direct_ok:
        report["direct"] = None
        report["status"] = "rhs_only"
        return report
    run = lambda k: stabilized_gf_cohomology(variety, W, k, p_max)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(k_max + 1)))
    else:
        results = [run(k) for k in range(k_max + 1)]
    statuses = []
    for k, res in enumerate(results):
        equal = res.value == rhs.dims[k]
        if equal and res.stabilized and rhs.stabilized[k]:
            status = "confirmed"
        elif equal:
            status = "equal_not_stabilized"
        else:
            status = "mismatch"
        statuses.append(status)
        row = res.to_json()
        row.update({"direct": res.value, "rhs": rhs.dims[k], "status": status})
        report["rows"].append(row)
    report["direct"] = [r.value for r in results]
    if "mismatch" in statuses:
        report["status"] = "mismatch"
    elif "equal_not_stabilized" in statuses:
        report["status"] = "not_stabilized"
    else:
        report["status"] = "confirmed"
    return report
