"""Chevalley–Eilenberg cochains, weight slices and finite-order cohomology.

Differential convention (0-based positions)::

    (dφ)(η_0, …, η_k) = Σ_{s<t} (-1)^{s+t+1} φ([η_s, η_t], η_0, …^s…^t…, η_k)
                      + Σ_s    (-1)^{s+1}   η_s · φ(η_0, …^s…, η_k)

so a 0-cochain ``w`` has ``(dw)(η) = -η·w``.  This is the negative of the
textbook differential; cohomology is unchanged.

Two shapes of computation live here:

* callable cochains, evaluated on symbolic arguments (vector fields, smash
  elements); used for lift/restrict, the finite-order condition and
  identity checks;
* matrix slices.  A *system* exposes generators with weights, structure
  constants, an action on value keys and an enumeration of value keys by
  weight.  Cochain basis keys are ``(args, value_key)`` with ``args`` a
  strictly increasing tuple of generator indices and weight
  ``wt(value) - Σ wt(args)``.

Two systems are provided: :class:`LieModuleSystem` (a truncated graded Lie
algebra over Q acting on a finite-dimensional module) and
:class:`JetSystem` (A-linear cochains on the jet algebroid
``A # V / Δ^Q ⊗_A V`` with values in ``A ⊗ W``; structure constants are
functions and are multiplied into the value keys).
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, floor
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .coefficient_modules import LPlusModule, TensorElem, field_action, smash_action
from .coordinate_algebras import Affine, FunctionElem, Torus, multi_indices
from .exact_linalg import SparseMatrix, rank, restricted_image_dim
from .lie_vectorfields import (
    GradedLieAlgebra,
    JetAlgebroid,
    SmashElem,
    VectorFieldElem,
    bracket_fields,
    build_lplus,
    smash,
    smash_bracket,
)
from .lincomb import add_into

__all__ = [
    "ce_differential",
    "field_differential",
    "smash_differential",
    "lift",
    "restrict",
    "gf_condition_check",
    "LieModuleSystem",
    "JetSystem",
    "cochain_basis",
    "differential_matrix",
    "WeightSlice",
    "build_weight_slice",
    "cohomology_dim",
    "lplus_cohomology",
    "sound_truncation",
    "GFResult",
    "saturation_order",
    "stabilized_gf_cohomology",
]


# ---------------------------------------------------------------- callable cochains


def _times(value, f: FunctionElem):
    if isinstance(value, TensorElem):
        return value.times(f)
    if isinstance(value, FunctionElem):
        return value * f
    raise TypeError(f"cannot multiply {type(value).__name__} by a function")


def ce_differential(
    phi: Callable[..., Any],
    k: int,
    bracket: Callable[[Any, Any], Any],
    act: Callable[[Any, Any], Any],
    zero: Any,
) -> Callable[..., Any]:
    """The differential of a callable k-cochain, as a callable (k+1)-cochain."""

    def dphi(*args):
        if len(args) != k + 1:
            raise TypeError(f"expected {k + 1} arguments, got {len(args)}")
        total = zero
        for s in range(k + 1):
            for t in range(s + 1, k + 1):
                rest = args[:s] + args[s + 1:t] + args[t + 1:]
                val = phi(bracket(args[s], args[t]), *rest)
                total = total + (val if (s + t) % 2 else -val)
        for s in range(k + 1):
            val = act(args[s], phi(*(args[:s] + args[s + 1:])))
            total = total + (val if s % 2 else -val)
        return total

    return dphi


def field_differential(phi, k: int, W: LPlusModule, variety) -> Callable[..., TensorElem]:
    """CE differential of a cochain on vector fields with values in ``A ⊗ W``."""
    return ce_differential(
        phi, k, bracket_fields, lambda eta, m: field_action(eta, m, W), TensorElem(variety)
    )


def smash_differential(psi, k: int, W: LPlusModule, variety) -> Callable[..., TensorElem]:
    """CE differential of a cochain on ``A # V`` with values in ``A ⊗ W``."""
    return ce_differential(
        psi, k, smash_bracket, lambda u, m: smash_action(u, m, W), TensorElem(variety)
    )


def lift(phi: Callable[..., Any], variety) -> Callable[..., Any]:
    """``φ̃(f_1#η_1, …, f_k#η_k) = f_1⋯f_k φ(η_1, …, η_k)``, extended multilinearly."""

    def psi(*args: SmashElem):
        expanded: List[Tuple[FunctionElem, Tuple[VectorFieldElem, ...]]] = [
            (FunctionElem.one(variety), ())
        ]
        for u in args:
            if u.variety != variety:
                raise ValueError("variety mismatch")
            expanded = [(f * g, etas + (eta,)) for f, etas in expanded for g, eta in u.pairs()]
        total = None
        for f, etas in expanded:
            val = _times(phi(*etas), f)
            total = val if total is None else total + val
        if total is None:
            # some argument was zero
            return phi(*(VectorFieldElem.zero(variety) for _ in args))
        return total

    return psi


def restrict(psi: Callable[..., Any], variety) -> Callable[..., Any]:
    """``φ(η_1, …, η_k) = ψ(1#η_1, …, 1#η_k)``."""
    one = FunctionElem.one(variety)
    return lambda *etas: psi(*(smash(one, eta) for eta in etas))


def gf_condition_check(
    phi: Callable[..., Any], p: int, samples: Sequence[Tuple[FunctionElem, Sequence[VectorFieldElem]]]
) -> Tuple[bool, Optional[Tuple[Any, Any]]]:
    """Check ``Σ_i (-1)^i C(p,i) f^{p-i} φ(f^i η_1, η_2, …) = 0`` on every sample.

    Returns ``(ok, witness)`` where ``witness = (sample, value)`` for the
    first failure.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    for sample in samples:
        f, etas = sample
        etas = tuple(etas)
        total = None
        for i in range(p + 1):
            val = _times(phi(etas[0].times(f ** i), *etas[1:]), f ** (p - i)).scale((-1) ** i * comb(p, i))
            total = val if total is None else total + val
        if total:
            return False, (sample, total)
    return True, None


# ---------------------------------------------------------------- systems


class LieModuleSystem:
    """Truncated graded Lie algebra acting on a finite-dimensional module.

    ``action(label, idx)`` defaults to ``module.act``; the algebra labels
    must then be :class:`LPlusGenerator` instances.
    """

    def __init__(self, algebra: GradedLieAlgebra, module: LPlusModule, action=None):
        if any(w is None for w in algebra.weights):
            raise ValueError("weight slices need a graded algebra")
        self.algebra = algebra
        self.module = module
        self.gen_weights = list(algebra.weights)
        self._action = action or module.act
        self.label = algebra.name

    def bracket(self, i: int, j: int) -> Dict[int, Fraction]:
        return dict(self.algebra.bracket(i, j).entries)

    def scale(self, c: Fraction, vkey: int) -> Dict[int, Fraction]:
        return {vkey: c}

    def act(self, i: int, vkey: int) -> Dict[int, Fraction]:
        return self._action(self.algebra.basis[i], vkey)

    def values_of_weight(self, w: Fraction) -> List[int]:
        return [i for i in range(self.module.dim) if self.module.weight(i) == w]

    def value_weight(self, vkey: int) -> Fraction:
        return self.module.weight(vkey)


class JetSystem:
    """A-linear cochains on the jet algebroid with values in ``A ⊗ W``.

    Value keys are ``(function key, module index)``.  Only varieties with a
    finite-dimensional weight decomposition of ``A ⊗ W`` are accepted:
    affine space and the one-dimensional torus.
    """

    def __init__(self, jets: JetAlgebroid, module: LPlusModule):
        var = jets.variety
        if not (isinstance(var, Affine) or (isinstance(var, Torus) and var.n == 1)):
            raise ValueError("direct computation supports Affine(n) and Torus(1) only")
        if module.n != var.n:
            raise ValueError("module and variety dimensions differ")
        if jets.order < module.annihilation_degree + 1:
            raise ValueError("jet order too small for the module to be defined on the quotient")
        self.jets = jets
        self.module = module
        self.variety = var
        self.gen_weights = list(jets.weights)
        self.label = f"jets({var.label()},order={jets.order})"
        self._act_cache: Dict[Tuple[int, Hashable], Dict[Hashable, Fraction]] = {}
        self._lock = threading.Lock()

    def bracket(self, i: int, j: int) -> Dict[int, FunctionElem]:
        return self.jets.bracket(i, j)

    def scale(self, c: FunctionElem, vkey) -> Dict[Hashable, Fraction]:
        akey, widx = vkey
        prod = c * FunctionElem(self.variety, {akey: 1})
        return {(k, widx): v for k, v in prod.terms.items()}

    def act(self, i: int, vkey) -> Dict[Hashable, Fraction]:
        key = (i, vkey)
        with self._lock:
            hit = self._act_cache.get(key)
        if hit is None:
            akey, widx = vkey
            m = TensorElem.pure(FunctionElem(self.variety, {akey: 1}), widx)
            hit = dict(smash_action(self.jets.smash_gen(i), m, self.module).terms)
            with self._lock:
                self._act_cache[key] = hit
        return hit

    def values_of_weight(self, w: Fraction) -> List[Tuple]:
        out = []
        n = self.variety.n
        for idx in range(self.module.dim):
            d = w - self.module.weight(idx)
            if d.denominator != 1:
                continue
            d = int(d)
            if isinstance(self.variety, Torus):
                out.append(((d,), idx))
            elif d >= 0:
                out.extend((m, idx) for m in multi_indices(n, d) if sum(m) == d)
        return out

    def value_weight(self, vkey) -> Fraction:
        akey, widx = vkey
        return sum(akey) + self.module.weight(widx)


# ---------------------------------------------------------------- matrix slices

CochainKey = Tuple[Tuple[int, ...], Hashable]


def cochain_basis(system, gens: Sequence[int], k: int, weight: Fraction) -> List[CochainKey]:
    """All keys of degree k and the given weight with arguments from ``gens``."""
    weight = Fraction(weight)
    gw = system.gen_weights
    out: List[CochainKey] = []
    for args in combinations(sorted(gens), k):
        s = sum((gw[i] for i in args), Fraction(0))
        for v in system.values_of_weight(weight + s):
            out.append((args, v))
    return out


def differential_matrix(
    system,
    src_gens: Sequence[int],
    tgt_gens: Sequence[int],
    k: int,
    weight: Fraction,
) -> Tuple[SparseMatrix, List[CochainKey], List[CochainKey]]:
    """Matrix of ``d: C^k → C^{k+1}`` at one weight.

    Columns are degree-k keys with arguments in ``src_gens`` (cochains
    vanishing on every other tuple); rows are degree-(k+1) keys with
    arguments in ``tgt_gens``.
    """
    weight = Fraction(weight)
    src = cochain_basis(system, src_gens, k, weight)
    tgt = cochain_basis(system, tgt_gens, k + 1, weight)
    col = {key: i for i, key in enumerate(src)}
    src_set = set(src_gens)
    gw = system.gen_weights
    values_cache: Dict[Fraction, List] = {}

    def values(w):
        hit = values_cache.get(w)
        if hit is None:
            hit = values_cache[w] = system.values_of_weight(w)
        return hit

    rows: List[Dict[int, Fraction]] = []
    by_tuple: Dict[Tuple[int, ...], Dict[Hashable, Dict[int, Fraction]]] = {}
    for T, _ in tgt:
        if T in by_tuple:
            continue
        contrib: Dict[Hashable, Dict[int, Fraction]] = {}

        def add(c_idx, image, sign):
            for v, val in image.items():
                add_into(contrib.setdefault(v, {}), c_idx, sign * val)

        for s in range(k + 1):
            for t in range(s + 1, k + 1):
                rest = T[:s] + T[s + 1:t] + T[t + 1:]
                if not src_set.issuperset(rest):
                    continue
                sign = 1 if (s + t) % 2 else -1
                for gamma, c in system.bracket(T[s], T[t]).items():
                    if gamma in rest or gamma not in src_set:
                        continue
                    eps = -1 if sum(1 for r in rest if r < gamma) % 2 else 1
                    S = tuple(sorted(rest + (gamma,)))
                    ws = weight + sum((gw[i] for i in S), Fraction(0))
                    for u in values(ws):
                        add(col[(S, u)], system.scale(c, u), sign * eps)
        for s in range(k + 1):
            rest = T[:s] + T[s + 1:]
            if not src_set.issuperset(rest):
                continue
            sign = 1 if s % 2 else -1
            ws = weight + sum((gw[i] for i in rest), Fraction(0))
            for u in values(ws):
                add(col[(rest, u)], system.act(T[s], u), sign)
        by_tuple[T] = contrib
    tgt_values = {}
    for T, v in tgt:
        tgt_values.setdefault(T, set()).add(v)
    for T, contrib in by_tuple.items():
        stray = [v for v, r in contrib.items() if r and v not in tgt_values[T]]
        if stray:
            raise ArithmeticError(f"differential is not weight homogeneous at {T}: {stray[:3]}")
    for T, v in tgt:
        rows.append(by_tuple[T].get(v, {}))
    return SparseMatrix.from_rows(rows, len(src)), src, tgt


@dataclass
class WeightSlice:
    algebra: str
    module: str
    k: int
    weight: Fraction
    basis: List[CochainKey]
    d_in: SparseMatrix
    d_out: SparseMatrix
    order: Optional[int] = None
    rank_in: int = field(init=False)
    rank_out: int = field(init=False)

    def __post_init__(self):
        if self.d_out.cols != len(self.basis) or self.d_in.rows != len(self.basis):
            raise ValueError("slice matrices do not match the basis")
        if not self.d_out.matmul(self.d_in).is_zero():
            raise ArithmeticError(f"d∘d != 0 on slice k={self.k} weight={self.weight}")
        self.rank_in = rank(self.d_in)
        self.rank_out = rank(self.d_out)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def dim_cocycles(self) -> int:
        return self.dim - self.rank_out

    @property
    def betti(self) -> int:
        b = self.dim_cocycles - self.rank_in
        if b < 0:
            raise ArithmeticError("negative cohomology dimension")
        return b

    def to_json(self) -> Dict[str, Any]:
        return {
            "algebra": self.algebra,
            "module": self.module,
            "k": self.k,
            "weight": str(self.weight),
            "order": self.order,
            "dim_cocycles": self.dim_cocycles,
            "rank_boundaries": self.rank_in,
            "betti": self.betti,
        }


def build_weight_slice(system, k: int, weight=0, gens: Optional[Sequence[int]] = None) -> WeightSlice:
    """Slice of degree k at one weight, with incoming and outgoing differentials."""
    if k < 0:
        raise ValueError("k must be >= 0")
    gens = list(range(len(system.gen_weights))) if gens is None else list(gens)
    weight = Fraction(weight)
    d_out, basis, _ = differential_matrix(system, gens, gens, k, weight)
    if k == 0:
        d_in = SparseMatrix.zero(len(basis), 0)
    else:
        d_in, _, tgt = differential_matrix(system, gens, gens, k - 1, weight)
        if tgt != basis:
            raise AssertionError("basis enumeration is not deterministic")
    return WeightSlice(system.label, system.module.name, k, weight, basis, d_in, d_out)


def cohomology_dim(system, k: int, weight=0) -> int:
    return build_weight_slice(system, k, weight).betti


def sound_truncation(module: LPlusModule, weight=0) -> int:
    """Smallest L₊ truncation whose weight slices at ``weight`` agree with L₊.

    Arguments of a weight-w key have total weight ``wt(value) - w``, which is
    bounded by ``max wt(W) - w``; structure constants never raise it.
    """
    top = max(module.weights) - Fraction(weight)
    return max(0, floor(top))


def lplus_cohomology(
    module: LPlusModule,
    k_max: int,
    weight=0,
    truncation: Optional[int] = None,
    threads: int = 1,
) -> List[WeightSlice]:
    """Weight slices of ``H^k(L₊, W)`` for ``k = 0..k_max``."""
    need = sound_truncation(module, weight)
    if truncation is None:
        truncation = need
    elif truncation < need:
        raise ValueError(f"truncation {truncation} is below the sound bound {need}")
    system = LieModuleSystem(build_lplus(module.n, truncation), module)
    run = lambda k: build_weight_slice(system, k, weight)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, range(k_max + 1)))
    return [run(k) for k in range(k_max + 1)]


# ---------------------------------------------------------------- finite-order colimit


@dataclass
class GFResult:
    k: int
    weight: Fraction
    p_max: int
    dims: List[int]
    cocycles: List[int]
    boundaries: List[int]
    saturation: int = 2

    @property
    def stabilized(self) -> bool:
        if self.p_max < self.saturation:
            return False
        return len(self.dims) >= 2 and self.dims[-1] == self.dims[-2]

    @property
    def value(self) -> int:
        return self.dims[-1]

    def to_json(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "weight": str(self.weight),
            "p_max": self.p_max,
            "dims": self.dims,
            "dim_cocycles": self.cocycles,
            "rank_boundaries": self.boundaries,
            "saturation_order": self.saturation,
            "stabilized": self.stabilized,
        }


def saturation_order(module: LPlusModule, k: int, weight=0) -> int:
    """Smallest order at which every L₊ generator that can enter a
    weight-``weight`` (k+1)-cochain is present; agreement of consecutive
    orders is only trusted from here on."""
    top = max(module.weights) - Fraction(weight)
    return max(2, floor(top) + k + 2)


def _gens_below(jets: JetAlgebroid, p: int) -> List[int]:
    return [i for i, (m, _) in enumerate(jets.gens) if sum(m) < p]


def stabilized_gf_cohomology(variety, module: LPlusModule, k: int, p_max: int, weight=0) -> GFResult:
    """Finite-order cohomology ``H^k`` with values in ``A ⊗ W``, for orders 1..p_max.

    An order-p cochain is an A-linear cochain on the jet algebroid vanishing
    on every generator ``τ^m ∂_j`` with ``|m| ≥ p``.  For each p the
    cocycles are order-p cochains closed in the order-Q complex
    (``Q = p_max + 1``); boundaries are images of cochains of order up to
    p_max that happen to have order p.  Composition ``d∘d`` and the
    order-raising property of d are checked along the way.
    """
    if p_max < 2:
        raise ValueError("p_max must be >= 2")
    weight = Fraction(weight)
    Q = p_max + 1
    jets = JetAlgebroid(variety, Q)
    system = JetSystem(jets, module)
    top = _gens_below(jets, Q)
    N = module.annihilation_degree + 1
    dims, zs, bs = [], [], []
    if k > 0:
        d_in_full, _, tgt_full = differential_matrix(system, _gens_below(jets, p_max), top, k - 1, weight)
    for p in range(1, p_max + 1):
        gp = _gens_below(jets, p)
        d_out, basis, _ = differential_matrix(system, gp, top, k, weight)
        z = len(basis) - rank(d_out)
        if k > 0 and p >= N:
            # order p-1 cochains (any 0-cochain) land in order p once p >= N
            d_prev, _, tgt_prev = differential_matrix(system, _gens_below(jets, max(p - 1, 0)), top, k - 1, weight)
            keep = {key for key in basis}
            for key, row in zip(tgt_prev, d_prev.data):
                if row.entries and key not in keep:
                    raise ArithmeticError(f"d raised the order of an order-{p - 1} cochain beyond {p}")
            pos = {key: i for i, key in enumerate(tgt_prev)}
            d_prev_p = d_prev.select_rows([pos[key] for key in basis])
            if not d_out.matmul(d_prev_p).is_zero():
                raise ArithmeticError(f"d∘d != 0 at order {p}")
        if k > 0:
            pos_full = {key: i for i, key in enumerate(tgt_full)}
            b = restricted_image_dim(d_in_full, [pos_full[key] for key in basis])
        else:
            b = 0
        if b > z:
            raise ArithmeticError("boundaries exceed cocycles")
        dims.append(z - b)
        zs.append(z)
        bs.append(b)
    return GFResult(k, weight, p_max, dims, zs, bs, saturation_order(module, k, weight))
