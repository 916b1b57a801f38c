"""Independent reference computations used by the tests.

Nothing here imports the package's linear algebra or Lie algebra code.
The L₊ oracle (n = 1) uses ``e_i = X^{i+1} d/dX`` with the closed form
``[e_i, e_j] = (j - i) e_{i+j}``, enumerates weight-zero cochains by brute
force, evaluates the differential from its defining formula on dense
coordinate vectors and takes ranks with sympy.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import sympy


def sympy_rank(dense_rows, cols=None):
    if not dense_rows or not dense_rows[0]:
        return 0
    return sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) if isinstance(v, Fraction) else v for v in r] for r in dense_rows]).rank()


def sympy_nullity(dense_rows, cols):
    if not dense_rows:
        return cols
    return cols - sympy_rank(dense_rows)


def _lplus_bracket(i, j, top):
    s = i + j
    if s > top or i == j:
        return None
    return s, j - i


def lplus_oracle_dims(lam, k_max=3, truncation=3):
    """Weight-zero ``dim H^k(L₊, F_λ)`` for n = 1 by dense brute force.

    A k-cochain ``e_{i_1}^* ∧ … ∧ e_{i_k}^* ⊗ w`` has weight ``λ - Σ i_r``;
    weight zero means ``Σ i_r = λ``.  The differential is the printed one:
    ``dφ(x_0..x_k) = Σ_{s<t} (-1)^{s+t+1} φ([x_s,x_t], …) + Σ_s (-1)^{s+1} x_s φ(…)``
    with ``e_0`` acting by λ and ``e_{≥1}`` by zero.
    """
    lam = Fraction(lam)
    gens = list(range(truncation + 1))

    def basis(k):
        if lam.denominator != 1:
            return []
        return [t for t in combinations(gens, k) if sum(t) == lam]

    def dmatrix(k):
        src, tgt = basis(k), basis(k + 1)
        rows = []
        for T in tgt:
            row = []
            for S in src:
                # evaluate d(S*) on T
                val = Fraction(0)
                for s in range(k + 1):
                    for t in range(s + 1, k + 1):
                        br = _lplus_bracket(T[s], T[t], truncation)
                        if br is None:
                            continue
                        g, c = br
                        rest = [T[r] for r in range(k + 1) if r not in (s, t)]
                        args = [g] + rest
                        val += (-1) ** (s + t + 1) * c * _eval_dual(S, args)
                for s in range(k + 1):
                    rest = [T[r] for r in range(k + 1) if r != s]
                    act = lam if T[s] == 0 else 0
                    val += (-1) ** (s + 1) * act * _eval_dual(S, rest)
                row.append(val)
            rows.append(row)
        return rows, len(src), len(tgt)

    dims = []
    for k in range(k_max + 1):
        dk, n_src, _ = dmatrix(k)
        z = n_src - sympy_rank(dk)
        if k:
            dprev, _, _ = dmatrix(k - 1)
            b = sympy_rank(dprev)
        else:
            b = 0
        dims.append(z - b)
    return dims


def _eval_dual(S, args):
    """Value of the dual basis cochain ``S^*`` on the argument list."""
    if len(set(args)) != len(args) or sorted(args) != list(S):
        return 0
    sign = 1
    for a in range(len(args)):
        for b in range(a + 1, len(args)):
            if args[a] > args[b]:
                sign = -sign
    return sign


# ---------------------------------------------------------------- symbolic oracles

x = sympy.Symbol("x")


def sympy_field_bracket(f, g):
    """``[f ∂, g ∂] = (f g' - g f') ∂`` for n = 1."""
    return sympy.expand(f * sympy.diff(g, x) - g * sympy.diff(f, x))


def to_sympy(fe, symbols=None):
    """Convert a FunctionElem into a sympy expression."""
    from gfcohom.coordinate_algebras import PuncturedSphere

    var = fe.variety
    if isinstance(var, PuncturedSphere):
        z = symbols[0] if symbols else x
        out = 0
        for (i, j), c in fe.terms.items():
            c = sympy.Rational(c.numerator, c.denominator)
            if i == 0:
                out += c * z ** j
            else:
                a = var.punctures[i - 1]
                out += c * (z - sympy.Rational(a.numerator, a.denominator)) ** (-j)
        return out
    if symbols:
        syms = symbols
    elif var.n == 1:
        syms = [x]
    else:
        syms = sympy.symbols(f"x1:{var.n + 1}")
    out = 0
    for key, c in fe.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for s, e in zip(syms, key):
            term *= s ** e
        out += term
    return out
