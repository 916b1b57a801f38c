"""Function algebras of the three variety families and their jets.

* ``Affine(n)``: ``k[x_1..x_n]``, basis keys are exponent tuples in Z_+^n.
* ``Torus(n)``: ``k[x_1^{±1}..x_n^{±1}]``, exponent tuples in Z^n.
* ``PuncturedSphere(a_1..a_m)``: ``k[z, (z-a_1)^{-1}, .., (z-a_m)^{-1}]``.
  Keys are ``(0, k)`` for ``z^k`` and ``(i, k)``, ``i >= 1``, for
  ``(z - a_i)^{-k}``.  Products are reduced to this partial-fraction basis
  eagerly, so equal functions have equal term dictionaries.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb, factorial
from typing import Dict, Iterable, List, Sequence, Tuple

from .lincomb import LinComb, add_into, as_fraction

__all__ = [
    "Affine",
    "Torus",
    "PuncturedSphere",
    "VarietyKind",
    "FunctionElem",
    "JetSeries",
    "multiply",
    "derive",
    "derive_multi",
    "jet",
    "parse_function",
    "parse_variety",
    "multi_indices",
]


@dataclass(frozen=True)
class Affine:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Affine(n) needs n >= 1")

    def label(self) -> str:
        return f"affine{self.n}"


@dataclass(frozen=True)
class Torus:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Torus(n) needs n >= 1")

    def label(self) -> str:
        return f"torus{self.n}"


@dataclass(frozen=True)
class PuncturedSphere:
    punctures: Tuple[Fraction, ...]

    def __post_init__(self):
        pts = tuple(as_fraction(a) for a in self.punctures)
        object.__setattr__(self, "punctures", pts)
        if not pts:
            raise ValueError("need at least one finite puncture")
        if len(set(pts)) != len(pts):
            raise ValueError("punctures must be pairwise distinct")

    @property
    def n(self) -> int:
        return 1

    @property
    def m(self) -> int:
        return len(self.punctures)

    def label(self) -> str:
        return "sphere[" + ",".join(str(a) for a in self.punctures) + "]"


VarietyKind = Affine | Torus | PuncturedSphere


def multi_indices(n: int, max_total: int) -> List[Tuple[int, ...]]:
    """All ``m`` in Z_+^n with ``|m| <= max_total``, ordered by (|m|, m)."""
    out = [m for m in product(range(max_total + 1), repeat=n) if sum(m) <= max_total]
    out.sort(key=lambda m: (sum(m), m))
    return out


# ---------------------------------------------------------------- key arithmetic


@lru_cache(maxsize=None)
def _pole_pair(c: Fraction, d: Fraction, i: int, j: int, a: int, b: int) -> Tuple[Tuple[tuple, Fraction], ...]:
    """(z-c)^{-a} (z-d)^{-b} with c != d, in the pole basis."""
    if a == 0:
        return (((j, b), Fraction(1)),)
    if b == 0:
        return (((i, a), Fraction(1)),)
    # 1 = ((z-d) - (z-c)) / (c-d)
    acc: Dict[tuple, Fraction] = {}
    inv = 1 / (c - d)
    for key, v in _pole_pair(c, d, i, j, a, b - 1):
        add_into(acc, key, inv * v)
    for key, v in _pole_pair(c, d, i, j, a - 1, b):
        add_into(acc, key, -inv * v)
    return tuple(sorted(acc.items()))


@lru_cache(maxsize=None)
def _poly_times_pole(c: Fraction, i: int, a: int, b: int) -> Tuple[Tuple[tuple, Fraction], ...]:
    """z^a (z-c)^{-b}: expand z = (z-c) + c."""
    acc: Dict[tuple, Fraction] = {}
    for r in range(a + 1):
        coef = comb(a, r) * c ** (a - r)
        if not coef:
            continue
        e = r - b
        if e < 0:
            add_into(acc, (i, -e), Fraction(coef))
        else:
            # (z-c)^e back in powers of z
            for s in range(e + 1):
                add_into(acc, (0, s), Fraction(coef * comb(e, s)) * (-c) ** (e - s))
    return tuple(sorted(acc.items()))


@lru_cache(maxsize=None)
def _key_product(variety, k1, k2) -> Tuple[Tuple[tuple, Fraction], ...]:
    if not isinstance(variety, PuncturedSphere):
        return ((tuple(x + y for x, y in zip(k1, k2)), Fraction(1)),)
    (i, a), (j, b) = k1, k2
    if i == 0 and j == 0:
        return (((0, a + b), Fraction(1)),)
    if i == 0:
        return _poly_times_pole(variety.punctures[j - 1], j, a, b)
    if j == 0:
        return _poly_times_pole(variety.punctures[i - 1], i, b, a)
    if i == j:
        return (((i, a + b), Fraction(1)),)
    if i > j:
        i, j, a, b = j, i, b, a
    return _pole_pair(variety.punctures[i - 1], variety.punctures[j - 1], i, j, a, b)


def _one_key(variety):
    if isinstance(variety, PuncturedSphere):
        return (0, 0)
    return (0,) * variety.n


def key_degree(variety, key) -> int | None:
    """Euler weight of a basis monomial (None on the punctured sphere)."""
    if isinstance(variety, PuncturedSphere):
        return None
    return sum(key)


# ---------------------------------------------------------------- FunctionElem


class FunctionElem(LinComb):
    """Element of the coordinate algebra A of ``variety``."""

    __slots__ = ("variety",)

    def __init__(self, variety, terms=()):
        self.variety = variety
        super().__init__(terms)

    def _new(self, terms):
        obj = FunctionElem.__new__(FunctionElem)
        obj.variety = self.variety
        obj.terms = terms
        return obj

    def _check(self, other):
        if getattr(other, "variety", None) != self.variety:
            raise ValueError("variety mismatch")

    @classmethod
    def one(cls, variety) -> "FunctionElem":
        return cls(variety, {_one_key(variety): 1})

    @classmethod
    def const(cls, variety, c) -> "FunctionElem":
        return cls(variety, {_one_key(variety): c})

    @classmethod
    def zero(cls, variety) -> "FunctionElem":
        return cls(variety, {})

    @classmethod
    def monomial(cls, variety, key, c=1) -> "FunctionElem":
        if isinstance(variety, PuncturedSphere):
            key = tuple(key)
            if key[0] < 0 or key[0] > variety.m or key[1] < 0 or (key[0] > 0 and key[1] == 0):
                raise ValueError(f"bad punctured-sphere key {key}")
        else:
            key = tuple(key)
            if len(key) != variety.n:
                raise ValueError("exponent length mismatch")
            if isinstance(variety, Affine) and min(key) < 0:
                raise ValueError("negative exponent on affine space")
        return cls(variety, {key: c})

    @classmethod
    def variable(cls, variety, i: int = 0) -> "FunctionElem":
        if isinstance(variety, PuncturedSphere):
            return cls(variety, {(0, 1): 1})
        key = [0] * variety.n
        key[i] = 1
        return cls(variety, {tuple(key): 1})

    def __mul__(self, other):
        if isinstance(other, FunctionElem):
            return multiply(self, other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, e: int) -> "FunctionElem":
        if e < 0:
            raise ValueError("negative powers are not ring operations")
        out = FunctionElem.one(self.variety)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def derive(self, direction: int = 0) -> "FunctionElem":
        return derive(self, direction)

    def evaluate(self, point: Sequence) -> Fraction:
        """Value at a rational point (avoid the punctures / coordinate zeros)."""
        v = self.variety
        total = Fraction(0)
        if isinstance(v, PuncturedSphere):
            z = as_fraction(point[0] if isinstance(point, (tuple, list)) else point)
            for (i, k), c in self.terms.items():
                total += c * (z ** k if i == 0 else (z - v.punctures[i - 1]) ** (-k))
            return total
        pt = [as_fraction(p) for p in point]
        for key, c in self.terms.items():
            term = c
            for x, e in zip(pt, key):
                term *= x ** e
            total += term
        return total

    def degree(self) -> int | None:
        """Euler weight if homogeneous (affine/torus), else None."""
        if isinstance(self.variety, PuncturedSphere) or not self.terms:
            return None
        degs = {sum(k) for k in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def __str__(self) -> str:
        return format_function(self)


def multiply(f: FunctionElem, g: FunctionElem) -> FunctionElem:
    """Exact product; punctured-sphere results come back in partial fractions."""
    if f.variety != g.variety:
        raise ValueError("variety mismatch")
    acc: Dict[tuple, Fraction] = {}
    var = f.variety
    for k1, c1 in f.terms.items():
        for k2, c2 in g.terms.items():
            for key, v in _key_product(var, k1, k2):
                add_into(acc, key, c1 * c2 * v)
    return f._new(acc)


def derive(f: FunctionElem, direction: int = 0) -> FunctionElem:
    """Partial derivative along coordinate ``direction`` (0-based)."""
    var = f.variety
    if direction < 0 or direction >= var.n:
        raise ValueError("direction out of range")
    acc: Dict[tuple, Fraction] = {}
    if isinstance(var, PuncturedSphere):
        for (i, k), c in f.terms.items():
            if i == 0:
                if k:
                    add_into(acc, (0, k - 1), c * k)
            else:
                add_into(acc, (i, k + 1), -c * k)
        return f._new(acc)
    for key, c in f.terms.items():
        e = key[direction]
        if e:
            new = list(key)
            new[direction] -= 1
            add_into(acc, tuple(new), c * e)
    return f._new(acc)


def derive_multi(f: FunctionElem, m: Sequence[int]) -> FunctionElem:
    for i, times in enumerate(m):
        for _ in range(times):
            f = derive(f, i)
    return f


def _mfact(m: Sequence[int]) -> int:
    out = 1
    for x in m:
        out *= factorial(x)
    return out


# ---------------------------------------------------------------- jets


class JetSeries:
    """Truncated element of ``A ⊗ k[[t_1..t_n]]``: ``{t-exponent: FunctionElem}``."""

    __slots__ = ("variety", "truncation", "coeffs")

    def __init__(self, variety, truncation: int, coeffs: Dict[Tuple[int, ...], FunctionElem]):
        self.variety = variety
        self.truncation = truncation
        self.coeffs = {m: f for m, f in coeffs.items() if sum(m) <= truncation and f}

    def __mul__(self, other: "JetSeries") -> "JetSeries":
        if other.variety != self.variety:
            raise ValueError("variety mismatch")
        T = min(self.truncation, other.truncation)
        out: Dict[Tuple[int, ...], FunctionElem] = {}
        for m1, f1 in self.coeffs.items():
            for m2, f2 in other.coeffs.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                if sum(m) > T:
                    continue
                prod = f1 * f2
                out[m] = out[m] + prod if m in out else prod
        return JetSeries(self.variety, T, out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JetSeries)
            and self.truncation == other.truncation
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        parts = [f"({f})*t^{m}" for m, f in sorted(self.coeffs.items())]
        return "JetSeries(" + " + ".join(parts or ["0"]) + ")"


def jet(g: FunctionElem, f: FunctionElem, truncation: int) -> JetSeries:
    """``sum_{|m| <= T} (1/m!) g ∂^m f t^m``: the image of ``g ⊗ f``."""
    if g.variety != f.variety:
        raise ValueError("variety mismatch")
    n = f.variety.n
    coeffs = {}
    for m in multi_indices(n, truncation):
        d = derive_multi(f, m)
        if d:
            coeffs[m] = (g * d).scale(Fraction(1, _mfact(m)))
    return JetSeries(f.variety, truncation, coeffs)


# ---------------------------------------------------------------- text I/O


def _fmt_coeff(c: Fraction, body: str) -> str:
    if not body:
        return str(c)
    if c == 1:
        return body
    if c == -1:
        return "-" + body
    return f"{c}*{body}"


def format_function(f: FunctionElem) -> str:
    var = f.variety
    if not f.terms:
        return "0"
    pieces = []
    for key, c in f:
        if isinstance(var, PuncturedSphere):
            i, k = key
            if i == 0:
                body = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            else:
                a = var.punctures[i - 1]
                if a == 0:
                    body = f"z^-{k}"
                else:
                    body = f"(z-{a})^-{k}" if a > 0 else f"(z+{-a})^-{k}"
        else:
            names = ["x"] if var.n == 1 else [f"x{i + 1}" for i in range(var.n)]
            body = "*".join(
                names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(key) if e
            )
        pieces.append(_fmt_coeff(c, body))
    return " + ".join(pieces).replace("+ -", "- ")


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z]\d*)|(\^)|(\*)|([+-])|(\()|(\)))")


def _tokenize(text: str) -> List[Tuple[str, str]]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse near {text[pos:]!r}")
        pos = m.end()
        kinds = ("num", "name", "^", "*", "sign", "(", ")")
        for kind, val in zip(kinds, m.groups()):
            if val is not None:
                out.append((kind, val))
                break
    return out


class _Parser:
    def __init__(self, text: str, variety):
        self.toks = _tokenize(text)
        self.i = 0
        self.var = variety

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind):
            raise ValueError(f"expected {kind}, got {tok}")
        self.i += 1
        return tok

    def parse(self) -> FunctionElem:
        out = self.expr()
        if self.i != len(self.toks):
            raise ValueError(f"trailing input at token {self.peek()}")
        return out

    def expr(self) -> FunctionElem:
        sign = 1
        if self.peek()[0] == "sign":
            sign = -1 if self.take()[1] == "-" else 1
        total = self.term().scale(sign)
        while self.peek()[0] == "sign":
            s = -1 if self.take()[1] == "-" else 1
            total = total + self.term().scale(s)
        return total

    def term(self) -> FunctionElem:
        out = self.factor()
        while self.peek()[0] == "*":
            self.take()
            out = out * self.factor()
        return out

    def exponent(self) -> int:
        if self.peek()[0] != "^":
            return 1
        self.take()
        sign = 1
        if self.peek()[0] == "sign":
            sign = -1 if self.take()[1] == "-" else 1
        if self.peek()[0] == "(":
            self.take()
            if self.peek()[0] == "sign":
                sign *= -1 if self.take()[1] == "-" else 1
            val = int(self.take("num")[1])
            self.take(")")
        else:
            val = int(self.take("num")[1])
        return sign * val

    def factor(self) -> FunctionElem:
        kind, val = self.peek()
        var = self.var
        if kind == "num":
            self.take()
            return FunctionElem.const(var, Fraction(val))
        if kind == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            e = self.exponent()
            return self._power(inner, e)
        if kind == "name":
            self.take()
            base = self._variable(val)
            e = self.exponent()
            return self._power(base, e)
        raise ValueError(f"unexpected token {val!r}")

    def _variable(self, name: str) -> FunctionElem:
        var = self.var
        if isinstance(var, PuncturedSphere):
            if name not in ("z", "x"):
                raise ValueError(f"unknown variable {name!r} on the punctured sphere")
            return FunctionElem.variable(var)
        if name == "x" and var.n == 1:
            return FunctionElem.variable(var, 0)
        if re.fullmatch(r"x\d+", name):
            i = int(name[1:]) - 1
            if 0 <= i < var.n:
                return FunctionElem.variable(var, i)
        raise ValueError(f"unknown variable {name!r} for {var}")

    def _power(self, base: FunctionElem, e: int) -> FunctionElem:
        if e >= 0:
            return base ** e
        inv = _inverse(base)
        return inv ** (-e)


def _inverse(f: FunctionElem) -> FunctionElem:
    """Inverse of a unit of A that the parser can name: a coordinate monomial
    on the torus, or ``z - a_i`` on the punctured sphere."""
    var = f.variety
    if len(f.terms) == 1:
        (key, c), = f.terms.items()
        if isinstance(var, Torus):
            return FunctionElem(var, {tuple(-e for e in key): 1 / c})
        if isinstance(var, PuncturedSphere) and key[0] > 0:
            return _pole_inverse(var, key, c)
    if isinstance(var, PuncturedSphere):
        # linear polynomial c1*z + c0 vanishing at a puncture
        c1 = f.terms.get((0, 1), Fraction(0))
        c0 = f.terms.get((0, 0), Fraction(0))
        if c1 and set(f.terms) <= {(0, 0), (0, 1)}:
            root = -c0 / c1
            if root in var.punctures:
                i = var.punctures.index(root) + 1
                return FunctionElem(var, {(i, 1): 1 / c1})
    raise ValueError(f"{f} is not an invertible element the parser understands")


def _pole_inverse(var, key, c):
    i, k = key
    a = var.punctures[i - 1]
    # (z-a)^k expanded in powers of z
    return FunctionElem(var, {(0, s): comb(k, s) * (-a) ** (k - s) / c for s in range(k + 1)})


def parse_function(text: str, variety) -> FunctionElem:
    """Parse strings such as ``x1^2*x2^-1``, ``3/2*x - 1`` or ``(z-1)^-2``."""
    return _Parser(text, variety).parse()


def parse_variety(kind: str, n: int = 1, punctures: Iterable = ()) -> VarietyKind:
    kind = kind.lower()
    if kind in ("affine", "a"):
        return Affine(n)
    if kind in ("torus", "t"):
        return Torus(n)
    if kind in ("sphere", "kn", "punctured-sphere", "punctured_sphere"):
        return PuncturedSphere(tuple(as_fraction(a) for a in punctures))
    raise ValueError(f"unknown variety {kind!r}")


def window_keys(variety, K: int) -> List[tuple]:
    """Monomial keys with every exponent / pole order bounded by ``K``."""
    if isinstance(variety, Affine):
        return sorted(product(range(K + 1), repeat=variety.n))
    if isinstance(variety, Torus):
        return sorted(product(range(-K, K + 1), repeat=variety.n))
    keys = [(0, j) for j in range(K + 1)]
    keys += [(i, j) for i in range(1, variety.m + 1) for j in range(1, K + 1)]
    return keys
