"""Sparse formal linear combinations with exact rational coefficients.

Every symbolic carrier in the package (functions, smash elements, tensor
module elements, forms, plain vectors) is a finite sum ``sum c_k * e_k`` over
hashable basis keys.  :class:`LinComb` holds the shared arithmetic; subclasses
add context (the variety, for instance) through :meth:`_new`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Dict, Hashable, Iterable, Iterator, Mapping, Tuple


def as_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError("floating point coefficients are not allowed")
    return Fraction(value)


class LinComb:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Hashable, Any] | Iterable[Tuple[Hashable, Any]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: Dict[Hashable, Fraction] = {}
        for key, value in items:
            value = as_fraction(value)
            if not value:
                continue
            total = acc.get(key, 0) + value
            if total:
                acc[key] = total
            else:
                acc.pop(key, None)
        self.terms = acc

    # subclasses override to carry their context along
    def _new(self, terms: Dict[Hashable, Fraction]):
        obj = self.__class__.__new__(self.__class__)
        obj.terms = terms
        return obj

    def _check(self, other: "LinComb") -> None:
        pass

    def __iter__(self) -> Iterator[Tuple[Hashable, Fraction]]:
        return iter(sorted(self.terms.items(), key=lambda kv: _sort_key(kv[0])))

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, key: Hashable) -> Fraction:
        return self.terms.get(key, Fraction(0))

    def __add__(self, other):
        if not isinstance(other, LinComb):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for key, value in other.terms.items():
            total = out.get(key, 0) + value
            if total:
                out[key] = total
            else:
                out.pop(key, None)
        return self._new(out)

    def __neg__(self):
        return self._new({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, LinComb):
            return NotImplemented
        return self + (-other)

    def scale(self, c: Any):
        c = as_fraction(c)
        if not c:
            return self._new({})
        return self._new({k: c * v for k, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, LinComb):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return f"{type(self).__name__}(0)"
        body = " + ".join(f"{v}*{k}" for k, v in self)
        return f"{type(self).__name__}({body})"


def _sort_key(key: Hashable):
    # keys are tuples of ints/Fractions in practice; fall back to repr
    try:
        hash(key)
        return (0, key) if isinstance(key, tuple) else (1, repr(key))
    except TypeError:  # pragma: no cover
        return (2, repr(key))


def add_into(acc: Dict[Hashable, Fraction], key: Hashable, value: Fraction) -> None:
    """In-place ``acc[key] += value`` dropping zeros."""
    total = acc.get(key, 0) + value
    if total:
        acc[key] = total
    else:
        acc.pop(key, None)
