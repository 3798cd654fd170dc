"""Exact arithmetic in multi-quadratic fields Q(sqrt(p1), sqrt(p2), ...).

A :class:`Surd` is a finite sum ``sum_s c_s * sqrt(s)`` with rational
coefficients ``c_s`` and distinct squarefree positive integers ``s``
(``s = 1`` is the rational part).  Square roots of distinct squarefree
integers are linearly independent over Q, so this representation is
canonical and equality is structural.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import mpmath

from .errors import InexactError

_TRIAL_LIMIT = 100_000


@lru_cache(maxsize=4096)
def _split_square(n: int) -> tuple[int, int]:
    """Return ``(f, s)`` with ``n == f*f*s`` and ``s`` squarefree."""
    if n <= 0:
        raise ValueError("expected a positive integer")
    f, s = 1, 1
    m = n
    p = 2
    while p * p <= m and p <= _TRIAL_LIMIT:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        f *= p ** (e // 2)
        if e % 2:
            s *= p
        p += 1 if p == 2 else 2
    if m > 1:
        if p * p <= m:
            r = math.isqrt(m)
            if r * r == m:
                f *= r
                m = 1
            else:
                # an unfactored cofactor might still hide a square
                raise InexactError(f"cannot certify squarefree part of {n}")
        s *= m
    return f, s


@lru_cache(maxsize=4096)
def _primes_of(s: int) -> tuple[int, ...]:
    out = []
    p = 2
    while p * p <= s:
        if s % p == 0:
            out.append(p)
            s //= p
        p += 1 if p == 2 else 2
    if s > 1:
        out.append(s)
    return tuple(out)


def _as_fraction(v) -> Fraction | None:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Rational)):
        return Fraction(v)
    return None


class Surd:
    """Immutable element of a multi-quadratic number field."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, value=0, _terms: dict | None = None):
        if _terms is not None:
            self._terms = {s: c for s, c in _terms.items() if c != 0}
        elif isinstance(value, Surd):
            self._terms = dict(value._terms)
        else:
            q = _as_fraction(value)
            if q is None:
                if isinstance(value, float) and math.isfinite(value):
                    q = Fraction(value)
                elif isinstance(value, str):
                    q = Fraction(value)
                else:
                    raise TypeError(f"cannot build a Surd from {value!r}")
            self._terms = {1: q} if q != 0 else {}
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def sqrt(cls, value) -> "Surd":
        """Exact square root of a non-negative rational number."""
        if isinstance(value, Surd):
            if not value.is_rational:
                raise InexactError("square root of an irrational surd")
            value = value.rational
        q = _as_fraction(value)
        if q is None:
            raise InexactError(f"square root of non-rational {value!r}")
        if q < 0:
            raise InexactError("square root of a negative number")
        if q == 0:
            return cls(0)
        # sqrt(a/b) = sqrt(a*b)/b
        f, s = _split_square(q.numerator * q.denominator)
        return cls(_terms={s: Fraction(f, q.denominator)})

    # inspection ---------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return all(s == 1 for s in self._terms)

    @property
    def rational(self) -> Fraction:
        if not self.is_rational:
            raise InexactError(f"{self} is irrational")
        return self._terms.get(1, Fraction(0))

    @property
    def radicands(self) -> tuple[int, ...]:
        return tuple(sorted(self._terms))

    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, Surd):
            return other
        q = _as_fraction(other)
        if q is not None:
            return Surd(q)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) + other
            return NotImplemented
        t = dict(self._terms)
        for s, c in o._terms.items():
            t[s] = t.get(s, 0) + c
        return Surd(_terms=t)

    __radd__ = __add__

    def __neg__(self):
        return Surd(_terms={s: -c for s, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) - other
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return other - float(self)
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) * other
            return NotImplemented
        t: dict[int, Fraction] = {}
        for s1, c1 in self._terms.items():
            for s2, c2 in o._terms.items():
                g = math.gcd(s1, s2)
                s = (s1 // g) * (s2 // g)
                t[s] = t.get(s, 0) + c1 * c2 * g
        return Surd(_terms=t)

    __rmul__ = __mul__

    def _conjugate(self, p: int) -> "Surd":
        return Surd(_terms={s: (-c if s % p == 0 else c) for s, c in self._terms.items()})

    def inverse(self) -> "Surd":
        if not self._terms:
            raise ZeroDivisionError("inverse of zero surd")
        if self.is_rational:
            return Surd(1 / self.rational)
        p = max(q for s in self._terms for q in _primes_of(s))
        conj = self._conjugate(p)
        # self*conj no longer involves sqrt(p)
        return conj * (self * conj).inverse()

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) / other
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return other / float(self)
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out, base = Surd(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # comparison ---------------------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) == other
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            if self.is_rational:
                self._hash = hash(self.rational)
            else:
                self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def sign(self) -> int:
        """Exact sign, certified by interval-style precision doubling."""
        if not self._terms:
            return 0
        if self.is_rational:
            return (self.rational > 0) - (self.rational < 0)
        prec = 64
        while True:
            with mpmath.workprec(prec + 20):
                v = mpmath.mpf(0)
                bound = mpmath.mpf(0)
                for s, c in self._terms.items():
                    t = mpmath.mpf(c.numerator) / c.denominator * mpmath.sqrt(s)
                    v += t
                    bound += abs(t)
                if abs(v) > bound * mpmath.ldexp(1, -prec + 8):
                    return 1 if v > 0 else -1
            prec *= 2
            if prec > 1 << 16:
                raise ArithmeticError("sign determination did not converge")

    def _cmp(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                a = float(self)
                return (a > other) - (a < other)
            return NotImplemented
        return (self - o).sign()

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # conversion ---------------------------------------------------------
    def to_mpf(self) -> mpmath.mpf:
        v = mpmath.mpf(0)
        for s, c in self._terms.items():
            term = mpmath.mpf(c.numerator) / c.denominator
            if s != 1:
                term *= mpmath.sqrt(s)
            v += term
        return v

    @property
    def _mpf_(self):
        # lets mpmath treat a Surd as an mpf operand
        return self.to_mpf()._mpf_

    def __float__(self):
        with mpmath.workdps(30):
            return float(self.to_mpf())

    def __repr__(self):
        return f"Surd({str(self)!r})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for s in sorted(self._terms):
            c = self._terms[s]
            if s == 1:
                parts.append(str(c))
            elif c == 1:
                parts.append(f"sqrt({s})")
            elif c == -1:
                parts.append(f"-sqrt({s})")
            else:
                parts.append(f"{c}*sqrt({s})")
        return " + ".join(parts).replace("+ -", "- ")


def as_surd(value) -> Surd:
    """Convert int, Fraction, exact float or Surd to a Surd."""
    return value if isinstance(value, Surd) else Surd(value)


def is_exact(value) -> bool:
    return isinstance(value, (Surd, Fraction, int))


def to_mpf(value) -> mpmath.mpf:
    if isinstance(value, Surd):
        return value.to_mpf()
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)
