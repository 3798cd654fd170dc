"""Univariate polynomials and rational functions over Surd or mpf coefficients.

Coefficients are stored in ascending degree.  A polynomial is *exact* when
every coefficient is a :class:`~qes_susy.surd.Surd`; it is *numeric* when the
coefficients are ``mpmath.mpf`` (used once a root leaves the surd field, as
for the N=3 quartic).  Mixing promotes to numeric.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import DomainError, InexactError
from .surd import Surd, to_mpf

VARIABLES = ("x", "z", "E")


def _is_numeric(c) -> bool:
    return isinstance(c, (mpmath.mpf, float, np.floating))


def _normalize(coeffs: Iterable) -> tuple[list, bool]:
    cs = list(coeffs)
    numeric = any(_is_numeric(c) for c in cs)
    if numeric:
        cs = [to_mpf(c) for c in cs]
    else:
        cs = [c if isinstance(c, Surd) else Surd(c) for c in cs]
    while cs and not cs[-1]:
        cs.pop()
    return cs, numeric


class Polynomial:
    """Immutable univariate polynomial ``sum_k coeffs[k] * var**k``."""

    __slots__ = ("coeffs", "var", "exact")

    def __init__(self, coeffs: Sequence = (), var: str = "x"):
        if var not in VARIABLES:
            raise DomainError(f"unknown variable {var!r}")
        cs, numeric = _normalize(coeffs)
        self.coeffs = tuple(cs)
        self.var = var
        self.exact = not numeric

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, c, var="x"):
        return cls([c], var)

    @classmethod
    def monomial(cls, k: int, c=1, var="x"):
        return cls([0] * k + [c], var)

    def _like(self, coeffs) -> "Polynomial":
        return Polynomial(coeffs, self.var)

    def _zero(self):
        return Surd(0) if self.exact else mpmath.mpf(0)

    # queries ------------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self):
        return self.coeffs[-1] if self.coeffs else self._zero()

    def coeff(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else self._zero()

    def parity(self) -> int | None:
        """+1 for even, -1 for odd, None for mixed.  The zero polynomial is even."""
        ks = [k for k, c in enumerate(self.coeffs) if c]
        if not ks or all(k % 2 == 0 for k in ks):
            return 1
        if all(k % 2 == 1 for k in ks):
            return -1
        return None

    # arithmetic ---------------------------------------------------------
    def _check(self, other: "Polynomial"):
        if self.var != other.var:
            raise DomainError(f"variable mismatch: {self.var} vs {other.var}")

    def _lift(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, Surd, float, mpmath.mpf)):
            return Polynomial([other], self.var)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        n = max(len(self.coeffs), len(o.coeffs))
        return self._like([self.coeff(k) + o.coeff(k) for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return self._like([-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.is_zero or o.is_zero:
            return self._like([])
        zero = Surd(0) if (self.exact and o.exact) else mpmath.mpf(0)
        out = [zero] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] = out[i + j] + a * b
        return self._like(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = self._like([1])
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c) -> "Polynomial":
        return self._like([a * c for a in self.coeffs])

    def __truediv__(self, c):
        if isinstance(c, Polynomial):
            return NotImplemented
        return self._like([a / c for a in self.coeffs])

    def __divmod__(self, other: "Polynomial"):
        o = self._lift(other)
        if o is None or o.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        dq = len(r) - len(o.coeffs) + 1
        if dq <= 0:
            return self._like([]), self
        q = [None] * dq
        lead = o.lead
        for k in range(dq - 1, -1, -1):
            c = r[k + o.degree] / lead
            q[k] = c
            if c:
                for j, b in enumerate(o.coeffs):
                    r[k + j] = r[k + j] - c * b
        rem = r[: o.degree]
        return self._like(q), self._like(rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __eq__(self, other):
        o = self._lift(other) if not isinstance(other, Polynomial) else other
        if o is None:
            return NotImplemented
        return self.var == o.var and self.coeffs == o.coeffs

    def __hash__(self):
        return hash((self.var, self.coeffs))

    # calculus / substitution -------------------------------------------
    def derivative(self) -> "Polynomial":
        return self._like([k * c for k, c in enumerate(self.coeffs)][1:])

    def to_x(self) -> "Polynomial":
        """Substitute z = x**2 (requires var 'z')."""
        if self.var != "z":
            raise DomainError("to_x expects a polynomial in z")
        out = []
        for c in self.coeffs:
            out += [c, 0]
        return Polynomial(out[:-1] if out else [], "x")

    def to_z(self) -> "Polynomial":
        """Inverse of :meth:`to_x`; the polynomial must be even in x."""
        if self.var != "x":
            raise DomainError("to_z expects a polynomial in x")
        if self.parity() != 1:
            raise DomainError("only even polynomials in x can be written in z")
        return Polynomial(self.coeffs[0::2], "z")

    def d_dx_of_z(self) -> "Polynomial":
        """For P(z), return dP(x**2)/dx as a polynomial in x."""
        return self.to_x().derivative()

    def monic(self) -> "Polynomial":
        return self / self.lead if self.coeffs else self

    def to_numeric(self) -> "Polynomial":
        return self._like([to_mpf(c) for c in self.coeffs] or [mpmath.mpf(0)])

    def trim(self, tol: float = 0.0) -> "Polynomial":
        """Drop numerically negligible coefficients (relative to the largest)."""
        if self.exact or not self.coeffs:
            return self
        scale = max(abs(c) for c in self.coeffs)
        return self._like([c if abs(c) > tol * scale else mpmath.mpf(0) for c in self.coeffs])

    # evaluation ---------------------------------------------------------
    def __call__(self, x):
        if isinstance(x, (Surd, int, Fraction)) and self.exact:
            acc = Surd(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        if isinstance(x, (mpmath.mpf, mpmath.mpc)):
            cs = [to_mpf(c) for c in self.coeffs]
            acc = mpmath.mpf(0)
        else:
            cs = self.float_coeffs()
            x = np.asarray(x, dtype=float) if not isinstance(x, (float, int)) else float(x)
            acc = 0.0
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    def float_coeffs(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    # roots --------------------------------------------------------------
    def roots(self, dps: int = 50) -> list:
        """All complex roots at ``dps`` digits, Newton-polished by mpmath."""
        if self.degree < 1:
            return []
        with mpmath.workdps(dps):
            cs = [to_mpf(c) for c in reversed(self.coeffs)]
            return list(mpmath.polyroots(cs, maxsteps=200, extraprec=4 * dps))

    def real_roots(self, dps: int = 50) -> list:
        if self.exact and self.degree >= 1:
            return self._real_roots_isolated(dps)
        with mpmath.workdps(dps):
            out = []
            for r in self.roots(dps):
                if isinstance(r, mpmath.mpc):
                    if abs(r.imag) > mpmath.mpf(10) ** (-dps // 2) * max(1, abs(r)):
                        continue
                    r = r.real
                out.append(r)
            return sorted(out)

    def _real_roots_isolated(self, dps):
        n = self.count_real_roots()
        with mpmath.workdps(dps):
            cands = []
            for r in self.roots(dps):
                if isinstance(r, mpmath.mpc):
                    cands.append((abs(r.imag), r.real))
                else:
                    cands.append((mpmath.mpf(0), r))
            cands.sort(key=lambda t: t[0])
            return sorted(r for _, r in cands[:n])

    def sturm_sequence(self) -> list["Polynomial"]:
        if not self.exact:
            raise InexactError("Sturm sequences require exact coefficients")
        seq = [self, self.derivative()]
        while not seq[-1].is_zero and seq[-1].degree > 0:
            seq.append(-(seq[-2] % seq[-1]))
        return [p for p in seq if not p.is_zero]

    @staticmethod
    def _sign_at(p: "Polynomial", x) -> int:
        if x == float("inf"):
            return p.lead.sign()
        if x == float("-inf"):
            return p.lead.sign() * (-1 if p.degree % 2 else 1)
        return p(x).sign()

    def count_real_roots(self, lo=float("-inf"), hi=float("inf")) -> int:
        """Distinct real roots in (lo, hi] by Sturm's theorem (exact)."""
        seq = self.sturm_sequence()

        def changes(x):
            s = [self._sign_at(p, x) for p in seq]
            s = [v for v in s if v]
            return sum(1 for a, b in zip(s, s[1:]) if a != b)

        if isinstance(lo, float) and np.isfinite(lo):
            lo = Surd(lo)
        if isinstance(hi, float) and np.isfinite(hi):
            hi = Surd(hi)
        return changes(lo) - changes(hi)

    def count_positive_roots(self) -> int:
        if self.exact:
            return self.count_real_roots(Surd(0), float("inf"))
        return sum(1 for r in self.real_roots() if r > 0)

    # formatting ---------------------------------------------------------
    def __repr__(self):
        return f"Polynomial({self}, var={self.var!r})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            cs = str(c) if self.exact else mpmath.nstr(c, 17)
            if k == 0:
                parts.append(cs)
            else:
                mono = self.var if k == 1 else f"{self.var}^{k}"
                parts.append(f"({cs})*{mono}")
        return " + ".join(parts)


def gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd of two exact polynomials."""
    if not (a.exact and b.exact):
        raise InexactError("gcd requires exact coefficients")
    while not b.is_zero:
        a, b = b, a % b
    return a.monic() if not a.is_zero else a


class RationalFunction:
    """Reduced ratio ``num/den`` with a monic denominator."""

    __slots__ = ("num", "den", "var")

    def __init__(self, num: Polynomial, den: Polynomial | None = None):
        if den is None:
            den = Polynomial([1], num.var)
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        if num.var != den.var:
            raise DomainError("variable mismatch")
        if num.exact and den.exact and den.degree > 0:
            g = gcd(num, den) if not num.is_zero else den.monic()
            if g.degree > 0:
                num, den = num // g, den // g
        if num.is_zero:
            den = Polynomial([1], num.var)
        lead = den.lead
        self.num = num / lead
        self.den = den / lead
        self.var = num.var

    @classmethod
    def from_poly(cls, p: Polynomial):
        return cls(p)

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    @property
    def exact(self) -> bool:
        return self.num.exact and self.den.exact

    def _lift(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other)
        if isinstance(other, (int, Fraction, Surd, float, mpmath.mpf)):
            return RationalFunction(Polynomial([other], self.var))
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.num * o.den == o.num * self.den

    def __hash__(self):
        return hash((self.num, self.den))

    def derivative(self) -> "RationalFunction":
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def to_x(self) -> "RationalFunction":
        return RationalFunction(self.num.to_x(), self.den.to_x())

    def to_z(self) -> "RationalFunction":
        return RationalFunction(self.num.to_z(), self.den.to_z())

    def split(self) -> tuple[Polynomial, "RationalFunction"]:
        """Polynomial part and proper remainder."""
        q, r = divmod(self.num, self.den)
        return q, RationalFunction(r, self.den)

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def __repr__(self):
        return f"RationalFunction(({self.num}) / ({self.den}))"
