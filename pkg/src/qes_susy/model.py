"""Model parameters, wavefunction representation and pointwise evaluation.

Conventions: the Hamiltonian is ``H = -1/2 d^2/dx^2 + V0`` with
``V0 = V^qes / 2`` and

    V^qes = nu^2 x^6 + 2 nu mu x^4 + [mu^2 - (4N + 2 kappa + 3) nu] x^2 .

``kappa`` is only meaningful for the energy-reflection variant, where
``mu = 0`` gives ``V_ER = nu^2 x^6 - nu (4N + 2 kappa + 3) x^2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import DomainError, NodalSeedError
from .poly import Polynomial, RationalFunction
from .surd import Surd, to_mpf


class Variant(enum.Enum):
    QES = "qes"
    ER = "er"
    PARTNER1 = "partner1"
    PARTNER2 = "partner2"


class Sector(enum.Enum):
    ALGEBRAIC = "algebraic"
    MESH = "mesh"
    WKB = "wkb"
    VARIATIONAL = "variational"


def exact_or_mpf(v):
    """Keep ints, Fractions and Surds exact; everything else becomes mpf."""
    if isinstance(v, Surd):
        return v
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return Surd(v)
    if isinstance(v, float) and v.is_integer():
        return Surd(int(v))
    return mpmath.mpf(v)


@dataclass(frozen=True)
class PotentialSpec:
    """Parameters of the sextic family and its SUSY partners.

    ``omega0`` and ``seed`` are only used by :attr:`Variant.PARTNER2`
    (``seed`` picks the ER state used as confluent seed, by energy order).
    """

    nu: object = 1
    mu: object = 1
    N: object = 0
    kappa: int = 0
    variant: Variant = Variant.QES
    omega0: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kappa not in (0, 1):
            raise DomainError("kappa must be 0 or 1")
        if float(self.nu) < 0:
            raise DomainError("nu must be non-negative")
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def k(self) -> int:
        """Effective parity flag (ignored outside the ER variant)."""
        return self.kappa if self.variant in (Variant.ER, Variant.PARTNER2) else 0

    @property
    def integer_N(self) -> int | None:
        n = self.N
        if isinstance(n, Surd):
            n = n.rational if n.is_rational else None
        if n is None:
            return None
        try:
            f = Fraction(n) if not isinstance(n, mpmath.mpf) else Fraction(float(n))
        except (TypeError, ValueError):
            return None
        if f.denominator == 1 and f >= 0:
            return int(f)
        return None

    def require_integer_N(self) -> int:
        n = self.integer_N
        if n is None:
            raise DomainError(
                f"N={self.N} is not a non-negative integer; use the mesh solver for the non-algebraic sector"
            )
        return n

    def with_(self, **kw) -> "PotentialSpec":
        d = dict(nu=self.nu, mu=self.mu, N=self.N, kappa=self.kappa, variant=self.variant,
                 omega0=self.omega0, seed=self.seed)
        d.update(kw)
        return PotentialSpec(**d)

    def vqes_coefficients(self) -> tuple:
        """(c2, c4, c6) of V^qes as exact numbers when the inputs allow it."""
        nu, mu, N = (exact_or_mpf(v) for v in (self.nu, self.mu, self.N))
        c6 = nu * nu
        c4 = 2 * nu * mu
        c2 = mu * mu - (4 * N + 2 * self.k + 3) * nu
        return c2, c4, c6

    def base_polynomial(self) -> Polynomial:
        """V0 = V^qes/2 of the (unpartnered) sextic as a polynomial in x."""
        c2, c4, c6 = self.vqes_coefficients()
        half = Fraction(1, 2)
        return Polynomial([0, 0, c2 * half, 0, c4 * half, 0, c6 * half], "x")

    def float_coefficients(self) -> tuple[float, float, float]:
        return tuple(float(c) for c in self.vqes_coefficients())


@dataclass(frozen=True)
class EnergyLevel:
    value: object
    n: int
    sector: Sector = Sector.ALGEBRAIC

    def __float__(self):
        return float(self.value)


def exponent_polynomial(nu, mu) -> Polynomial:
    """q(x) = -nu x^4/4 - mu x^2/2, so that the gauge factor is exp(q)."""
    nu, mu = exact_or_mpf(nu), exact_or_mpf(mu)
    return Polynomial([0, 0, -mu * Fraction(1, 2), 0, -nu * Fraction(1, 4)], "x")


@dataclass(frozen=True)
class QuarticGaussWavefunction:
    """psi(x) = norm * R(x) * exp(-nu x^4/4 - mu x^2/2) with R rational in x."""

    prefactor: RationalFunction
    nu: object = 1
    mu: object = 1
    norm: float = 1.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        p = self.prefactor
        if isinstance(p, Polynomial):
            p = RationalFunction(p if p.var == "x" else p.to_x())
            object.__setattr__(self, "prefactor", p)
        elif p.var == "z":
            object.__setattr__(self, "prefactor", p.to_x())

    @classmethod
    def from_z(cls, P: Polynomial, nu=1, mu=1, kappa: int = 0, **kw):
        """Build x^kappa P(x^2) exp(...) from a polynomial in z."""
        px = P.to_x()
        if kappa:
            px = px * Polynomial([0, 1], "x")
        return cls(RationalFunction(px), nu, mu, **kw)

    @property
    def exponent(self) -> Polynomial:
        return exponent_polynomial(self.nu, self.mu)

    @property
    def square_integrable(self) -> bool:
        nu, mu = float(self.nu), float(self.mu)
        return nu > 0 or (nu == 0 and mu > 0)

    def parity(self) -> int | None:
        a, b = self.prefactor.num.parity(), self.prefactor.den.parity()
        if a is None or b is None:
            return None
        return a * b

    def with_prefactor(self, r: RationalFunction, norm=None) -> "QuarticGaussWavefunction":
        return QuarticGaussWavefunction(r, self.nu, self.mu, self.norm if norm is None else norm)

    def derivative(self) -> "QuarticGaussWavefunction":
        dq = self.exponent.derivative()
        r = self.prefactor
        return self.with_prefactor(r.derivative() + r * dq)

    def apply_hamiltonian(self, V, E=0) -> "QuarticGaussWavefunction":
        """(-1/2 d^2 + V - E) psi for V a Polynomial or RationalFunction in x."""
        d2 = self.derivative().derivative().prefactor
        r = d2 * Fraction(-1, 2) + self.prefactor * V - self.prefactor * E
        return self.with_prefactor(r)

    def log_abs(self, x):
        """(log|psi(x)|, sign) computed without forming exp(q)."""
        x = np.asarray(x, dtype=float)
        r = np.asarray(self.prefactor(x), dtype=float)
        q = np.asarray(self.exponent(x), dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(r)) + q + math.log(abs(float(self.norm))), np.sign(r) * np.sign(float(self.norm))

    def __call__(self, x):
        return evaluate_wavefunction(self, x)

    def mp(self, x):
        """High-precision evaluation at an mpf point."""
        x = mpmath.mpf(x)
        return to_mpf(self.norm) * self.prefactor(x) * mpmath.exp(self.exponent(x))


def evaluate_wavefunction(psi: QuarticGaussWavefunction, x):
    """Evaluate psi in log-magnitude form; deep tails underflow cleanly to 0."""
    scalar = np.ndim(x) == 0
    la, s = psi.log_abs(x)
    with np.errstate(under="ignore"):
        out = np.where(np.isfinite(la), s * np.exp(la), 0.0)
    return float(out) if scalar else out


def evaluate_potential(spec: PotentialSpec, x):
    """V(x) for every variant, in the V0 = V^qes/2 convention."""
    if spec.variant in (Variant.QES, Variant.ER):
        c2, c4, c6 = spec.float_coefficients()
        x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        z = x * x
        return 0.5 * z * (c2 + z * (c4 + z * c6))
    if spec.variant is Variant.PARTNER1:
        from .susy1 import build_partner

        return build_partner(spec.with_(variant=Variant.QES)).potential(x)
    from .susy2 import chain_from_spec

    return chain_from_spec(spec).potential(x)


@dataclass(frozen=True)
class DoubleWellInfo:
    threshold: object
    is_double_well: bool
    minima: tuple[float, ...]
    minimum_value: float


def double_well_threshold(spec: PotentialSpec) -> DoubleWellInfo:
    """N* = (mu^2 - (2 kappa + 3) nu)/(4 nu) and the minima of V0 at spec.N.

    Away from x = 0 the condition V0'(x) = 0 reduces to the quadratic
    3 nu^2 z^2 + 4 nu mu z + c2 = 0 in z = x^2, solved in closed form.
    """
    nu = exact_or_mpf(spec.nu)
    if float(nu) <= 0:
        raise DomainError("double-well analysis needs nu > 0")
    mu = exact_or_mpf(spec.mu)
    thr = (mu * mu - (2 * spec.k + 3) * nu) / (4 * nu)
    c2, c4, c6 = (to_mpf(c) for c in spec.vqes_coefficients())
    nu_f, mu_f = to_mpf(nu), to_mpf(mu)
    disc = 16 * nu_f**2 * mu_f**2 - 12 * nu_f**2 * c2
    zplus = (-4 * nu_f * mu_f + mpmath.sqrt(disc)) / (6 * nu_f**2) if disc >= 0 else mpmath.mpf(-1)
    if zplus > 0 and c2 < 0:
        xm = float(mpmath.sqrt(zplus))
        vmin = float(evaluate_potential(spec.with_(variant=Variant.ER if spec.k else Variant.QES), xm))
        return DoubleWellInfo(thr, True, (-xm, xm), vmin)
    return DoubleWellInfo(thr, False, (0.0,), 0.0)


def log_second_derivative(psi: QuarticGaussWavefunction) -> tuple[Polynomial, RationalFunction]:
    """(ln psi)'' as (polynomial part, proper rational part), exactly.

    With psi = P exp(q), (ln psi)'' = q'' + (P P'' - P'^2)/P^2.
    """
    r = psi.prefactor
    if not r.is_polynomial:
        raise DomainError("log_second_derivative expects a polynomial prefactor")
    P = r.num
    if P.exact:
        nodal = P.count_real_roots() > 0
    else:
        nodal = len(P.real_roots()) > 0
    if nodal:
        raise NodalSeedError("seed prefactor has a real zero")
    q2 = psi.exponent.derivative().derivative()
    dP, d2P = P.derivative(), P.derivative().derivative()
    rat = RationalFunction(P * d2P - dP * dP, P * P)
    poly_part, rest = rat.split()
    return q2 + poly_part, rest
