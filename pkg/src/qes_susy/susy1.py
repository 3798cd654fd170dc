"""First-order SUSY partners of the algebraic sector.

The seed is the algebraic ground state u = P0(x^2) exp(q), q = -nu x^4/4 - mu x^2/2.
With A+ = (-d/dx + u'/u)/sqrt(2) the partner potential is V1 = V0 - (ln u)''
and every other algebraic state maps to phi_k = A+ psi_k / sqrt(E_k - eps).
All objects here carry exact coefficients whenever the seed does.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import integrate

from .algebraic import DEFAULT_DPS, algebraic_spectrum, apply_h
from .errors import ConsistencyError
from .model import (EnergyLevel, PotentialSpec, QuarticGaussWavefunction, Sector, Variant,
                    exact_or_mpf, log_second_derivative)
from .poly import Polynomial, RationalFunction
from .surd import Surd, to_mpf

X = Polynomial([0, 1], "x")


def high_precision(fn):
    """Run fn with the working precision used by the algebraic module."""
    @functools.wraps(fn)
    def wrapper(*args, **kw):
        with mpmath.workdps(DEFAULT_DPS):
            return fn(*args, **kw)

    return wrapper


def _inv_sqrt2(exact: bool):
    return Surd.sqrt(Fraction(1, 2)) if exact else 1 / mpmath.sqrt(2)


def norm_squared(psi: QuarticGaussWavefunction) -> float:
    """int psi^2 dx by adaptive quadrature (relative tolerance ~1e-13)."""
    def f(x):
        return psi(x) ** 2

    val, _ = integrate.quad(f, -np.inf, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True)
class SusyChainRecord:
    spec: PotentialSpec
    seed: QuarticGaussWavefunction
    epsilon: object
    superpotential: RationalFunction
    partner: RationalFunction
    mapped_states: tuple = ()
    missing_state: QuarticGaussWavefunction | None = None
    source_states: tuple = field(default=(), repr=False)

    @property
    def P0(self) -> Polynomial:
        return self.seed.prefactor.num

    @property
    def exact(self) -> bool:
        return self.partner.exact

    def potential(self, x):
        """V1 at float points."""
        x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        return self.partner(x)

    def partner_spec(self) -> PotentialSpec:
        return self.spec.with_(variant=Variant.PARTNER1)


def apply_A_plus(record: SusyChainRecord, f: QuarticGaussWavefunction) -> QuarticGaussWavefunction:
    """A+ f = (-f' + (u'/u) f)/sqrt(2), kept symbolic."""
    s = _inv_sqrt2(record.exact and f.prefactor.exact)
    r = (f.derivative().prefactor * -1 + record.superpotential * f.prefactor) * s
    return f.with_prefactor(r)


def apply_A(record: SusyChainRecord, f: QuarticGaussWavefunction) -> QuarticGaussWavefunction:
    """A f = (f' + (u'/u) f)/sqrt(2)."""
    s = _inv_sqrt2(record.exact and f.prefactor.exact)
    r = (f.derivative().prefactor + record.superpotential * f.prefactor) * s
    return f.with_prefactor(r)


@lru_cache(maxsize=64)
@high_precision
def build_partner(spec: PotentialSpec) -> SusyChainRecord:
    """Partner of V0 = V^qes/2 seeded by the algebraic ground state."""
    if spec.variant is not Variant.QES:
        spec = spec.with_(variant=Variant.QES)
    spec.require_integer_N()
    states = algebraic_spectrum(spec)
    ground = states[0]
    u = ground.psi
    poly_part, rat_part = log_second_derivative(u)  # raises NodalSeedError
    V0 = RationalFunction(spec.base_polynomial())
    V1 = V0 - rat_part - poly_part
    P0 = u.prefactor.num
    W = RationalFunction(P0.derivative(), P0) + u.exponent.derivative()
    inv = QuarticGaussWavefunction(RationalFunction(Polynomial([1], "x"), P0),
                                   -exact_or_mpf(spec.nu), -exact_or_mpf(spec.mu),
                                   label="missing state 1/u")
    rec = SusyChainRecord(spec, u, ground.energy, W, V1, (), inv, tuple(states))
    mapped = []
    for st in states[1:]:
        phi = apply_A_plus(rec, st.psi)
        gap = float(to_mpf(st.energy) - to_mpf(ground.energy))
        nrm = 1.0 / np.sqrt(norm_squared(st.psi) * gap)
        phi = phi.with_prefactor(phi.prefactor, norm=nrm)
        nodes = count_real_zeros(phi.prefactor.num)
        mapped.append((EnergyLevel(st.energy, nodes, Sector.ALGEBRAIC), phi))
    return SusyChainRecord(spec, u, ground.energy, W, V1, tuple(mapped), inv, tuple(states))


def count_real_zeros(p: Polynomial) -> int:
    if p.is_zero:
        return 0
    if p.exact:
        return p.count_real_roots()
    return len(p.real_roots())


@dataclass(frozen=True)
class PartnerDecomposition:
    """V1 = V^qes(x, N - 3/2)/2 + constant + Q(z)/P0(z) + R(z)/P0(z)^2."""

    shifted: PotentialSpec
    constant: object
    Q: Polynomial
    R: Polynomial
    P0: Polynomial

    @property
    def Q_term(self) -> RationalFunction:
        return RationalFunction(self.Q, self.P0)

    @property
    def R_term(self) -> RationalFunction:
        return RationalFunction(self.R, self.P0 * self.P0)

    @property
    def r_degree_claim_holds(self) -> bool:
        """Whether deg R equals [N/2] (true for N <= 2, generically N - 1 beyond)."""
        N = self.P0.degree
        return self.R.degree == N // 2 or (N == 0 and self.R.is_zero)

    def reassemble(self) -> RationalFunction:
        poly = RationalFunction(self.shifted.base_polynomial())
        return poly + self.constant + self.Q_term.to_x() + self.R_term.to_x()


def decompose_partner(record: SusyChainRecord, dps: int = 50) -> PartnerDecomposition:
    """Split V1 by polynomial division of the log-derivative numerator.

    In z = x^2 the rational part of -(ln P0)'' equals D/P0^2 with
    D = 4 z P0_z^2 - P0 (2 P0_z + 4 z P0_zz); D = Q P0 + R.
    """
    spec = record.spec
    N = spec.require_integer_N()
    with mpmath.workdps(dps):
        P = record.P0.to_z()
        Pz = P.derivative()
        z = Polynomial([0, 1], "z")
        D = z * Pz * Pz * 4 - P * (Pz * 2 + z * Pz.derivative() * 4)
        if P.degree > 0:
            Q, R = divmod(D, P)
        else:
            Q, R = Polynomial([], "z"), Polynomial([], "z")
        tol = mpmath.mpf(10) ** (-(dps - 10))
        Q, R = Q.trim(tol), R.trim(tol)
    if N >= 1 and (Q.degree != N - 1 or R.degree >= N):
        raise ConsistencyError(f"deg Q = {Q.degree}, deg R = {R.degree} for N = {N}")
    shifted = spec.with_(N=exact_or_mpf(spec.N) - Fraction(3, 2))
    return PartnerDecomposition(shifted, exact_or_mpf(spec.mu), Q, R, P)


@dataclass(frozen=True)
class ZeroModeOperator:
    """-p2 d^2/dx^2 + p1 d/dx - p0, polynomial coefficients in x."""

    p2: Polynomial
    p1: Polynomial
    p0: Polynomial
    lam: object

    def apply(self, p: Polynomial) -> Polynomial:
        with mpmath.workdps(DEFAULT_DPS):
            d1 = p.derivative()
            return -(self.p2 * d1.derivative()) + self.p1 * d1 - self.p0 * p

    @property
    def Y(self) -> Polynomial:
        """Y_{N+1}(z) with p1 = 2 x Y."""
        q, r = divmod(self.p1, X * 2)
        if not r.is_zero:
            raise ConsistencyError("p1 is not divisible by 2x")
        return q.to_z()

    @property
    def Z(self) -> Polynomial:
        return self.p0.to_z()


@high_precision
def build_zero_mode_operator(spec: PotentialSpec, lam) -> ZeroModeOperator:
    """2 P0 Gamma^{-1} (H1 - lambda) Gamma with Gamma = exp(q)/P0.

    Expanding with V1 = V0 - (ln u)'' the poles cancel and
        p1 = 2 (P0' - q' P0),
        p0 = P0 (3 q'' + q'^2 - 2 V0 + 2 lambda) + P0'' - 2 q' P0'.
    """
    spec.require_integer_N()
    rec = build_partner(spec)
    P0 = rec.P0
    q1 = rec.seed.exponent.derivative()
    q2 = q1.derivative()
    dP, d2P = P0.derivative(), P0.derivative().derivative()
    lam_c = lam if isinstance(lam, (Surd, mpmath.mpf)) else exact_or_mpf(lam)
    p1 = (dP - q1 * P0) * 2
    p0 = P0 * (q2 * 3 + q1 * q1 - rec.spec.base_polynomial() * 2 + lam_c * 2) + d2P - q1 * dP * 2
    return ZeroModeOperator(P0, p1, p0, lam_c)


def zero_mode_operator_by_conjugation(spec: PotentialSpec, lam) -> ZeroModeOperator:
    """Same operator assembled as rational functions from Gamma'/Gamma (exact seeds only)."""
    rec = build_partner(spec)
    P0 = rec.P0
    L = RationalFunction(rec.seed.exponent.derivative()) - RationalFunction(P0.derivative(), P0)
    lam_c = exact_or_mpf(lam) if not isinstance(lam, (Surd, mpmath.mpf)) else lam
    p1 = RationalFunction(P0) * L * -2
    p0 = RationalFunction(P0) * (L.derivative() + L * L) - RationalFunction(P0) * (rec.partner - lam_c) * 2
    for name, r in (("p1", p1), ("p0", p0)):
        if not r.is_polynomial:
            raise ConsistencyError(f"{name} is not polynomial: {r}")
    return ZeroModeOperator(P0, p1.num / p1.den.lead, p0.num / p0.den.lead, lam_c)


@high_precision
def zero_modes(spec: PotentialSpec) -> list[tuple[object, Polynomial]]:
    """(E_k, p_k) with p_k = P_k P0' - P_k' P0, one per excited algebraic state."""
    rec = build_partner(spec)
    P0 = rec.P0
    out = []
    for st in rec.source_states[1:]:
        Pk = st.psi.prefactor.num
        out.append((st.energy, Pk * P0.derivative() - Pk.derivative() * P0))
    return out


# verification ---------------------------------------------------------------


@dataclass(frozen=True)
class IntertwiningReport:
    max_residual: float
    residuals: tuple
    factorization_H0: float
    factorization_H1: float
    exact_zero: bool


def _sup(psi: QuarticGaussWavefunction, grid) -> float:
    return float(np.max(np.abs(psi(grid)))) if not psi.prefactor.num.is_zero else 0.0


@high_precision
def verify_intertwining(record: SusyChainRecord, test_fns: Sequence[QuarticGaussWavefunction],
                        grid=None) -> IntertwiningReport:
    """Symbolic residuals of H1 A+ - A+ H0 and both factorizations, sampled on a grid.

    Test functions are quartic-Gaussian forms (any exponent); the algebra is
    done on the prefactors, so for exact seeds the residual is identically 0.
    """
    grid = np.linspace(-3, 3, 61) if grid is None else np.asarray(grid, float)
    V0 = RationalFunction(record.spec.base_polynomial())
    eps = record.epsilon
    res, fac0, fac1, exact_zero = [], 0.0, 0.0, True
    for f in test_fns:
        lhs = apply_A_plus(record, f).apply_hamiltonian(record.partner)
        rhs = apply_A_plus(record, f.apply_hamiltonian(V0))
        d = lhs.with_prefactor(lhs.prefactor - rhs.prefactor)
        exact_zero &= d.prefactor.num.is_zero
        res.append(_sup(d, grid))
        h0 = f.apply_hamiltonian(V0)
        aa = apply_A(record, apply_A_plus(record, f))
        d0 = h0.with_prefactor(h0.prefactor - aa.prefactor - f.prefactor * eps)
        h1 = f.apply_hamiltonian(record.partner)
        bb = apply_A_plus(record, apply_A(record, f))
        d1 = h1.with_prefactor(h1.prefactor - bb.prefactor - f.prefactor * eps)
        exact_zero &= d0.prefactor.num.is_zero and d1.prefactor.num.is_zero
        fac0 = max(fac0, _sup(d0, grid))
        fac1 = max(fac1, _sup(d1, grid))
    return IntertwiningReport(max(res, default=0.0), tuple(res), fac0, fac1, exact_zero)


def intertwining_residual_fd(record: SusyChainRecord, f: Callable, xs, dps: int = 30) -> float:
    """Finite-difference oracle: |(H1 A+ - A+ H0) f| via nested mpmath.diff."""
    P0 = record.P0
    q = record.seed.exponent
    V0 = record.spec.base_polynomial()
    with mpmath.workdps(dps):
        def W(x):
            return P0.derivative()(x) / P0(x) + q.derivative()(x)

        def Ap(g):
            return lambda x: (-mpmath.diff(g, x) + W(x) * g(x)) / mpmath.sqrt(2)

        def H(V, g):
            return lambda x: -mpmath.diff(g, x, 2) / 2 + V(x) * g(x)

        V1 = lambda x: record.partner.num(x) / record.partner.den(x)  # noqa: E731
        V0f = lambda x: V0(x)  # noqa: E731
        lhs = H(V1, Ap(f))
        rhs = Ap(H(V0f, f))
        return max(float(abs(lhs(mpmath.mpf(x)) - rhs(mpmath.mpf(x)))) for x in xs)


@dataclass(frozen=True)
class GaugeIntertwiningReport:
    monomials_ok: tuple
    eigenpairs_ok: tuple
    zero_maps_to_zero: bool

    @property
    def ok(self) -> bool:
        return all(self.monomials_ok) and all(self.eigenpairs_ok) and self.zero_maps_to_zero


def script_A_dagger(record: SusyChainRecord, P: Polynomial) -> Polynomial:
    """Gauge-rotated intertwiner: sqrt(2) x (P P0_z - P_z P0), returned in x."""
    P0 = record.P0.to_z()
    s = Surd.sqrt(2) if (P.exact and P0.exact) else mpmath.sqrt(2)
    return (X * (P * P0.derivative() - P.derivative() * P0).to_x()).scale(s)


def apply_h1(record: SusyChainRecord, p: Polynomial) -> RationalFunction:
    """h1 = Gamma_N^{-1} H1 Gamma_N on a polynomial in x."""
    op = build_zero_mode_operator(record.spec, 0)
    return RationalFunction(op.apply(p), op.p2 * 2)


@high_precision
def gauge_intertwine_h(record: SusyChainRecord, tol: float = 1e-35) -> GaugeIntertwiningReport:
    """Check h1 A = A h on {1, z, ..., z^N} and on every algebraic eigenpair."""
    spec = record.spec
    N = spec.require_integer_N()
    nu, mu = spec.nu, spec.mu

    def same(a: RationalFunction, b: RationalFunction) -> bool:
        d = (a - b).num
        if d.exact:
            return d.is_zero
        ref = max([abs(to_mpf(c)) for c in a.num.coeffs + b.num.coeffs] + [mpmath.mpf(1)])
        return all(abs(to_mpf(c)) < tol * ref for c in d.coeffs)

    mono = []
    for j in range(N + 1):
        zj = Polynomial.monomial(j, var="z")
        lhs = apply_h1(record, script_A_dagger(record, zj))
        rhs = RationalFunction(script_A_dagger(record, apply_h(zj, nu, mu, N)))
        mono.append(same(lhs, rhs))
    pairs = []
    for st in record.source_states:
        calP = script_A_dagger(record, st.P)
        lhs = apply_h1(record, calP)
        pairs.append(same(lhs, RationalFunction(calP.scale(st.energy))))
    zero = script_A_dagger(record, Polynomial([], "z")).is_zero
    return GaugeIntertwiningReport(tuple(mono), tuple(pairs), zero)


def energy_expectation(V: Callable, psi: QuarticGaussWavefunction) -> float:
    """<psi|(-1/2 d^2 + V)|psi>/<psi|psi> by quadrature, kinetic term as |psi'|^2/2."""
    dpsi = psi.derivative()

    def num(x):
        return 0.5 * dpsi(x) ** 2 + V(x) * psi(x) ** 2

    def den(x):
        return psi(x) ** 2

    a, _ = integrate.quad(num, -np.inf, np.inf, epsabs=0, epsrel=1e-13, limit=400)
    b, _ = integrate.quad(den, -np.inf, np.inf, epsabs=0, epsrel=1e-13, limit=400)
    return a / b


def sl2_quadratic_fit(spec: PotentialSpec, lam=0) -> float:
    """Least-squares residual of h^(susy) against a general quadratic sl2 combination.

    Diagnostic only: a nonzero residual supports the claim that the zero-mode
    operator has no constant-coefficient sl2 form in x.  The nine basis
    operators are J^a J^b (a <= b) and J^a for the x-variable generators with
    spin n = deg, compared on monomials x^0..x^n.
    """
    op = build_zero_mode_operator(spec, lam)
    n = 4 * spec.require_integer_N() - 3 + 2
    x = Polynomial([0, 1], "x")

    def jp(p):
        return x * x * p.derivative() - (x * p).scale(Surd(n))

    def j0(p):
        return x * p.derivative() - p.scale(Surd(Fraction(n, 2)))

    def jm(p):
        return p.derivative()

    gens = [jp, j0, jm]
    ops = [lambda p: p] + gens[:]
    for a in range(3):
        for b in range(a, 3):
            ops.append(lambda p, a=a, b=b: gens[a](gens[b](p)))
    rows, rhs = [], []
    deg = n + 6
    for j in range(n + 1):
        m = Polynomial.monomial(j, var="x")
        target = op.apply(m)
        cols = [o(m) for o in ops]
        for k in range(deg + 1):
            rows.append([float(c.coeff(k)) for c in cols])
            rhs.append(float(target.coeff(k)))
    A, b = np.array(rows), np.array(rhs)
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    return float(np.linalg.norm(A @ coef - b) / max(np.linalg.norm(b), 1e-300))

