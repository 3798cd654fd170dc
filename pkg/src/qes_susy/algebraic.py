"""Algebraic sector: the gauge-rotated operator h on polynomials in z = x^2.

With psi = x^kappa P(z) exp(-nu x^4/4 - mu x^2/2) the Schroedinger equation
becomes h P = E P, where on monomials

    h z^j = 2 nu (j - N) z^(j+1) + mu (2j + kappa + 1/2) z^j - j (2j - 1 + 2 kappa) z^(j-1).

For integer N the space of polynomials of degree <= N is invariant, so the
N+1 exact levels are the eigenvalues of a tridiagonal matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath

from .errors import ConsistencyError, DomainError, InexactError, NumericError, UnsupportedError
from .model import (EnergyLevel, PotentialSpec, QuarticGaussWavefunction, Sector, Variant,
                    exact_or_mpf)
from .poly import Polynomial
from .surd import Surd, to_mpf

DEFAULT_DPS = 50


@dataclass(frozen=True)
class HMatrix:
    """Matrix of h on {1, z, ..., z^N}; ``rows[i][j]`` is the z^i coefficient of h z^j."""

    rows: tuple
    nu: object
    mu: object
    N: int
    kappa: int = 0

    @property
    def dim(self) -> int:
        return self.N + 1

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Surd) for r in self.rows for v in r)

    def diag(self, i):
        return self.rows[i][i]

    def sub(self, i):
        """Entry (i+1, i)."""
        return self.rows[i + 1][i]

    def sup(self, i):
        """Entry (i, i+1)."""
        return self.rows[i][i + 1]

    def to_float(self):
        import numpy as np

        return np.array([[float(v) for v in r] for r in self.rows])

    def apply(self, c: list) -> list:
        return [sum((self.rows[i][j] * c[j] for j in range(self.dim)), Surd(0)) for i in range(self.dim)]


def _h_coefficients(nu, mu, N, kappa, j):
    """(up, diag, down) coefficients of h z^j."""
    return (2 * nu * (j - N), mu * (2 * j + kappa + Fraction(1, 2)), -j * (2 * j - 1 + 2 * kappa))


def build_h_matrix(spec: PotentialSpec) -> HMatrix:
    N = spec.require_integer_N()
    nu, mu, k = exact_or_mpf(spec.nu), exact_or_mpf(spec.mu), spec.k
    zero = Surd(0) if isinstance(nu, Surd) and isinstance(mu, Surd) else mpmath.mpf(0)
    rows = [[zero] * (N + 1) for _ in range(N + 1)]
    for j in range(N + 1):
        up, d, down = _h_coefficients(nu, mu, N, k, j)
        rows[j][j] = zero + d
        if j < N:
            rows[j + 1][j] = zero + up
        if j > 0:
            rows[j - 1][j] = zero + down
    # the z^(N+1) coefficient 2 nu (j - N) vanishes at j = N by construction
    if _h_coefficients(nu, mu, N, k, N)[0] != 0:
        raise ConsistencyError("h does not preserve degree-N polynomials")
    return HMatrix(tuple(tuple(r) for r in rows), nu, mu, N, k)


def apply_h(P: Polynomial, nu, mu, N, kappa: int = 0) -> Polynomial:
    """Gauge-rotated operator on an arbitrary polynomial in z (no truncation)."""
    nu, mu, N = exact_or_mpf(nu), exact_or_mpf(mu), exact_or_mpf(N)
    out = Polynomial([], "z")
    for j, c in enumerate(P.coeffs):
        if not c:
            continue
        up, d, down = _h_coefficients(nu, mu, N, kappa, j)
        terms = [0] * (j + 2)
        terms[j + 1] = up * c
        terms[j] = d * c
        if j:
            terms[j - 1] = down * c
        out = out + Polynomial(terms, "z")
    return out


def characteristic_polynomial(hm: HMatrix) -> Polynomial:
    """det(E - h) in the variable E, by the tridiagonal continuant recurrence."""
    E = Polynomial([0, 1], "E")
    f_prev = Polynomial([1], "E")
    f = E - hm.diag(0)
    for k in range(1, hm.dim):
        f, f_prev = (E - hm.diag(k)) * f - f_prev * (hm.sup(k - 1) * hm.sub(k - 1)), f
    return f


def _rational_guess(r, maxden: int):
    if isinstance(r, mpmath.mpc):
        if abs(r.imag) > mpmath.mpf(10) ** -20:
            return None
        r = r.real
    return Fraction(mpmath.nstr(r, mpmath.mp.dps - 5, strip_zeros=False)).limit_denominator(maxden)


def _exact_roots(p: Polynomial, dps: int) -> list:
    """Exact roots of a rational polynomial when they lie in a quadratic surd field.

    Rational roots are recognized from numeric approximations and confirmed by
    exact division; remaining factors are split into rational quadratics by
    pairing numeric roots, then solved with exact square roots.  Returns a
    list mixing Surd (exact) and mpf (fallback) values.
    """
    with mpmath.workdps(dps):
        num = p.roots(dps)
    lead = p.lead.rational
    maxden = max(abs(lead.numerator) * 64, 10**6)
    exact: list = []
    rest = p
    pending = list(num)
    with mpmath.workdps(dps):
        for r in list(pending):
            g = _rational_guess(r, maxden)
            if g is None:
                continue
            lin = Polynomial([-g, 1], "E")
            q, rem = divmod(rest, lin)
            if rem.is_zero:
                exact.append(Surd(g))
                rest = q
                pending.remove(r)
        while len(pending) >= 2:
            found = False
            for a, b in itertools.combinations(pending, 2):
                s = _rational_guess((a + b).real if isinstance(a + b, mpmath.mpc) else a + b, maxden)
                prod = a * b
                t = _rational_guess(prod.real if isinstance(prod, mpmath.mpc) else prod, maxden)
                if s is None or t is None:
                    continue
                quad = Polynomial([t, -s, 1], "E")
                q, rem = divmod(rest, quad)
                if not rem.is_zero:
                    continue
                disc = s * s - 4 * t
                if disc < 0:
                    raise NumericError("complex eigenvalue pair in a symmetric-like problem")
                try:
                    sq = Surd.sqrt(disc)
                except InexactError:
                    continue
                exact += [(Surd(s) - sq) / 2, (Surd(s) + sq) / 2]
                rest = q
                pending.remove(a)
                pending.remove(b)
                found = True
                break
            if not found:
                break
        leftovers = []
        for r in pending:
            if isinstance(r, mpmath.mpc):
                if abs(r.imag) > mpmath.mpf(10) ** (-dps // 3):
                    raise NumericError(f"complex eigenvalue {r}")
                r = r.real
            leftovers.append(+r)
    return exact + leftovers


def _is_rational_matrix(hm: HMatrix) -> bool:
    return hm.exact and all(v.is_rational for r in hm.rows for v in r)


def eigenvalues(hm: HMatrix, dps: int = DEFAULT_DPS) -> list:
    """All eigenvalues in ascending order; exact Surds where attainable."""
    cp = characteristic_polynomial(hm)
    if _is_rational_matrix(hm):
        vals = _exact_roots(cp, dps)
    else:
        with mpmath.workdps(dps):
            vals = []
            for r in cp.to_numeric().roots(dps):
                if isinstance(r, mpmath.mpc):
                    if abs(r.imag) > mpmath.mpf(10) ** (-dps // 3):
                        raise NumericError(f"complex eigenvalue {r}")
                    r = r.real
                vals.append(r)
    with mpmath.workdps(dps):
        return sorted(vals, key=to_mpf)


def eigenvector(hm: HMatrix, E, normalize: bool = True) -> Polynomial:
    """Coefficients of P(z) from the three-term recurrence of (h - E) c = 0."""
    exact = isinstance(E, Surd) and hm.exact
    rows = hm.rows if exact else [[to_mpf(v) for v in r] for r in hm.rows]
    E = E if exact else to_mpf(E)
    c = [Surd(1) if exact else mpmath.mpf(1)]
    for i in range(hm.N):
        acc = (rows[i][i] - E) * c[i]
        if i:
            acc = acc + rows[i][i - 1] * c[i - 1]
        c.append(-acc / rows[i][i + 1])
    P = Polynomial(c, "z")
    if normalize and hm.N >= 1:
        P = P.scale((2 * exact_or_mpf(hm.nu) if exact else 2 * to_mpf(hm.nu)) / P.lead)
    return P


def count_positive_roots(P: Polynomial) -> int:
    if P.exact:
        return P.count_positive_roots()
    return sum(1 for r in P.real_roots() if r > 0)


class AlgebraicState(NamedTuple):
    level: EnergyLevel
    psi: QuarticGaussWavefunction

    @property
    def energy(self):
        return self.level.value

    @property
    def P(self) -> Polynomial:
        """The eigenpolynomial in z (the x^kappa factor stripped)."""
        px = self.psi.prefactor.num
        if px.coeff(0) == 0 and px.parity() == -1:
            px = Polynomial(px.coeffs[1:], "x")
        return px.to_z()


def algebraic_spectrum(spec: PotentialSpec, dps: int = DEFAULT_DPS) -> list[AlgebraicState]:
    """The N+1 exact levels with their quartic-Gaussian eigenfunctions."""
    hm = build_h_matrix(spec)
    out = []
    for E in eigenvalues(hm, dps):
        with mpmath.workdps(dps):
            P = eigenvector(hm, E)
            n = 2 * count_positive_roots(P) + hm.kappa
            psi = QuarticGaussWavefunction.from_z(P, spec.nu, spec.mu, hm.kappa)
        out.append(AlgebraicState(EnergyLevel(E, n, Sector.ALGEBRAIC), psi))
    ns = [s.level.n for s in out]
    if ns != sorted(set(ns)):
        raise ConsistencyError(f"node counting gives non-increasing quantum numbers {ns}")
    return out


def exact_residual(spec: PotentialSpec, state: AlgebraicState) -> Polynomial:
    """h P - E P on the full polynomial space (zero for an exact eigenpair)."""
    P = state.P
    return apply_h(P, spec.nu, spec.mu, spec.N, spec.k) - P.scale(state.energy)


# sl2 representation ---------------------------------------------------------


@dataclass(frozen=True)
class Sl2Generators:
    """J+ = z^2 d - N z, J0 = z d - N/2, J- = d acting on polynomials in z."""

    N: int

    def jplus(self, P: Polynomial) -> Polynomial:
        z = Polynomial([0, 1], "z")
        return z * z * P.derivative() - (z * P).scale(Surd(self.N))

    def jzero(self, P: Polynomial) -> Polynomial:
        z = Polynomial([0, 1], "z")
        return z * P.derivative() - P.scale(Surd(Fraction(self.N, 2)))

    def jminus(self, P: Polynomial) -> Polynomial:
        return P.derivative()

    def matrix(self, which: str) -> list[list[Surd]]:
        op = {"+": self.jplus, "0": self.jzero, "-": self.jminus}[which]
        n = self.N + 1
        cols = [op(Polynomial.monomial(j, var="z")) for j in range(n)]
        for j, c in enumerate(cols):
            if c.degree > self.N:
                raise ConsistencyError(f"J{which} leaves the degree-{self.N} space at z^{j}")
        return [[cols[j].coeff(i) for j in range(n)] for i in range(n)]


def _matmul(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), Surd(0)) for j in range(n)] for i in range(n)]


def _matlin(*terms):
    n = len(terms[0][1])
    out = [[Surd(0)] * n for _ in range(n)]
    for c, m in terms:
        for i in range(n):
            for j in range(n):
                out[i][j] = out[i][j] + c * m[i][j]
    return out


def sl2_commutators(N: int) -> dict[str, bool]:
    """Check [J0, J+-] = +-J+- and [J+, J-] = -2 J0 on the degree-N space."""
    g = Sl2Generators(N)
    jp, j0, jm = g.matrix("+"), g.matrix("0"), g.matrix("-")

    def comm(a, b):
        return _matlin((1, _matmul(a, b)), (-1, _matmul(b, a)))

    return {
        "[J0,J+]=J+": comm(j0, jp) == jp,
        "[J0,J-]=-J-": comm(j0, jm) == _matlin((-1, jm)),
        "[J+,J-]=-2J0": comm(jp, jm) == _matlin((-2, j0)),
    }


@dataclass(frozen=True)
class Sl2Report:
    ok: bool
    first_mismatch: tuple | None = None
    detail: str = ""


def sl2_form_matrix(spec: PotentialSpec, mu=None) -> list[list]:
    """-2 J0 J- + 2 nu J+ + 2 mu J0 - (N + 1 + 2 kappa) J- + mu (N + 1/2 + kappa)."""
    N = spec.require_integer_N()
    nu = exact_or_mpf(spec.nu)
    mu = exact_or_mpf(spec.mu if mu is None else mu)
    k = spec.k
    g = Sl2Generators(N)
    jp, j0, jm = g.matrix("+"), g.matrix("0"), g.matrix("-")
    ident = [[Surd(int(i == j)) for j in range(N + 1)] for i in range(N + 1)]
    return _matlin(
        (-2, _matmul(j0, jm)),
        (2 * nu, jp),
        (2 * mu, j0),
        (-(N + 1 + 2 * k), jm),
        (mu * (N + Fraction(1, 2) + k), ident),
    )


def verify_sl2_form(spec: PotentialSpec, perturb_mu=None) -> Sl2Report:
    """Entrywise comparison of h with its sl2 quadratic form.

    ``perturb_mu`` replaces mu on the sl2 side only (a negative control).
    """
    hm = build_h_matrix(spec)
    mu = spec.mu if perturb_mu is None else perturb_mu
    form = sl2_form_matrix(spec, mu)
    for i in range(hm.dim):
        for j in range(hm.dim):
            if hm.rows[i][j] != form[i][j]:
                return Sl2Report(False, (i, j), f"h[{i}][{j}]={hm.rows[i][j]} vs sl2 {form[i][j]}")
    return Sl2Report(True)


# energy-reflection sector ----------------------------------------------------


def er_spectrum(spec: PotentialSpec) -> list[AlgebraicState]:
    """Closed-form ER states for N in {0, 1} (mu = 0)."""
    if spec.variant is not Variant.ER:
        raise DomainError("er_spectrum expects the ER variant")
    if exact_or_mpf(spec.mu) != 0:
        raise DomainError("the ER potential has mu = 0")
    N = spec.require_integer_N()
    nu, k = exact_or_mpf(spec.nu), spec.kappa
    if float(nu) <= 0:
        raise DomainError("nu must be positive")
    if N == 0:
        psi = QuarticGaussWavefunction.from_z(Polynomial([1], "z"), nu, 0, k)
        return [AlgebraicState(EnergyLevel(Surd(0), k, Sector.ALGEBRAIC), psi)]
    if N != 1:
        raise UnsupportedError("closed forms only for N = 0, 1; use algebraic_spectrum with mu = 0")
    arg = 2 * nu * (1 + 2 * k)
    try:
        root = Surd.sqrt(arg)
    except InexactError:
        root = mpmath.sqrt(to_mpf(arg))
    out = []
    for sgn in (-1, 1):
        E = sgn * root
        P = Polynomial([-E, 2 * nu], "z")  # 2 nu z -+ sqrt(...)
        n = 2 * (1 if sgn > 0 else 0) + k
        out.append(AlgebraicState(EnergyLevel(E, n, Sector.ALGEBRAIC),
                                  QuarticGaussWavefunction.from_z(P, nu, 0, k)))
    return out


@dataclass(frozen=True)
class ErSymmetryReport:
    symmetric: bool
    odd_coefficients_vanish: bool
    prefactor_map_ok: bool
    energies: tuple


def er_symmetry_check(spec: PotentialSpec, dps: int = DEFAULT_DPS) -> ErSymmetryReport:
    """E -> -E pairing of the mu = 0 algebraic spectrum and the z -> -z prefactor map."""
    if exact_or_mpf(spec.mu) != 0:
        raise DomainError("ER symmetry needs mu = 0")
    hm = build_h_matrix(spec)
    cp = characteristic_polynomial(hm)
    d = cp.degree
    odd_ok = all(not cp.coeff(d - 1 - 2 * j) for j in range(d // 2 + 1) if d - 1 - 2 * j >= 0)
    states = algebraic_spectrum(spec, dps)
    Es = [s.energy for s in states]
    tol = mpmath.mpf(10) ** (-(dps // 2))
    with mpmath.workdps(dps):
        sym = all(
            (a + b == 0) if isinstance(a, Surd) and isinstance(b, Surd) else abs(to_mpf(a) + to_mpf(b)) < tol
            for a, b in zip(Es, reversed(Es))
        )
        # x -> i x sends z -> -z; P_E(-z) must be proportional to P_{-E}(z)
        map_ok = True
        for s, t in zip(states, reversed(states)):
            P, Q = s.P, t.P
            Pm = Polynomial([c * (-1) ** i for i, c in enumerate(P.coeffs)], "z")
            ratio = Pm.lead / Q.lead
            diff = Pm - Q.scale(ratio)
            if diff.exact:
                map_ok &= diff.is_zero
            else:
                map_ok &= all(abs(to_mpf(c)) < tol * (1 + abs(to_mpf(Pm.lead))) for c in diff.coeffs)
    return ErSymmetryReport(sym, odd_ok, map_ok, tuple(Es))
