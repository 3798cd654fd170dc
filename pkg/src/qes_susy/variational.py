"""Rayleigh-Ritz in polynomial x quartic-Gaussian trial bases.

Trial functions are psi = p(x) g(x) with g = exp(-nu x^4/4 - mu x^2/2).
Every matrix element reduces to the moments

    I_m = int x^(2m) exp(-nu x^4/2 - mu x^2) dx ,

which obey, by integration by parts,

    nu I_(m+2) = (m + 1/2) I_m - mu I_(m+1) .

I_0 and I_1 come from modified Bessel functions; the recurrence then runs
in multiprecision so that the ill-conditioned Gram matrices of the larger
bases stay harmless.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .errors import DomainError, NumericError
from .model import PotentialSpec, QuarticGaussWavefunction, Variant
from .poly import Polynomial, RationalFunction
from .surd import to_mpf

DPS = 50
CONDITION_WARN = 1e12


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1


@dataclass(frozen=True)
class TrialBasis:
    parity: Parity
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise DomainError("k must be non-negative")
        if not isinstance(self.parity, Parity):
            object.__setattr__(self, "parity", Parity[str(self.parity).upper()])

    @property
    def exponents(self) -> list[int]:
        return [2 * i + self.parity.value for i in range(self.k + 1)]

    def prefactor(self, coefficients) -> list:
        """Ascending coefficient list of sum_i c_i x^(2i + parity)."""
        out = [mpmath.mpf(0)] * (2 * self.k + 2)
        for c, e in zip(coefficients, self.exponents):
            out[e] = mpmath.mpf(c)
        return out


# --------------------------------------------------------------------------
# moments


def _seed_moments(nu, mu):
    """I_0 and I_1 in closed form for nu, mu > 0 (Bessel K_{1/4}, K_{3/4})."""
    a, b = nu / 2, mu
    t = b * b / (8 * a)
    i0 = mpmath.sqrt(b / a) / 2 * mpmath.exp(t) * mpmath.besselk(mpmath.mpf(1) / 4, t)
    # I_1 = -dI_0/db, using K_nu' = -K_{nu-1} - (nu/t) K_nu; d t/db = b/(4a)
    dk = -mpmath.besselk(-mpmath.mpf(3) / 4, t) - mpmath.besselk(mpmath.mpf(1) / 4, t) / (4 * t)
    di0 = i0 * (1 / (2 * b) + b / (4 * a)) + mpmath.sqrt(b / a) / 2 * mpmath.exp(t) * dk * b / (4 * a)
    return i0, -di0


@lru_cache(maxsize=32)
def moments(count: int, nu=1, mu=1, method: str = "recurrence", dps: int = DPS) -> tuple:
    """(I_0, ..., I_(count-1)) to `dps` digits."""
    with mpmath.workdps(dps + 15):
        nu, mu = to_mpf(nu), to_mpf(mu)
        if nu <= 0:
            raise DomainError("moments need nu > 0")
        if method == "quadrature" or mu <= 0:
            out = [2 * mpmath.quad(lambda x, m=m: x ** (2 * m) * mpmath.exp(-nu * x**4 / 2 - mu * x * x), [0, 1, 3, mpmath.inf])
                   for m in range(count)]
        elif method == "recurrence":
            out = list(_seed_moments(nu, mu))
            while len(out) < count:
                m = len(out) - 2
                out.append(((m + mpmath.mpf(1) / 2) * out[m] - mu * out[m + 1]) / nu)
            out = out[:count]
        else:
            raise DomainError(f"unknown moment method {method!r}")
    with mpmath.workdps(dps):
        return tuple(+x for x in out)


def _gauss_integral(poly: list, I: tuple):
    """int poly(x) g^2 dx from an ascending coefficient list."""
    return sum((c * I[j // 2] for j, c in enumerate(poly) if j % 2 == 0 and c != 0), mpmath.mpf(0))


def _mul(a, b):
    return list(np.convolve(np.array(a, dtype=object), np.array(b, dtype=object)))


def _d_gauss(p, nu, mu):
    """Prefactor of d/dx (p g): p' - (nu x^3 + mu x) p."""
    dp = [i * c for i, c in enumerate(p)][1:] or [mpmath.mpf(0)]
    out = [mpmath.mpf(0)] * (len(p) + 3)
    for i, c in enumerate(dp):
        out[i] += c
    for i, c in enumerate(p):
        out[i + 3] -= nu * c
        out[i + 1] -= mu * c
    return out


def quadratic_forms(p, q, V, nu, mu, I):
    """(<pg|H|qg>, <pg|qg>) with H = -1/2 d^2 + V, V an ascending coefficient list."""
    kin = _gauss_integral(_mul(_d_gauss(p, nu, mu), _d_gauss(q, nu, mu)), I) / 2
    pq = _mul(p, q)
    pot = _gauss_integral(_mul(pq, V), I)
    return kin + pot, _gauss_integral(pq, I)


def _mp_coeffs(poly: Polynomial) -> list:
    return [to_mpf(c) for c in poly.coeffs]


def assemble_matrices(basis: TrialBasis, spec: PotentialSpec, dps: int = DPS):
    """Hamiltonian and Gram matrices (mpmath) in the trial basis."""
    if spec.variant not in (Variant.QES, Variant.ER):
        raise DomainError("variational bases are built for the sextic itself")
    nu, mu = to_mpf(spec.nu), to_mpf(spec.mu)
    with mpmath.workdps(dps):
        V = _mp_coeffs(spec.base_polynomial())
        top = 2 * (2 * basis.k + 1) + len(V) + 8
        I = moments(top // 2 + 2, spec.nu, spec.mu, dps=dps)
        n = basis.k + 1
        H, S = mpmath.zeros(n), mpmath.zeros(n)
        mono = [[mpmath.mpf(0)] * e + [mpmath.mpf(1)] for e in basis.exponents]
        for i in range(n):
            for j in range(i, n):
                h, s = quadratic_forms(mono[i], mono[j], V, nu, mu, I)
                H[i, j] = H[j, i] = h
                S[i, j] = S[j, i] = s
    return H, S


# --------------------------------------------------------------------------
# solving


@dataclass
class VariationalResult:
    energy: object
    coefficients: list  # normalized to c_0 = 1
    basis: TrialBasis
    spec: PotentialSpec
    reference: object = None
    condition: float = 0.0
    all_energies: list = field(default_factory=list, repr=False)

    @property
    def rel_error(self):
        if self.reference is None:
            return None
        return (self.energy - self.reference) / self.reference

    def wavefunction(self) -> QuarticGaussWavefunction:
        px = Polynomial(self.basis.prefactor(self.coefficients), "x")
        return QuarticGaussWavefunction(RationalFunction(px), self.spec.nu, self.spec.mu)

    def nodes(self) -> list[float]:
        """Real zeros of the trial prefactor."""
        return sorted(float(r) for r in self.wavefunction().prefactor.num.real_roots())


def _generalized_eigh(H, S):
    L = mpmath.cholesky(S)
    Li = mpmath.inverse(L)
    A = Li * H * Li.T
    A = (A + A.T) / 2
    w, Y = mpmath.eigsy(A)
    order = sorted(range(len(w)), key=lambda i: w[i])
    C = Li.T * Y
    return [w[i] for i in order], [C[:, i] for i in order]


def solve_variational(basis: TrialBasis, spec: PotentialSpec = PotentialSpec(1, 1, 0),
                      reference=None, dps: int = DPS) -> VariationalResult:
    """Odd basis: lowest root. Even basis: second root (the first is the ground state)."""
    H, S = assemble_matrices(basis, spec, dps)
    with mpmath.workdps(dps):
        ev = mpmath.eigsy(S, eigvals_only=True)
        cond = float(max(ev) / min(ev))
        if cond > CONDITION_WARN:
            warnings.warn(f"Gram matrix condition number {cond:.2e}; results rely on the {dps}-digit arithmetic, "
                          "reduce k for a double-precision evaluation", stacklevel=2)
        try:
            w, vecs = _generalized_eigh(H, S)
        except ZeroDivisionError as exc:
            raise NumericError("Gram matrix is not positive definite") from exc
        pick = 0 if basis.parity is Parity.ODD else 1
        if pick >= len(w):
            raise DomainError("even basis needs k >= 1 to reach the second even state")
        c = vecs[pick]
        coeffs = [c[i] / c[0] for i in range(len(c))]
        ref = mpmath.mpf(reference) if reference is not None else None
        return VariationalResult(w[pick], coeffs, basis, spec, ref, cond, list(w))


# --------------------------------------------------------------------------
# SUSY mapping and accuracy degradation


def susy_map_trial(result: VariationalResult, chain) -> tuple[QuarticGaussWavefunction, object]:
    """A+ applied to the trial state and <H1> on the image, with no further minimization.

    For the N = 0 chain the superpotential is -(x^3 + x), so A+ (x^j g) is
    proportional to j x^(j-1) g: odd bases map to sum c_i (2i+1) x^(2i),
    even bases to sum 2i b_i x^(2i-1).
    """
    spec = result.spec
    cs = chain.spec
    if cs.integer_N != 0 or float(cs.nu) != float(spec.nu) or float(cs.mu) != float(spec.mu) or spec.integer_N != 0:
        raise DomainError("the closed-form SUSY image needs the N = 0 partner of the same sextic")
    if not chain.partner.is_polynomial:
        raise DomainError("partner potential is not polynomial")
    with mpmath.workdps(DPS):
        mapped = [mpmath.mpf(0)] * (2 * result.basis.k + 2)
        for c, e in zip(result.coefficients, result.basis.exponents):
            if e:
                mapped[e - 1] += e * c
        nu, mu = to_mpf(spec.nu), to_mpf(spec.mu)
        V1 = _mp_coeffs(chain.partner.num)
        I = moments(2 * len(mapped) + len(V1) + 4, spec.nu, spec.mu)
        h, s = quadratic_forms(mapped, mapped, V1, nu, mu, I)
        energy = h / s
    phi = QuarticGaussWavefunction(RationalFunction(Polynomial(mapped, "x")), spec.nu, spec.mu)
    return phi, energy


@dataclass
class DegradationRow:
    k: int
    before: float
    after: float

    @property
    def factor(self) -> float:
        return self.after / self.before


def accuracy_degradation_report(before: list[VariationalResult], after_energies: list, reference) -> list[DegradationRow]:
    """e_r of each trial state against E_ref and of its SUSY image against the same E_ref."""
    if len(before) != len(after_energies):
        raise DomainError("before/after lists differ in length")
    ref = mpmath.mpf(reference)
    return [DegradationRow(r.basis.k, float((r.energy - ref) / ref), float((a - ref) / ref))
            for r, a in zip(before, after_energies)]
