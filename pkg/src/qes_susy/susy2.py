"""Confluent second-order SUSY built on a single seed u with H0 u = eps u.

    omega(x) = omega0 + int_0^x u(y)^2 dy,
    V2 = V0 - (ln omega)'' = V0 - 2 u u'/omega + u^4/omega^2,
    missing state phi_eps = u/omega,
    phi_n = B+ psi_n/(E_n - eps) = -[psi_n + u W(u, psi_n)/(2 (E_n - eps) omega)],

with W(u, psi) = u psi' - u' psi.  omega is monotone, so V2 is regular iff
|omega0| > w* = int_0^inf u^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import integrate

from .algebraic import er_spectrum
from .errors import DomainError, NumericError, SingularPartnerError
from .model import PotentialSpec, QuarticGaussWavefunction, Variant, exact_or_mpf
from .poly import Polynomial
from .surd import to_mpf


_GL_RULE = np.polynomial.legendre.leggauss(24)
_GL_WIDTH = 0.25


@dataclass(frozen=True)
class QuadratureConfig:
    epsrel: float = 2e-14
    epsabs: float = 1e-18
    limit: int = 200
    split: float = 3.0


@dataclass(frozen=True)
class ConfluentChain:
    """Seed u (energy eps) of H0 = -1/2 d^2 + V0, with integration constant omega0."""

    seed: QuarticGaussWavefunction
    epsilon: object
    omega0: float
    V0_poly: Polynomial
    known_states: tuple = ()
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    check: bool = True

    def __post_init__(self):
        if self.check:
            w = self.w_star
            if abs(self.omega0) <= w:
                raise SingularPartnerError(
                    f"omega0 = {self.omega0} lies in [-w*, w*] with w* = {w}; omega would vanish"
                )

    def V0(self, x):
        return self.V0_poly(x)

    # omega ----------------------------------------------------------------
    def u2(self, x):
        return self.seed(x) ** 2

    @property
    def w_star(self) -> float:
        return _w_star(self.seed, self.quadrature)

    @property
    def window(self) -> tuple[float, float]:
        w = self.w_star
        return (-w, w)

    def integral(self, x):
        """int_0^x u^2 by accumulating over the gaps between sorted |x| values.

        Short gaps use one vectorized Gauss-Legendre rule (u^2 is entire, so
        24 points are exact to rounding for widths up to _GL_WIDTH); longer
        gaps fall back to adaptive quadrature.
        """
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        a = np.abs(xs)
        order = np.argsort(a)
        ends = np.concatenate([[0.0], a[order]])
        lo, hi = ends[:-1], ends[1:]
        width = hi - lo
        gaps = np.zeros_like(width)
        short = (width > 0) & (width <= _GL_WIDTH)
        if short.any():
            t, w = _GL_RULE
            mid, half = (hi[short] + lo[short]) / 2, width[short] / 2
            pts = mid[:, None] + half[:, None] * t[None, :]
            gaps[short] = half * (self.u2(pts.ravel()).reshape(pts.shape) @ w)
        q = self.quadrature
        for i in np.flatnonzero(width > _GL_WIDTH):
            gaps[i] = integrate.quad(self.u2, lo[i], hi[i], epsabs=q.epsabs, epsrel=q.epsrel, limit=q.limit)[0]
        cum = np.empty_like(a)
        cum[order] = np.cumsum(gaps)
        out = np.sign(xs) * cum
        return float(out[0]) if scalar else out

    def omega(self, x):
        return self.omega0 + self.integral(x)

    def omega_mp(self, x):
        u = self.seed
        return to_mpf(self.omega0) + mpmath.quad(lambda t: u.mp(t) ** 2, [0, x])

    # partner --------------------------------------------------------------
    def potential(self, x):
        u = self.seed(x)
        du = self.seed.derivative()(x)
        w = self.omega(x)
        return self.V0(x) - 2 * u * du / w + u**4 / w**2

    @property
    def eps(self) -> float:
        return float(self.epsilon)

    def missing_state(self, x):
        return self.seed(x) / self.omega(x)

    def mapped_state(self, psi: QuarticGaussWavefunction, E: float) -> Callable:
        if abs(float(E) - self.eps) < 1e-14:
            raise DomainError("mapped states need E != eps")
        u, du = self.seed, self.seed.derivative()
        dpsi = psi.derivative()
        gap = float(to_mpf(E) - to_mpf(self.epsilon))

        def phi(x):
            ux = u(x)
            W = ux * dpsi(x) - du(x) * psi(x)
            return -(psi(x) + ux * W / (2 * gap * self.omega(x)))

        return phi


@lru_cache(maxsize=64)
def _w_star(seed: QuarticGaussWavefunction, q: QuadratureConfig) -> float:
    def f(x):
        return seed(x) ** 2

    a, _ = integrate.quad(f, 0, q.split, epsabs=0, epsrel=q.epsrel, limit=q.limit)
    b, _ = integrate.quad(f, q.split, np.inf, epsabs=0, epsrel=q.epsrel, limit=q.limit)
    return a + b


def er_seed_states(nu=1, N: int = 0, kappa: int = 0):
    spec = PotentialSpec(nu=nu, mu=0, N=N, kappa=kappa, variant=Variant.ER)
    return spec, er_spectrum(spec)


def default_omega0(w_star: float, N: int) -> float:
    """Offsets used in the worked examples: w* + 0.01 for N = 0, -w* - 0.001 for N = 1."""
    return w_star + 0.01 if N == 0 else -w_star - 0.001


def make_chain(nu=1, N: int = 0, kappa: int = 0, seed: int = 0, omega0: float | None = None,
               quadrature: QuadratureConfig | None = None) -> ConfluentChain:
    """Confluent chain on the ER potential, seeded by the ``seed``-th exact state."""
    spec, states = er_seed_states(nu, N, kappa)
    if not 0 <= seed < len(states):
        raise DomainError(f"seed index {seed} out of range for N={N}")
    st = states[seed]
    q = quadrature or QuadratureConfig()
    w = _w_star(st.psi, q)
    if omega0 is None:
        omega0 = default_omega0(w, N)
    others = tuple((s.energy, s.psi) for i, s in enumerate(states) if i != seed)
    return ConfluentChain(st.psi, st.energy, float(omega0), spec.base_polynomial(), others, q)


def chain_from_spec(spec: PotentialSpec) -> ConfluentChain:
    if float(exact_or_mpf(spec.mu)) != 0:
        raise DomainError("confluent chains are built on the ER potential (mu = 0)")
    return make_chain(spec.nu, spec.require_integer_N(), spec.kappa, spec.seed, spec.omega0)


def omega(chain: ConfluentChain, x):
    return chain.omega(x)


@dataclass(frozen=True)
class NodelessWindow:
    w_star: float
    forbidden: tuple[float, float]

    def allows(self, omega0: float) -> bool:
        return abs(omega0) > self.w_star

    def describe(self) -> str:
        return f"(-inf, {-self.w_star!r}) U ({self.w_star!r}, inf)"


def nodeless_window(chain_or_seed) -> NodelessWindow:
    seed = chain_or_seed.seed if isinstance(chain_or_seed, ConfluentChain) else chain_or_seed
    w = _w_star(seed, QuadratureConfig())
    if not w > 0:
        raise NumericError("w* must be positive")
    return NodelessWindow(w, (-w, w))


@dataclass(frozen=True)
class ConfluentPartner:
    chain: ConfluentChain
    potential: Callable
    missing_state: Callable
    mapped_states: tuple  # (E_n, callable)

    @property
    def epsilon(self) -> float:
        return self.chain.eps


def build_confluent_partner(chain: ConfluentChain) -> ConfluentPartner:
    if abs(chain.omega0) <= chain.w_star:
        raise SingularPartnerError("omega0 inside the forbidden window")
    mapped = tuple((E, chain.mapped_state(psi, E)) for E, psi in chain.known_states)
    return ConfluentPartner(chain, chain.potential, chain.missing_state, mapped)


# closed-form oracles -----------------------------------------------------------


def expint_frac(nu_, z):
    """E_nu(z) = z^(nu-1) Gamma(1-nu, z) through the upper incomplete gamma."""
    return z ** (nu_ - 1) * mpmath.gammainc(1 - nu_, z)


def omega_closed_form(case: str, omega0, x, expint: Callable = expint_frac):
    """Printed exponential-integral forms of omega for the three worked cases (nu = 1).

    The printed expressions are valid for x > 0; negative x uses the odd
    extension omega0 - [omega(|x|) - omega0], since u^2 is even.
    """
    x = mpmath.mpf(x)
    ax = abs(x)
    if ax == 0:
        return mpmath.mpf(omega0)
    s = 1 if x > 0 else -1
    t = ax**4 / 2
    if case == "k0N0":
        tail = ax * expint(mpmath.mpf(3) / 4, t) / 4
        wstar = 2 ** mpmath.mpf(0.25) * mpmath.gamma(mpmath.mpf(5) / 4)
    elif case == "k1N0":
        tail = ax**3 * expint(mpmath.mpf(1) / 4, t) / 4
        wstar = 2 ** mpmath.mpf(0.75) * mpmath.gamma(mpmath.mpf(3) / 4) / 4
    elif case == "k0N1-":
        tail = (ax * expint(mpmath.mpf(3) / 4, t) + mpmath.sqrt(2) * ax**3 * expint(mpmath.mpf(1) / 4, t)
                + 2 * mpmath.exp(-t) * ax)
        wstar = -(mpmath.gamma(-mpmath.mpf(1) / 4) - 2 * mpmath.gamma(mpmath.mpf(1) / 4)) / 2 ** mpmath.mpf(0.75)
    else:
        raise DomainError(f"no printed closed form for case {case!r}")
    return mpmath.mpf(omega0) + s * (wstar - tail)


def w_star_closed_form(case: str):
    return {
        "k0N0": 2 ** mpmath.mpf(0.25) * mpmath.gamma(mpmath.mpf(5) / 4),
        "k1N0": 2 ** mpmath.mpf(-1.25) * mpmath.gamma(mpmath.mpf(3) / 4),
        "k0N1-": 2 ** mpmath.mpf(0.25) * (mpmath.gamma(mpmath.mpf(1) / 4) + 2 * mpmath.gamma(mpmath.mpf(3) / 4)),
    }[case]


def omega_incomplete_gamma(chain: ConfluentChain, x):
    """int_0^x u^2 term by term: int_0^x t^a e^{-nu t^4/2} = (2/nu)^((a+1)/4) gamma((a+1)/4, nu x^4/2)/4."""
    u = chain.seed
    P = (u.prefactor.num * u.prefactor.num)
    nu = to_mpf(u.nu)
    x = mpmath.mpf(x)
    tot = mpmath.mpf(0)
    for a, c in enumerate(P.coeffs):
        if not c:
            continue
        s = mpmath.mpf(a + 1) / 4
        tot += to_mpf(c) * (2 / nu) ** s * mpmath.gammainc(s, 0, nu * abs(x) ** 4 / 2) / 4 * (
            mpmath.sign(x) ** (a + 1))
    return to_mpf(chain.omega0) + tot


def printed_phi2_k0N1(x, omega_value):
    """Mapped second state for the (kappa=0, N=1, psi_-) chain, with exp(-x^4/4) leading factor."""
    e = np.exp(-x**4 / 4)
    return -((2 * x**2 - np.sqrt(2)) * e + 2 * x * (2 * x**2 + np.sqrt(2)) * e**3 / omega_value)


# truncated Taylor jets ---------------------------------------------------------


class Jet:
    """Truncated Taylor expansion sum_k c[k] (x - x0)^k."""

    __slots__ = ("c",)

    def __init__(self, c):
        self.c = list(c)

    @classmethod
    def of(cls, psi: QuarticGaussWavefunction, x0, order: int) -> "Jet":
        out, f, fact = [], psi, mpmath.mpf(1)
        for k in range(order + 1):
            out.append(f.mp(x0) / fact)
            f = f.derivative()
            fact *= k + 1
        return cls(out)

    @classmethod
    def const(cls, v, order):
        return cls([mpmath.mpf(v)] + [mpmath.mpf(0)] * order)

    @property
    def order(self):
        return len(self.c) - 1

    def _trim(self, o):
        n = min(self.order, o.order) + 1
        return self.c[:n], o.c[:n]

    def __add__(self, o):
        if not isinstance(o, Jet):
            o = Jet.const(o, self.order)
        a, b = self._trim(o)
        return Jet([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Jet([-x for x in self.c])

    def __sub__(self, o):
        return self + (-o if isinstance(o, Jet) else Jet.const(-o, self.order))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, Jet):
            return Jet([x * o for x in self.c])
        a, b = self._trim(o)
        n = len(a)
        return Jet([sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n)])

    __rmul__ = __mul__

    def inverse(self):
        a = self.c
        out = [1 / a[0]]
        for k in range(1, len(a)):
            out.append(-sum(a[i] * out[k - i] for i in range(1, k + 1)) / a[0])
        return Jet(out)

    def __truediv__(self, o):
        if not isinstance(o, Jet):
            return Jet([x / o for x in self.c])
        return self * o.inverse()

    def d(self):
        return Jet([(k + 1) * self.c[k + 1] for k in range(self.order)])

    def integrate(self, const):
        return Jet([mpmath.mpf(const)] + [self.c[k] / (k + 1) for k in range(self.order)])

    @property
    def value(self):
        return self.c[0]


@dataclass(frozen=True)
class FactorizationReport:
    bplus_b: float
    b_bplus: float
    missing_state: float
    points: tuple


def _confluent_operators(chain: ConfluentChain, x0, order: int, V0_mp: Callable):
    """Jets of u, omega and the potentials at x0, plus operator builders."""
    u = Jet.of(chain.seed, x0, order + 1)
    w = (u * u).integrate(chain.omega_mp(x0))
    xj = Jet([mpmath.mpf(x0), mpmath.mpf(1)] + [mpmath.mpf(0)] * (order - 1))
    V0 = V0_mp(xj)
    alpha = u.d() / u  # u'/u
    beta = (u * u) / w - alpha  # v'/v with v = omega/u
    s = 1 / mpmath.sqrt(2)
    eps = to_mpf(chain.epsilon)
    V2 = V0 - (u * u / w).d()

    def A1p(f):
        return (-f.d() + alpha * f) * s

    def A1(f):
        return (f.d() + alpha * f) * s

    def A2p(f):
        return (-f.d() + beta * f) * s

    def A2(f):
        return (f.d() + beta * f) * s

    def H(V, f):
        return f.d().d() * mpmath.mpf(-0.5) + V * f

    return dict(u=u, w=w, V0=V0, V2=V2, eps=eps, A1p=A1p, A1=A1, A2p=A2p, A2=A2, H=H)


def _poly_of_jet(coeffs):
    def V(xj):
        acc = Jet.const(0, xj.order)
        for c in reversed(coeffs):
            acc = acc * xj + c
        return acc

    return V


def verify_confluent_factorization(chain: ConfluentChain, test_fns: Sequence[QuarticGaussWavefunction],
                                   points=(0.35, 0.8, 1.3), dps: int = 40,
                                   order: int = 8) -> FactorizationReport:
    """B+B = (H2 - eps)^2, BB+ = (H0 - eps)^2 and H2 phi_eps = eps phi_eps via Taylor jets."""
    V0_coeffs = [to_mpf(c) for c in chain.V0_poly.coeffs]
    r1 = r2 = r3 = 0.0
    with mpmath.workdps(dps):
        Vj = _poly_of_jet(V0_coeffs)
        for x0 in points:
            ops = _confluent_operators(chain, mpmath.mpf(x0), order, Vj)
            A1p, A1, A2p, A2, H = ops["A1p"], ops["A1"], ops["A2p"], ops["A2"], ops["H"]
            eps, V0, V2 = ops["eps"], ops["V0"], ops["V2"]
            for f in test_fns:
                fj = Jet.of(f, mpmath.mpf(x0), order)
                lhs = A2p(A1p(A1(A2(fj))))
                g = H(V2, fj) - fj * eps
                rhs = H(V2, g) - g * eps
                r1 = max(r1, float(abs(lhs.value - rhs.value) / (1 + abs(rhs.value))))
                lhs = A1(A2(A2p(A1p(fj))))
                g = H(V0, fj) - fj * eps
                rhs = H(V0, g) - g * eps
                r2 = max(r2, float(abs(lhs.value - rhs.value) / (1 + abs(rhs.value))))
            phi = ops["u"] / ops["w"]
            res = H(V2, phi) - phi * eps
            r3 = max(r3, float(abs(res.value) / abs(phi.value)))
    return FactorizationReport(r1, r2, r3, tuple(points))


def factorization_residual_fd(chain: ConfluentChain, f: Callable, x0, dps: int = 30) -> float:
    """Oracle for B+B = (H2-eps)^2 using nested mpmath.diff and mpmath.quad for omega."""
    with mpmath.workdps(dps):
        u = chain.seed.mp
        V0 = lambda x: chain.V0_poly(mpmath.mpf(x))  # noqa: E731
        eps = to_mpf(chain.epsilon)
        s = 1 / mpmath.sqrt(2)
        alpha = lambda x: mpmath.diff(u, x) / u(x)  # noqa: E731
        beta = lambda x: u(x) ** 2 / chain.omega_mp(x) - alpha(x)  # noqa: E731
        V2 = lambda x: V0(x) - mpmath.diff(lambda t: u(t) ** 2 / chain.omega_mp(t), x)  # noqa: E731

        def op(kind, g):
            if kind == "A2":
                return lambda x: (mpmath.diff(g, x) + beta(x) * g(x)) * s
            if kind == "A2p":
                return lambda x: (-mpmath.diff(g, x) + beta(x) * g(x)) * s
            if kind == "A1":
                return lambda x: (mpmath.diff(g, x) + alpha(x) * g(x)) * s
            return lambda x: (-mpmath.diff(g, x) + alpha(x) * g(x)) * s

        lhs = op("A2p", op("A1p", op("A1", op("A2", f))))
        h = lambda g: (lambda x: -mpmath.diff(g, x, 2) / 2 + (V2(x) - eps) * g(x))  # noqa: E731
        rhs = h(h(f))
        a, b = lhs(mpmath.mpf(x0)), rhs(mpmath.mpf(x0))
        return float(abs(a - b) / (1 + abs(b)))


def missing_state_residual(chain: ConfluentChain, xs) -> float:
    """max |(H2 - eps) phi_eps| / max |phi_eps| on xs, from analytic derivatives of u/omega.

    phi'' = u''/w - 4 u^2 u'/w^2 + 2 u^5/w^3 with u'' taken from the symbolic
    derivative of the seed (not from its eigen-equation).
    """
    xs = np.asarray(xs, dtype=float)
    u = chain.seed(xs)
    du = chain.seed.derivative()(xs)
    d2u = chain.seed.derivative().derivative()(xs)
    w = chain.omega(xs)
    phi = u / w
    d2phi = d2u / w - 4 * u**2 * du / w**2 + 2 * u**5 / w**3
    res = -0.5 * d2phi + (chain.potential(xs) - chain.eps) * phi
    return float(np.max(np.abs(res)) / np.max(np.abs(phi)))


def er_prefactor_map_defect(chain: ConfluentChain, xs=(0.4, 0.9)) -> tuple:
    """Ratios phi_E(i x)/phi_{-E}(x) after stripping exp(-x^4/4), for the two paired states.

    In the original algebraic sector these ratios are x-independent; for the
    confluent partner they differ from point to point.
    """
    if not chain.known_states:
        raise DomainError("needs a chain with a paired partner state")
    E, psi = chain.known_states[0]
    u = chain.seed
    gap = to_mpf(E) - to_mpf(chain.epsilon)

    def omega_c(z):
        return to_mpf(chain.omega0) + mpmath.quad(lambda t: u.prefactor(t * z / abs(z)) ** 2 * mpmath.exp(
            2 * u.exponent(t * z / abs(z))) * z / abs(z), [0, abs(z)])

    def prefactor_phi(z):
        # phi_n(z) * exp(z^4/4)
        uz = u.prefactor(z)
        du = u.derivative().prefactor(z)
        pz = psi.prefactor(z)
        dp = psi.derivative().prefactor(z)
        W = (uz * dp - du * pz) * mpmath.exp(2 * u.exponent(z))
        return -(pz + uz * W / (2 * gap * omega_c(z)))

    def prefactor_missing(z):
        return u.prefactor(z) / omega_c(z)

    ratios = []
    for x in xs:
        x = mpmath.mpf(x)
        ratios.append(complex(prefactor_phi(1j * x) / prefactor_missing(x)))
    return tuple(ratios)
