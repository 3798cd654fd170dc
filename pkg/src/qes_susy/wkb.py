"""Leading-order WKB quantization for the sextic family.

Bohr-Sommerfeld with two simple turning points:

    int_{-a}^{a} sqrt(2 (E - V(x))) dx = (n + 1/2) pi .

With x = a sin(theta) the integrand is analytic on [0, pi/2], so
Gauss-Legendre converges spectrally; the rule is refined until two
successive orders agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import BracketError, DomainError, NumericError, UnsupportedError
from .model import PotentialSpec, Variant

_ORDERS = (32, 64, 128, 256, 512)


def _vpoly(spec: PotentialSpec) -> np.ndarray:
    if spec.variant not in (Variant.QES, Variant.ER):
        raise DomainError("WKB is implemented for the sextic itself, not for SUSY partners")
    return np.array([float(c) for c in spec.base_polynomial().coeffs])


def turning_point(coeffs: np.ndarray, E: float) -> float:
    """Positive turning point a with V(a) = E, requiring V < E on (-a, a)."""
    # V - E is a polynomial in z = x^2
    zc = np.array(coeffs[::2], dtype=float)
    zc[0] -= E
    zc = np.trim_zeros(zc, "b")
    if len(zc) < 2:
        raise DomainError("potential has no confining term")
    roots = np.polynomial.polynomial.polyroots(zc)
    pos = sorted(r.real for r in roots if abs(r.imag) <= 1e-9 * max(1, abs(r)) and r.real > 0)
    if len(pos) != 1:
        raise UnsupportedError(
            f"E={E} lies below the central barrier ({len(pos)} positive turning points); "
            "only the two-turning-point regime is supported"
        )
    a = np.sqrt(pos[0])
    dV = np.polynomial.polynomial.polyder(coeffs)
    V = lambda x: np.polynomial.polynomial.polyval(x, coeffs)
    for _ in range(6):
        a -= (V(a) - E) / np.polynomial.polynomial.polyval(a, dV)
    if not np.polynomial.polynomial.polyval(a, dV) > 0:
        raise NumericError("turning point is not simple")
    return float(a)


def _action_at_order(coeffs, E, a, order):
    t, w = np.polynomial.legendre.leggauss(order)
    theta = (t + 1) * np.pi / 4
    x = a * np.sin(theta)
    kin = 2 * (E - np.polynomial.polynomial.polyval(x, coeffs))
    return 2 * np.sum(w * np.sqrt(np.maximum(kin, 0.0)) * a * np.cos(theta)) * np.pi / 4


def action(coeffs, E: float, tol: float = 1e-14) -> float:
    """int_{-a}^{a} sqrt(2 (E - V)) dx by Gauss-Legendre in theta."""
    a = turning_point(coeffs, E)
    prev = _action_at_order(coeffs, E, a, _ORDERS[0])
    for order in _ORDERS[1:]:
        cur = _action_at_order(coeffs, E, a, order)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return float(cur)
        prev = cur
    # near the barrier top the integrand has a near-kink at x = 0; fall back to adaptive quadrature
    f = lambda th: np.sqrt(max(2 * (E - np.polynomial.polynomial.polyval(a * np.sin(th), coeffs)), 0.0)) * a * np.cos(th)
    val, err = quad(f, 0, np.pi / 2, epsabs=1e-14, epsrel=1e-13, limit=400)
    if err > 1e-10 * max(1.0, abs(val)):
        raise NumericError("WKB action quadrature did not converge")
    return 2 * float(val)


def barrier_top(coeffs) -> float:
    """Largest local maximum of V for x >= 0 (V(0) when x = 0 is a maximum)."""
    dz = np.polynomial.polynomial.polyder(np.array(coeffs[::2], dtype=float))
    crit = [0.0] + [r.real for r in np.polynomial.polynomial.polyroots(dz) if abs(r.imag) < 1e-12 and r.real > 0]
    V = lambda x: np.polynomial.polynomial.polyval(x, coeffs)
    return max(V(np.sqrt(z)) for z in crit)


def wkb_energy(spec: PotentialSpec, n: int) -> tuple[float, tuple[float, float]]:
    if n < 0:
        raise DomainError("n must be non-negative")
    coeffs = _vpoly(spec)
    target = (n + 0.5) * np.pi
    lo = barrier_top(coeffs) + 1e-12
    if action(coeffs, lo) > target:
        raise UnsupportedError(f"WKB level n={n} falls below the central barrier")
    hi = max(2 * abs(lo), 1.0)
    while action(coeffs, hi) < target:
        hi *= 2
        if hi > 1e12:
            raise BracketError("no WKB bracket found")
    E = brentq(lambda e: action(coeffs, e) - target, lo, hi, xtol=1e-14, rtol=1e-15)
    a = turning_point(coeffs, E)
    return float(E), (-a, a)


@dataclass
class WkbResult:
    energies: np.ndarray
    turning_points: list
    delta_e: np.ndarray | None = None
    reference: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def wkb_table(spec: PotentialSpec, n_max: int, reference=None) -> WkbResult:
    """E_WKB for n = 0..n_max and, given reference energies, dE = (E_WKB - E_ref)/E_ref.

    ``reference`` may be a MeshSolveResult or a sequence of energies.
    """
    rows = [wkb_energy(spec, n) for n in range(n_max + 1)]
    E = np.array([r[0] for r in rows])
    res = WkbResult(E, [r[1] for r in rows])
    if reference is not None:
        ref = getattr(reference, "energies", reference)
        ref = np.array([float(x) for x in ref[: n_max + 1]])
        res.reference = ref
        res.delta_e = (E - ref) / ref
    return res
