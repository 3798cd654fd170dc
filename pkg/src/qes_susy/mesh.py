"""Lagrange-Hermite mesh eigensolver.

The mesh points are x_i = h u_i with u_i the zeros of the Hermite
polynomial H_M. In the cardinal basis the kinetic operator -d^2/du^2 has
the closed-form entries

    T_ii = (2M + 1 - u_i^2) / 3,
    T_ij = (-1)^(i-j) * 2 / (u_i - u_j)^2 ,

and the potential is diagonal, so H = T / (2 h^2) + diag V(h u_i).

Two precisions are offered. ``double`` diagonalizes in hardware floats.
``extended`` builds nodes and the Hamiltonian in mpmath and refines each
double eigenpair by Rayleigh-quotient correction steps whose linear solves
reuse the double eigenbasis, so only matrix-vector products run in
multiprecision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import mpmath
import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.optimize import brentq

from .errors import BracketError, DomainError, NumericError
from .model import PotentialSpec, Variant, evaluate_potential

DEFAULT_M = 100
EXTENDED_M = 800
EXTENDED_DPS = 40


# --------------------------------------------------------------------------
# nodes and weights


def _hermite_function_logs(u: np.ndarray, M: int):
    """log|phi_k(u)| and sign for k = M-1, M, plus log sum_{k<M} phi_k(u)^2.

    phi_k are the orthonormal Hermite functions. The recurrence is run on
    rescaled values so that nothing overflows or underflows for |u| ~ 40.
    """
    u = np.asarray(u, dtype=float)
    logscale = -0.5 * u * u - 0.25 * math.log(math.pi)
    p_prev = np.zeros_like(u)
    p = np.ones_like(u)
    acc = np.ones_like(u)  # sum of squares, in units of exp(2 logscale)
    for k in range(M):
        nxt = math.sqrt(2.0 / (k + 1)) * u * p - math.sqrt(k / (k + 1)) * p_prev
        if k == M - 1:
            break
        p_prev, p = p, nxt
        acc = acc + p * p
        big = np.abs(p) > 1e100
        if big.any():
            s = np.where(big, 1e-100, 1.0)
            p, p_prev, acc = p * s, p_prev * s, acc * s * s
            logscale = logscale + np.where(big, 100 * math.log(10.0), 0.0)
    # p = phi_{M-1}, nxt = phi_M (both scaled)
    with np.errstate(divide="ignore"):
        log_m1 = np.log(np.abs(p)) + logscale
        log_m = np.log(np.abs(nxt)) + logscale
    log_sum = np.log(acc) + 2 * logscale
    return (log_m1, np.sign(p)), (log_m, np.sign(nxt)), log_sum


@lru_cache(maxsize=16)
def _hermite_nodes(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Zeros of H_M and log of the modified weights w_i exp(u_i^2)."""
    k = np.arange(1, M)
    off = np.sqrt(k / 2.0)
    u = eigh_tridiagonal(np.zeros(M), off, eigvals_only=True)
    for _ in range(50):
        (lm1, s1), (lm, s), _ = _hermite_function_logs(u, M)
        step = s * s1 * np.exp(lm - lm1) / math.sqrt(2 * M)
        u = u - step
        if np.max(np.abs(step)) < 1e-15 * max(1.0, np.max(np.abs(u))):
            break
    else:
        raise NumericError("Hermite node polish did not converge")
    u = 0.5 * (u - u[::-1])  # exact symmetry
    _, _, log_sum = _hermite_function_logs(u, M)
    return u, -log_sum


@lru_cache(maxsize=8)
def _hermite_nodes_mp(M: int, dps: int) -> tuple:
    """Zeros of H_M to `dps` digits by Newton from the double nodes."""
    u0, _ = _hermite_nodes(M)
    with mpmath.workdps(dps + 10):
        half = np.array([mpmath.mpf(x) for x in u0[M // 2:]], dtype=object)
        a = [mpmath.sqrt(mpmath.mpf(2) / (k + 1)) for k in range(M)]
        b = [mpmath.sqrt(mpmath.mpf(k) / (k + 1)) for k in range(M)]
        tol = mpmath.mpf(10) ** (-dps - 5)
        for _ in range(8):
            p0 = np.array([mpmath.mpf(0)] * len(half), dtype=object)
            p1 = np.array([mpmath.mpf(1)] * len(half), dtype=object)
            for k in range(M):
                p0, p1 = p1, a[k] * half * p1 - b[k] * p0
            # p1 = phi_M, p0 = phi_{M-1} up to a common factor; phi_M' = sqrt(2M) phi_{M-1} at a zero
            step = p1 / (mpmath.sqrt(2 * M) * p0)
            half = half - step
            if max(abs(s) for s in step) < tol:
                break
        else:
            raise NumericError("extended Hermite node polish did not converge")
        if M % 2:
            half[0] = mpmath.mpf(0)
            full = np.concatenate([-half[:0:-1], half])
        else:
            full = np.concatenate([-half[::-1], half])
    return tuple(full)


@lru_cache(maxsize=8)
def _barycentric_cached(key: bytes, M: int):
    u = np.frombuffer(key, dtype=float, count=M)
    D = u[:, None] - u[None, :]
    np.fill_diagonal(D, 1.0)
    return -np.log(np.abs(D)).sum(axis=1), np.prod(np.sign(D), axis=1)


def _barycentric_logs(u: np.ndarray):
    """log |w_j| and sign w_j for w_j = 1/prod_{k != j} (u_j - u_k)."""
    return _barycentric_cached(np.ascontiguousarray(u, dtype=float).tobytes(), len(u))


def kinetic_matrix(u: np.ndarray) -> np.ndarray:
    """-d^2/du^2 in the Lagrange-Hermite basis on nodes u (works for object arrays)."""
    M = len(u)
    diff = u[:, None] - u[None, :]
    idx = np.arange(M)
    sign = np.where((idx[:, None] - idx[None, :]) % 2 == 0, 1, -1)
    np.fill_diagonal(diff, 1)
    T = sign * 2 / (diff * diff)
    diag = (2 * M + 1 - u * u) / 3
    T[idx, idx] = diag
    return T


@dataclass(frozen=True)
class HermiteMesh:
    size: int
    scale: float
    unscaled: np.ndarray = field(repr=False)
    log_weights: np.ndarray = field(repr=False)

    @property
    def nodes(self) -> np.ndarray:
        return self.scale * self.unscaled

    @property
    def weights(self) -> np.ndarray:
        """Gauss-Hermite weights (with the e^{-u^2} factor), for unscaled nodes."""
        with np.errstate(under="ignore"):
            return np.exp(self.log_weights - self.unscaled**2)

    @property
    def modified_weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @property
    def kinetic(self) -> np.ndarray:
        """Kinetic energy -1/2 d^2/dx^2 in the scaled basis."""
        return kinetic_matrix(self.unscaled) / (2 * self.scale**2)

    def mp_nodes(self, dps: int = EXTENDED_DPS) -> np.ndarray:
        return np.array(_hermite_nodes_mp(self.size, dps), dtype=object)


def build_mesh(M: int = DEFAULT_M, scale: float = 0.25) -> HermiteMesh:
    if M < 4:
        raise DomainError("mesh needs at least 4 points")
    if not scale > 0:
        raise DomainError("mesh scale must be positive")
    u, logw = _hermite_nodes(int(M))
    return HermiteMesh(int(M), float(scale), u, logw)


# --------------------------------------------------------------------------
# potentials


def _potential_funcs(potential, mp_potential=None):
    """(float callable, mp callable or None, description)."""
    if isinstance(potential, PotentialSpec):
        spec = potential
        if spec.variant in (Variant.QES, Variant.ER):
            poly = spec.base_polynomial()
            coeffs = [float(c) for c in poly.coeffs]

            def fv(x):
                return np.polynomial.polynomial.polyval(x, coeffs)

            def mv(x):
                return poly(mpmath.mpf(x))

            return fv, mv, f"V0(nu={spec.nu}, mu={spec.mu}, N={spec.N}, kappa={spec.k})"
        return (lambda x: evaluate_potential(spec, x)), mp_potential, f"{spec.variant.value} partner"
    if not callable(potential):
        raise DomainError("potential must be a PotentialSpec or a callable")
    return potential, mp_potential, getattr(potential, "__name__", "callable")


# --------------------------------------------------------------------------
# solving


@dataclass
class MeshSolveResult:
    energies: np.ndarray
    amplitudes: np.ndarray  # column n holds the mesh coefficients of state n
    expectation_x2: np.ndarray
    mesh: HermiteMesh
    meta: dict = field(default_factory=dict)

    def values_at_nodes(self, n: int) -> np.ndarray:
        """psi_n(x_i), normalized so that int psi^2 dx = 1."""
        return self.amplitudes[:, n].astype(float) / np.sqrt(self.mesh.scale * self.mesh.modified_weights)

    def wavefunction(self, n: int) -> Callable:
        """Cardinal-basis interpolant psi_n(x), evaluated in log form.

        psi(x) = sum_j psi_j f_j(u) with u = x/h and the Lagrange functions
        f_j(u) = e^{(u_j^2 - u^2)/2} prod_{k != j} (u - u_k)/(u_j - u_k).
        The products are summed as logarithms, so no factor (u - u_j) is ever
        divided out and points on or near a node stay accurate.
        """
        mesh = self.mesh
        h, u = mesh.scale, mesh.unscaled
        node_vals = self.values_at_nodes(n)
        lw, sw = _barycentric_logs(u)
        with np.errstate(divide="ignore"):
            lg = np.log(np.abs(node_vals)) + lw + u**2 / 2
        sg = np.sign(node_vals) * sw

        def psi(x):
            xs = np.atleast_1d(np.asarray(x, dtype=float)) / h
            out = np.empty_like(xs)
            for i, ui in enumerate(xs):
                d = ui - u
                hit = np.nonzero(d == 0)[0]
                if hit.size:
                    out[i] = node_vals[hit[0]]
                    continue
                ld = np.log(np.abs(d))
                sd = np.sign(d)
                # log |prod_{k != j} (u - u_k)| and its sign, for every j
                t = lg + (ld.sum() - ld) - ui * ui / 2
                sgn = sg * np.prod(sd) * sd
                top = np.max(t)
                out[i] = math.exp(top) * np.sum(sgn * np.exp(t - top)) if top > -745 else 0.0
            return out if np.ndim(x) else float(out[0])

        return psi

    def parity(self, n: int, tol: float = 1e-8) -> int | None:
        c = self.amplitudes[:, n].astype(float)
        if np.allclose(c[::-1], c, atol=tol):
            return 1
        if np.allclose(c[::-1], -c, atol=tol):
            return -1
        return None

    def orthonormality_defect(self) -> float:
        A = self.amplitudes.astype(float)
        return float(np.max(np.abs(A.T @ A - np.eye(A.shape[1]))))


def _hamiltonian_double(mesh: HermiteMesh, V) -> np.ndarray:
    v = np.asarray(V(mesh.nodes), dtype=float)
    if not np.all(np.isfinite(v)):
        raise DomainError("potential is not finite on all mesh points")
    H = mesh.kinetic.copy()
    H[np.diag_indices_from(H)] += v
    return H


def _fix_sign(vec):
    """Deterministic phase: the largest-magnitude entry (first of a tie) is positive."""
    k = int(np.argmax(np.abs(np.asarray(vec, dtype=float)) - 1e-9 * np.arange(len(vec))))
    return -vec if float(vec[k]) < 0 else vec


def solve(potential, mesh: HermiteMesh | None = None, n_states: int = 10, *,
          precision: str = "double", dps: int = EXTENDED_DPS, mp_potential=None,
          max_refine: int = 6) -> MeshSolveResult:
    """Lowest n_states eigenpairs of T + diag V on the mesh."""
    mesh = mesh or auto_mesh(potential, n_states=n_states)
    if not 1 <= n_states <= mesh.size:
        raise DomainError("n_states must be between 1 and the mesh size")
    V, Vmp, desc = _potential_funcs(potential, mp_potential)
    H = _hamiltonian_double(mesh, V)
    try:
        if precision == "double":
            lam, Q = eigh(H, subset_by_index=[0, n_states - 1])
        else:
            lam, Q = eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    x2 = (mesh.nodes**2)
    meta = dict(M=mesh.size, scale=mesh.scale, precision=precision, potential=desc)
    if precision == "double":
        Q = np.column_stack([_fix_sign(Q[:, i]) for i in range(n_states)])
        ex2 = np.einsum("in,i->n", Q * Q, x2)
        return MeshSolveResult(lam[:n_states], Q, ex2, mesh, meta)
    if precision != "extended":
        raise DomainError("precision must be 'double' or 'extended'")
    if Vmp is None:
        raise DomainError("extended precision needs an mpmath potential")
    with mpmath.workdps(dps):
        u = mesh.mp_nodes(dps)
        h = mpmath.mpf(mesh.scale)
        Hmp = kinetic_matrix(u) / (2 * h * h)
        for i in range(mesh.size):
            Hmp[i, i] += Vmp(h * u[i])
        energies, vecs, deltas = [], [], []
        for n in range(n_states):
            th, v, d = _refine(Hmp, lam, Q, n, max_refine, dps)
            energies.append(th)
            vecs.append(_fix_sign(v))
            deltas.append(d)
        A = np.column_stack(vecs)
        ex2 = np.array([sum(v[i] ** 2 * (h * u[i]) ** 2 for i in range(mesh.size)) for v in vecs], dtype=object)
    meta.update(dps=dps, residuals=deltas)
    return MeshSolveResult(np.array(energies, dtype=object), A, ex2, mesh, meta)


def _refine(Hmp, lam, Q, n, max_iter, dps):
    """Rayleigh-quotient refinement of eigenpair n, corrections solved in double."""
    v = np.array([mpmath.mpf(float(x)) for x in Q[:, n]], dtype=object)
    tol = mpmath.mpf(10) ** (-dps + 3)
    res = None
    for _ in range(max_iter):
        v = v / mpmath.sqrt(v.dot(v))
        Hv = Hmp.dot(v)
        th = v.dot(Hv)
        r = Hv - th * v
        res = max(abs(x) for x in r)
        if res < tol * max(1, abs(th)):
            break
        rd = np.array([float(x) for x in r])
        coef = Q.T @ rd
        den = lam - float(th)
        den[n] = np.inf
        delta = -(Q @ (coef / den))
        v = v + np.array([mpmath.mpf(float(x)) for x in delta], dtype=object)
    else:
        raise NumericError(f"extended refinement of state {n} stalled at residual {mpmath.nstr(res, 5)}")
    return th, v, float(res)


# --------------------------------------------------------------------------
# scale selection, scans and N_c


def auto_scale(potential, M: int = DEFAULT_M, n_states: int = 1,
               bounds: tuple[float, float] = (0.02, 1.5), points: int = 41) -> float:
    """Scale at the centre of the plateau where the lowest energies are stationary in h.

    Gauss quadrature makes the mesh energies only approximately variational,
    so plain minimization over h drifts to spuriously low values at coarse
    scales; the stationary plateau is the converged region instead.
    """
    if M < 4:
        raise DomainError("mesh needs at least 4 points")
    V, _, _ = _potential_funcs(potential)
    u, logw = _hermite_nodes(M)
    hs = np.geomspace(bounds[0], bounds[1], points)
    E = []
    for h in hs:
        H = _hamiltonian_double(HermiteMesh(M, float(h), u, logw), V)
        E.append(eigh(H, eigvals_only=True, subset_by_index=[0, n_states - 1]))
    E = np.array(E)
    sens = np.full(points, np.inf)
    sens[1:-1] = np.max(np.abs(E[2:] - E[:-2]) / (1 + np.abs(E[1:-1])), axis=1)
    flat = sens <= max(10 * sens.min(), 1e-13)
    best, run = (0, 0), None
    for i, ok in enumerate(flat):
        if ok and run is None:
            run = i
        if (not ok or i == points - 1) and run is not None:
            end = i if ok else i - 1
            if end - run >= best[1] - best[0]:
                best = (run, end)
            run = None
    return float(math.sqrt(hs[best[0]] * hs[best[1]]))


def auto_mesh(potential, M: int = DEFAULT_M, n_states: int = 1) -> HermiteMesh:
    return build_mesh(M, auto_scale(potential, M, n_states))


@dataclass
class ScanTable:
    N: list
    energies: np.ndarray  # shape (len(N), n_states)
    meta: dict = field(default_factory=dict)

    def monotone_decreasing(self) -> bool:
        e = self.energies.astype(float)
        order = np.argsort(np.asarray(self.N, dtype=float))
        return bool(np.all(np.diff(e[order], axis=0) < 0))


def scan_energies(template: PotentialSpec, N_grid, n_states: int = 3, mesh: HermiteMesh | None = None,
                  precision: str = "double", dps: int = EXTENDED_DPS) -> ScanTable:
    mesh = mesh or auto_mesh(template.with_(N=0), n_states=n_states)
    rows = [solve(template.with_(N=N), mesh, n_states, precision=precision, dps=dps).energies for N in N_grid]
    return ScanTable(list(N_grid), np.array(rows), dict(M=mesh.size, scale=mesh.scale, precision=precision))


@dataclass
class NcResult:
    Nc: float
    E0: float
    trace: list  # (N, E0) for every evaluation, in order
    meta: dict = field(default_factory=dict)


def _illinois(f, a, b, fa, fb, xtol, ftol, maxiter=100):
    """Bracketed regula falsi with the Illinois modification."""
    side = 0
    for _ in range(maxiter):
        c = (a * fb - b * fa) / (fb - fa)
        fc = f(c)
        if abs(fc) <= ftol or abs(b - a) <= xtol:
            return c, fc
        if fc * fb < 0:
            a, fa = b, fb
            side = 0
        else:
            fa = fa / 2 if side else fa
            side = 1
        b, fb = c, fc
    raise NumericError("N_c iteration did not converge")


def ground_energy(template: PotentialSpec, N, mesh: HermiteMesh, precision="double", dps=EXTENDED_DPS):
    return solve(template.with_(N=N), mesh, 1, precision=precision, dps=dps).energies[0]


def find_Nc(template: PotentialSpec = PotentialSpec(1, 1, 0), bracket=(0.5, 1.0),
            mesh: HermiteMesh | None = None, precision: str = "double", dps: int = EXTENDED_DPS,
            xtol: float | None = None) -> NcResult:
    """Root of N -> E0(N) on the bracket."""
    mesh = mesh or auto_mesh(template.with_(N=0))
    trace = []

    if precision == "double":
        seen = {}

        def f(N):
            N = float(N)
            if N not in seen:
                seen[N] = float(ground_energy(template, N, mesh))
                trace.append((N, seen[N]))
            return seen[N]

        a, b = map(float, bracket)
        fa, fb = f(a), f(b)
        if fa * fb > 0:
            raise BracketError(f"E0 does not change sign on [{a}, {b}]")
        root = brentq(f, a, b, xtol=xtol or 1e-14, maxiter=200)
        e0 = f(root)
        return NcResult(root, e0, trace, dict(M=mesh.size, scale=mesh.scale, precision=precision))

    with mpmath.workdps(dps):
        def g(N):
            e = ground_energy(template, N, mesh, "extended", dps)
            trace.append((N, e))
            return e

        a, b = (mpmath.mpf(x) for x in bracket)
        fa, fb = g(a), g(b)
        if fa * fb > 0:
            raise BracketError(f"E0 does not change sign on [{bracket[0]}, {bracket[1]}]")
        tol = mpmath.mpf(xtol) if xtol else mpmath.mpf(10) ** (-dps + 8)
        root, e0 = _illinois(g, a, b, fa, fb, tol, mpmath.mpf(10) ** (-dps + 5))
    return NcResult(root, e0, trace, dict(M=mesh.size, scale=mesh.scale, precision=precision, dps=dps))
