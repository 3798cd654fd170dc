"""Acceptance criteria 1-10: each test records one PASS/FAIL line, printed at the end of the run."""

import subprocess
import sys
import time
import warnings
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
import pytest

from qes_susy import reference as ref
from qes_susy import tables
from qes_susy.algebraic import algebraic_spectrum, characteristic_polynomial, build_h_matrix, er_symmetry_check
from qes_susy.mesh import build_mesh, find_Nc, solve
from qes_susy.model import PotentialSpec, QuarticGaussWavefunction, Variant
from qes_susy.poly import Polynomial, RationalFunction
from qes_susy.surd import Surd, to_mpf
from qes_susy.susy1 import build_partner, build_zero_mode_operator, decompose_partner, verify_intertwining, zero_modes
from qes_susy.susy2 import make_chain, missing_state_residual, w_star_closed_form

ROOT = Path(__file__).resolve().parents[1]
SEXTIC = PotentialSpec(1, 1, 0)


def rounds_to(value, printed: str) -> bool:
    """value rounds to the printed decimal (half a unit in its last place)."""
    mant = printed.lower().split("e")
    exp = int(mant[1]) if len(mant) > 1 else 0
    decimals = len(mant[0].split(".")[1]) if "." in mant[0] else 0
    with mpmath.workdps(40):
        return abs(mpmath.mpf(value) - mpmath.mpf(printed)) <= mpmath.mpf(10) ** (exp - decimals) / 2


def sig2(v: float) -> float:
    return float(f"{v:.2g}")


# --------------------------------------------------------------------------


def test_criterion_1(report):
    t0 = time.perf_counter()
    E = {N: [s.energy for s in algebraic_spectrum(PotentialSpec(1, 1, N))] for N in range(4)}
    half, r2, r3 = Fraction(1, 2), Surd.sqrt(2), Surd.sqrt(3)
    exact = (E[0] == [Surd(half)]
             and E[1] == [Surd(Fraction(3, 2)) - r3, Surd(Fraction(3, 2)) + r3]
             and E[2] == [Surd(Fraction(-3, 2)), Surd(Fraction(9, 2)) - 2 * r2, Surd(Fraction(9, 2)) + 2 * r2])
    quartic = [16 * c for c in characteristic_polynomial(build_h_matrix(PotentialSpec(1, 1, 3))).coeffs]
    p = np.polynomial.Polynomial([-1191, 3560, 56, -224, 16])
    roots = np.sort(p.roots().real)
    dev = max(abs(float(a) - b) for a, b in zip(E[3], roots))
    resid = max(abs(float(sum(c * to_mpf(e) ** k for k, c in enumerate([-1191, 3560, 56, -224, 16])))) for e in E[3])
    dt = time.perf_counter() - t0
    ok = exact and quartic == [-1191, 3560, 56, -224, 16] and dev <= 1e-12 and dt < 1
    report(1, ok, f"N=0,1,2 exact={exact}; N=3 quartic coefficients match, max |E - root| = {dev:.1e}, "
                  f"max |P(E)| = {resid:.1e}; {dt:.2f} s")
    assert ok


def test_criterion_2(report):
    t0 = time.perf_counter()
    sym = all(er_symmetry_check(PotentialSpec(1, 0, N, kappa=k, variant=Variant.ER)).symmetric
              for N in range(5) for k in (0, 1))
    closed = True
    for nu in (1, 2, Fraction(1, 3)):
        for k in (0, 1):
            want = Surd.sqrt(2 * nu * (1 + 2 * k))
            got = [s.energy for s in algebraic_spectrum(PotentialSpec(nu, 0, 1, kappa=k, variant=Variant.ER))]
            closed &= got == [-want, want]
    dt = time.perf_counter() - t0
    ok = sym and closed and dt < 1
    report(2, ok, f"E -> -E symmetric for N=0..4, kappa=0,1: {sym}; N=1 closed forms exact: {closed}; {dt:.2f} s")
    assert ok


@pytest.fixture(scope="module")
def table1_double():
    t0 = time.perf_counter()
    t = tables.table1("double")
    return t, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_3(report, table1_double):
    t, dt = table1_double
    e_dig = min(r[3] for r in t.rows)
    x_dig = min(r[11] for r in t.rows)
    t0 = time.perf_counter()
    ext = tables.table1("extended")
    dt_ext = time.perf_counter() - t0
    e_ext = min(r[3] for r in ext.rows)
    x_ext = all(rounds_to(r[9], r[10]) for r in ext.rows)
    ok = e_dig >= 10 and x_dig >= 8 and dt < 10 and e_ext >= 18 and x_ext
    report(3, ok, f"double (M={t.meta['M']}): E >= {e_dig:.1f} digits, <x^2> >= {x_dig:.1f}, {dt:.1f} s; "
                  f"extended (M={ext.meta['M']}): E >= {e_ext:.1f} digits, <x^2> to all printed digits {x_ext}, "
                  f"{dt_ext:.0f} s")
    assert ok


def _table2_check(t, extended: bool):
    worst = np.inf
    nc_ok = True
    for row in t.rows:
        for n in range(3):
            value, printed, digits = row[1 + 3 * n: 4 + 3 * n]
            if row[0] == "N_c" and n == 0:
                # printed E0(N_c) is a 2-figure residual; double resolves it only to ~1e-13 absolute
                nc_ok = rounds_to(value, printed) if extended else abs(float(value) - float(printed)) <= 1e-11
                continue
            worst = min(worst, digits)
    return worst, nc_ok


@pytest.mark.slow
def test_criterion_4(report):
    d = tables.table2("double")
    e = tables.table2("extended")
    d_worst, d_nc = _table2_check(d, False)
    e_worst, e_nc = _table2_check(e, True)
    cross = []
    for t, need in ((d, 10), (e, 18)):
        E = {row[0]: row[1] for row in t.rows}
        for N, exact in ((2, Surd(Fraction(-3, 2))), (1, Surd(Fraction(3, 2)) - Surd.sqrt(3))):
            assert algebraic_spectrum(PotentialSpec(1, 1, N))[0].energy == exact
            with mpmath.workdps(50):
                want = mpmath.nstr(to_mpf(exact), 45)
            cross.append(ref.matching_digits(E[str(Fraction(N))], want) >= need)
    ok = d_worst >= 10 and e_worst >= 18 and d_nc and e_nc and all(cross)
    report(4, ok, f"double: >= {d_worst:.1f} digits, E0(N_c) residual ok {d_nc}; extended: >= {e_worst:.1f} digits, "
                  f"E0(N_c) rounds to {ref.NC_E0} {e_nc}; E0(2) = -3/2 and E0(1) = 3/2 - sqrt 3 cross-checks {all(cross)}")
    assert ok


@pytest.fixture(scope="module")
def nc_runs():
    mesh = build_mesh(tables.EXTENDED_SCAN_M, tables.EXTENDED_SCAN_SCALE)
    double = find_Nc(SEXTIC, mesh=build_mesh(100, 0.28))
    extended = find_Nc(SEXTIC, mesh=mesh, precision="extended", xtol=1e-22)
    e_printed = solve(SEXTIC.with_(N=mpmath.mpf(ref.NC)), mesh, 1, precision="extended").energies[0]
    return double, extended, e_printed


def test_criterion_5_double_part(nc_runs):
    double, _, _ = nc_runs
    assert abs(double.Nc - float(ref.NC)) <= 1e-8 and abs(double.E0) <= 1e-11


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="printed N_c is the root only to ~1e-11; E0 there is 9.2e-12, not 0")
def test_criterion_5(report, nc_runs):
    double, ext, e_printed = nc_runs
    d_off = abs(double.Nc - float(ref.NC))
    with mpmath.workdps(40):
        e_off = float(abs(ext.Nc - mpmath.mpf(ref.NC)))
    ok_d = d_off <= 1e-8 and abs(double.E0) <= 1e-11
    ok_e = e_off <= 1e-14 and abs(float(ext.E0)) <= 1e-11
    report(5, ok_d and ok_e, f"double: |N_c - printed| = {d_off:.1e}, |E0| = {abs(double.E0):.1e} ({'ok' if ok_d else 'bad'}); "
                             f"extended: N_c = {mpmath.nstr(ext.Nc, 22)}, |N_c - printed| = {e_off:.2e} > 1e-14, "
                             f"E0(printed N_c) = {float(e_printed):.3e} matching the printed {ref.NC_E0}")
    assert ok_d and ok_e


@pytest.mark.xfail(strict=True, reason="printed WKB column does not follow the stated quantization rule")
def test_criterion_6(report, table1_double):
    t, _ = table1_double
    rel = max(abs(r[6]) for r in t.rows)
    de_ok = sum(f"{r[7]:.3g}" == f"{float(r[8]):.3g}" for r in t.rows)
    # the printed dE is the ratio of the two printed columns truncated to three decimals
    printed_consistent = all(np.floor(1000 * (float(pW) - float(pE)) / float(pE)) == round(1000 * float(pD))
                             for pE, pW, pD, _ in ref.TABLE1)
    ok = rel <= 1e-6 and de_ok == len(t.rows)
    report(6, ok, f"max relative deviation from printed E_WKB = {rel:.2e} (tolerance 1e-6); "
                  f"dE agrees to 3 s.f. in {de_ok}/{len(t.rows)} rows; printed columns mutually consistent "
                  f"{printed_consistent}")
    assert ok


def test_criterion_7(report):
    v1 = build_partner(SEXTIC).partner
    v1_ok = v1.is_polynomial and v1.num == Polynomial([1, 0, 2, 0, 1, 0, Fraction(1, 2)], "x")
    dec_ok = True
    for N in (1, 2):
        rec = build_partner(PotentialSpec(1, 1, N))
        d = decompose_partner(rec)
        dec_ok &= (d.reassemble() - rec.partner).num.is_zero and d.Q.degree == N - 1 and d.R.degree == N // 2
    zm = {N: zero_modes(PotentialSpec(1, 1, N)) for N in (1, 2)}
    zm_ok = (len(zm[1]) == 1 and zm[1][0][1].degree == 1 and zm[1][0][1].coeff(0) == 0
             and len(zm[2]) == 2 and all(p.degree == 5 for _, p in zm[2])
             and all(build_zero_mode_operator(PotentialSpec(1, 1, N), E).apply(p).is_zero
                     for N in (1, 2) for E, p in zm[N]))
    fns = [QuarticGaussWavefunction(RationalFunction(Polynomial(c, "x")), nu, mu)
           for c, nu, mu in (([1], 1, 1), ([0, 1], 1, 1), ([2, 0, -1], 1, 1), ([0, 3, 0, 1], 1, 1),
                             ([1, 1, 1, 1, 1], 1, 1), ([1, 0, 1], 0, 2))]
    resid = max(verify_intertwining(build_partner(PotentialSpec(1, 1, N)), fns).max_residual for N in range(3))
    ok = v1_ok and dec_ok and zm_ok and resid <= 1e-8
    report(7, ok, f"V1(N=0) identity {v1_ok}; decomposition N=1,2 exact with stated degrees {dec_ok}; "
                  f"zero modes exact {zm_ok}; intertwining residual {resid:.1e}")
    assert ok


def test_criterion_8(report):
    w_dev = 0.0
    for case, (N, k) in {"k0N0": (0, 0), "k1N0": (0, 1)}.items():
        w = make_chain(1, N, k).w_star
        w_dev = max(w_dev, abs(w - float(w_star_closed_form(case))) / w)
    xs = np.linspace(-4, 4, 801)
    res = 0.0
    iso = 0.0
    mesh = build_mesh(400, 0.18)
    for N, k in ((0, 0), (0, 1), (1, 0)):
        w = make_chain(1, N, k).w_star
        for om in (w + 0.01, -(w + 0.5)):
            chain = make_chain(1, N, k, omega0=om)
            res = max(res, missing_state_residual(chain, xs))
        chain = make_chain(1, N, k)
        e2 = solve(chain.potential, mesh, 5).energies
        e0 = solve(PotentialSpec(1, 0, N, k, Variant.ER), mesh, 5).energies
        exact = [chain.eps] + [float(E) for E, _ in chain.known_states]
        iso = max(iso, np.max(np.abs(e2 - e0)), max(np.min(np.abs(e2 - E)) for E in exact))
    ok = w_dev <= 1e-12 and res <= 1e-8 and iso <= 1e-8
    report(8, ok, f"w* relative deviation {w_dev:.1e}; missing-state residual {res:.1e} on |x| <= 4; "
                  f"isospectrality (M=400) {iso:.1e}")
    assert ok


def test_criterion_9(report):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        t4, t5, t6 = tables.table4(), tables.table5(), tables.table6()
    digits = {name: all(rounds_to(r[1], r[2]) for r in t.rows) for name, t in (("4", t4), ("5", t5), ("6", t6))}
    bound = all(r[1] >= t.meta["reference"] for t in (t4, t5, t6) for r in t.rows)
    factors, agree = [], []
    for r4, r6 in zip(t4.rows, t6.rows):
        k, ours = r6[0], r6[6]
        (_, p4), (_, p6) = ref.TABLE4[k], ref.TABLE6[k]
        printed = float(p6) / float(p4)
        # interval implied by rounding of the two printed e_r values
        h4 = 0.5 * 10.0 ** (np.floor(np.log10(float(p4))) - ref.significant_digits(p4) + 1)
        h6 = 0.5 * 10.0 ** (np.floor(np.log10(float(p6))) - ref.significant_digits(p6) + 1)
        lo, hi = (float(p6) - h6) / (float(p4) + h4), (float(p6) + h6) / (float(p4) - h4)
        agree.append(sig2(ours) == sig2(printed) or lo <= ours <= hi)
        factors.append(f"{ours:.3g}")
    ok = all(digits.values()) and bound and all(agree)
    report(9, ok, f"tables 4/5/6 to all printed digits {digits}; E_var >= E_mesh {bound}; "
                  f"degradation factors {', '.join(factors)} agree to 2 s.f. {all(agree)}")
    assert ok


def test_criterion_10(report):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", "tests/test_properties.py"],
                          cwd=ROOT, capture_output=True, text=True, timeout=300)
    dt = time.perf_counter() - t0
    ok = proc.returncode == 0 and dt < 30
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    report(10, ok, f"standalone property suite: {summary} (wall {dt:.1f} s)")
    assert ok, proc.stdout[-2000:]
