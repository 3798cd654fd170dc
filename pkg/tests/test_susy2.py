import mpmath
import numpy as np
import pytest

from oracles import fd_energies
from qes_susy.errors import DomainError, SingularPartnerError
from qes_susy.mesh import build_mesh, solve
from qes_susy.model import PotentialSpec, QuarticGaussWavefunction, Variant
from qes_susy.poly import Polynomial, RationalFunction
from qes_susy.susy2 import (build_confluent_partner, er_prefactor_map_defect, factorization_residual_fd,
                            make_chain, missing_state_residual, nodeless_window, omega_closed_form,
                            omega_incomplete_gamma, printed_phi2_k0N1, verify_confluent_factorization,
                            w_star_closed_form)

CASES = {"k0N0": (0, 0), "k1N0": (0, 1), "k0N1-": (1, 0)}


def seed_integral(N, kappa):
    """int_0^inf u^2 for the ER ground state, straight from its formula."""
    if N == 0:
        return mpmath.quad(lambda t: t ** (2 * kappa) * mpmath.exp(-t**4 / 2), [0, 2, mpmath.inf])
    return mpmath.quad(lambda t: (2 * t * t + mpmath.sqrt(2)) ** 2 * mpmath.exp(-t**4 / 2), [0, 2, mpmath.inf])


@pytest.mark.parametrize("case", CASES)
def test_w_star_thresholds(case):
    N, kappa = CASES[case]
    w = make_chain(1, N, kappa).w_star
    closed = w_star_closed_form(case)
    assert abs(w - float(closed)) <= 1e-12 * float(closed)
    assert abs(w - float(seed_integral(N, kappa))) <= 1e-12 * w


def test_printed_threshold_values():
    assert float(w_star_closed_form("k0N0")) == pytest.approx(2**0.25 * float(mpmath.gamma(1.25)), rel=1e-15)
    assert float(w_star_closed_form("k1N0")) == pytest.approx(2**-1.25 * float(mpmath.gamma(0.75)), rel=1e-15)


@pytest.mark.parametrize("case", CASES)
def test_omega_three_routes(case):
    N, kappa = CASES[case]
    chain = make_chain(1, N, kappa)
    for x in (-2.2, -0.6, 0.0, 0.3, 1.0, 2.7):
        a = chain.omega(x)
        b = float(omega_incomplete_gamma(chain, x))
        c = float(omega_closed_form(case, chain.omega0, x))
        assert a == pytest.approx(b, rel=1e-12, abs=1e-13)
        assert a == pytest.approx(c, rel=1e-12, abs=1e-13)


def test_forbidden_window():
    w = make_chain(1, 0, 0).w_star
    for om in (0.0, 0.5 * w, -w):
        with pytest.raises(SingularPartnerError):
            make_chain(1, 0, 0, omega0=om)
    assert nodeless_window(make_chain(1, 0, 0)).allows(1.01 * w)
    assert not nodeless_window(make_chain(1, 0, 0)).allows(0.99 * w)


def test_seed_index_checked():
    with pytest.raises(DomainError):
        make_chain(1, 0, 0, seed=1)


@pytest.mark.parametrize("case", CASES)
@pytest.mark.parametrize("offset", [1e-3, 0.5, 5.0])
def test_missing_state_residual(case, offset):
    N, kappa = CASES[case]
    w = make_chain(1, N, kappa).w_star
    for sign in (1, -1):
        chain = make_chain(1, N, kappa, omega0=sign * (w + offset))
        assert missing_state_residual(chain, np.linspace(-4, 4, 801)) <= 1e-8


def test_missing_state_normalizable():
    chain = make_chain(1, 0, 0)
    xs = np.linspace(-6, 6, 2001)
    phi = chain.missing_state(xs)
    assert np.all(np.isfinite(phi)) and abs(phi[0]) < 1e-20 and abs(phi[-1]) < 1e-20


def trial_functions():
    return [QuarticGaussWavefunction(RationalFunction(Polynomial(p, "x")), 1, 0) for p in ([1], [0, 1], [1, 0, 2])]


@pytest.mark.parametrize("case", CASES)
def test_confluent_factorization(case):
    N, kappa = CASES[case]
    rep = verify_confluent_factorization(make_chain(1, N, kappa), trial_functions())
    assert max(rep.bplus_b, rep.b_bplus, rep.missing_state) <= 1e-20


def test_factorization_finite_difference_oracle():
    chain = make_chain(1, 0, 0)
    f = lambda t: mpmath.exp(-t * t) * (1 + t)  # noqa: E731
    for x0 in (0.2, 0.9):
        assert factorization_residual_fd(chain, f, x0) <= 1e-8


ISO = [("k0N0", None), ("k0N0", -1.2), ("k1N0", None), ("k0N1-", None), ("k0N1-", 8.0)]


@pytest.mark.parametrize("case,omega0", ISO)
def test_isospectrality_on_mesh(case, omega0):
    N, kappa = CASES[case]
    chain = make_chain(1, N, kappa, omega0=omega0)
    mesh = build_mesh(400, 0.18)
    e0 = solve(PotentialSpec(1, 0, N, kappa, Variant.ER), mesh, 5).energies
    e2 = solve(chain.potential, mesh, 5).energies
    assert np.max(np.abs(e2 - e0)) <= 1e-8
    exact = [chain.eps] + [float(E) for E, _ in chain.known_states]
    for E in exact:
        assert np.min(np.abs(e2 - E)) <= 1e-8


def test_isospectrality_finite_difference_oracle():
    chain = make_chain(1, 0, 0, omega0=-1.5)
    V0 = PotentialSpec(1, 0, 0, 0, Variant.ER).base_polynomial()
    assert np.allclose(fd_energies(chain.potential, 3), fd_energies(lambda x: V0(x), 3), atol=1e-9, rtol=0)


def test_partner_approaches_original_for_large_omega0():
    xs = np.linspace(-2, 2, 21)
    d = [np.max(np.abs(make_chain(1, 0, 0, omega0=om).potential(xs) - make_chain(1, 0, 0).V0(xs)))
         for om in (10.0, 100.0, 1000.0)]
    assert d[0] > d[1] > d[2] and d[2] < 1e-2


def test_mapped_states_match_printed_form():
    chain = make_chain(1, 1, 0)
    E, psi = chain.known_states[0]
    xs = np.linspace(-3, 3, 13)
    assert np.allclose(chain.mapped_state(psi, E)(xs), printed_phi2_k0N1(xs, chain.omega(xs)), rtol=1e-12)


def test_mapped_states_solve_partner_equation():
    chain = make_chain(1, 1, 0)
    partner = build_confluent_partner(chain)
    E, phi = partner.mapped_states[0]
    with mpmath.workdps(30):
        for x0 in (-0.8, 0.4, 1.5):
            d2 = mpmath.diff(lambda t: phi(float(t)), x0, 2, h=mpmath.mpf("1e-4"))
            res = -d2 / 2 + (chain.potential(x0) - float(E)) * phi(x0)
            assert abs(res) <= 1e-5 * max(1.0, abs(phi(x0)))


def test_er_prefactor_map_breaks_for_confluent_partner():
    a, b = er_prefactor_map_defect(make_chain(1, 1, 0))
    assert abs(a - b) > 1e-3
