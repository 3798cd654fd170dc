from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from oracles import fd_energies
from qes_susy.errors import DomainError, NodalSeedError
from qes_susy.model import PotentialSpec, QuarticGaussWavefunction
from qes_susy.poly import Polynomial, RationalFunction
from qes_susy.surd import Surd
from qes_susy.susy1 import (build_partner, build_zero_mode_operator, decompose_partner,
                            energy_expectation, gauge_intertwine_h, intertwining_residual_fd, norm_squared,
                            verify_intertwining, zero_mode_operator_by_conjugation, zero_modes)
from test_algebraic import sym

x = sp.symbols("x")


def sympy_partner(N):
    """V0 - (ln u)'' from the ground-state prefactor, entirely in sympy."""
    rec = build_partner(PotentialSpec(1, 1, N))
    P0 = sum(sym(c) * x**j for j, c in enumerate(rec.P0.coeffs))
    V0 = (x**6 + 2 * x**4 + (1 - (4 * N + 3)) * x**2) / 2
    return V0 - sp.diff(sp.log(P0) - x**4 / 4 - x**2 / 2, x, 2)


def rf_at(r: RationalFunction, t):
    return sym(r.num(t) / r.den(t))


def test_n0_partner_is_the_printed_polynomial():
    rec = build_partner(PotentialSpec(1, 1, 0))
    assert rec.partner.is_polynomial
    assert rec.partner.num == Polynomial([1, 0, 2, 0, 1, 0, Fraction(1, 2)], "x")


@pytest.mark.parametrize("N", [1, 2])
def test_partner_matches_sympy(N):
    rec = build_partner(PotentialSpec(1, 1, N))
    want = sympy_partner(N)
    for t in (Fraction(0), Fraction(1, 3), Fraction(-7, 5), Fraction(2)):
        assert sp.simplify(rf_at(rec.partner, Surd(t)) - want.subs(x, sp.Rational(t))) == 0


def test_partner_spectrum_drops_the_ground_state():
    V1 = build_partner(PotentialSpec(1, 1, 0)).potential
    fd = fd_energies(V1, 3)
    assert np.allclose(fd, [2.18650052957281497982, 4.87181666510578189419, 8.13095355822955323057],
                       atol=1e-9, rtol=0)


@pytest.mark.parametrize("N", [1, 2])
def test_decomposition_reassembles_exactly(N):
    rec = build_partner(PotentialSpec(1, 1, N))
    d = decompose_partner(rec)
    assert (d.reassemble() - rec.partner).num.is_zero
    assert d.Q.degree == N - 1 and d.R.degree == N // 2
    assert d.r_degree_claim_holds
    assert d.shifted.N == N - Fraction(3, 2)


def test_decomposition_degree_claim_fails_at_n3():
    rec = build_partner(PotentialSpec(1, 1, 3))
    d = decompose_partner(rec)
    assert d.Q.degree == 2 and d.R.degree == 2  # deg R = N - 1, not [N/2]
    assert not d.r_degree_claim_holds
    for t in (0.3, 1.1):
        assert float(d.reassemble()(t)) == pytest.approx(float(rec.partner(t)), rel=1e-13)


def test_zero_modes_n1_is_x():
    (E, p), = zero_modes(PotentialSpec(1, 1, 1))
    assert p.degree == 1 and p.coeff(0) == 0
    assert build_zero_mode_operator(PotentialSpec(1, 1, 1), E).apply(p).is_zero


def test_zero_modes_n2_quintics():
    modes = zero_modes(PotentialSpec(1, 1, 2))
    assert len(modes) == 2
    for E, p in modes:
        assert p.degree == 5 and p.parity() == -1 and p.exact
        assert build_zero_mode_operator(PotentialSpec(1, 1, 2), E).apply(p).is_zero


@pytest.mark.parametrize("N", [1, 2])
def test_zero_mode_operator_two_routes_agree(N):
    lam = Surd(Fraction(3, 7))
    a = build_zero_mode_operator(PotentialSpec(1, 1, N), lam)
    b = zero_mode_operator_by_conjugation(PotentialSpec(1, 1, N), lam)
    scale = b.p2.lead / a.p2.lead
    assert a.p2.scale(scale) == b.p2 and a.p1.scale(scale) == b.p1 and a.p0.scale(scale) == b.p0


def test_n0_has_no_zero_modes():
    assert zero_modes(PotentialSpec(1, 1, 0)) == []
    with pytest.raises(DomainError):
        build_zero_mode_operator(PotentialSpec(1, 1, Fraction(1, 2)), 0)


def suite(nu=1, mu=1):
    ps = [Polynomial([1], "x"), Polynomial([0, 1], "x"), Polynomial([2, 0, -1], "x"),
          Polynomial([0, 3, 0, 1], "x"), Polynomial([1, 1, 1, 1, 1], "x")]
    return [QuarticGaussWavefunction(RationalFunction(p), nu, mu) for p in ps] + [
        QuarticGaussWavefunction(RationalFunction(Polynomial([1, 0, 1], "x")), 0, 2)]


@pytest.mark.parametrize("N", [0, 1, 2, 3])
def test_intertwining_symbolic(N):
    rec = build_partner(PotentialSpec(1, 1, N))
    rep = verify_intertwining(rec, suite())
    assert rep.max_residual <= 1e-8 and rep.factorization_H0 <= 1e-8 and rep.factorization_H1 <= 1e-8
    if N <= 2:
        assert rep.exact_zero


@pytest.mark.parametrize("N", [0, 1, 2])
def test_intertwining_finite_difference_oracle(N):
    rec = build_partner(PotentialSpec(1, 1, N))
    import mpmath

    fns = [lambda t: mpmath.sech(t), lambda t: t * mpmath.exp(-t * t), lambda t: mpmath.exp(-(t - 0.3) ** 2)]
    for f in fns:
        assert intertwining_residual_fd(rec, f, [-1.2, -0.4, 0.1, 0.9, 1.7]) <= 1e-8


@pytest.mark.parametrize("N", [0, 1, 2])
def test_gauge_rotated_intertwining(N):
    assert gauge_intertwine_h(build_partner(PotentialSpec(1, 1, N))).ok


@pytest.mark.parametrize("N", [1, 2])
def test_mapped_states_are_partner_eigenstates(N):
    rec = build_partner(PotentialSpec(1, 1, N))
    for level, phi in rec.mapped_states:
        d = phi.apply_hamiltonian(rec.partner, level.value).prefactor.num
        assert d.is_zero
        assert energy_expectation(rec.potential, phi) == pytest.approx(float(level.value), rel=1e-11)
        assert norm_squared(phi) == pytest.approx(1.0, rel=1e-10)


def test_missing_state_is_not_normalizable():
    rec = build_partner(PotentialSpec(1, 1, 1))
    m = rec.missing_state
    assert not m.square_integrable
    # 1/u still solves H1 psi = eps psi
    assert m.apply_hamiltonian(rec.partner, rec.epsilon).prefactor.num.is_zero


def test_nodal_seed_is_rejected():
    # the nu = 0 harmonic family still works; a seed with real zeros does not arise for the
    # ground state, so feed an excited state by hand
    from qes_susy.model import log_second_derivative

    rec = build_partner(PotentialSpec(1, 1, 1))
    with pytest.raises(NodalSeedError):
        log_second_derivative(rec.source_states[1].psi)
