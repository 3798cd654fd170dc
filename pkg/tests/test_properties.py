"""Property suite: runs standalone (pytest tests/test_properties.py) in well under 30 s."""

from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from qes_susy.algebraic import sl2_commutators, verify_sl2_form
from qes_susy.mesh import build_mesh, solve
from qes_susy.model import PotentialSpec, Variant, evaluate_potential
from qes_susy.susy1 import build_partner
from qes_susy.susy2 import make_chain

small = settings(max_examples=25, deadline=None)
rationals = st.fractions(Fraction(1, 4), 3, max_denominator=8)
points = st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=8)


@small
@given(rationals, st.fractions(0, 3, max_denominator=8), st.fractions(-2, 4, max_denominator=8), st.integers(0, 1),
       points)
def test_sextic_potentials_are_even(nu, mu, N, kappa, xs):
    spec = PotentialSpec(nu, mu, N, kappa, Variant.ER if kappa else Variant.QES)
    xs = np.array(xs)
    assert np.allclose(evaluate_potential(spec, xs), evaluate_potential(spec, -xs), rtol=1e-14, atol=1e-14)


@small
@given(st.integers(0, 3), points)
def test_first_order_partners_are_even(N, xs):
    V = build_partner(PotentialSpec(1, 1, N)).potential
    xs = np.array(xs)
    assert np.allclose(V(xs), V(-xs), rtol=1e-13, atol=1e-13)


cases = st.sampled_from([(0, 0), (0, 1), (1, 0)])
offsets = st.floats(1e-3, 20)


@small
@given(cases, offsets, st.booleans(), points)
def test_confluent_partners_are_even(case, offset, negative, xs):
    N, kappa = case
    w = make_chain(1, N, kappa).w_star
    chain = make_chain(1, N, kappa, omega0=(-1 if negative else 1) * (w + offset))
    xs = np.array(xs)
    # omega is not even, but V2 is: u^2 even and omega0 + int_0^x u^2 reflects to omega0 - int_0^x u^2 ...
    # ... only when omega0 = 0, so V2 is even exactly when the chain is symmetric; check the general
    # relation V2(x; omega0) = V2(-x; -omega0)
    mirror = make_chain(1, N, kappa, omega0=-chain.omega0)
    assert np.allclose(chain.potential(xs), mirror.potential(-xs), rtol=1e-11, atol=1e-11)


@small
@given(cases, offsets, st.booleans(), points)
def test_omega_is_monotone(case, offset, negative, xs):
    N, kappa = case
    w = make_chain(1, N, kappa).w_star
    chain = make_chain(1, N, kappa, omega0=(-1 if negative else 1) * (w + offset))
    xs = np.sort(np.array(xs))
    om = chain.omega(xs)
    assert np.all(np.diff(om) >= -1e-15)
    assert np.all(np.sign(om) == np.sign(chain.omega0))


@small
@given(st.fractions(-1, 3, max_denominator=8), st.integers(20, 80), st.floats(0.2, 0.5))
def test_mesh_eigenvectors_orthonormal(N, M, h):
    res = solve(PotentialSpec(1, 1, N), build_mesh(M, h), 8)
    assert res.orthonormality_defect() <= 1e-12


@small
@given(st.integers(0, 12))
def test_sl2_commutators(N):
    assert all(sl2_commutators(N).values())


@small
@given(rationals, st.fractions(-2, 3, max_denominator=8), st.integers(0, 5), st.integers(0, 1))
def test_sl2_form(nu, mu, N, kappa):
    spec = PotentialSpec(nu, mu, N, kappa, Variant.ER if kappa else Variant.QES)
    assert verify_sl2_form(spec).ok


def test_harmonic_oscillator_mesh_oracle():
    res = solve(PotentialSpec(0, 1, 0), build_mesh(40, 1.0), 20)
    assert np.max(np.abs(res.energies - (np.arange(20) + 0.5))) <= 1e-12


@small
@given(st.floats(0.25, 4.0))
def test_harmonic_oracle_any_frequency(mu):
    res = solve(PotentialSpec(0, mu, 0), build_mesh(40, 1 / np.sqrt(mu)), 10)
    assert np.max(np.abs(res.energies - mu * (np.arange(10) + 0.5))) <= 1e-12 * max(1, mu)
