import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint
from scipy import special

from kzt import analytic as A

SPECS = [A.QuadratureSpec(method=m) for m in A.METHODS]


@pytest.mark.parametrize("spec", SPECS, ids=A.METHODS)
def test_integrate_known_values(spec):
    assert A.integrate(np.exp, 0, 1, spec).value == pytest.approx(math.e - 1, abs=1e-10)
    assert A.integrate(lambda x: 1 / (1 + x * x), -3, 3, spec).value == pytest.approx(2 * math.atan(3), abs=1e-10)
    assert A.integrate(np.sqrt, 0, 1, spec).value == pytest.approx(2 / 3, abs=1e-8)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6), st.floats(-2, 0), st.floats(0.1, 3))
@settings(max_examples=30)
def test_integrate_polynomials(coef, a, L):
    b = a + L
    P = np.polynomial.Polynomial(coef)
    exact = P.integ()(b) - P.integ()(a)
    for spec in SPECS:
        assert abs(A.integrate(P, a, b, spec).value - exact) <= 1e-9 * max(1, abs(exact))


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        A.QuadratureSpec(method="romberg")
    with pytest.raises(A.QuadratureError):
        A.integrate(lambda x: np.sin(1 / np.maximum(x, 1e-300)), 0, 1, A.QuadratureSpec(max_subdivisions=50))


def _h_oracle(kappa, t, T):
    """Defining integral of h_{kappa,T} with mpmath (independent quadrature)."""
    t = mp.mpc(t)
    if kappa == 0:
        f = lambda r: mp.cosh(mp.pi * t) * mp.sinh(mp.pi * r) / (mp.cosh(mp.pi * (r - t)) * mp.cosh(mp.pi * (r + t)))
    else:
        pre = mp.pi if t == 0 else mp.sinh(mp.pi * t) / t
        f = lambda r: pre * r * mp.cosh(mp.pi * r) / (mp.cosh(mp.pi * (r - t)) * mp.cosh(mp.pi * (r + t)))
    pts = [0, T] if not (0 < abs(t.real) < T) else [0, abs(t.real), T]
    return complex(mp.quad(f, pts)).real


@pytest.mark.parametrize("kappa,t,T", [(0, 0, 1), (0, 0.25j, 1), (0, 0.7, 2), (0, 3.0, 5), (0, 0.45j, 10),
                                       (1, 0, 1), (1, 0.7, 2), (1, 4.0, 5), (1, 10.0, 10)])
def test_h_closed_vs_mpmath(kappa, t, T):
    assert A.h_kT_closed(kappa, t, T) == pytest.approx(_h_oracle(kappa, t, T), abs=1e-10)


def test_h_examples():
    assert A.h_kT_closed(0, 0, 1) == pytest.approx((1 - 1 / math.cosh(math.pi)) / math.pi, abs=1e-12)
    # (1 - sech pi)/pi = 0.2908503...
    assert A.h_kT_closed(0, 0, 1) == pytest.approx(0.2908503305, abs=1e-10)
    assert A.h_kT_closed(0, 0.25j, 1) > 0 and A.h_kT_closed(1, 0, 1) > 0
    assert abs(A.h_kT_integral(0, 0.7, 2).real - A.h_kT_closed(0, 0.7, 2)) < 1e-8
    assert A.h_kT_integral(0, 5, 5).real >= 0.05
    assert A.h_kT_closed(0, -0.3, 4) == pytest.approx(A.h_kT_closed(0, 0.3, 4), abs=1e-15)
    assert A.h_kT_closed(1, -0.3, 4) == pytest.approx(A.h_kT_closed(1, 0.3, 4), abs=1e-15)


def test_h_small_t_limit_continuous():
    for T in (1, 5):
        near = A.h_kT_closed(0, 1e-5, T)
        at = A.h_kT_closed(0, 0, T)
        assert near == pytest.approx(at, abs=1e-9)
        assert A.h_kT_closed(0, 1e-5j, T) == pytest.approx(at, abs=1e-9)


def test_h_domain_errors():
    with pytest.raises(ValueError):
        A.h_kT_closed(0, 0.5j, 2)
    with pytest.raises(ValueError):
        A.h_kT_closed(0, 1 + 0.1j, 2)
    with pytest.raises(ValueError):
        A.h_kT_closed(2, 0, 2)
    with pytest.raises(ValueError):
        A.h_kT_closed(0, 0, 0.5)


def test_h_X_examples():
    assert A.h_X(0, 7.0) == pytest.approx(4)
    assert A.h_X(-0.5j, 4.0) == pytest.approx(100 / 9)
    assert A.h_X(1, math.e) == pytest.approx(4 * math.cos(1) ** 2 / 4)
    for s in (0.1, 0.3, 0.45):
        X = 20.0
        assert A.h_X(-1j * s, X).real >= X ** (2 * s)


@given(st.floats(0.5, 5.0))
def test_k0_against_scipy(x):
    assert A.bessel_k_imag(0, x).value == pytest.approx(special.k0(x), abs=1e-9)


def test_k_examples_and_mpmath():
    assert A.bessel_k_imag(0, 1).value == pytest.approx(0.4210244382407083, abs=1e-12)
    v = A.bessel_k_imag(0.5, 2).value
    alt = A.bessel_k_imag(0.5, 2, A.QuadratureSpec(method="double-exponential")).value
    assert abs(v - alt) < 1e-9 and abs(v.imag) < 1e-15
    for r, z in [(0.5, 2.0), (3.0, 1.5), (1.2, 0.8 + 0.6j)]:
        ref = complex(mp.besselk(2j * r, z))
        assert abs(A.bessel_k_imag(r, z).value - ref) < 1e-9
    with pytest.raises(ValueError):
        A.bessel_k_imag(1, -0.5 + 1j)
    with pytest.raises(ValueError):
        A.bessel_k_imag(60, 1)


def _i_kappa_oracle(kappa, a, r):
    # zeta = e^{i theta}, d zeta = i zeta d theta
    def f(th):
        z = mp.expj(th)
        return (-1j * z) ** (kappa - 1) * mp.besselk(2j * r, z * a) * 1j * z

    return complex(-2 * a * mp.quad(f, [-mp.pi / 2, 0, mp.pi / 2]))


@pytest.mark.parametrize("kappa,a,r", [(0, 1.0, 0.5), (1, 1.0, 2.0), (0, 0.3, 1.5), (1, 4.0, 0.2)])
def test_i_kappa_against_mpmath(kappa, a, r):
    mp.mp.dps = 20
    ref = _i_kappa_oracle(kappa, a, r)
    assert abs(A.i_kappa(kappa, a, r).value - ref) < 1e-9


def test_i_kappa_properties():
    assert abs(A.i_kappa(0, 1.3, 0.7).value.imag) < 1e-12
    vals = [abs(A.i_kappa(0, a, 1.0).value) for a in (1e-1, 1e-2, 1e-3)]
    assert vals[0] > vals[1] > vals[2]
    with pytest.raises(ValueError):
        A.i_kappa(0, 2e3, 1.0)


@pytest.mark.parametrize("a,T", [(1.0, 1.0), (0.1, 1.0), (10.0, 1.0)])
def test_int_r_methods_agree(a, T):
    for f in (A.int_r_i0, A.int_r_i1):
        d, s = f(a, T)
        assert abs(d.value - s.value) < 1e-6


def test_int_r_derivative_is_r_times_i():
    # d/dT int_0^T r I(a, r) dr = T I(a, T)
    a, T, h = 1.0, 1.0, 1e-3
    up = A.int_r_i0_single(a, T + h).value
    dn = A.int_r_i0_single(a, T - h).value
    assert (up - dn) / (2 * h) == pytest.approx(T * A.i_kappa(0, a, T).value.real, abs=1e-5)


def test_uniform_bound_examples():
    C = 5.0
    assert abs(A.int_r_i0_single(0.1, 5.0).value) <= C * A.ikint_bound(0.1)
    assert abs(A.int_r_i0_single(10.0, 1.0).value) <= C * A.ikint_bound(10.0)


def test_g0_const_two_routes():
    h = lambda r: 4 / (np.asarray(r) ** 2 + 1) ** 2
    v = A.g0_const(h)
    ref, _ = sint.quad(lambda r: 4 * r * math.tanh(math.pi * r) / (r * r + 1) ** 2, 0, np.inf,
                       epsabs=1e-13, epsrel=1e-13, limit=500)
    assert v.value == pytest.approx(2 / math.pi * ref, abs=1e-9)
    alt = A.g0_const(h, A.QuadratureSpec(method="double-exponential"))
    assert abs(alt.value - v.value) < 1e-9


def test_g0_decay_checks():
    with pytest.raises(ValueError):
        A.g0_const(lambda r: 1 / (1 + np.asarray(r) ** 2))
    with pytest.raises(ValueError):
        A.g0_const(lambda r: np.asarray(r) / (1 + np.asarray(r) ** 4))


def test_bessel_j_series_against_mpmath():
    for r, x in [(0.5, 1.0), (2.0, 3.0), (0.1, 10.0), (7.0, 0.5)]:
        ref = complex(mp.besselj(2j * r, x))
        # the alternating series cancels terms of size up to I_0(x) cosh(pi r)
        assert abs(A.bessel_j_series(2j * r, x) - ref) <= 1e-14 * float(np.i0(x)) * math.cosh(math.pi * r)


def test_g0_transform_real_and_small_x():
    h = lambda r: 4 / (np.asarray(r) ** 2 + 1) ** 2
    v = A.g0_transform(h, 1.0)
    assert abs(v.value.imag) < 1e-12
    small = [abs(A.g0_transform(h, x).value) for x in (0.1, 0.01)]
    assert small[1] < small[0] < abs(v.value)
    with pytest.raises(ValueError):
        A.g0_transform(h, 0.0)
