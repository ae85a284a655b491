import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kzt import heckealg as H
from kzt.dirichlet import parse_character, principal


def test_lobb_examples():
    assert [H.lobb(j, 1) for j in range(2)] == [1, 1]
    assert [H.lobb(j, 2) for j in range(3)] == [2, 3, 1]
    assert all(H.lobb(l, l) == 1 for l in range(40))
    with pytest.raises(ValueError):
        H.lobb(3, 2)


@given(st.integers(0, 60))
def test_lobb_forms_and_row_sum(ell):
    assert all(H.lobb(j, ell) == H.lobb_difference(j, ell) for j in range(ell + 1))
    assert sum(H.lobb(j, ell) for j in range(ell + 1)) == math.comb(2 * ell, ell)


def test_chebyshev():
    assert H.chebyshev_u_half(2, 2.0) == 3
    th = np.linspace(0.1, 3.0, 17)
    for j in range(8):
        assert np.allclose(H.chebyshev_u(j, np.cos(th)), np.sin((j + 1) * th) / np.sin(th))


def test_prime_power_examples():
    s = H.make_system(1, None, {2: 2.0, 3: 0.7})
    assert [H.hecke_prime_power(s, 2, t) for t in range(5)] == pytest.approx([1, 2, 3, 4, 5])
    assert H.hecke_prime_power(s, 3, 2) == pytest.approx(0.7**2 - 1)
    r = H.make_system(4, None, {2: 0.5})
    assert H.hecke_prime_power(r, 2, 3) == pytest.approx(0.125)
    assert H.hecke_value(s, 1) == 1
    assert H.hecke_value(s, 6) == pytest.approx(2 * 0.7)
    with pytest.raises(KeyError):
        H.hecke_value(s, 5)


def test_conjugation_relation_enforced():
    with pytest.raises(ValueError):
        H.make_system(5, "5:1", {2: 1.0})
    with pytest.raises(ValueError):
        H.make_system(1, None, {2: 2.5})


@given(st.integers(0, 10**6))
def test_hecke_relation_random(seed):
    rng = np.random.default_rng(seed)
    sys = H.random_system(rng, primes=[2, 3, 5, 7])
    for m in (1, 2, 4, 6, 12, 15, 8):
        for n in (1, 2, 3, 10, 14, 9):
            assert H.hecke_relation_defect(sys, m, n) < 1e-10


def test_abs_power_examples():
    s = H.make_system(1, None, {5: 0.8})
    lhs, rhs = H.abs_power_expand(s, 5, 1)
    assert lhs == pytest.approx(rhs.real) and lhs == pytest.approx(0.64)
    chi = [c for c in __import__("kzt.dirichlet", fromlist=["x"]).enumerate_characters(7) if c.order() == 3][0]
    p = next(p for p in (2, 3, 5, 11, 13) if abs(chi(p) - cmath.exp(2j * math.pi / 3)) < 1e-12)
    s = H.HeckeSystem(7, chi, {p: cmath.exp(1j * math.pi / 3) * 1.3})
    lhs, rhs = H.abs_power_expand(s, p, 1)
    assert lhs == pytest.approx(1.69) and abs(rhs - 1.69) < 1e-12
    for th in np.linspace(0, math.pi, 13):
        s = H.make_system(1, None, {3: 2 * math.cos(th)})
        lhs, rhs = H.abs_power_expand(s, 3, 3)
        assert abs(lhs - rhs) < 1e-10


def test_a_f_examples():
    s = H.make_system(1, None, {2: 1.0})
    assert H.a_f(s, 2, 0) == 1
    assert H.a_f(s, 2, 1) == pytest.approx(1 / (math.sqrt(2) * 1.5))
    r = H.make_system(6, None, {3: 0.4 + 0.3j})
    assert H.a_f(r, 3, 1) == pytest.approx((0.4 + 0.3j) / math.sqrt(3))


def test_b_f_at_s_one_matches_scaling():
    s = H.make_system(1, None, {3: 1.1})
    for t in range(4):
        assert H.b_f(s, 3, t, 1) == pytest.approx(H.a_f(s, 3, t) * 3 ** (t / 2))


def test_xi_examples():
    s = H.make_system(1, None, {2: 0.9})
    A = H.a_f(s, 2, 1)
    assert H.xi_coeff(s, 2, 0, 0) == 1
    assert H.xi_coeff(s, 2, 0, 1) == pytest.approx(-A.conjugate() / math.sqrt(1 - abs(A) ** 2))
    assert H.xi_coeff(s, 2, 1, 4) == 0


def test_gram_examples():
    s = H.make_system(1, None, {3: 1.0, 5: -0.4})
    assert H.gram_check(s, 1) == 0
    assert H.gram_check(s, 3) <= 1e-10
    assert H.gram_check(s, 45) <= 1e-9
    assert H.gram_check(s, 45) == pytest.approx(H.gram_check_direct(s, 45), abs=1e-12)


@given(st.integers(0, 10**6))
def test_gram_random_systems(seed):
    rng = np.random.default_rng(seed)
    from kzt.checks import random_level
    q2 = random_level(rng)
    sys = H.random_system(rng, primes=[p for p, _ in H.factorize(q2)])
    assert H.gram_check(sys, q2) <= 1e-9


def test_gram_degenerate():
    s = H.make_system(4, None, {2: 1.5})
    with pytest.raises(ValueError):
        H.gram_check(s, 2)


def test_xi_norm_examples():
    s = H.make_system(1, None, {2: 1.0, 3: 0.0})
    assert H.xi_norm(s, 1) == (1.0, 1.0, 0.0)
    lhs, part, tail = H.xi_norm(s, 3)
    assert lhs == 1.0 and abs(lhs - part) <= tail + 1e-9
    lhs, part, tail = H.xi_norm(s, 4)
    assert abs(lhs - part) <= tail + 1e-9 and lhs >= 1 - tail
    with pytest.raises(ValueError):
        H.xi_norm(H.make_system(1, None, {2: 2.05}), 2)
