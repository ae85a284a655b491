import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kzt.arith import tau
from kzt.dirichlet import enumerate_characters, parse_character, principal
from kzt.kloosterman import (
    crt_split,
    inverse_table,
    kloosterman,
    kloosterman_matrix,
    orthogonality_reduce,
    restricted_kloosterman,
    trivial_restricted_bound,
    twisted_all_characters,
    twisted_kloosterman,
    weak_weil_bound,
    weil_bound,
)


def naive(m, n, c, weight=lambda d: 1):
    """Term-by-term sum with Python's pow for inverses; an independent oracle."""
    if c == 1:
        return complex(weight(0))
    tot = 0j
    for d in range(c):
        if math.gcd(d, c) == 1:
            db = pow(d, -1, c)
            tot += weight(d) * cmath.exp(2j * math.pi * Fraction((m * d + n * db) % c, c))
    return tot


def test_examples():
    assert kloosterman(1, 1, 1).value == pytest.approx(1)
    assert kloosterman(1, 1, 3).value == pytest.approx(-1)
    assert kloosterman(1, 1, 5).value == pytest.approx((3 - math.sqrt(5)) / 2)


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 300))
def test_classical_against_naive(m, n, c):
    v = kloosterman(m, n, c).value
    assert abs(v - naive(m, n, c)) < 1e-9
    assert abs(v.imag) < 1e-9
    assert abs(v - kloosterman(n, m, c).value) < 1e-9


def test_twisted_examples():
    assert twisted_kloosterman(principal(3), 1, 1, 3).value == pytest.approx(-1)
    quad3 = parse_character("3:quadratic")
    assert twisted_kloosterman(quad3, 1, 1, 3).value == pytest.approx(-1j * math.sqrt(3))
    v = twisted_kloosterman(parse_character("5:quadratic"), 1, 1, 5).value
    assert abs(v.imag) < 1e-12 and abs(v) <= 2 * math.sqrt(5)
    with pytest.raises(ValueError):
        twisted_kloosterman(quad3, 1, 1, 4)


@given(st.integers(1, 40), st.integers(1, 6), st.integers(0, 30), st.integers(0, 30), st.data())
def test_twisted_against_naive(q, k, m, n, data):
    chars = enumerate_characters(q)
    chi = chars[data.draw(st.integers(0, len(chars) - 1))]
    c = q * k
    assert abs(twisted_kloosterman(chi, m, n, c).value - naive(m, n, c, chi)) < 1e-9


def test_restricted_examples():
    assert restricted_kloosterman(1, 3, 1, 1, 3).value == pytest.approx(cmath.exp(2j * math.pi * 2 / 3))
    assert restricted_kloosterman(1, 3, 1, 1, 6).value == pytest.approx(cmath.exp(2j * math.pi / 3))
    assert restricted_kloosterman(0, 1, 4, 7, 35).value == pytest.approx(kloosterman(4, 7, 35).value)
    with pytest.raises(ValueError):
        restricted_kloosterman(3, 6, 1, 1, 12)


@given(st.integers(1, 30), st.integers(1, 5), st.integers(0, 20), st.integers(0, 20))
def test_restricted_partition(q, k, m, n):
    c = q * k
    total = sum(restricted_kloosterman(a, q, m, n, c).value for a in range(q) if math.gcd(a, q) == 1) if q > 1 \
        else restricted_kloosterman(0, 1, m, n, c).value
    assert abs(total - kloosterman(m, n, c).value) < 1e-9


def test_crt_examples():
    assert crt_split("classical", 1, 1, 3, 5).value == pytest.approx(kloosterman(1, 1, 15).value)
    assert crt_split("restricted", 1, 1, 3, 4, a=1, q=3).value == pytest.approx(
        restricted_kloosterman(1, 3, 1, 1, 12).value)
    assert crt_split("classical", 2, 3, 7, 1).value == pytest.approx(kloosterman(2, 3, 7).value)
    with pytest.raises(ValueError):
        crt_split("classical", 1, 1, 4, 6)


def test_orthogonality_examples():
    lhs, rhs = orthogonality_reduce(1, 3, 0, 1, 1, 3)
    assert lhs == pytest.approx(-1) and rhs == pytest.approx(-1)
    lhs, rhs = orthogonality_reduce(1, 3, 1, 1, 1, 3)
    # phi(3) i Im e(2/3) = -i sqrt 3
    assert lhs == pytest.approx(-1j * math.sqrt(3)) and rhs == pytest.approx(lhs)
    lhs, rhs = orthogonality_reduce(0, 1, 0, 3, 4, 10)
    assert lhs == pytest.approx(kloosterman(3, 4, 10).value) == rhs


def test_bounds_examples():
    assert weil_bound(1, 1, 5) == pytest.approx(2 * math.sqrt(5))
    assert abs(kloosterman(1, 1, 5).value) <= weil_bound(1, 1, 5)
    assert weak_weil_bound(3, 3, 3) == 18
    assert weak_weil_bound(3, 2, 0) == pytest.approx(6)
    assert weak_weil_bound(2, 4, 3) == 4 * 2 ** 3
    assert weak_weil_bound(2, 4, 1) == pytest.approx(8 * 4)
    with pytest.raises(ValueError):
        weak_weil_bound(3, 1, 2)


@given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 3), st.integers(1, 3), st.integers(1, 30), st.integers(1, 30))
def test_trivial_restricted_bound(p, alpha, extra, m, n):
    beta = alpha + extra - 1
    if p**beta > 400:
        return
    for a in range(p**alpha):
        if a % p:
            v = restricted_kloosterman(a, p**alpha, m, n, p**beta).value
            assert abs(v) <= trivial_restricted_bound(alpha, p, beta) + 1e-9


def test_inverse_table():
    for M in (1, 2, 12, 97, 100):
        inv = inverse_table(M)
        for d in range(M):
            if M > 1 and math.gcd(d, M) == 1:
                assert inv[d] == pow(d, -1, M)
            elif M > 1:
                assert inv[d] == -1


def test_matrix_and_all_characters():
    M = kloosterman_matrix([1, 2, 3], [4, 5], 36)
    for i, m in enumerate([1, 2, 3]):
        for j, n in enumerate([4, 5]):
            assert abs(M[i, j] - kloosterman(m, n, 36).value) < 1e-10
    S, shape = twisted_all_characters(2, 3, 48, 12)
    for chi in enumerate_characters(12):
        assert abs(S[chi.exponents] - twisted_kloosterman(chi, 2, 3, 48).value) < 1e-10
