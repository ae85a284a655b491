"""Classical, twisted and residue-restricted Kloosterman sums.

All phases are reduced as integers modulo a common denominator before the
exponential is taken, so long sums do not accumulate angle drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .arith import crt_compose, euler_phi, factorize, tau
from .dirichlet import DirichletCharacter, enumerate_characters, unit_group


@dataclass(frozen=True)
class KloostermanResult:
    value: complex
    c: int
    m: int
    n: int
    variant: str  # classical | twisted | restricted
    method: str = "direct"  # direct | crt
    params: dict = field(default_factory=dict)

    def __abs__(self) -> float:
        return abs(self.value)


def inverse_table(M: int) -> np.ndarray:
    """inv[d] = d^{-1} mod M for units, -1 elsewhere (vectorized extended Euclid)."""
    d = np.arange(M, dtype=np.int64)
    a, b = np.full(M, M, dtype=np.int64), d.copy()
    x0, x1 = np.zeros(M, dtype=np.int64), np.ones(M, dtype=np.int64)
    active = b != 0
    while active.any():
        qq = np.where(active, a // np.where(active, b, 1), 0)
        a, b = np.where(active, b, a), np.where(active, a - qq * b, b)
        x0, x1 = np.where(active, x1, x0), np.where(active, x0 - qq * x1, x1)
        active = b != 0
    # a now holds gcd(M, d); x0 is the coefficient of d
    inv = np.where(a == 1, x0 % M, -1)
    if M == 1:
        inv[:] = 0
    return inv


@lru_cache(maxsize=256)
def _units(c: int) -> Tuple[np.ndarray, np.ndarray]:
    inv = inverse_table(c)
    d = np.nonzero(inv >= 0)[0].astype(np.int64)
    return d, inv[d]


def _phase_sum(num: np.ndarray, den: int) -> complex:
    if num.size == 0:
        return 0j
    num = num % den
    return complex(np.exp(2j * np.pi * num / den).sum())


def _check_c(c: int) -> None:
    if c < 1:
        raise ValueError(f"modulus c must be positive, got {c}")


def kloosterman(m: int, n: int, c: int) -> KloostermanResult:
    _check_c(c)
    d, dinv = _units(c)
    val = _phase_sum((m % c) * d + (n % c) * dinv, c)
    return KloostermanResult(val, c, m, n, "classical")


def twisted_kloosterman(chi: DirichletCharacter, m: int, n: int, c: int) -> KloostermanResult:
    _check_c(c)
    q = chi.modulus
    if c % q:
        raise ValueError(f"character modulus {q} must divide c = {c}")
    d, dinv = _units(c)
    k, L = chi.index_table()
    M = math.lcm(L, c)
    num = k[d % q] * (M // L) + ((m % c) * d + (n % c) * dinv) % c * (M // c)
    return KloostermanResult(_phase_sum(num, M), c, m, n, "twisted", params={"chi": chi})


def _check_restricted(a: int, q: int, c: int) -> None:
    _check_c(c)
    if q < 1 or c % q:
        raise ValueError(f"q = {q} must divide c = {c}")
    if math.gcd(a, q) != 1:
        raise ValueError(f"residue a = {a} must be coprime to q = {q}")


def restricted_kloosterman(a: int, q: int, m: int, n: int, c: int) -> KloostermanResult:
    _check_restricted(a, q, c)
    d, dinv = _units(c)
    sel = d % q == a % q
    val = _phase_sum((m % c) * d[sel] + (n % c) * dinv[sel], c)
    return KloostermanResult(val, c, m, n, "restricted", params={"a": a % q, "q": q})


def _restrict_character(chi: DirichletCharacter, q1: int) -> DirichletCharacter:
    """Component of chi on the q1-part, q1 a unitary divisor of chi's modulus."""
    q = chi.modulus
    q2 = q // q1
    if math.gcd(q1, q2) != 1:
        raise ValueError("component modulus must be a unitary divisor")
    G = unit_group(q1)
    exps = []
    for g, n_i in zip(G.gens, G.orders):
        y, _ = crt_compose([(g, q1), (1, q2)])
        e = chi.value_frac(y) * n_i
        exps.append(int(e))
    return DirichletCharacter(q1, tuple(exps))


def split_character(chi: DirichletCharacter, c1: int, c2: int) -> Tuple[DirichletCharacter, DirichletCharacter]:
    q = chi.modulus
    q1, q2 = math.gcd(q, c1), math.gcd(q, c2)
    if q1 * q2 != q:
        raise ValueError("character modulus must divide c1*c2")
    return _restrict_character(chi, q1), _restrict_character(chi, q2)


def crt_split(variant: str, m: int, n: int, c1: int, c2: int, chi: Optional[DirichletCharacter] = None,
              a: Optional[int] = None, q: Optional[int] = None) -> KloostermanResult:
    """Evaluate a sum mod c1*c2 as the product of the two coprime factors."""
    if c1 < 1 or c2 < 1 or math.gcd(c1, c2) != 1:
        raise ValueError(f"split ({c1}, {c2}) is not coprime")
    c = c1 * c2
    i2 = pow(c2, -1, c1) if c1 > 1 else 0
    i1 = pow(c1, -1, c2) if c2 > 1 else 0
    args1 = (m * i2, n * i2, c1)
    args2 = (m * i1, n * i1, c2)
    params: dict = {}
    if variant == "classical":
        v = kloosterman(*args1).value * kloosterman(*args2).value
    elif variant == "twisted":
        if chi is None:
            raise ValueError("twisted variant needs a character")
        if c % chi.modulus:
            raise ValueError(f"character modulus {chi.modulus} must divide c = {c}")
        x1, x2 = split_character(chi, c1, c2)
        v = twisted_kloosterman(x1, *args1).value * twisted_kloosterman(x2, *args2).value
        params = {"chi": chi}
    elif variant == "restricted":
        if a is None or q is None:
            raise ValueError("restricted variant needs a and q")
        _check_restricted(a, q, c)
        g1, g2 = math.gcd(q, c1), math.gcd(q, c2)
        v = restricted_kloosterman(a % g1, g1, *args1).value * restricted_kloosterman(a % g2, g2, *args2).value
        params = {"a": a % q, "q": q}
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return KloostermanResult(v, c, m, n, variant, "crt", params)


def orthogonality_reduce(a: int, q: int, kappa: int, m: int, n: int, c: int) -> Tuple[complex, complex]:
    _check_restricted(a, q, c)
    if kappa not in (0, 1):
        raise ValueError("kappa must be 0 or 1")
    lhs = 0j
    for chi in enumerate_characters(q, kappa):
        lhs += chi.conj()(a) * twisted_kloosterman(chi, m, n, c).value
    s = restricted_kloosterman(a, q, m, n, c).value
    ph = euler_phi(q)
    rhs = complex(ph * s.real, 0) if kappa == 0 else complex(0, ph * s.imag)
    return lhs, rhs


def weil_bound(m: int, n: int, c: int) -> float:
    _check_c(c)
    g = math.gcd(math.gcd(m, n), c)
    return tau(c) * math.sqrt(g * c)


def weak_weil_bound(p: int, beta: int, gamma: int) -> float:
    if beta < gamma or gamma < 0:
        raise ValueError(f"need beta >= gamma >= 0, got beta={beta}, gamma={gamma}")
    big = (3 * beta + 1) // 4
    if p == 2:
        if gamma + 1 >= beta >= 3:
            return 4.0 * 2.0**big
        return 8.0 * 2.0 ** (beta / 2)
    if beta == gamma >= 3:
        return 2.0 * float(p) ** big
    return 2.0 * float(p) ** (beta / 2)


def trivial_restricted_bound(alpha: int, p: int, beta: int) -> int:
    """|S_{a(p^alpha)}(m, n; p^beta)| <= p^(beta - alpha)."""
    return p ** (beta - alpha)


# ---- batch evaluation ------------------------------------------------------


def kloosterman_matrix(ms, ns, c: int) -> np.ndarray:
    """S(m, n; c) for every pair in ms x ns, as a complex matrix."""
    _check_c(c)
    d, dinv = _units(c)
    ms = np.asarray(ms, dtype=np.int64) % c
    ns = np.asarray(ns, dtype=np.int64) % c
    A = np.exp(2j * np.pi * (np.outer(ms, d) % c) / c)
    B = np.exp(2j * np.pi * (np.outer(ns, dinv) % c) / c)
    return A @ B.T


def twisted_all_characters(m: int, n: int, c: int, q: int) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """S_chi(m, n; c) for every chi mod q (q | c), indexed by exponent vector.

    Returns an array of shape unit_group(q).orders; entry [e_1, ..., e_r] is the
    sum twisted by the character with those exponents.
    """
    _check_c(c)
    if c % q:
        raise ValueError(f"q = {q} must divide c = {c}")
    G = unit_group(q)
    shape = G.orders
    d, dinv = _units(c)
    f = np.exp(2j * np.pi * (((m % c) * d + (n % c) * dinv) % c) / c)
    if not shape:
        return np.array(f.sum()), shape
    r = d % q
    idx = []
    for comp in G.locals:
        rr = r % comp.modulus
        for t in comp.dlog:
            idx.append(t[rr])
    F = np.zeros(shape, dtype=complex)
    np.add.at(F, tuple(idx), f)
    size = int(np.prod(shape))
    return np.fft.ifftn(F) * size, shape
