"""Hecke eigenvalue recurrences, Lobb/Chebyshev expansions and the dilation
normalization coefficients A_f, B_f, xi_f for an abstract eigenvalue system."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .arith import divisors, factorize
from .dirichlet import DirichletCharacter, enumerate_characters, induce, parse_character, primitive_part, principal

CONJ_TOL = 1e-9


def lobb(j: int, ell: int) -> int:
    """Coefficient of U_{2j}(x/2) in x^{2 ell}: (2j+1)/(ell+j+1) * C(2 ell, ell+j)."""
    if j < 0 or ell < 0 or j > ell:
        raise ValueError(f"need 0 <= j <= ell, got j={j}, ell={ell}")
    num = (2 * j + 1) * math.comb(2 * ell, ell + j)
    q, r = divmod(num, ell + j + 1)
    assert r == 0
    return q


def lobb_difference(j: int, ell: int) -> int:
    """Second closed form: C(2l, l-j) - C(2l, l-j-1)."""
    if j < 0 or j > ell:
        raise ValueError(f"need 0 <= j <= ell, got j={j}, ell={ell}")
    if j == ell:
        return 1
    return math.comb(2 * ell, ell - j) - math.comb(2 * ell, ell - j - 1)


def chebyshev_u(j: int, x):
    """Chebyshev polynomial of the second kind U_j(x) by the three-term recurrence."""
    if j < 0:
        raise ValueError("degree must be nonnegative")
    u0, u1 = 1 + 0 * x, 2 * x
    if j == 0:
        return u0
    for _ in range(j - 1):
        u0, u1 = u1, 2 * x * u1 - u0
    return u1


def chebyshev_u_half(j: int, x):
    """U_j(x/2), i.e. U_{j+1} = x U_j - U_{j-1} with U_0 = 1, U_1 = x."""
    return chebyshev_u(j, x / 2)


@dataclass(frozen=True)
class HeckeSystem:
    """Level q1, nebentypus (stored induced to modulus q1) and prime eigenvalues."""

    q1: int
    chi: DirichletCharacter
    lam: Dict[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.q1 < 1:
            raise ValueError("level must be positive")
        chi = self.chi
        if self.q1 % chi.conductor():
            raise ValueError(f"conductor {chi.conductor()} of the nebentypus does not divide q1={self.q1}")
        if chi.modulus != self.q1:
            chi = induce(primitive_part(chi), self.q1)
            object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "lam", {int(p): complex(v) for p, v in self.lam.items()})
        for p, v in self.lam.items():
            if self.q1 % p == 0:
                continue
            if abs(v) >= math.sqrt(p) + 1 / math.sqrt(p):
                raise ValueError(f"|lambda({p})| = {abs(v)} exceeds p^(1/2) + p^(-1/2)")
            # conjugation relation lambda-bar = chi-bar * lambda at unramified primes
            if abs(v.conjugate() - chi.conj()(p) * v) > CONJ_TOL * max(1.0, abs(v)):
                raise ValueError(f"lambda({p}) violates conj(lambda) = conj(chi(p)) lambda")

    def chi0(self, p: int) -> int:
        return 0 if self.q1 % p == 0 else 1

    def lam_p(self, p: int) -> complex:
        if p not in self.lam:
            raise KeyError(f"no eigenvalue supplied for p={p}")
        return self.lam[p]


def make_system(q1: int, chi_spec=None, lam: Optional[dict] = None) -> HeckeSystem:
    chi = principal(q1) if chi_spec is None else parse_character(chi_spec)
    return HeckeSystem(q1, chi, dict(lam or {}))


def hecke_prime_power(sys: HeckeSystem, p: int, t: int) -> complex:
    if t < 0:
        raise ValueError("exponent must be nonnegative")
    if t == 0:
        return 1 + 0j
    lp = sys.lam_p(p)
    if sys.q1 % p == 0:
        return lp**t
    cp = sys.chi(p)
    prev, cur = 1 + 0j, lp
    for _ in range(t - 1):
        prev, cur = cur, lp * cur - cp * prev
    return cur


def hecke_value(sys: HeckeSystem, n: int) -> complex:
    out = 1 + 0j
    for p, e in factorize(n):
        out *= hecke_prime_power(sys, p, e)
    return out


def hecke_relation_defect(sys: HeckeSystem, m: int, n: int) -> float:
    """|lambda(m) lambda(n) - sum_{d | (m,n), (d,q1)=1} chi(d) lambda(mn/d^2)|."""
    g = math.gcd(m, n)
    rhs = sum(
        sys.chi(d) * hecke_value(sys, m * n // (d * d)) for d in divisors(g) if math.gcd(d, sys.q1) == 1
    )
    return abs(hecke_value(sys, m) * hecke_value(sys, n) - rhs)


def abs_power_expand(sys: HeckeSystem, p: int, ell: int) -> Tuple[float, complex]:
    if sys.q1 % p == 0:
        raise ValueError(f"p={p} divides the level; the expansion needs an unramified prime")
    lhs = abs(sys.lam_p(p)) ** (2 * ell)
    cbar = sys.chi.conj()(p)
    rhs = sum(lobb(j, ell) * cbar**j * hecke_prime_power(sys, p, 2 * j) for j in range(ell + 1))
    return lhs, complex(rhs)


def b_f(sys: HeckeSystem, p: int, t: int, s: complex = 1) -> complex:
    if t < 0:
        raise ValueError("exponent must be nonnegative")
    if t == 0:
        return 1 + 0j
    ps = cmath.exp(-s * math.log(p))
    den = 1 + sys.chi0(p) * ps
    if t == 1:
        return sys.lam_p(p) / den
    return (hecke_prime_power(sys, p, t) - sys.chi(p) * hecke_prime_power(sys, p, t - 2) * ps) / den


def a_f(sys: HeckeSystem, p: int, t: int) -> complex:
    if t < 0:
        raise ValueError("exponent must be nonnegative")
    if t == 0:
        return 1 + 0j
    den = p ** (t / 2) * (1 + sys.chi0(p) / p)
    if t == 1:
        return sys.lam_p(p) / den
    return (hecke_prime_power(sys, p, t) - sys.chi(p) * hecke_prime_power(sys, p, t - 2) / p) / den


def a_f_value(sys: HeckeSystem, n: int) -> complex:
    out = 1 + 0j
    for p, e in factorize(n):
        out *= a_f(sys, p, e)
    return out


def _norm_factor(sys: HeckeSystem, p: int) -> float:
    A = abs(a_f(sys, p, 1)) ** 2
    if A >= 1:
        raise ValueError(f"|A_f({p})| >= 1: the dilated family is degenerate at p={p}")
    return 1 - A


def xi_coeff(sys: HeckeSystem, p: int, r: int, t: int) -> complex:
    if r < 0 or t < 0 or r > t:
        raise ValueError(f"need 0 <= r <= t, got r={r}, t={t}")
    if t == 0:
        return 1 + 0j
    w = _norm_factor(sys, p)
    if t == 1:
        if r == 0:
            return -a_f(sys, p, 1).conjugate() / math.sqrt(w)
        return 1 / math.sqrt(w) + 0j
    if r <= t - 3:
        return 0j
    root = math.sqrt((1 - sys.chi0(p) / p**2) * w)
    if r == t - 2:
        return sys.chi.conj()(p) / p / root
    if r == t - 1:
        return -sys.lam_p(p).conjugate() / math.sqrt(p) / root
    return 1 / root + 0j


def _local_blocks(sys: HeckeSystem, p: int, t: int) -> Tuple[np.ndarray, np.ndarray]:
    M = np.empty((t + 1, t + 1), dtype=complex)
    for r1 in range(t + 1):
        for r2 in range(t + 1):
            g = min(r1, r2)
            M[r1, r2] = a_f(sys, p, r2 - g) * a_f(sys, p, r1 - g).conjugate()
    X = np.zeros((t + 1, t + 1), dtype=complex)
    for r in range(t + 1):
        for s in range(r, t + 1):
            X[r, s] = xi_coeff(sys, p, r, s)
    return M, X


def gram_matrices(sys: HeckeSystem, q2: int) -> Tuple[list, np.ndarray, np.ndarray]:
    """Divisor-indexed Gram ratio M(l1, l2) and coefficients Xi[l, d] for d | q2."""
    fac = factorize(q2)
    divs = [1]
    M = np.ones((1, 1), dtype=complex)
    X = np.ones((1, 1), dtype=complex)
    for p, t in fac:
        _norm_factor(sys, p)
        Mp, Xp = _local_blocks(sys, p, t)
        # joint multiplicativity: divisor index is mixed-radix over the primes
        divs = [d * p**r for d in divs for r in range(t + 1)]
        M = np.kron(M, Mp)
        X = np.kron(X, Xp)
    return divs, M, X


def gram_check(sys: HeckeSystem, q2: int, q1: Optional[int] = None) -> float:
    if q1 is not None and q1 != sys.q1:
        raise ValueError(f"system level {sys.q1} does not match q1={q1}")
    divs, M, X = gram_matrices(sys, q2)
    delta = X.T @ M @ X.conj()
    return float(np.max(np.abs(delta - np.eye(len(divs)))))


def gram_check_direct(sys: HeckeSystem, q2: int) -> float:
    """Same deviation, with every entry built from the global definitions over divisors."""
    divs = divisors(q2)
    for p, _ in factorize(q2):
        _norm_factor(sys, p)

    def xi(l: int, d: int) -> complex:
        if d % l:
            return 0j
        out = 1 + 0j
        for p, t in factorize(d):
            r = 0
            while l % p ** (r + 1) == 0:
                r += 1
            out *= xi_coeff(sys, p, r, t)
        return out

    k = len(divs)
    M = np.array([[a_f_value(sys, l2 // math.gcd(l1, l2)) * a_f_value(sys, l1 // math.gcd(l1, l2)).conjugate()
                   for l2 in divs] for l1 in divs])
    X = np.array([[xi(l, d) for d in divs] for l in divs])
    delta = X.T @ M @ X.conj()
    return float(np.max(np.abs(delta - np.eye(k))))


def _local_series(sys: HeckeSystem, p: int, K: int) -> Tuple[float, float]:
    """Partial sum of |lambda(p^k)|^2 / p^k for k <= K and a bound on the rest."""
    lp = abs(sys.lam_p(p))
    partial = sum(abs(hecke_prime_power(sys, p, k)) ** 2 / p**k for k in range(K + 1))
    if sys.q1 % p == 0:
        # lambda(p^k) = lambda(p)^k: exact geometric remainder
        ratio = lp * lp / p
        if ratio >= 1:
            raise ValueError(f"|lambda({p})|^2 >= {p}: the local series diverges")
        tail = ratio ** (K + 1) / (1 - ratio)
    else:
        # |lambda(p^k)| <= k + 1; sum_{k>K} (k+1)^2 x^k in closed form
        x = 1 / p
        k0 = K + 1
        # sum_{k>=k0} (k+1)^2 x^k
        tail = x**k0 * ((k0 + 1) ** 2 / (1 - x) + (2 * k0 + 3) * x / (1 - x) ** 2 + 2 * x * x / (1 - x) ** 3)
    return partial, tail


def xi_norm(sys: HeckeSystem, q2: int, K: int = 40) -> Tuple[float, float, float]:
    fac = factorize(q2)
    for p, _ in fac:
        if sys.q1 % p and abs(sys.lam_p(p)) > 2 + 1e-12:
            raise ValueError(f"|lambda({p})| > 2: outside the Ramanujan-bounded regime")
    lhs = 1.0
    for p, t in fac:
        lhs *= sum(abs(xi_coeff(sys, p, 0, r)) ** 2 for r in range(t + 1))
    part, upper, factor = 1.0, 1.0, 1.0
    for p, t in fac:
        s, tl = _local_series(sys, p, K)
        part *= s
        upper *= s + tl
        if t == 1:
            factor *= 1 - sys.chi0(p) / p**2
    return lhs, part * factor, (upper - part) * factor


def random_system(rng, primes=None, q1: Optional[int] = None, with_prime: bool = False):
    """A random eigenvalue system obeying the conjugation relation and |lambda(p)| <= 2.

    At p | q1 the eigenvalue is any complex number of modulus < 1.  With
    ``with_prime`` an unramified prime is drawn as well and (system, p) is returned."""
    from .arith import is_prime

    if q1 is None:
        q1 = int(rng.integers(1, 31))
    chars = enumerate_characters(q1)
    chi = chars[int(rng.integers(len(chars)))]
    primes = list(primes or [])
    p_extra = None
    if with_prime:
        while p_extra is None:
            cand = int(rng.integers(2, 60))
            if is_prime(cand) and q1 % cand:
                p_extra = cand
        primes.append(p_extra)
    lam = {}
    for p in primes:
        if q1 % p == 0:
            lam[p] = cmath.rect(float(rng.uniform(0, 0.99)), float(rng.uniform(0, 2 * math.pi)))
        else:
            # lambda = e(theta/2) x with x real, where chi(p) = e(theta)
            half = cmath.exp(0.5j * cmath.phase(chi(p)))
            lam[p] = half * float(rng.uniform(-1.98, 1.98))
    sys = HeckeSystem(q1, chi, lam)
    return (sys, p_extra) if with_prime else sys
