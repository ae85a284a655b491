"""Integer arithmetic and multiplicative functions used across the package."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Tuple

Factorization = List[Tuple[int, int]]

MAX_INPUT = 2**63

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
# deterministic for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    # Brent's variant; n is odd and composite
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split(n: int, out: Dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_rho(n)
    _split(d, out)
    _split(n // d, out)


@lru_cache(maxsize=65536)
def _factorize_cached(n: int) -> Tuple[Tuple[int, int], ...]:
    out: Dict[int, int] = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 7
    # trial division up to a small bound, then rho
    while f * f <= n and f < 1000:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 2
    if n > 1:
        if f * f > n:
            out[n] = out.get(n, 0) + 1
        else:
            _split(n, out)
    return tuple(sorted(out.items()))


def factorize(n: int) -> Factorization:
    """Prime factorization as an increasing list of (p, e) pairs."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"factorize needs a positive integer, got {n!r}")
    if n > MAX_INPUT:
        raise ValueError("inputs above 2^63 are not supported")
    return list(_factorize_cached(n))


def reconstruct(fac: Iterable[Tuple[int, int]]) -> int:
    out = 1
    for p, e in fac:
        out *= p**e
    return out


def divisors(n: int) -> List[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out = out // p * (p - 1)
    return out


def tau(n: int) -> int:
    return math.prod(e + 1 for _, e in factorize(n))


def omega(n: int) -> int:
    return len(factorize(n))


def multiplicative_basics(n: int) -> dict:
    return {"phi": euler_phi(n), "tau": tau(n), "omega": omega(n), "divisors": divisors(n)}


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n))


def crt_compose(residues: Iterable[Tuple[int, int]]) -> Tuple[int, int]:
    """Combine congruences r_i mod m_i into (r, M) with M the product of the moduli."""
    r, M = 0, 1
    for ri, mi in residues:
        if mi < 1:
            raise ValueError(f"modulus must be positive, got {mi}")
        if math.gcd(M, mi) != 1:
            raise ValueError(f"moduli are not pairwise coprime (gcd({M}, {mi}) > 1)")
        # r + M*k = ri mod mi
        k = (ri - r) * pow(M, -1, mi) % mi if mi > 1 else 0
        r, M = r + M * k, M * mi
        r %= M
    return r, M


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _local_pairs(q: int, q_chi: int):
    if q < 1 or q_chi < 1 or q % q_chi:
        raise ValueError(f"conductor {q_chi} must divide modulus {q}")
    for p, alpha in factorize(q):
        yield p, alpha, _valuation(q_chi, p)


def _qdot_exponent(alpha: int) -> Fraction:
    return Fraction((3 * alpha + 1) // 4) - Fraction(alpha, 2)


def q_dot_exponents(q: int, q_chi: int) -> List[Tuple[int, Fraction]]:
    """Q-dot as a list of (p, rational exponent); primes in the trivial branch are omitted."""
    out = []
    for p, alpha, gamma in _local_pairs(q, q_chi):
        if p != 2 and alpha == gamma >= 3:
            hit = True
        elif p == 2 and gamma + 1 >= alpha >= 3:
            hit = True
        else:
            hit = False
        if hit:
            ex = _qdot_exponent(alpha)
            if ex:
                out.append((p, ex))
    return out


def q_dot(q: int, q_chi: int) -> float:
    return float(math.prod(p ** float(ex) for p, ex in q_dot_exponents(q, q_chi)))


def q_ddot(q: int, q_chi: int) -> int:
    out = 1
    for p, alpha, gamma in _local_pairs(q, q_chi):
        if p != 2 and alpha == gamma >= 3:
            out *= p
        elif p == 2 and alpha == gamma >= 3:
            out *= 4
        elif p == 2 and alpha == gamma + 1 >= 3:
            out *= 2
    return out


GROUPS = ("Gamma0", "Gamma1", "GammaFull")


def group_index(group: str, q: int) -> Fraction:
    """Index of the congruence subgroup in SL2(Z), up to the sign ambiguity of -1."""
    if q < 1:
        raise ValueError("level must be positive")
    fac = factorize(q)
    if group == "Gamma0":
        return q * math.prod((Fraction(1) + Fraction(1, p) for p, _ in fac), start=Fraction(1))
    if group == "Gamma1":
        return q * q * math.prod((1 - Fraction(1, p * p) for p, _ in fac), start=Fraction(1))
    if group == "GammaFull":
        return q**3 * math.prod((1 - Fraction(1, p * p) for p, _ in fac), start=Fraction(1))
    raise ValueError(f"unknown group {group!r}; expected one of {GROUPS}")


def volume(group: str, q: int) -> float:
    return math.pi / 3 * float(group_index(group, q))
