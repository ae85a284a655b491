"""Self-contained numerical checks, one grid cell at a time.

Each check takes keyword parameters plus a numpy Generator and returns a dict
with a boolean ``pass``, a scalar ``metric`` (a worst-case deviation or ratio)
and a small ``detail`` map.  The sweep driver in :mod:`kzt.cli` and the
acceptance tests both call these.
"""

from __future__ import annotations

import itertools
import math
import threading
import zlib
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from . import geomside, heckealg
from .arith import divisors, factorize, is_prime
from .dirichlet import enumerate_characters, unit_group
from .kloosterman import (
    crt_split,
    kloosterman,
    kloosterman_matrix,
    orthogonality_reduce,
    restricted_kloosterman,
    twisted_all_characters,
    twisted_kloosterman,
    weak_weil_bound,
    weil_bound,
)

ABS_SLACK = 1e-9


def cell_rng(seed: int, key: str) -> np.random.Generator:
    """Generator that depends only on the sweep seed and the cell key."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, zlib.crc32(key.encode())])


def _result(ok: bool, metric: float, metric_name: str, **detail) -> dict:
    return {"pass": bool(ok), "metric": float(metric), "metric_name": metric_name, "detail": detail}


# ---- Kloosterman sums -------------------------------------------------------------


def weil(c: int, m_max: int = 20, n_max: int = 20, rng=None) -> dict:
    """|S(m, n; c)| against tau(c) sqrt((m, n, c) c) for all m <= m_max, n <= n_max."""
    ms = np.arange(1, m_max + 1)
    ns = np.arange(1, n_max + 1)
    S = np.abs(kloosterman_matrix(ms, ns, c))
    B = np.array([[weil_bound(int(m), int(n), c) for n in ns] for m in ms])
    viol = int(np.count_nonzero(S > B + ABS_SLACK))
    return _result(viol == 0, float(np.max(S / B)), "max_ratio", violations=viol, pairs=int(S.size))


_COND_CACHE: Dict[int, np.ndarray] = {}
_COND_LOCK = threading.Lock()


def _conductor_exponents(P: int, p: int) -> np.ndarray:
    """gamma for every character mod P, in the order of twisted_all_characters."""
    with _COND_LOCK:
        if P not in _COND_CACHE:
            chars = enumerate_characters(P)
            g = [round(math.log(ch.conductor(), p)) if ch.conductor() > 1 else 0 for ch in chars]
            _COND_CACHE[P] = np.array(g, dtype=np.int64)
        return _COND_CACHE[P]


def weak_weil(P: int, samples: int = 4, rng=None, span: int = 60) -> dict:
    """Twisted sums S_chi(m c', n c'; p^beta) for every chi mod p^beta against the weak-Weil bound.

    (m, n, c') are drawn with (mn, p) = (c', p) = 1; (1, 1, 1) is always included."""
    fac = factorize(P)
    if len(fac) != 1:
        raise ValueError(f"{P} is not a prime power")
    p, beta = fac[0]
    rng = rng if rng is not None else np.random.default_rng(0)
    gam = _conductor_exponents(P, p)
    bounds = np.array([weak_weil_bound(p, beta, int(g)) for g in range(beta + 1)])[gam]
    triples = [(1, 1, 1)]
    while len(triples) < samples + 1:
        m, n, cp = (int(x) for x in rng.integers(1, span, size=3))
        if (m * n) % p and cp % p:
            triples.append((m, n, cp))
    worst, viol = 0.0, 0
    for m, n, cp in triples:
        S, _ = twisted_all_characters(m * cp, n * cp, P, P)
        a = np.abs(S).ravel()
        viol += int(np.count_nonzero(a > bounds + ABS_SLACK))
        worst = max(worst, float(np.max(a / bounds)))
    return _result(viol == 0, worst, "max_ratio", violations=viol, p=p, beta=beta,
                   characters=int(gam.size), triples=len(triples))


def coprime_splits(c: int) -> List[Tuple[int, int]]:
    fac = factorize(c) if c > 1 else []
    out = []
    for mask in itertools.product((0, 1), repeat=len(fac)):
        c1 = math.prod(p**e for (p, e), b in zip(fac, mask) if b)
        out.append((c1, c // c1))
    return out


def crt(c: int, rng=None, pairs: int = 2) -> dict:
    """Direct against factored evaluation over every coprime split of c, all three variants."""
    rng = rng if rng is not None else np.random.default_rng(0)
    mn = [(1, 1)] + [tuple(int(x) for x in rng.integers(1, 50, size=2)) for _ in range(pairs - 1)]
    divs = [d for d in divisors(c) if d <= 240]
    q = int(rng.choice(divs))
    chars = enumerate_characters(q)
    chi = chars[int(rng.integers(len(chars)))]
    units = [a for a in range(q) if math.gcd(a, q) == 1] if q > 1 else [0]
    a = units[int(rng.integers(len(units)))]
    worst = 0.0
    splits = coprime_splits(c)
    for m, n in mn:
        ref = {
            "classical": kloosterman(m, n, c).value,
            "twisted": twisted_kloosterman(chi, m, n, c).value,
            "restricted": restricted_kloosterman(a, q, m, n, c).value,
        }
        for c1, c2 in splits:
            for variant, v in ref.items():
                f = crt_split(variant, m, n, c1, c2, chi=chi, a=a, q=q).value
                worst = max(worst, abs(f - v))
    return _result(worst <= 1e-10, worst, "max_deviation", splits=len(splits), q=q)


def orthogonality(q: int, rng=None, extra_pairs: int = 1) -> dict:
    """sum_chi chi-bar(a) S_chi against phi(q) Re/Im S_{a(q)}, all units a, both parities."""
    rng = rng if rng is not None else np.random.default_rng(0)
    mn = [(1, 1)] + [tuple(int(x) for x in rng.integers(1, 30, size=2)) for _ in range(extra_pairs)]
    units = [a for a in range(q) if math.gcd(a, q) == 1] if q > 1 else [0]
    worst = 0.0
    cases = 0
    for c in sorted({q, 2 * q, 3 * q, q * q}):
        for m, n in mn:
            for a in units:
                for kappa in (0, 1):
                    lhs, rhs = orthogonality_reduce(a, q, kappa, m, n, c)
                    worst = max(worst, abs(lhs - rhs))
                    cases += 1
    return _result(worst <= 1e-9, worst, "max_deviation", cases=cases)


# ---- Hecke algebra ---------------------------------------------------------------


def lobb(ell: int, rng=None, fixtures: int = 200, grid: int = 401) -> dict:
    """Both Lobb closed forms; the U_{2j} expansion of x^{2l}; the |lambda(p)|^{2l} identity."""
    rng = rng if rng is not None else np.random.default_rng(0)
    forms = all(heckealg.lobb(j, ell) == heckealg.lobb_difference(j, ell) for j in range(ell + 1))
    dev_poly = 0.0
    if ell <= 8:
        x = np.linspace(-2.0, 2.0, grid)
        rhs = sum(heckealg.lobb(j, ell) * heckealg.chebyshev_u_half(2 * j, x) for j in range(ell + 1))
        dev_poly = float(np.max(np.abs(x ** (2 * ell) - rhs)))
    dev_hecke = 0.0
    if ell <= 6:
        for _ in range(fixtures):
            sys, p = heckealg.random_system(rng, with_prime=True)
            lhs, rhs = heckealg.abs_power_expand(sys, p, ell)
            dev_hecke = max(dev_hecke, abs(lhs - rhs))
    worst = max(dev_poly, dev_hecke)
    return _result(forms and worst <= 1e-9, worst, "max_deviation", closed_forms_agree=forms,
                   poly=dev_poly, hecke=dev_hecke)


def random_level(rng, max_primes: int = 3, max_exp: int = 4, primes: Sequence[int] = (2, 3, 5, 7, 11, 13)) -> int:
    k = int(rng.integers(1, max_primes + 1))
    chosen = rng.choice(len(primes), size=k, replace=False)
    return math.prod(primes[int(i)] ** int(rng.integers(1, max_exp + 1)) for i in sorted(chosen))


def gram(q2: int = 0, rng=None, systems: int = 1, replicate: int = 0) -> dict:
    """Kronecker-built Gram deviation for random Hecke systems (q2 = 0 draws a random level).

    ``replicate`` only labels a cell so a grid can hold many independent draws."""
    rng = rng if rng is not None else np.random.default_rng(0)
    worst, worst_direct = 0.0, 0.0
    levels = []
    for _ in range(systems):
        lvl = q2 or random_level(rng)
        sys = heckealg.random_system(rng, primes=[p for p, _ in factorize(lvl)])
        worst = max(worst, heckealg.gram_check(sys, lvl))
        if len(divisors(lvl)) <= 60:
            worst_direct = max(worst_direct, heckealg.gram_check_direct(sys, lvl))
        levels.append(lvl)
    return _result(max(worst, worst_direct) <= 1e-9, max(worst, worst_direct), "max_deviation",
                   kron=worst, direct=worst_direct, levels=levels)


def xi(q2: int = 0, rng=None, systems: int = 1, K: int = 40, replicate: int = 0) -> dict:
    """xi_f(1) against its Euler-product series, with the explicit truncation bound."""
    rng = rng if rng is not None else np.random.default_rng(0)
    worst_gap, ok = 0.0, True
    for _ in range(systems):
        lvl = q2 or random_level(rng, max_exp=3)
        sys = heckealg.random_system(rng, primes=[p for p, _ in factorize(lvl)])
        lhs, part, tail = heckealg.xi_norm(sys, lvl, K)
        gap = abs(lhs - part) - tail
        ok &= gap <= 1e-9 and lhs >= 1 - tail
        worst_gap = max(worst_gap, gap)
    return _result(ok, worst_gap, "excess_over_tail")


# ---- sum lemmas ------------------------------------------------------------------

SIGMAS = (0.55, 0.6, 0.75, 0.9)


def coprime_pairs(limit: int = 10) -> List[Tuple[int, int]]:
    return [(m, n) for m in range(1, limit + 1) for n in range(1, limit + 1) if math.gcd(m, n) == 1]


_TABLES: Dict[tuple, geomside.CoprimeTable] = {}
_TABLE_LOCK = threading.Lock()


def shared_table(c_max: int, pairs: Sequence[Tuple[int, int]], special: Sequence[int]) -> geomside.CoprimeTable:
    key = (int(c_max), tuple(sorted({m * n for m, n in pairs})), tuple(sorted(set(special))))
    with _TABLE_LOCK:
        if key not in _TABLES:
            _TABLES[key] = geomside.CoprimeTable(c_max, key[1], key[2])
        return _TABLES[key]


def csigma(q: int, c_max: int = 100000, sigmas: Sequence[float] = SIGMAS, pair_limit: int = 10,
           variants: Sequence[str] = geomside.VARIANTS, rng=None) -> dict:
    """Every csigma report at level q: lhs_partial + tail <= rhs."""
    pairs = coprime_pairs(pair_limit)
    special = sorted(set(geomside.SMALL_PRIMES) | {p for p, _ in factorize(q)})
    table = shared_table(c_max, pairs, special)
    reps = geomside.sigma_grid([q], list(sigmas), pairs, c_max, variants, table)
    fails = [r for r in reps if not r.passed]
    worst = max((r.ratio for r in reps), default=0.0)
    return _result(not fails, worst, "max_ratio", reports=len(reps), failures=len(fails))


CHECKS: Dict[str, Callable[..., dict]] = {
    "weil": weil,
    "weak-weil": weak_weil,
    "crt": crt,
    "orthogonality": orthogonality,
    "lobb": lobb,
    "gram": gram,
    "xi": xi,
    "csigma": csigma,
}


def prime_powers(limit: int) -> List[int]:
    out = []
    for p in range(2, limit + 1):
        if is_prime(p):
            P = p
            while P <= limit:
                out.append(P)
                P *= p
    return sorted(out)
