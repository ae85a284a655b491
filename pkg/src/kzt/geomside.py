"""Truncated sums of Kloosterman sums over progressions of moduli, with tails
bounded only through the Weil bound, the trivial bound for residue-restricted
sums and the weak Weil bound for twisted sums.

Fast path: every modulus is split as c = c1 * c2 with c1 supported on the primes
of q and (c2, q) = 1.  Then

    |S(c)| = |S_loc(m x, n x; c1)| * prod_{P || c2} |S(1, mn (c/P)^-2; P)|,

with x = c2^-1 mod c1.  The first factor comes from a per-residue-class
histogram and one FFT per c1; the second from per-prime-power tables that are
streamed once per run and folded into a product accumulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft

from .arith import euler_phi, factorize, is_prime, omega, q_dot, tau
from .dirichlet import DirichletCharacter, conductor, enumerate_characters, parse_character
from .kloosterman import (
    _units,
    inverse_table,
    restricted_kloosterman,
    twisted_kloosterman,
    weak_weil_bound,
)

VARIANTS = ("g1", "g", "g0")
KINDS = ("cleq", "cgeq", "csigma")
LEMMAS = tuple(f"{v}-{k}" for v in VARIANTS for k in KINDS)
SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)
RATIO_CEILING = 50.0


@dataclass
class SumReport:
    lemma: str
    params: dict
    lhs_partial: float
    c_max: float
    tail_bound: float
    rhs: float
    ratio: float
    passed: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "params": self.params,
            "lhs_partial": self.lhs_partial,
            "c_max": self.c_max,
            "tail_bound": self.tail_bound,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "pass": self.passed,
        }


# ---- parameter handling ----------------------------------------------------


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def _base(variant: str, q: int) -> int:
    return q * q if variant == "g" else q


def _labels(variant: str, q: int) -> list:
    """Residues a mod q for the restricted variants, characters mod q for g0."""
    if variant == "g0":
        return enumerate_characters(q)
    return [a for a in range(q) if math.gcd(a, q) == 1] if q > 1 else [0]


def _check_pair(variant: str, q: int, m: int, n: int, need_coprime: bool) -> None:
    if q < 1 or m < 1 or n < 1:
        raise ValueError("q, m, n must be positive")
    if need_coprime and math.gcd(m, n) != 1:
        raise ValueError(f"(m, n) = ({m}, {n}) must be coprime")
    if variant == "g0" and math.gcd(m * n, q) != 1:
        raise ValueError(f"the twisted variant needs (mn, q) = 1; got mn={m * n}, q={q}")


def _resolve_label(variant: str, q: int, a=None, chi=None):
    if variant == "g0":
        if chi is None:
            raise ValueError("the g0 variant needs a character")
        chi = parse_character(chi)
        if chi.modulus != q:
            raise ValueError(f"character modulus {chi.modulus} differs from q={q}")
        return chi
    if a is None:
        raise ValueError(f"the {variant} variant needs a residue a")
    if math.gcd(a, q) != 1:
        raise ValueError(f"a = {a} is not a unit mod q = {q}")
    return a % q if q > 1 else 0


def _label_key(lbl) -> dict:
    if isinstance(lbl, DirichletCharacter):
        return {"chi": {"modulus": lbl.modulus, "exponents": list(lbl.exponents)}}
    return {"a": int(lbl)}


# ---- right-hand sides --------------------------------------------------------


def _euler_prod(q: int, s: float) -> float:
    return math.prod(1 / (1 - p ** (-s)) for p, _ in factorize(q))


def _chi_factor(q: int, chi: DirichletCharacter) -> float:
    return 2 ** omega(q) * q_dot(q, conductor(chi)) / euler_phi(q)


def rhs_shape(lemma: str, q: int, m: int, n: int, label=None, sigma: Optional[float] = None) -> float:
    variant, kind = lemma.split("-")
    if kind == "csigma":
        if sigma is None or not 0.5 < sigma < 1:
            raise ValueError("sigma must lie in (1/2, 1)")
        lead = 1 / (2 * sigma - 1) ** 2
        if variant == "g1":
            return 18 * tau(math.gcd(m, n)) * lead * q ** (-(1 + sigma)) * _euler_prod(q, sigma)
        if variant == "g":
            return 18 * tau(math.gcd(m, n)) * lead * q ** (-(1 + 2 * sigma)) * _euler_prod(q, sigma)
        return 72 * lead * _chi_factor(q, label) / q ** (sigma - 0.5)
    L = math.log(m * n + 1) ** 2
    if kind == "cgeq":
        L /= (m * n) ** 0.25
    if variant == "g1":
        return L / q**1.5 * _euler_prod(q, 0.5)
    if variant == "g":
        return L / q**2 * _euler_prod(q, 0.5)
    return L * _chi_factor(q, label)


# ---- coprime-part tables -------------------------------------------------------


def _prime_inverse_table(p: int) -> np.ndarray:
    """inv[v] = v^-1 mod p for a prime p, built from powers of a primitive root."""
    from .dirichlet import smallest_primitive_root

    if p == 2:
        return np.array([0, 1], dtype=np.int64)
    g = smallest_primitive_root(p)
    pw = np.ones(1, dtype=np.int64)
    while pw.size < p - 1:
        step = pow(g, pw.size, p)
        pw = np.concatenate([pw, pw * step % p])
    pw = pw[: p - 1]
    inv = np.zeros(p, dtype=np.int64)
    inv[pw] = pw[(-np.arange(p - 1)) % (p - 1)]
    return inv


def _abs_kloosterman_table(P: int, inv: np.ndarray) -> np.ndarray:
    """T[u] = |S(1, u; P)| for every u mod P.

    f[v] = e(v^-1 / P) satisfies f[-v] = conj(f[v]), so a half-length Hermitian
    transform gives sum_v f[v] e(-uv/P) = S(1, -u; P)."""
    if P == 1:
        return np.ones(1)
    half = P // 2 + 1
    unit = inv[:half] >= 0
    unit[0] = False
    f = np.where(unit, np.exp(2j * np.pi * np.where(unit, inv[:half], 0) / P), 0)
    H = np.abs(scipy.fft.hfft(f, P))
    return H[(-np.arange(P)) % P]


DIRECT_RESIDUES = 20


def _abs_kloosterman_at(P: int, inv: np.ndarray, u: np.ndarray, chunk: int = 1 << 22) -> np.ndarray:
    """|S(1, u; P)| for the given residues only.  The sum is real and d, -d
    contribute equally, so half of the units suffice (P > 2)."""
    if P <= 2:
        return _abs_kloosterman_table(P, inv)[u % P]
    d = np.arange(1, (P + 1) // 2, dtype=np.int64)
    d = d[inv[d] >= 0]
    dinv = inv[d]
    cos = np.cos(2 * np.pi * np.arange(P) / P)
    u = np.asarray(u, dtype=np.int64) % P
    out = np.empty(u.size)
    step = max(1, chunk // max(1, d.size))
    for i in range(0, u.size, step):
        uu = u[i : i + step]
        out[i : i + step] = np.abs(2 * cos[(d[None, :] + uu[:, None] * dinv[None, :]) % P].sum(axis=1))
    return out


def _primes_upto(N: int) -> np.ndarray:
    if N < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(N + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(N**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.nonzero(sieve)[0]


class CoprimeTable:
    """Products of |S(1, mn (c/P)^-2; P)| over P || c, for all c <= c_max.

    Prime powers of primes in ``special`` are kept as separate tables so that a
    caller can drop the ones dividing q; all other primes are folded into a
    dense accumulator indexed by (mn, c).
    """

    def __init__(self, c_max: int, mn_values: Iterable[int], special: Iterable[int] = SMALL_PRIMES):
        self.c_max = int(c_max)
        self.mn = sorted(set(int(x) for x in mn_values))
        self.index = {v: i for i, v in enumerate(self.mn)}
        self.special = tuple(sorted(set(special)))
        C = self.c_max
        mn = np.array(self.mn, dtype=np.int64)
        self.acc = np.ones((len(self.mn), C + 1))
        self.small: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        for p in _primes_upto(C):
            p = int(p)
            P, k = p, 1
            while P <= C:
                inv = _prime_inverse_table(p) if k == 1 else inverse_table(P)
                if p in self.special:
                    self.small[P] = (_abs_kloosterman_table(P, inv), inv)
                else:
                    R = np.arange(1, C // P + 1, dtype=np.int64)
                    R = R[R % p != 0]
                    ir = inv[R % P]
                    u = (mn[:, None] % P) * (ir * ir % P)[None, :] % P
                    need, where = np.unique(u, return_inverse=True)
                    # a handful of residues is cheaper summed directly than by a prime-length FFT
                    if need.size <= DIRECT_RESIDUES:
                        vals = _abs_kloosterman_at(P, inv, need)[where.reshape(u.shape)]
                    else:
                        vals = _abs_kloosterman_table(P, inv)[u]
                    self.acc[:, P * R] *= vals
                P *= p
                k += 1

    def factors(self, q: int, c: np.ndarray, mn_value: int) -> np.ndarray:
        """prod over P || c with p not dividing q."""
        i = self.index[mn_value]
        qp = {p for p, _ in factorize(q)}
        extra = [p for p, _ in factorize(q) if p not in self.special]
        if extra:
            raise ValueError(f"primes {extra} of q were folded into the table; rebuild with them as special")
        out = self.acc[i, c].copy()
        for p in self.special:
            if p in qp:
                continue
            P = p
            while P <= self.c_max:
                sel = (c % P == 0) & (c % (P * p) != 0)
                if sel.any():
                    T, inv = self.small[P]
                    cc = c[sel] // P
                    ir = inv[cc % P]
                    out[sel] *= T[(mn_value % P) * (ir * ir % P) % P]
                P *= p
        return out


# ---- fast evaluation -------------------------------------------------------------


def _smooth_multiples(base: int, primes: Sequence[int], limit: float) -> List[int]:
    out = []
    stack = [(base, 0)]
    while stack:
        v, i = stack.pop()
        out.append(v)
        for j in range(i, len(primes)):
            w = v * primes[j]
            if w <= limit:
                stack.append((w, j))
    return sorted(out)


def weighted_sums(variant: str, q: int, pairs: Sequence[Tuple[int, int]], c_max: int,
                  weight: Callable[[np.ndarray], np.ndarray], table: Optional[CoprimeTable] = None,
                  labels: Optional[list] = None) -> Dict[Tuple[int, int], np.ndarray]:
    """For each (m, n): array [label, j] = sum_{c <= c_max, base | c} |S_label(m,n;c)| * weight(c)[:, j].

    Labels are residues a mod q (g1, g) or characters mod q (g0)."""
    _check_variant(variant)
    for m, n in pairs:
        _check_pair(variant, q, m, n, need_coprime=True)
    if table is None:
        special = sorted(set(SMALL_PRIMES) | {p for p, _ in factorize(q)})
        table = CoprimeTable(c_max, {m * n for m, n in pairs}, special)
    if table.c_max < c_max:
        raise ValueError("coprime table is shorter than c_max")
    labels = _labels(variant, q) if labels is None else labels
    residues = [a for a in range(q) if math.gcd(a, q) == 1] if q > 1 else [0]
    cls_of = np.full(q, -1, dtype=np.int64)
    cls_of[residues] = np.arange(len(residues))
    if variant == "g0":
        chi_mat = np.array([[chi(a) for a in residues] for chi in labels])
    base = _base(variant, q)
    qprimes = [p for p, _ in factorize(q)]
    c1s = _smooth_multiples(base, qprimes, c_max)
    # coprime factors depend only on c, so they are shared by every c1 block
    all_c = np.arange(base, c_max + 1, base, dtype=np.int64)
    cop = {mn: table.factors(q, all_c, mn) for mn in {m * n for m, n in pairs}}
    nres = len(residues)
    acc = {pair: 0.0 for pair in pairs}
    for c1 in c1s:
        d, dinv = _units(c1)
        cls = cls_of[d % q]
        c2 = np.arange(1, c_max // c1 + 1, dtype=np.int64)
        if q > 1:
            c2 = c2[np.gcd(c2, q) == 1]
        x = inverse_table(c1)[c2 % c1] if c1 > 1 else np.zeros_like(c2)
        c = c1 * c2
        w = weight(c)
        # few frequencies are needed once c1 is large: sum them directly instead of a full FFT
        direct = x.size * d.size < 4 * c1 * max(1.0, math.log2(c1))
        if direct:
            root = np.exp(2j * np.pi * np.arange(c1) / c1)
            onehot = np.zeros((nres, d.size))
            onehot[cls, np.arange(d.size)] = 1.0
        for m, n in pairs:
            k = (m * d + n * dinv) % c1
            if direct:
                loc = onehot @ root[(k[:, None] * x[None, :]) % c1]
            else:
                W = np.bincount(cls * c1 + k, minlength=nres * c1).reshape(nres, c1)
                loc = (c1 * np.fft.ifft(W, axis=1))[:, x]
            if variant == "g0":
                loc = chi_mat @ loc
            vals = np.abs(loc) * cop[m * n][c // base - 1][None, :]
            acc[(m, n)] = acc[(m, n)] + vals @ w
    return acc


def direct_sums(variant: str, q: int, m: int, n: int, c_max: int,
                weight: Callable[[np.ndarray], np.ndarray], labels: Optional[list] = None) -> np.ndarray:
    """Same array as weighted_sums for one pair, term by term from the sum definitions."""
    _check_variant(variant)
    labels = _labels(variant, q) if labels is None else labels
    base = _base(variant, q)
    cs = np.arange(base, c_max + 1, base, dtype=np.int64)
    w = weight(cs)
    vals = np.empty((len(labels), cs.size))
    for j, c in enumerate(cs):
        for i, lbl in enumerate(labels):
            if variant == "g0":
                vals[i, j] = abs(twisted_kloosterman(lbl, m, n, int(c)).value)
            else:
                vals[i, j] = abs(restricted_kloosterman(lbl, q, m, n, int(c)).value)
    return vals @ w


# ---- rigorous tails ------------------------------------------------------------


def divisor_tail(X: float, s: float, A: float, B: float = 0.0) -> float:
    """Upper bound for sum_{n > X} tau(n) n^-s (A + B log n).

    Needs s > 1 and the summand envelope decreasing and positive on [max(X,1), inf).
    Partial summation against D(t) = sum_{n<=t} tau(n) <= t (log t + 1)."""
    if s <= 1:
        raise ValueError("need s > 1")
    if X < 1:
        return A + divisor_tail(1.0, s, A, B)
    L = math.log(X)
    phi = X ** (-s) * (A + B * L)
    if phi < 0:
        raise ValueError("summand envelope is negative at the cut")
    e = s - 1
    x1 = X ** (1 - s)
    I0 = x1 / e
    I1 = x1 * (L / e + 1 / e**2)
    I2 = x1 * (L * L / e + 2 * L / e**2 + 2 / e**3)
    return X * (L + 1) * phi + 2 * A * I0 + (A + 2 * B) * I1 + B * I2


def _conductor_exponents(q: int, chi: Optional[DirichletCharacter]) -> Dict[int, int]:
    out = {}
    f = conductor(chi) if chi is not None else 1
    for p, _ in factorize(q):
        g = 0
        while f % p == 0:
            f //= p
            g += 1
        out[p] = g
    return out


def _local_weight(variant: str, p: int, alpha: int, beta: int, gamma: int) -> float:
    if variant == "g0":
        return weak_weil_bound(p, beta, gamma)
    return float(p ** (beta - alpha))


def _local_total(variant: str, p: int, alpha: int, gamma: int, e: float) -> float:
    """sum_{beta >= beta0} w_p(beta) p^{-e beta}, exceptional terms explicit, the rest geometric."""
    beta0 = 2 * alpha if variant == "g" else alpha
    top = beta0 + 8
    s = sum(_local_weight(variant, p, alpha, b, gamma) * p ** (-e * b) for b in range(beta0, top + 1))
    if variant == "g0":
        K, kap = (8.0 if p == 2 else 2.0), 0.5
    else:
        K, kap = float(p) ** (-alpha), 1.0
    r = p ** (kap - e)
    if r >= 1:
        raise ValueError("local series diverges")
    return s + K * r ** (top + 1) / (1 - r)


def _c1_weight(variant: str, q: int, c1: int, gammas: Dict[int, int]) -> float:
    w = 1.0
    qf = dict(factorize(q))
    for p, beta in factorize(c1):
        w *= _local_weight(variant, p, qf[p], beta, gammas.get(p, 0))
    return w


def tail_bound(variant: str, q: int, m: int, n: int, c_max: float, e_out: float, s_in: float,
               A_of: Callable[[int], float], B: float, label=None, L_factor: float = 1e8,
               delta: float = 0.1) -> float:
    """Bound for sum_{c > c_max, base | c} |S(c)| c^-e_out (A(c1) + B log c2)-style weights.

    Inner coprime sums use Weil (tau(c2) sqrt((m,n,c2) c2)), the q-part the
    trivial or weak Weil bound.  Moduli c1 above L = c_max * L_factor are
    handled by Rankin's trick with log c1 <= c1^delta / (e delta)."""
    chi = label if variant == "g0" else None
    gammas = _conductor_exponents(q, chi)
    g = math.gcd(m, n)
    base = _base(variant, q)
    qf = factorize(q)
    qprimes = [p for p, _ in qf]
    L = c_max * L_factor
    total = 0.0
    for c1 in _smooth_multiples(base, qprimes, L):
        w = _c1_weight(variant, q, c1, gammas)
        total += w * c1 ** (-e_out) * math.sqrt(g) * divisor_tail(c_max / c1, s_in, A_of(c1), B)
    # Rankin remainder for c1 > L
    kap = 0.5 if variant == "g0" else 1.0
    eta = (e_out - delta - kap) / 2
    if eta <= 0:
        raise ValueError("exponent too small for the Rankin remainder")
    Z = math.prod(_local_total(variant, p, a, gammas[p], e_out - delta - eta) for p, a in qf)
    # at X < 1 the inner bound is linear in A: a0 + a1 * A
    a1 = divisor_tail(0.5, s_in, 1.0, 0.0)
    a0 = divisor_tail(0.5, s_in, 0.0, B)
    # A(c1) = A_of(1) + slope * log c1 for the weights used here
    slope = A_of(math.e) - A_of(1)
    const = max(a0 + a1 * A_of(1), 0.0) * L ** (-delta)
    rem = L ** (-eta) * Z * math.sqrt(g) * (const + a1 * max(slope, 0.0) / (math.e * delta))
    return total + rem


# ---- lemma reports ---------------------------------------------------------------


def _params(variant: str, q: int, m: int, n: int, label, **extra) -> dict:
    d = {"variant": variant, "q": q, "m": m, "n": n}
    d.update(_label_key(label))
    d.update(extra)
    return d


def _single_label_sums(variant, q, m, n, c_max, weight, label, method):
    if method == "direct" or math.gcd(m, n) != 1:
        if c_max > 20000:
            raise ValueError("direct evaluation is limited to c_max <= 20000")
        return float(direct_sums(variant, q, m, n, c_max, weight, [label])[0, 0])
    res = weighted_sums(variant, q, [(m, n)], c_max, weight, labels=[label])
    return float(res[(m, n)][0, 0])


def sum_below(variant: str, q: int, m: int, n: int, a=None, chi=None, s: float = 1.5,
              bound: Optional[float] = None) -> SumReport:
    _check_variant(variant)
    _check_pair(variant, q, m, n, need_coprime=True)
    label = _resolve_label(variant, q, a, chi)
    B = 4 * math.pi * math.sqrt(m * n) if bound is None else bound
    base = _base(variant, q)
    weight = lambda c: (c.astype(float) ** (-s))[:, None]
    lhs = float(direct_sums(variant, q, m, n, int(B), weight, [label])[0, 0]) if B >= base else 0.0
    rhs = rhs_shape(f"{variant}-cleq", q, m, n, label)
    return SumReport(f"{variant}-cleq", _params(variant, q, m, n, label, s=s, bound=B), lhs, B, 0.0, rhs,
                     lhs / rhs, lhs / rhs <= RATIO_CEILING)


def _cgeq_weight(B: float):
    lb = math.log(B)

    def w(c):
        cf = c.astype(float)
        return np.where(cf > B, (1 + np.log(cf) - lb) / cf**2, 0.0)[:, None]

    return w


def sum_above(variant: str, q: int, m: int, n: int, a=None, chi=None, c_max: int = 5000,
              method: str = "fast") -> SumReport:
    _check_variant(variant)
    _check_pair(variant, q, m, n, need_coprime=True)
    label = _resolve_label(variant, q, a, chi)
    B = 4 * math.pi * math.sqrt(m * n)
    c_max = max(int(c_max), math.ceil(B))
    lhs = _single_label_sums(variant, q, m, n, c_max, _cgeq_weight(B), label, method)
    lb = math.log(B)
    # c^-2 (1 + log c1 - log B + log c2) with c2^{1/2} from Weil: s_in = 3/2
    tb = tail_bound(variant, q, m, n, c_max, 2.0, 1.5, lambda c1: 1 + math.log(c1) - lb, 1.0, label)
    rhs = rhs_shape(f"{variant}-cgeq", q, m, n, label)
    ratio = (lhs + tb) / rhs
    return SumReport(f"{variant}-cgeq", _params(variant, q, m, n, label), lhs, c_max, tb, rhs, ratio,
                     ratio <= RATIO_CEILING)


def above_grid(qs: Iterable[int], pairs: Sequence[Tuple[int, int]], c_max: int = 5000,
               variants: Sequence[str] = VARIANTS, table: Optional[CoprimeTable] = None) -> List[SumReport]:
    """cgeq reports for every label over a grid, sharing one coprime table."""
    qs = list(qs)
    if table is None:
        special = sorted(set(SMALL_PRIMES) | {p for q in qs for p, _ in factorize(q)})
        table = CoprimeTable(c_max, {m * n for m, n in pairs}, special)
    out = []
    for q in qs:
        for variant in variants:
            labels = _labels(variant, q)
            for m, n in pairs:
                if math.gcd(m, n) != 1 or (variant == "g0" and math.gcd(m * n, q) != 1):
                    continue
                B = 4 * math.pi * math.sqrt(m * n)
                cm = max(int(c_max), math.ceil(B))
                lb = math.log(B)
                sums = weighted_sums(variant, q, [(m, n)], cm, _cgeq_weight(B), table, labels)[(m, n)]
                tails = {}
                for i, lbl in enumerate(labels):
                    key = conductor(lbl) if variant == "g0" else None
                    if key not in tails:
                        tails[key] = tail_bound(variant, q, m, n, cm, 2.0, 1.5, lambda c1: 1 + math.log(c1) - lb,
                                                1.0, lbl)
                    lhs, tb = float(sums[i, 0]), tails[key]
                    ratio = (lhs + tb) / rhs_shape(f"{variant}-cgeq", q, m, n, lbl)
                    out.append(SumReport(f"{variant}-cgeq", _params(variant, q, m, n, lbl), lhs, cm, tb,
                                         rhs_shape(f"{variant}-cgeq", q, m, n, lbl), ratio, ratio <= RATIO_CEILING))
    return out


def sigma_tail(variant: str, q: int, m: int, n: int, sigma: float, c_max: int, label=None) -> float:
    return tail_bound(variant, q, m, n, c_max, 1 + sigma, 0.5 + sigma, lambda c1: 1.0, 0.0, label)


def sum_sigma(variant: str, q: int, m: int, n: int, sigma: float, a=None, chi=None, c_max: int = 100000,
              method: str = "fast") -> SumReport:
    _check_variant(variant)
    if not 0.5 < sigma < 1:
        raise ValueError(f"sigma = {sigma} outside (1/2, 1)")
    _check_pair(variant, q, m, n, need_coprime=(variant == "g0"))
    label = _resolve_label(variant, q, a, chi)
    weight = lambda c: (c.astype(float) ** (-(1 + sigma)))[:, None]
    lhs = _single_label_sums(variant, q, m, n, int(c_max), weight, label, method)
    tb = sigma_tail(variant, q, m, n, sigma, int(c_max), label)
    rhs = rhs_shape(f"{variant}-csigma", q, m, n, label, sigma)
    return SumReport(f"{variant}-csigma", _params(variant, q, m, n, label, sigma=sigma), lhs, c_max, tb, rhs,
                     (lhs + tb) / rhs, lhs + tb <= rhs)


def sigma_grid(qs: Iterable[int], sigmas: Sequence[float], pairs: Sequence[Tuple[int, int]],
               c_max: int = 100000, variants: Sequence[str] = VARIANTS,
               table: Optional[CoprimeTable] = None) -> List[SumReport]:
    """Every csigma report over a grid, sharing one coprime table and one pass per (q, variant)."""
    qs = list(qs)
    special = sorted(set(SMALL_PRIMES) | {p for q in qs for p, _ in factorize(q)})
    if table is None:
        table = CoprimeTable(c_max, {m * n for m, n in pairs}, special)
    sig = np.asarray(sigmas, dtype=float)
    weight = lambda c: c.astype(float)[:, None] ** (-(1 + sig))[None, :]
    out = []
    for q in qs:
        for variant in variants:
            ok = [(m, n) for m, n in pairs if math.gcd(m, n) == 1 and (variant != "g0" or math.gcd(m * n, q) == 1)]
            if not ok:
                continue
            labels = _labels(variant, q)
            sums = weighted_sums(variant, q, ok, c_max, weight, table, labels)
            tails = {}
            for (m, n) in ok:
                for i, lbl in enumerate(labels):
                    key = conductor(lbl) if variant == "g0" else None
                    for j, s in enumerate(sigmas):
                        tk = (key, m, n, j)
                        if tk not in tails:
                            tails[tk] = sigma_tail(variant, q, m, n, s, c_max, lbl)
                        lhs = float(sums[(m, n)][i, j])
                        tb = tails[tk]
                        rhs = rhs_shape(f"{variant}-csigma", q, m, n, lbl, s)
                        out.append(SumReport(f"{variant}-csigma", _params(variant, q, m, n, lbl, sigma=float(s)),
                                             lhs, c_max, tb, rhs, (lhs + tb) / rhs, lhs + tb <= rhs))
    return out


def run_lemma(lemma: str, q: int, m: int, n: int, a=None, chi=None, sigma: Optional[float] = None,
              c_max: Optional[int] = None, method: str = "fast") -> SumReport:
    if lemma not in LEMMAS:
        raise ValueError(f"unknown lemma {lemma!r}; expected one of {LEMMAS}")
    variant, kind = lemma.split("-")
    if kind == "cleq":
        return sum_below(variant, q, m, n, a=a, chi=chi)
    if kind == "cgeq":
        return sum_above(variant, q, m, n, a=a, chi=chi, c_max=c_max or 5000, method=method)
    if sigma is None:
        raise ValueError("csigma lemmas need sigma")
    return sum_sigma(variant, q, m, n, sigma, a=a, chi=chi, c_max=c_max or 100000, method=method)
