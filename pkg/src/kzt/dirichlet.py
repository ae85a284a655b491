"""Dirichlet characters keyed by exponent vectors on a fixed set of unit-group generators.

Generators are the smallest primitive root for each odd prime power, -1 for 4,
and the pair (-1, 5) for 2^k with k >= 3; they are lifted to the full modulus by
CRT.  A character is stored as the exponents e_i with chi(g_i) = e(e_i / n_i).
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .arith import crt_compose, euler_phi, factorize


def _is_primitive_root(g: int, p: int, k: int) -> bool:
    if math.gcd(g, p) != 1:
        return False
    phi_p = p - 1
    for r, _ in factorize(phi_p):
        if pow(g, phi_p // r, p) == 1:
            return False
    if k >= 2 and pow(g, p - 1, p * p) == 1:
        return False
    return True


def smallest_primitive_root(p: int, k: int = 1) -> int:
    if p == 2:
        raise ValueError("2^k has no primitive root for k >= 3; handled separately")
    g = 2
    while not _is_primitive_root(g, p, k):
        g += 1
    return g


@dataclass(frozen=True)
class LocalComponent:
    p: int
    k: int
    modulus: int
    gens: Tuple[int, ...]
    orders: Tuple[int, ...]
    # dlog[i][x] = discrete log of x against gens[i]; -1 for non-units
    dlog: Tuple[np.ndarray, ...]


def _local(p: int, k: int) -> LocalComponent:
    pk = p**k
    if p == 2:
        if k == 1:
            return LocalComponent(2, 1, 2, (), (), ())
        if k == 2:
            t = np.full(4, -1, dtype=np.int64)
            t[1], t[3] = 0, 1
            return LocalComponent(2, 2, 4, (3,), (2,), (t,))
        n5 = 2 ** (k - 2)
        ta = np.full(pk, -1, dtype=np.int64)
        tb = np.full(pk, -1, dtype=np.int64)
        v = 1
        for b in range(n5):
            ta[v], tb[v] = 0, b
            ta[pk - v], tb[pk - v] = 1, b
            v = v * 5 % pk
        return LocalComponent(2, k, pk, (pk - 1, 5), (2, n5), (ta, tb))
    g = smallest_primitive_root(p, k)
    n = pk - pk // p
    t = np.full(pk, -1, dtype=np.int64)
    v = 1
    for j in range(n):
        t[v] = j
        v = v * g % pk
    return LocalComponent(p, k, pk, (g,), (n,), (t,))


@dataclass(frozen=True)
class UnitGroupStructure:
    modulus: int
    locals: Tuple[LocalComponent, ...]
    gens: Tuple[int, ...]
    orders: Tuple[int, ...]

    @property
    def lcm_order(self) -> int:
        return math.lcm(*self.orders) if self.orders else 1

    def dlog(self, d: int) -> Optional[Tuple[int, ...]]:
        if math.gcd(d, self.modulus) != 1:
            return None
        out = []
        for comp in self.locals:
            r = d % comp.modulus
            out.extend(int(t[r]) for t in comp.dlog)
        return tuple(out)


@lru_cache(maxsize=512)
def unit_group(q: int) -> UnitGroupStructure:
    if q < 1:
        raise ValueError("modulus must be positive")
    comps = tuple(_local(p, k) for p, k in factorize(q))
    gens: List[int] = []
    orders: List[int] = []
    for comp in comps:
        rest = q // comp.modulus
        for g, n in zip(comp.gens, comp.orders):
            lifted, _ = crt_compose([(g, comp.modulus), (1, rest)])
            gens.append(lifted)
            orders.append(n)
    return UnitGroupStructure(q, comps, tuple(gens), tuple(orders))


def _exp_frac(x: Fraction) -> complex:
    """e(x) with exact values at quarter turns."""
    x = x - math.floor(x)
    exact = {Fraction(0): 1 + 0j, Fraction(1, 4): 1j, Fraction(1, 2): -1 + 0j, Fraction(3, 4): -1j}
    if x in exact:
        return exact[x]
    return cmath.exp(2j * math.pi * float(x))


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    exponents: Tuple[int, ...]

    def __post_init__(self):
        G = unit_group(self.modulus)
        if len(self.exponents) != len(G.orders):
            raise ValueError(
                f"modulus {self.modulus} needs {len(G.orders)} exponents, got {len(self.exponents)}"
            )
        object.__setattr__(
            self, "exponents", tuple(int(e) % n for e, n in zip(self.exponents, G.orders))
        )

    @property
    def group(self) -> UnitGroupStructure:
        return unit_group(self.modulus)

    def value_frac(self, d: int) -> Optional[Fraction]:
        """chi(d) = e(value_frac(d)); None when gcd(d, q) > 1."""
        logs = self.group.dlog(d)
        if logs is None:
            return None
        s = sum(Fraction(e * l, n) for e, l, n in zip(self.exponents, logs, self.group.orders))
        return s - math.floor(s)

    def __call__(self, d: int) -> complex:
        f = self.value_frac(d)
        return 0j if f is None else _exp_frac(f)

    def index_table(self) -> Tuple[np.ndarray, int]:
        """(k, L) with chi(d) = e(k[d]/L) for d mod q, k[d] = -1 off the units."""
        G = self.group
        L = G.lcm_order
        q = self.modulus
        d = np.arange(q, dtype=np.int64)
        k = np.zeros(q, dtype=np.int64)
        unit = np.ones(q, dtype=bool)
        i = 0
        for comp in G.locals:
            r = d % comp.modulus
            if comp.modulus == 2:
                unit &= r == 1
            for t in comp.dlog:
                lg = t[r]
                unit &= lg >= 0
                k = (k + self.exponents[i] * (L // G.orders[i]) * np.maximum(lg, 0)) % L
                i += 1
        if q == 1:
            unit[:] = True
        k[~unit] = -1
        return k, L

    def values(self) -> np.ndarray:
        k, L = self.index_table()
        out = np.exp(2j * np.pi * np.where(k >= 0, k, 0) / L)
        out[k < 0] = 0
        return out

    @property
    def is_principal(self) -> bool:
        return not any(self.exponents)

    @property
    def parity(self) -> int:
        """0 if chi(-1) = 1, 1 if chi(-1) = -1."""
        f = self.value_frac(self.modulus - 1 if self.modulus > 1 else 0)
        return 0 if not f else 1

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple(-e for e in self.exponents))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus != self.modulus:
            raise ValueError("characters must share a modulus to multiply; induce first")
        return DirichletCharacter(
            self.modulus, tuple(a + b for a, b in zip(self.exponents, other.exponents))
        )

    def order(self) -> int:
        return math.lcm(*(n // math.gcd(e, n) for e, n in zip(self.exponents, self.group.orders))) if self.exponents else 1

    def conductor(self) -> int:
        return conductor(self)

    def is_primitive(self) -> bool:
        return is_primitive(self)

    def __repr__(self) -> str:
        return f"DirichletCharacter({self.modulus}, {list(self.exponents)})"


def principal(q: int) -> DirichletCharacter:
    return DirichletCharacter(q, (0,) * len(unit_group(q).orders))


def enumerate_characters(q: int, parity: Optional[int] = None) -> List[DirichletCharacter]:
    G = unit_group(q)
    out = []
    for exps in itertools.product(*(range(n) for n in G.orders)):
        chi = DirichletCharacter(q, exps)
        if parity is None or chi.parity == parity:
            out.append(chi)
    return out


def evaluate(chi: DirichletCharacter, d: int) -> complex:
    return chi(d)


def _local_conductor_exponent(comp: LocalComponent, exps: Sequence[int]) -> int:
    p, k = comp.p, comp.k
    if p != 2:
        (e,) = exps
        if e == 0:
            return 0
        c = 1
        while e % p ** (k - c):
            c += 1
        return c
    if k == 1:
        return 0
    if k == 2:
        return 0 if exps[0] == 0 else 2
    a, b = exps
    if b == 0:
        return 0 if a == 0 else 2
    c = 3
    while b % 2 ** (k - c):
        c += 1
    return c


def conductor(chi: DirichletCharacter) -> int:
    out, i = 1, 0
    for comp in chi.group.locals:
        m = len(comp.orders)
        out *= comp.p ** _local_conductor_exponent(comp, chi.exponents[i : i + m])
        i += m
    return out


def is_primitive(chi: DirichletCharacter) -> bool:
    return conductor(chi) == chi.modulus


def _lift_unit(g: int, f: int, q: int) -> int:
    """A unit mod q congruent to g mod f (f | q)."""
    f_full = 1
    for p, k in factorize(q):
        if f % p == 0:
            f_full *= p**k
    r, _ = crt_compose([(g % f_full if f_full > 1 else 0, f_full), (1, q // f_full)])
    return r


def _from_generator_values(q: int, vals: Sequence[Fraction]) -> DirichletCharacter:
    G = unit_group(q)
    exps = []
    for v, n in zip(vals, G.orders):
        e = v * n
        if e.denominator != 1:
            raise ValueError("values are not compatible with the generator orders")
        exps.append(int(e))
    return DirichletCharacter(q, tuple(exps))


def induce(chi: DirichletCharacter, q: int) -> DirichletCharacter:
    f = chi.modulus
    if q % f:
        raise ValueError(f"cannot induce a character mod {f} to modulus {q}: {f} does not divide {q}")
    vals = [chi.value_frac(g % f if f > 1 else 0) for g in unit_group(q).gens]
    return _from_generator_values(q, vals)


def restrict(chi: DirichletCharacter, f: int) -> DirichletCharacter:
    """The character mod f inducing chi; f must be a multiple of the conductor."""
    q = chi.modulus
    if q % f or f % conductor(chi):
        raise ValueError(f"chi mod {q} is not induced from modulus {f}")
    vals = [chi.value_frac(_lift_unit(g, f, q)) for g in unit_group(f).gens]
    return _from_generator_values(f, vals)


def primitive_part(chi: DirichletCharacter) -> DirichletCharacter:
    return restrict(chi, conductor(chi))


def gauss_sum(chi: DirichletCharacter) -> complex:
    q = chi.modulus
    d = np.arange(q)
    return complex(np.sum(chi.values() * np.exp(2j * np.pi * d / q)))


def parse_character(spec) -> DirichletCharacter:
    """Accepts 'q', 'q:e1,e2,...', 'q:quadratic', or a dict {modulus, exponents}."""
    if isinstance(spec, DirichletCharacter):
        return spec
    if isinstance(spec, dict):
        q = int(spec["modulus"])
        exps = spec.get("exponents")
        return principal(q) if exps is None else DirichletCharacter(q, tuple(exps))
    if isinstance(spec, int):
        return principal(spec)
    s = str(spec).strip()
    if ":" not in s:
        return principal(int(s))
    q_s, rest = s.split(":", 1)
    q = int(q_s)
    rest = rest.strip()
    if rest in ("quadratic", "real"):
        cands = [c for c in enumerate_characters(q) if c.order() == 2 and is_primitive(c)]
        if not cands:
            raise ValueError(f"no primitive quadratic character mod {q}")
        return cands[0]
    exps = tuple(int(x) for x in rest.split(",")) if rest else ()
    return DirichletCharacter(q, exps)


def format_character(chi: DirichletCharacter) -> str:
    return f"{chi.modulus}:" + ",".join(str(e) for e in chi.exponents)
