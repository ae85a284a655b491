"""Right-hand sides of the density bounds for exceptional eigenvalues, the
parameter choices used to reach them, a Weyl-law comparator and the local
twist-conductor rules for squarefree level.

Every bound is reported with implied constant 1; epsilon is an explicit input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from .arith import euler_phi, factorize, is_prime, is_squarefree, q_ddot, q_dot, tau, volume
from .dirichlet import DirichletCharacter, conductor, induce, parse_character, principal

GROUP_ALIASES = {
    "gamma0": "Gamma0",
    "gamma1": "Gamma1",
    "gamma": "GammaFull",
    "gammafull": "GammaFull",
    "sl2z": "Gamma0",
}

# exponent attached to vol in each bound
VOL_COEFF = {"Gamma1": Fraction(3), "GammaFull": Fraction(8, 3), "Gamma0": Fraction(4)}


def canonical_group(name: str) -> str:
    key = name.replace("_", "").replace("(", "").replace(")", "").lower()
    if key in GROUP_ALIASES:
        return GROUP_ALIASES[key]
    if name in VOL_COEFF:
        return name
    raise ValueError(f"unknown group {name!r}; use gamma0, gamma1 or gamma")


@dataclass
class DensityParams:
    group: str
    q: int
    T: float = 1.0
    alphas: Dict[int, float] = field(default_factory=dict)
    mus: Dict[int, float] = field(default_factory=dict)
    alpha0: Optional[float] = None
    mu0: float = 0.0
    eps: float = 1e-3
    chi: Optional[DirichletCharacter] = None
    squarefree_mode: bool = False

    def __post_init__(self):
        self.group = canonical_group(self.group)
        if self.q < 1:
            raise ValueError("q must be positive")
        if self.eps <= 0:
            raise ValueError("epsilon must be positive")
        self.alphas = {int(p): float(a) for p, a in self.alphas.items()}
        self.mus = {int(p): float(m) for p, m in self.mus.items()}
        if set(self.alphas) != set(self.mus):
            raise ValueError("alphas and mus must name the same primes")
        for p, a in self.alphas.items():
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")
            if self.q % p == 0:
                raise ValueError(f"prime {p} divides the level q={self.q}")
            hi = math.sqrt(p) + 1 / math.sqrt(p)
            if not 2 < a < hi:
                raise ValueError(f"alpha_{p} = {a} outside (2, {hi:.6g})")
            if not 0 <= self.mus[p] <= 1:
                raise ValueError(f"mu_{p} = {self.mus[p]} outside [0, 1]")
        if not 0 <= self.mu0 <= 1:
            raise ValueError("mu0 outside [0, 1]")
        if self.alpha0 is not None and not 0 < self.alpha0 < 0.5:
            raise ValueError(f"alpha0 = {self.alpha0} outside (0, 1/2)")
        if self.chi is not None:
            self.chi = parse_character(self.chi)
            if self.group != "Gamma0":
                raise ValueError("a nebentypus is only meaningful for Gamma0")
            if self.q % self.chi.conductor():
                raise ValueError("conductor of chi must divide q")
        if self.squarefree_mode and (self.group != "Gamma1" or not is_squarefree(self.q)):
            raise ValueError("the squarefree improvement applies to Gamma1 with squarefree q only")

    @property
    def q_chi(self) -> int:
        return self.chi.conductor() if self.chi is not None else 1

    @property
    def vol(self) -> float:
        return volume(self.group, self.q)

    def hecke_shift(self) -> float:
        """sum_p mu_p log(alpha_p/2)/log p."""
        return sum(self.mus[p] * math.log(self.alphas[p] / 2) / math.log(p) for p in sorted(self.alphas))


@dataclass
class BoundResult:
    theorem: str
    group: str
    q: int
    value: float
    log_value: float
    vol: float
    vol_exponent: float
    T_exponent: Optional[float]
    shift: float
    branch: Optional[str] = None
    branch_factor: float = 1.0
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _vol_coeff(p: DensityParams) -> float:
    if p.squarefree_mode:
        return 4.0
    return float(VOL_COEFF[p.group])


def _min_branch(p: DensityParams, shift: float):
    """min{Qdot^{4 shift}, Qddot^{1 - 4 shift}} in log form, with the branch name."""
    qd = q_dot(p.q, p.q_chi)
    qdd = q_ddot(p.q, p.q_chi)
    a = 4 * shift * math.log(qd)
    b = (1 - 4 * shift) * math.log(qdd)
    return ("qdot", a) if a <= b else ("qddot", b)


def sarnak_rhs(p: DensityParams) -> BoundResult:
    if not p.alphas:
        raise ValueError("the Hecke-eigenvalue bound needs a nonempty prime set")
    if abs(sum(p.mus.values()) - 1) > 1e-12:
        raise ValueError(f"weights mu_p must sum to 1, got {sum(p.mus.values())}")
    if p.T < 1:
        raise ValueError("T must be at least 1")
    S = p.hecke_shift()
    v_exp = 1 - _vol_coeff(p) * S + p.eps
    t_exp = 1 - 4 * S + p.eps
    log_v = v_exp * math.log(p.vol) + t_exp * 2 * math.log(p.T)
    branch, bf = None, 0.0
    if p.group == "Gamma0":
        branch, bf = _min_branch(p, S)
        log_v += bf
    warnings = [f"p={q} exceeds T={p.T}: the bound is not uniform in the prime set here" for q in sorted(p.alphas) if q > p.T]
    if v_exp < 0:
        warnings.append("vol exponent is negative: the bound is vacuously strong")
    return BoundResult("sarnak", p.group, p.q, math.exp(log_v), log_v, p.vol, v_exp, t_exp, S, branch,
                       math.exp(bf), warnings)


def huxley_rhs(p: DensityParams) -> BoundResult:
    if abs(p.mu0 + sum(p.mus.values()) - 1) > 1e-12:
        raise ValueError("mu0 + sum mu_p must equal 1")
    if p.mu0 > 0 and p.alpha0 is None:
        raise ValueError("alpha0 is required when mu0 > 0")
    shift = p.mu0 * (p.alpha0 or 0.0) + p.hecke_shift()
    v_exp = 1 - _vol_coeff(p) * shift + p.eps
    log_v = v_exp * math.log(p.vol)
    branch, bf = None, 0.0
    if p.group == "Gamma0":
        branch, bf = _min_branch(p, shift)
        log_v += bf
    warnings = []
    if v_exp < 0:
        warnings.append("vol exponent is negative: the bound is vacuously strong")
    return BoundResult("huxley", p.group, p.q, math.exp(log_v), log_v, p.vol, v_exp, None, shift, branch,
                       math.exp(bf), warnings)


def ell_choice(theorem: str, p: DensityParams) -> dict:
    """Exponents l_p of the amplifier (and X for the Laplacian bound)."""
    if theorem not in ("sarnak", "huxley"):
        raise ValueError("theorem must be 'sarnak' or 'huxley'")
    lv = math.log(p.vol)
    qd = math.log(q_dot(p.q, p.q_chi))
    if p.group == "Gamma1":
        base = 1.5 * lv
    elif p.group == "GammaFull":
        base = 4 / 3 * lv
    else:
        base = 2 * lv - 2 * qd
    out = {}
    logs = {}
    if theorem == "sarnak":
        base += 4 * math.log(p.T)
    for pr in sorted(p.mus):
        x = p.mus[pr] * base / math.log(pr)
        logs[pr] = x
        out[pr] = max(0, math.floor(x))
    res = {"ell": out, "ell_real": logs}
    if theorem == "huxley":
        res["X"] = math.exp(p.mu0 * base)
    return res


def weyl_comparator(group: str, q: int, T: float) -> float:
    if T < 0:
        raise ValueError("T must be nonnegative")
    return volume(canonical_group(group), q) * T * T / (4 * math.pi)


# ---- twists at squarefree level -------------------------------------------------


def _cexp(w: DirichletCharacter) -> int:
    """Conductor exponent of a character of p-power modulus."""
    f = conductor(w)
    fac = factorize(w.modulus) if w.modulus > 1 else []
    if len(fac) > 1:
        raise ValueError("local characters must have prime-power modulus")
    if f == 1:
        return 0
    p, _ = fac[0]
    e = 0
    while f % p == 0:
        f //= p
        e += 1
    return e


def _local_mul(a: DirichletCharacter, b: DirichletCharacter) -> DirichletCharacter:
    M = math.lcm(a.modulus, b.modulus)
    return induce(a, M) * induce(b, M)


def twist_conductor(local_type: str, omega1, twist, omega2=None) -> int:
    """Conductor exponent of a local representation twisted by a character.

    principal_series(omega1, omega2): c(omega1 w') + c(omega2 w');
    steinberg(omega1): max{1, 2 c(omega1 w')}, omega1 unramified."""
    w1 = parse_character(omega1)
    wt = parse_character(twist)
    chars = [w1, wt] + ([parse_character(omega2)] if omega2 is not None else [])
    for w in chars:
        if _cexp(w) not in (0, 1):
            raise ValueError("conductor exponents must lie in {0, 1} at squarefree level")
    if local_type == "principal_series":
        if omega2 is None:
            raise ValueError("principal series needs two characters")
        w2 = parse_character(omega2)
        return _cexp(_local_mul(w1, wt)) + _cexp(_local_mul(w2, wt))
    if local_type == "steinberg":
        if _cexp(w1) != 0:
            raise ValueError("the Steinberg case needs an unramified omega1")
        return max(1, 2 * _cexp(_local_mul(w1, wt)))
    raise ValueError("local_type must be 'principal_series' or 'steinberg'")


def twist_count_factor(q: int) -> Fraction:
    if q < 1 or not is_squarefree(q):
        raise ValueError(f"q = {q} must be squarefree")
    return Fraction(tau(q), euler_phi(q))


def parse_prime_map(items) -> Dict[int, float]:
    """['2:2.1', '3:2.2'] or {'2': 2.1} -> {2: 2.1}."""
    if isinstance(items, dict):
        return {int(k): float(v) for k, v in items.items()}
    out = {}
    for it in items or []:
        for part in str(it).split(","):
            if not part.strip():
                continue
            k, v = part.split(":")
            out[int(k)] = float(v)
    return out
