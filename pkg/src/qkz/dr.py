"""Assembly of the K3 double-ramification generating series from phi_m, phi_{m,n} and 1/(Theta^2 Delta)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd

from qkz.jacobi import ZTaylorSeries, fourier_to_taylor
from qkz.phi import phi_ode, phi_pair_ode
from qkz.series.ring import as_fraction
from qkz.theta import theta_sq_delta_taylor


class LatticeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    gram: tuple

    def __init__(self, gram):
        rows = tuple(tuple(int(x) for x in row) for row in gram)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("gram matrix must be square")
        if any(rows[i][j] != rows[j][i] for i in range(n) for j in range(n)):
            raise ValueError("gram matrix must be symmetric")
        object.__setattr__(self, "gram", rows)

    @property
    def rank(self):
        return len(self.gram)

    def pair(self, x, y):
        if len(x) != self.rank or len(y) != self.rank:
            raise LatticeMismatch("vector length does not match lattice rank")
        return sum(Fraction(x[i]) * self.gram[i][j] * Fraction(y[j])
                   for i in range(self.rank) for j in range(self.rank))


@dataclass(frozen=True)
class MukaiVector:
    r: Fraction
    D: tuple
    n: Fraction
    lattice: Lattice

    def __init__(self, r, D, n, lattice: Lattice):
        D = tuple(as_fraction(x) for x in D)
        if len(D) != lattice.rank:
            raise LatticeMismatch("divisor length does not match lattice rank")
        object.__setattr__(self, "r", as_fraction(r))
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "n", as_fraction(n))
        object.__setattr__(self, "lattice", lattice)
        slots = [bool(self.r), any(D), bool(self.n)]
        if sum(slots) > 1:
            raise ValueError("Mukai vector must be homogeneous; split mixed classes")

    @property
    def degree(self):
        if self.r:
            return 0
        if any(self.D):
            return 1
        if self.n:
            return 2
        return 0

    def is_zero(self):
        return not self.r and not any(self.D) and not self.n


def mukai_pairing(g1: MukaiVector, g2: MukaiVector) -> Fraction:
    """r1 n2 + r2 n1 - D1.D2."""
    if g1.lattice != g2.lattice:
        raise LatticeMismatch("Mukai vectors live on different lattices")
    return g1.r * g2.n + g2.r * g1.n - g1.lattice.pair(g1.D, g2.D)


@dataclass
class InsertionList:
    entries: list
    beta: tuple
    lattice: Lattice
    h: int = field(init=False)

    def __post_init__(self):
        self.entries = [(int(a), g) for a, g in self.entries]
        self.beta = tuple(int(x) for x in self.beta)
        if sum(a for a, _ in self.entries) != 0:
            raise ValueError("ramification profile must sum to zero")
        for a, g in self.entries:
            if a == 0 and g.degree > 0:
                raise ValueError("a_i = 0 with deg(gamma_i) > 0 makes the prefactor undefined")
        b2 = self.lattice.pair(self.beta, self.beta)
        if b2.denominator != 1 or b2 % 2:
            raise ValueError("beta^2 must be an even integer")
        self.h = int(b2) // 2 + 1
        if self.beta and gcd(*self.beta) != 1:
            warnings.warn("beta is not primitive", stacklevel=2)

    @property
    def beta_vector(self):
        return MukaiVector(0, self.beta, 0, self.lattice)

    def negated(self):
        return InsertionList([(-a, g) for a, g in self.entries], self.beta, self.lattice)


def set_partitions_le2(items):
    """All partitions of ``items`` (a list) into blocks of size 1 or 2, as (pairs, singles)."""
    if not items:
        yield [], []
        return
    first, rest = items[0], items[1:]
    for pairs, singles in set_partitions_le2(rest):
        yield pairs, [first] + singles
    for k in range(len(rest)):
        remaining = rest[:k] + rest[k + 1:]
        for pairs, singles in set_partitions_le2(remaining):
            yield [(first, rest[k])] + pairs, singles


@lru_cache(maxsize=16)
def kkv_kernel(z_order: int, q_order: int) -> ZTaylorSeries:
    """1/(Theta^2 Delta) in the Taylor representation: z^-2 q^-1 (1 + ...)."""
    return theta_sq_delta_taylor(z_order + 4, q_order + 2).invert()


@lru_cache(maxsize=256)
def _phi_taylor(m, z_order, q_order):
    return fourier_to_taylor(phi_ode(m, q_order), z_order)


@lru_cache(maxsize=256)
def _pair_taylor(m, n, z_order, q_order):
    return fourier_to_taylor(phi_pair_ode(m, n, q_order), z_order)


def dr_rhs_series(ins: InsertionList, z_order: int, q_window: int) -> ZTaylorSeries:
    """Prefactor times the partition sum of (Theta^2 Delta)^-1 prod (pairings) phi's.

    The result is known for z-exponents below ``z_order`` and q-exponents
    below ``q_window``.
    """
    kernel = kkv_kernel(z_order, q_window)
    zo = z_order + 2
    prefactor = Fraction(1)
    for a, g in ins.entries:
        prefactor *= Fraction(a) ** g.degree
    beta = ins.beta_vector
    idx = list(range(len(ins.entries)))
    total = None
    for pairs, singles in set_partitions_le2(idx):
        coeff = Fraction(1)
        for i, j in pairs:
            coeff *= mukai_pairing(ins.entries[i][1], ins.entries[j][1])
        for c in singles:
            coeff *= mukai_pairing(ins.entries[c][1], beta)
        if not coeff:
            continue
        term = kernel * coeff
        for i, j in pairs:
            term = term * _pair_taylor(ins.entries[i][0], ins.entries[j][0], zo, q_window + 1)
        for c in singles:
            term = term * _phi_taylor(ins.entries[c][0], zo, q_window + 1)
        total = term if total is None else total + term
    if total is None:
        return kernel * 0
    return total * (1 / prefactor)


def extract_gw(series: ZTaylorSeries, h: int, n: int) -> dict:
    """{g: <DR_g(a); gamma>} from the q^(h-1) coefficient, stripping (-1)^(g+n)."""
    if h < 0:
        raise ValueError("h must be >= 0")
    qexp = h - 1
    if qexp >= series.q_order:
        raise ValueError(f"q-window too small for h = {h}")
    out = {}
    for k in range(series.z_valuation if not series.is_zero() else 0, series.z_order):
        if (k - n) % 2:
            continue
        g = (k + 2 - n) // 2
        if g < 0:
            continue
        c = series.coefficient(k, qexp)
        if c:
            out[g] = c * (-1) ** (g + n)
    return out


def kkv(h_max: int, z_order: int) -> dict:
    """{h: {g: <lambda_g>_h}} from 1/(Theta^2 Delta) for h <= h_max and 2g - 2 < z_order - 2."""
    kernel = kkv_kernel(z_order, h_max + 1)
    out = {}
    for h in range(h_max + 1):
        row = {}
        for k in range(-2, z_order - 2, 2):
            c = kernel.coefficient(k, h - 1)
            row[(k + 2) // 2] = c
        out[h] = row
    return out


# -- JSON -------------------------------------------------------------------------------

def insertions_from_json(data: dict) -> InsertionList:
    lattice = Lattice(data["gram"])
    entries = []
    for item in data.get("insertions", []):
        gam = item["gamma"]
        entries.append((int(item["a"]), MukaiVector(gam.get("r", 0), gam.get("D", [0] * lattice.rank),
                                                     gam.get("n", 0), lattice)))
    return InsertionList(entries, data["beta"], lattice)


def dr_from_json(data: dict) -> dict:
    """Evaluate the JSON schema; returns {h: {genus: 'p/q'}} (strings keyed for JSON)."""
    ins = insertions_from_json(data)
    z_order = int(data.get("z_order", 10))
    h_max = int(data.get("h_max", ins.h))
    series = dr_rhs_series(ins, z_order, h_max + 1)
    out = {}
    for h in range(h_max + 1):
        vals = extract_gw(series, h, len(ins.entries))
        out[str(h)] = {str(g): str(v) for g, v in sorted(vals.items())}
    return {"h_beta": ins.h, "series": out}
