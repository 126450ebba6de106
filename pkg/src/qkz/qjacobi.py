"""The ring R = Q[Theta, A, G2, wp, wp', G4] with its four derivations.

Elements are sparse polynomials on exponent 6-tuples.  The D_z and D_tau
images of the generators that are not fixed by definition are found by an
exact linear solve against the Fourier expansions of the generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from qkz.jacobi import JacobiFourierSeries, _times_one_minus_s2, fourier_to_taylor
from qkz.modular import QuasiModularPoly, eisenstein, express_G_high
from qkz.series.linalg import InconsistentSystem, UnderdeterminedSystem, solve_linear
from qkz.theta import A_fourier, theta_fourier, wp_fourier, wp_prime_fourier

GENERATORS = ("Theta", "A", "G2", "wp", "wp'", "G4")
GEN_WEIGHT = (-1, 1, 2, 2, 3, 4)
GEN_INDEX = (Fraction(1, 2), 0, 0, 0, 0, 0)
OPERATORS = ("D_z", "D_tau", "d/dA", "d/dG2")
OP_WEIGHT = {"D_z": 1, "D_tau": 2, "d/dA": -1, "d/dG2": -2}
RECOGNITION_MARGIN = 5


def _unit(i):
    return tuple(1 if j == i else 0 for j in range(6))


def monomial_weight(e) -> int:
    return sum(w * k for w, k in zip(GEN_WEIGHT, e))


def monomial_index(e) -> Fraction:
    return Fraction(e[0], 2)


class QJacExpr:
    """A polynomial in Theta, A, G2, wp, wp', G4 with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None, weight=None, index=None):
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != 6 or min(e) < 0:
                raise ValueError(f"bad exponent {e}")
            c = Fraction(c)
            if c:
                clean[e] = clean.get(e, 0) + c
                if not clean[e]:
                    del clean[e]
        self.terms = clean
        if weight is not None and any(monomial_weight(e) != weight for e in clean):
            raise ValueError(f"not homogeneous of weight {weight}")
        if index is not None and any(monomial_index(e) != Fraction(index) for e in clean):
            raise ValueError(f"not homogeneous of index {index}")

    @classmethod
    def generator(cls, name):
        return cls({_unit(GENERATORS.index(name)): 1})

    @classmethod
    def constant(cls, c):
        return cls({(0,) * 6: c})

    @classmethod
    def from_quasimodular(cls, f: QuasiModularPoly) -> "QJacExpr":
        """Rewrite a polynomial in G2, G4, G6 inside R (G6 through G6InR)."""
        g6 = G6InR() if any(e[2] for e in f.terms) else None
        out = QJacExpr()
        for (a, b, c), coeff in f.terms.items():
            mono = QJacExpr({(0, 0, a, 0, 0, b): coeff})
            if c:
                mono = mono * g6 ** c
            out = out + mono
        return out

    # -- grading ---------------------------------------------------------
    @property
    def weights(self):
        return {monomial_weight(e) for e in self.terms}

    @property
    def indices(self):
        return {monomial_index(e) for e in self.terms}

    @property
    def weight(self):
        w = self.weights
        if len(w) > 1:
            raise ValueError("expression is not weight-homogeneous")
        return w.pop() if w else None

    @property
    def index(self):
        i = self.indices
        if len(i) > 1:
            raise ValueError("expression is not index-homogeneous")
        return i.pop() if i else None

    def is_homogeneous(self):
        return len(self.weights) <= 1 and len(self.indices) <= 1

    def is_zero(self):
        return not self.terms

    def coefficient(self, e):
        return self.terms.get(tuple(e), Fraction(0))

    def degree_in(self, name):
        i = GENERATORS.index(name)
        return max((e[i] for e in self.terms), default=0)

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, QJacExpr):
            return other
        if isinstance(other, QuasiModularPoly):
            return QJacExpr.from_quasimodular(other)
        return QJacExpr.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return QJacExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return QJacExpr({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, (QJacExpr, QuasiModularPoly)):
            c = Fraction(other)
            return QJacExpr({e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return QJacExpr(out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / Fraction(c))

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative powers are not in R")
        out, base = QJacExpr.constant(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, QJacExpr):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def monomials(self):
        """List of (coefficient as 'p/q' string, exponent dict) pairs."""
        out = []
        for e in sorted(self.terms, reverse=True):
            powers = {GENERATORS[i]: k for i, k in enumerate(e) if k}
            out.append((str(self.terms[e]), powers))
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            names = "*".join(f"{GENERATORS[i]}^{k}" if k > 1 else GENERATORS[i]
                             for i, k in enumerate(e) if k)
            c = self.terms[e]
            parts.append(f"({c})*{names}" if names else f"({c})")
        return " + ".join(parts)


def basis_monomials(weight: int, index) -> list:
    """Exponent tuples of R with the given weight and index."""
    index = Fraction(index)
    if index < 0 or (2 * index).denominator != 1:
        return []
    a = int(2 * index)
    rest = weight + a  # b + 2c + 2d + 3e + 4f
    out = []
    if rest < 0:
        return out
    for f in range(rest // 4 + 1):
        for e in range((rest - 4 * f) // 3 + 1):
            r1 = rest - 4 * f - 3 * e
            for d in range(r1 // 2 + 1):
                for c in range((r1 - 2 * d) // 2 + 1):
                    b = r1 - 2 * d - 2 * c
                    out.append((a, b, c, d, e, f))
    return out


# -- evaluation -------------------------------------------------------------------

def _generator_series(i, q_order):
    if i == 0:
        return theta_fourier(q_order)
    if i == 1:
        return A_fourier(q_order)
    if i == 2:
        return JacobiFourierSeries.from_qseries(eisenstein(2, q_order), 2)
    if i == 3:
        return wp_fourier(q_order)
    if i == 4:
        return wp_prime_fourier(q_order)
    return JacobiFourierSeries.from_qseries(eisenstein(4, q_order), 4)


@lru_cache(maxsize=1024)
def _generator_power(i, k, q_order):
    if k == 0:
        return JacobiFourierSeries.constant(1, q_order)
    if k == 1:
        return _generator_series(i, q_order)
    half = _generator_power(i, k // 2, q_order)
    out = half * half
    return out * _generator_series(i, q_order) if k % 2 else out


@lru_cache(maxsize=4096)
def _monomial_series(e, q_order):
    out = JacobiFourierSeries.constant(1, q_order)
    for i, k in enumerate(e):
        if k:
            out = out * _generator_power(i, k, q_order)
    return out


def eval_to_fourier(expr: QJacExpr, q_order: int, s_window: int | None = None):
    """Substitute the Fourier expansions of the generators (exact poles)."""
    out = JacobiFourierSeries.zero(q_order)
    for e, c in expr.terms.items():
        out = out + _monomial_series(e, q_order) * c
    if expr.terms and expr.is_homogeneous():
        out = out.with_meta(expr.weight, expr.index)
    if s_window is None:
        return out
    return out.expand_window(s_window)


def _numerator_at(series: JacobiFourierSeries, pole: int) -> dict:
    body = series.body
    if pole > series.pole:
        body = _times_one_minus_s2(body, pole - series.pole)
    return body.to_dict()


def _match(series: JacobiFourierSeries, basis, q_order, margin):
    cols = [_monomial_series(e, q_order) for e in basis]
    pole = max([series.pole] + [c.pole for c in cols])
    target = _numerator_at(series, pole)
    col_dicts = [_numerator_at(c, pole) for c in cols]
    keys = set(target)
    for d in col_dicts:
        keys.update(d)
    keys = sorted(k for k in keys if k[0] < q_order)
    eqs = (([d.get(k, 0) for d in col_dicts], target.get(k, 0)) for k in keys)
    res = solve_linear(eqs, len(basis))
    if res.surplus < margin:
        raise UnderdeterminedSystem(f"only {res.surplus} surplus coefficients")
    return res


@dataclass(frozen=True)
class Recognition:
    expr: QJacExpr
    rank: int
    surplus: int
    q_order: int


def recognize_in_R(series: JacobiFourierSeries, weight: int, index, q_order: int | None = None,
                   margin: int = RECOGNITION_MARGIN, details: bool = False):
    """Write ``series`` as an element of R of the given weight and index.

    Raises InconsistentSystem if no element matches.  With ``q_order=None``
    the window of ``series`` is used (truncated to at most 12 rows first and
    widened if the basis is not yet separated).
    """
    basis = basis_monomials(weight, index)
    if series.is_zero():
        expr = QJacExpr()
        return Recognition(expr, 0, 0, series.q_order) if details else expr
    if not basis:
        raise InconsistentSystem(f"R has no elements of weight {weight}, index {index}")
    avail = series.q_order
    orders = [q_order] if q_order is not None else sorted({min(avail, n) for n in (6, 9, 12, avail)})
    last = None
    for n in orders:
        if n > avail:
            raise ValueError(f"series known only to q^{avail}")
        try:
            res = _match(series.truncate(n), basis, n, margin)
        except UnderdeterminedSystem as exc:
            last = exc
            continue
        expr = QJacExpr({e: c for e, c in zip(basis, res.solution)})
        if details:
            return Recognition(expr, res.rank, res.surplus, n)
        return expr
    raise last


# -- derivations ------------------------------------------------------------------

Theta = QJacExpr.generator("Theta")
A = QJacExpr.generator("A")
G2 = QJacExpr.generator("G2")
WP = QJacExpr.generator("wp")
WPP = QJacExpr.generator("wp'")
G4 = QJacExpr.generator("G4")
ONE = QJacExpr.constant(1)
ZERO = QJacExpr()


@dataclass(frozen=True)
class DerivationTable:
    """images[op][generator] -> QJacExpr."""

    images: dict
    q_order: int

    def image(self, op, gen):
        return self.images[op][gen]


def _derive_with(images_for_op, expr: QJacExpr) -> QJacExpr:
    out = {}
    for e, c in expr.terms.items():
        for i, k in enumerate(e):
            if not k:
                continue
            img = images_for_op[i]
            if img.is_zero():
                continue
            rest = list(e)
            rest[i] -= 1
            for e2, c2 in img.terms.items():
                m = tuple(a + b for a, b in zip(rest, e2))
                out[m] = out.get(m, 0) + c * k * c2
    return QJacExpr(out)


@lru_cache(maxsize=4)
def G6InR(q_order: int = 12) -> QJacExpr:
    """G6 as an element of R (weight 6, index 0)."""
    target = JacobiFourierSeries.from_qseries(eisenstein(6, q_order), 6)
    return recognize_in_R(target, 6, 0, q_order=q_order)


def _solved_image(series, weight, index, q_order):
    return recognize_in_R(series, weight, index, q_order=q_order)


@lru_cache(maxsize=4)
def build_derivation_table(q_order: int = 12, z_order: int = 10) -> DerivationTable:
    """Solve for the D_z and D_tau images and verify the commutation relations.

    ``z_order`` sets the precision of an independent Taylor-side check of every
    solved image.
    """
    gens = [_generator_series(i, q_order) for i in range(6)]
    dz = [None] * 6
    dt = [None] * 6
    dz[0] = A * Theta
    dz[2] = ZERO
    dz[3] = WPP
    dz[5] = ZERO
    for i in (1, 4):
        dz[i] = _solved_image(gens[i].dz(), GEN_WEIGHT[i] + 1, 0, q_order)
    for i in range(6):
        dt[i] = _solved_image(gens[i].dtau(), GEN_WEIGHT[i] + 2, GEN_INDEX[i], q_order)
    dA = [ZERO, ONE, ZERO, ZERO, ZERO, ZERO]
    dG2 = [ZERO, ZERO, ONE, ZERO, ZERO, ZERO]
    table = DerivationTable({"D_z": tuple(dz), "D_tau": tuple(dt), "d/dA": tuple(dA), "d/dG2": tuple(dG2)},
                            q_order)
    _check_images_taylor(table, gens, q_order, z_order)
    for i, name in enumerate(GENERATORS):
        for rel, ok in commutation_relations(QJacExpr.generator(name), table).items():
            if not ok:
                raise InconsistentSystem(f"commutation relation {rel} fails on {name}")
    return table


def _check_images_taylor(table, gens, q_order, z_order):
    qo = min(q_order, 6)
    for op in ("D_z", "D_tau"):
        for i in range(6):
            lhs = gens[i].dz() if op == "D_z" else gens[i].dtau()
            rhs = eval_to_fourier(table.images[op][i], q_order)
            a = fourier_to_taylor(lhs.truncate(qo), z_order)
            b = fourier_to_taylor(rhs.truncate(qo), z_order)
            if a != b:
                raise InconsistentSystem(f"{op} image of {GENERATORS[i]} fails the Taylor check")


def derive(expr: QJacExpr, op: str, table: DerivationTable | None = None) -> QJacExpr:
    """Apply one of D_z, D_tau, d/dA, d/dG2 by the Leibniz rule."""
    if op not in OPERATORS:
        raise ValueError(f"unknown operator {op!r}")
    if table is None:
        if op == "d/dA":
            return _derive_with(
                (ZERO, ONE, ZERO, ZERO, ZERO, ZERO), expr)
        if op == "d/dG2":
            return _derive_with((ZERO, ZERO, ONE, ZERO, ZERO, ZERO), expr)
        table = build_derivation_table()
    return _derive_with(table.images[op], expr)


def _grading(expr, kind):
    out = {}
    for e, c in expr.terms.items():
        g = monomial_weight(e) if kind == "wt" else monomial_index(e)
        out[e] = c * g
    return QJacExpr(out)


def commutation_relations(expr: QJacExpr, table: DerivationTable | None = None) -> dict:
    """Check the four commutators on ``expr``; returns {relation: bool}."""
    t = table or build_derivation_table()

    def d(x, op):
        return derive(x, op, t)

    return {
        "[d/dG2, D_tau] = -2 wt": d(d(expr, "D_tau"), "d/dG2") - d(d(expr, "d/dG2"), "D_tau") == _grading(expr, "wt") * -2,
        "[d/dA, D_z] = 2 ind": d(d(expr, "D_z"), "d/dA") - d(d(expr, "d/dA"), "D_z") == _grading(expr, "ind") * 2,
        "[d/dG2, D_z] = -2 d/dA": d(d(expr, "D_z"), "d/dG2") - d(d(expr, "d/dG2"), "D_z") == d(expr, "d/dA") * -2,
        "[d/dA, D_tau] = D_z": d(d(expr, "D_tau"), "d/dA") - d(d(expr, "d/dA"), "D_tau") == d(expr, "D_z"),
    }


# -- phi_m inside R -----------------------------------------------------------------

def G_in_R(k: int) -> QJacExpr:
    """G_k (k >= 2 even) as an element of R."""
    if k == 2:
        return G2
    if k == 4:
        return G4
    if k == 6:
        return G6InR()
    return QJacExpr.from_quasimodular(express_G_high(k))


@lru_cache(maxsize=32)
def express_phi(m: int) -> QJacExpr:
    """phi_m = sum_{j+k=m-1} c_j D^k(Theta^m)/k!, D = D_z + 2 G2 d/dA."""
    if m < 1:
        raise ValueError("express_phi needs m >= 1")
    t = build_derivation_table()
    # c_j = [x^j] exp(2m sum_{k>=4 even} G_k x^k / k!)
    g = [ZERO] * m
    for k in range(4, m, 2):
        g[k] = G_in_R(k) * Fraction(2 * m, factorial(k))
    c = [ONE]
    for n in range(1, m):
        acc = ZERO
        for j in range(1, n + 1):
            if not g[j].is_zero():
                acc = acc + g[j] * c[n - j] * j
        c.append(acc / n)
    cur = Theta ** m
    out = ZERO
    for k in range(m):
        j = m - 1 - k
        if not c[j].is_zero():
            out = out + c[j] * cur / factorial(k)
        cur = derive(cur, "D_z", t) + G2 * derive(cur, "d/dA", t) * 2
    return out


# -- Jacobi group ---------------------------------------------------------------------

@dataclass(frozen=True)
class TransformData:
    """Coefficients of a nilpotent exponential applied to a homogeneous element."""

    kind: str
    weight: int
    index: Fraction
    parameters: tuple
    terms: dict  # exponent tuple in the parameters -> QJacExpr

    def evaluate(self, *values):
        out = ZERO
        for exps, expr in self.terms.items():
            w = Fraction(1)
            for v, e in zip(values, exps):
                w *= Fraction(v) ** e
            out = out + expr * w
        return out


def jacobi_transform(expr: QJacExpr, kind: str, **params) -> TransformData:
    """Symbolic transformation data under the Jacobi group.

    ``kind="elliptic"``: exp(-lam d/dA) expr as a polynomial in lam (a symbolic
    parameter named ``lam``).  ``kind="modular"``: exp(-U d/dG2 + V d/dA) expr as a
    polynomial in U = c/(4 pi i (c tau + d)) and V = c (z/2 pi i)/(c tau + d).
    The automorphy factor (c tau + d)^k e(...) is recorded only through
    ``weight`` and ``index``; the half-integral-index character is not attached.
    """
    if not expr.is_homogeneous():
        raise ValueError("jacobi_transform needs a homogeneous element")
    w, i = expr.weight or 0, expr.index or Fraction(0)
    if kind == "elliptic":
        terms = {}
        cur, k = expr, 0
        while not cur.is_zero():
            terms[(k,)] = cur * Fraction((-1) ** k, factorial(k))
            cur = derive(cur, "d/dA")
            k += 1
        return TransformData("elliptic", w, Fraction(i), ("lam",), terms)
    if kind == "modular":
        terms = {}
        row, a = expr, 0
        while not row.is_zero():
            cur, b = row, 0
            while not cur.is_zero():
                terms[(a, b)] = cur * Fraction((-1) ** a, factorial(a) * factorial(b))
                cur = derive(cur, "d/dA")
                b += 1
            row = derive(row, "d/dG2")
            a += 1
        return TransformData("modular", w, Fraction(i), ("U", "V"), terms)
    raise ValueError(f"unknown transformation kind {kind!r}")


def apply_elliptic_shift(expr: QJacExpr, lam) -> QJacExpr:
    """exp(-lam d/dA) expr at a rational lam."""
    return jacobi_transform(expr, "elliptic").evaluate(lam)
