"""The theta kernel and its satellites A, wp, wp', F in both representations."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

from qkz.jacobi import JacobiFourierSeries, ZTaylorSeries, fourier_to_taylor, taylor_to_fourier
from qkz.modular import eisenstein, euler_product
from qkz.series.dense import DenseSeries
from qkz.series.truncated import TruncatedSeries, exp_series


def _check_order(q_order):
    if q_order < 1:
        raise ValueError("q_order must be >= 1")


@lru_cache(maxsize=32)
def theta_fourier(q_order: int) -> JacobiFourierSeries:
    """(s - 1/s) prod_{m>=1} (1 - s^2 q^m)(1 - s^-2 q^m) / (1 - q^m)^2."""
    _check_order(q_order)
    orders = (q_order, None)
    acc = DenseSeries.from_dict({(0, 1): 1, (0, -1): -1}, orders)
    for m in range(1, q_order):
        factor = DenseSeries.from_dict({(0, 0): 1, (m, 2): -1, (m, -2): -1, (2 * m, 0): 1}, orders)
        acc = acc * factor
    inv_sq = euler_product(q_order).invert() ** 2
    acc = acc * DenseSeries.from_dict({(n, 0): c for n, c in inv_sq.to_dict().items()}, orders)
    return JacobiFourierSeries(acc, 0, -1, Fraction(1, 2))


def theta_log_series(z_order: int, q_order: int, sign: int = -1, var: str = "z") -> TruncatedSeries:
    """sign * 2 sum_{k>=2 even} G_k z^k / k! as a z-series with q-series coefficients."""
    coeffs = [TruncatedSeries.zero(q_order)] * z_order
    for k in range(2, z_order, 2):
        coeffs[k] = eisenstein(k, q_order) * Fraction(2 * sign, factorial(k))
    return TruncatedSeries(coeffs, 0, z_order, var)


@lru_cache(maxsize=32)
def theta_taylor(z_order: int, q_order: int) -> ZTaylorSeries:
    """z exp(-2 sum_{k>=2} G_k z^k / k!) modulo (z^z_order, q^q_order)."""
    if z_order < 1 or q_order < 1:
        raise ValueError("orders must be >= 1")
    unit = exp_series(theta_log_series(max(z_order - 1, 1), q_order))
    t = ZTaylorSeries.from_z_series(unit.shift(1), q_order)
    return ZTaylorSeries(t.body, -1, Fraction(1, 2))


def x_over_theta(x_order: int, q_order: int, power: int = 1) -> TruncatedSeries:
    """(x / Theta(x))^power = exp(2 power sum G_k x^k / k!) as an x-series of q-series."""
    log = theta_log_series(x_order, q_order, sign=1, var="x")
    return exp_series(log * power if power != 1 else log)


def F_series(q_order: int, method: str = "divisor") -> JacobiFourierSeries:
    """F = D_tau^2 Theta / Theta.

    ``method="divisor"`` uses -sum_n sum_{d|n} (n/d)^3 (s^d - s^-d)^2 q^n;
    ``method="taylor"`` divides in the Taylor representation and converts back.
    """
    _check_order(q_order)
    if method == "divisor":
        return _F_divisor(q_order)
    if method == "taylor":
        return _F_taylor(q_order)
    raise ValueError(f"unknown method {method!r}")


@lru_cache(maxsize=32)
def _F_divisor(q_order):
    rows = {}
    for n in range(1, q_order):
        row = {}
        for d in range(1, n + 1):
            if n % d:
                continue
            w = (n // d) ** 3
            row[2 * d] = row.get(2 * d, 0) - w
            row[-2 * d] = row.get(-2 * d, 0) - w
            row[0] = row.get(0, 0) + 2 * w
        rows[n] = row
    return JacobiFourierSeries.from_rows(rows, q_order, 0, 2, 0)


def _F_taylor(q_order):
    nodes = list(range(-2 * (q_order - 1), 2 * (q_order - 1) + 1, 2))
    z_order = len(nodes) + 6
    th = theta_taylor(z_order + 1, q_order)
    ratio = th.dtau().dtau() * th.invert()
    return taylor_to_fourier(ratio.truncate(z_order=z_order), nodes).with_meta(2, 0)


@lru_cache(maxsize=32)
def _A_exact(q_order):
    # q^0: -(1 + s^2) / (2 (1 - s^2)); q^n: -sum_{d|n} (s^{2d} - s^{-2d})
    rows = {0: {0: Fraction(-1, 2), 2: Fraction(-1, 2)}}
    poly = {}
    for n in range(1, q_order):
        row = {}
        for d in range(1, n + 1):
            if n % d == 0:
                row[2 * d] = row.get(2 * d, 0) - 1
                row[-2 * d] = row.get(-2 * d, 0) + 1
        poly[n] = row
    head = JacobiFourierSeries.from_rows(rows, q_order, 1)
    tail = JacobiFourierSeries.from_rows(poly, q_order, 0)
    return (head + tail).with_meta(1, 0)


@lru_cache(maxsize=32)
def _wp_exact(q_order):
    # q^0: 1/12 + s^2/(1 - s^2)^2; q^d: sum_{k|d} k (s^{2k} - 2 + s^{-2k})
    head_num = {0: Fraction(1, 12), 2: Fraction(-2, 12) + 1, 4: Fraction(1, 12)}
    head = JacobiFourierSeries.from_rows({0: head_num}, q_order, 2)
    poly = {}
    for d in range(1, q_order):
        row = {}
        for k in range(1, d + 1):
            if d % k == 0:
                row[2 * k] = row.get(2 * k, 0) + k
                row[-2 * k] = row.get(-2 * k, 0) + k
                row[0] = row.get(0, 0) - 2 * k
        poly[d] = row
    tail = JacobiFourierSeries.from_rows(poly, q_order, 0)
    return (head + tail).with_meta(2, 0)


def A_fourier(q_order: int, s_window: int | None = None):
    """A = D_z Theta / Theta.

    Exact (with a (1 - s^2) denominator) by default; with ``s_window`` the rows
    are expanded in the region |q| < |s|^2 < 1 and returned as a dict of
    Laurent polynomials.
    """
    _check_order(q_order)
    a = _A_exact(q_order)
    return a if s_window is None else _windowed(a, s_window, q_order)


def wp_fourier(q_order: int, s_window: int | None = None):
    """Weierstrass wp in the normalization 1/12 + p/(1-p)^2 + ..."""
    _check_order(q_order)
    w = _wp_exact(q_order)
    return w if s_window is None else _windowed(w, s_window, q_order)


def wp_prime_fourier(q_order: int, s_window: int | None = None):
    """wp' = D_z wp."""
    _check_order(q_order)
    w = _wp_exact(q_order).dz().with_meta(3, 0)
    return w if s_window is None else _windowed(w, s_window, q_order)


def _windowed(series, s_window, q_order):
    need = 2 * q_order
    if s_window < need:
        raise ValueError(f"s_window must be at least {need} for q_order {q_order}")
    return series.expand_window(s_window)


# -- the x-series of Theta(x + z) / Theta(x) ---------------------------------

def translation_series(f: JacobiFourierSeries, x_order: int) -> TruncatedSeries:
    """f(x + z) = sum_k x^k / k! D_z^k f(z), an x-series with Fourier coefficients."""
    coeffs = []
    cur = f
    for k in range(x_order):
        coeffs.append(cur * Fraction(1, factorial(k)))
        cur = cur.dz()
    return TruncatedSeries(coeffs, 0, x_order, "x")


def _as_fourier_coeffs(f: TruncatedSeries) -> TruncatedSeries:
    return f.map_coefficients(lambda c: JacobiFourierSeries.from_qseries(c))


def theta_ratio_power(m: int, x_order: int, q_order: int, method: str = "translate") -> TruncatedSeries:
    """(Theta(x + z) / Theta(x))^m as an x-Laurent series (valuation -m).

    The result is known modulo x^(x_order - m).  ``method="naive"`` forms
    the ratio and raises it to the m-th power; the default builds
    x^-m (x/Theta(x))^m e^(x D_z) Theta(z)^m directly.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if x_order < m + 1:
        raise ValueError("x_order must be >= m + 1")
    th = theta_fourier(q_order)
    if method == "naive":
        num = translation_series(th, x_order)
        unit = _as_fourier_coeffs(x_over_theta(x_order, q_order))
        ratio = (num * unit).shift(-1)
        return ratio ** m
    if method != "translate":
        raise ValueError(f"unknown method {method!r}")
    unit = _as_fourier_coeffs(x_over_theta(x_order, q_order, m))
    return (translation_series(th ** m, x_order) * unit).shift(-m)


def residue(a: TruncatedSeries):
    """Coefficient of x^-1."""
    return a.coefficient(-1)


def theta_ratio_residue(m: int, q_order: int) -> JacobiFourierSeries:
    """Res_{x=0} (Theta(x+z)/Theta(x))^m computed from only the needed x-coefficients."""
    th_m = theta_fourier(q_order) ** m
    unit = x_over_theta(m, q_order, m)
    total = JacobiFourierSeries.zero(q_order)
    cur = th_m
    for k in range(m):
        c = unit.coefficient(m - 1 - k)
        total = total + cur.times_qseries(c) * Fraction(1, factorial(k))
        cur = cur.dz()
    return total


def theta_sq_delta_taylor(z_order: int, q_order: int) -> ZTaylorSeries:
    """Theta^2 Delta in the Taylor representation."""
    from qkz.modular import delta

    th = theta_taylor(z_order, q_order)
    d = ZTaylorSeries.from_qseries(delta(q_order), z_order)
    return th * th * d


def laurent_sinh(j: int, z_order: int) -> TruncatedSeries:
    """s^j - s^-j = 2 sinh(j z / 2) as a z-series."""
    coeffs = [Fraction(0)] * z_order
    for t in range(1, z_order, 2):
        coeffs[t] = 2 * Fraction(j, 2) ** t / factorial(t)
    return TruncatedSeries(coeffs, 0, z_order, "z")


__all__ = [
    "A_fourier",
    "F_series",
    "residue",
    "theta_fourier",
    "theta_ratio_power",
    "theta_ratio_residue",
    "theta_taylor",
    "translation_series",
    "wp_fourier",
    "wp_prime_fourier",
    "x_over_theta",
    "fourier_to_taylor",
    "taylor_to_fourier",
]
